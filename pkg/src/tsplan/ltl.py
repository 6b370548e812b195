"""LTL abstract syntax, concrete-syntax parser, NNF rewriting, and lasso-word semantics.

Atoms name waypoint occupancy: ``r@45`` means "robot r is at waypoint 45".
The reserved atom ``obs`` carries no robot/waypoint pair.  Formulas are
immutable trees; equality and hashing are structural.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class AtomId:
    """Identity of an atomic proposition: a (robot, waypoint) pair or the reserved obstacle atom."""

    robot: str
    waypoint: int
    is_obs: bool = False

    @staticmethod
    def obs() -> "AtomId":
        return AtomId("", 0, True)

    def text(self) -> str:
        if self.is_obs:
            return "obs"
        return "%s@%d" % (self.robot, self.waypoint)

    def __repr__(self):
        return self.text()


OBS = AtomId.obs()


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __repr__(self):
        return fmt(self)


@dataclass(frozen=True, repr=False)
class TrueF(Formula):
    __slots__ = ()


@dataclass(frozen=True, repr=False)
class FalseF(Formula):
    __slots__ = ()


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    __slots__ = ("aid",)
    aid: AtomId


@dataclass(frozen=True, repr=False)
class Not(Formula):
    __slots__ = ("child",)
    child: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    __slots__ = ("left", "right")
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Or(Formula):
    __slots__ = ("left", "right")
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    __slots__ = ("left", "right")
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Next(Formula):
    __slots__ = ("child",)
    child: Formula


@dataclass(frozen=True, repr=False)
class Until(Formula):
    __slots__ = ("left", "right")
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Release(Formula):
    __slots__ = ("left", "right")
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Eventually(Formula):
    __slots__ = ("child",)
    child: Formula


@dataclass(frozen=True, repr=False)
class Always(Formula):
    __slots__ = ("child",)
    child: Formula


TRUE = TrueF()
FALSE = FalseF()

_UNARY = {Not: "!", Next: "X", Eventually: "F", Always: "G"}
_BINARY = {And: "&", Or: "|", Implies: "->", Until: "U", Release: "R"}


def fmt(f: Formula) -> str:
    """Canonical printer: fully parenthesized; parse(fmt(f)) == f."""
    t = type(f)
    if t is TrueF:
        return "true"
    if t is FalseF:
        return "false"
    if t is Atom:
        return f.aid.text()
    if t in _UNARY:
        return "(%s %s)" % (_UNARY[t], fmt(f.child))
    return "(%s %s %s)" % (fmt(f.left), _BINARY[t], fmt(f.right))


def atoms(f: Formula) -> frozenset[AtomId]:
    """All atomic propositions occurring in f."""
    out: set[AtomId] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        t = type(g)
        if t is Atom:
            out.add(g.aid)
        elif t in (Not, Next, Eventually, Always):
            stack.append(g.child)
        elif t in (And, Or, Implies, Until, Release):
            stack.append(g.left)
            stack.append(g.right)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class LtlSyntaxError(ValueError):
    """Syntax error with 1-based line/column position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__("%s (line %d, column %d)" % (message, line, col))
        self.line = line
        self.col = col


_KEYWORDS = {"X", "U", "R", "F", "G", "true", "false", "obs"}


def _tokenize(text: str):
    tokens = []  # (kind, value, line, col)
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if c == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(("->", "->", line, start_col))
            i += 2
            col += 2
            continue
        if c in "!&|()":
            tokens.append((c, c, line, start_col))
            i += 1
            col += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            length = j - i
            if j < n and text[j] == "@":
                j += 1
                k = j
                while k < n and text[k].isdigit():
                    k += 1
                if k == j:
                    raise LtlSyntaxError("expected waypoint index after '@'", line, start_col + length + 1)
                tokens.append(("atom", (word, int(text[j:k])), line, start_col))
                col += k - i
                i = k
                continue
            if word in _KEYWORDS:
                tokens.append((word, word, line, start_col))
            else:
                raise LtlSyntaxError(
                    "unknown operator or bare name %r (atoms are written name@index)" % word,
                    line, start_col)
            i = j
            col += length
            continue
        raise LtlSyntaxError("unexpected character %r" % c, line, start_col)
    tokens.append(("eof", None, line, col))
    return tokens


class _Parser:
    """Recursive descent over the grammar:

    implies := or ('->' implies)?
    or      := and ('|' and)*
    and     := until ('&' until)*
    until   := unary (('U'|'R') until)?
    unary   := ('!'|'X'|'F'|'G') unary | primary
    primary := 'true' | 'false' | 'obs' | name@index | '(' implies ')'

    Unary operators bind tightest, then U/R (right-associative), then
    '&', '|', '->' in decreasing binding strength.
    """

    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            raise LtlSyntaxError("expected %r, found %r" % (kind, tok[0]), tok[2], tok[3])
        return tok

    def parse(self) -> Formula:
        f = self.implies()
        tok = self.peek()
        if tok[0] != "eof":
            raise LtlSyntaxError("unexpected trailing input %r" % tok[0], tok[2], tok[3])
        return f

    def implies(self) -> Formula:
        left = self.disjunct()
        if self.peek()[0] == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disjunct(self) -> Formula:
        f = self.conjunct()
        while self.peek()[0] == "|":
            self.take()
            f = Or(f, self.conjunct())
        return f

    def conjunct(self) -> Formula:
        f = self.until()
        while self.peek()[0] == "&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        kind = self.peek()[0]
        if kind == "U":
            self.take()
            return Until(left, self.until())
        if kind == "R":
            self.take()
            return Release(left, self.until())
        return left

    def unary(self) -> Formula:
        kind, _, line, col = self.peek()
        if kind == "!":
            self.take()
            return Not(self.unary())
        if kind == "X":
            self.take()
            return Next(self.unary())
        if kind == "F":
            self.take()
            return Eventually(self.unary())
        if kind == "G":
            self.take()
            return Always(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, value, line, col = self.take()
        if kind == "true":
            return TRUE
        if kind == "false":
            return FALSE
        if kind == "obs":
            return Atom(OBS)
        if kind == "atom":
            return Atom(AtomId(value[0], value[1]))
        if kind == "(":
            f = self.implies()
            self.expect(")")
            return f
        raise LtlSyntaxError("expected a formula, found %r" % kind, line, col)


def parse(text: str) -> Formula:
    """Parse a formula from concrete syntax (operators ``! & | -> X U R F G``)."""
    return _Parser(_tokenize(text)).parse()


def load_task(path) -> Formula:
    """Read a task file: UTF-8, '#' comments, one formula."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------

def to_nnf(f: Formula) -> Formula:
    """Rewrite to NNF: negation only on atoms, no Implies/Eventually/Always.

    F/G are expanded through their Until/Release forms, a -> b through !a | b.
    """
    t = type(f)
    if t in (TrueF, FalseF, Atom):
        return f
    if t is And:
        return And(to_nnf(f.left), to_nnf(f.right))
    if t is Or:
        return Or(to_nnf(f.left), to_nnf(f.right))
    if t is Implies:
        return Or(to_nnf(Not(f.left)), to_nnf(f.right))
    if t is Next:
        return Next(to_nnf(f.child))
    if t is Until:
        return Until(to_nnf(f.left), to_nnf(f.right))
    if t is Release:
        return Release(to_nnf(f.left), to_nnf(f.right))
    if t is Eventually:
        return Until(TRUE, to_nnf(f.child))
    if t is Always:
        return Release(FALSE, to_nnf(f.child))
    # Not: push inward by duality.
    g = f.child
    tg = type(g)
    if tg is TrueF:
        return FALSE
    if tg is FalseF:
        return TRUE
    if tg is Atom:
        return f
    if tg is Not:
        return to_nnf(g.child)
    if tg is And:
        return Or(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if tg is Or:
        return And(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if tg is Implies:
        return And(to_nnf(g.left), to_nnf(Not(g.right)))
    if tg is Next:
        return Next(to_nnf(Not(g.child)))
    if tg is Until:
        return Release(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if tg is Release:
        return Until(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if tg is Eventually:
        return Release(FALSE, to_nnf(Not(g.child)))
    if tg is Always:
        return Until(TRUE, to_nnf(Not(g.child)))
    raise TypeError("unknown formula node %r" % tg)


def is_nnf(f: Formula) -> bool:
    t = type(f)
    if t in (TrueF, FalseF, Atom):
        return True
    if t is Not:
        return type(f.child) is Atom
    if t in (And, Or, Until, Release):
        return is_nnf(f.left) and is_nnf(f.right)
    if t is Next:
        return is_nnf(f.child)
    return False


# ---------------------------------------------------------------------------
# Lasso words and semantics
# ---------------------------------------------------------------------------

Letter = frozenset


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word prefix . period^omega; letters are sets of true atoms."""

    prefix: tuple
    period: tuple

    def __post_init__(self):
        if len(self.period) < 1:
            raise ValueError("period must contain at least one letter")

    @staticmethod
    def of(prefix, period) -> "LassoWord":
        return LassoWord(tuple(frozenset(l) for l in prefix),
                         tuple(frozenset(l) for l in period))

    def letters(self):
        return self.prefix + self.period

    def unrolled(self) -> "LassoWord":
        """Equivalent word with the period appended once to the prefix."""
        return LassoWord(self.prefix + self.period, self.period)


def eval_lasso(f: Formula, w: LassoWord) -> bool:
    """Decide prefix . period^omega |= f under standard LTL semantics.

    Truth vectors are computed per subformula over the positions
    0 .. |prefix|+|period|-1 whose successor wraps from the last position
    back to the start of the period; Until/Release are resolved as
    least/greatest fixpoints on that finite structure.  Atoms absent from
    a letter read as false.
    """
    letters = w.letters()
    T = len(letters)
    lp = len(w.prefix)
    succ = [t + 1 for t in range(T)]
    succ[T - 1] = lp

    cache: dict[Formula, list[bool]] = {}

    def vec(g: Formula) -> list[bool]:
        got = cache.get(g)
        if got is not None:
            return got
        t = type(g)
        if t is TrueF:
            v = [True] * T
        elif t is FalseF:
            v = [False] * T
        elif t is Atom:
            v = [g.aid in letters[k] for k in range(T)]
        elif t is Not:
            v = [not x for x in vec(g.child)]
        elif t is And:
            a, b = vec(g.left), vec(g.right)
            v = [a[k] and b[k] for k in range(T)]
        elif t is Or:
            a, b = vec(g.left), vec(g.right)
            v = [a[k] or b[k] for k in range(T)]
        elif t is Implies:
            a, b = vec(g.left), vec(g.right)
            v = [(not a[k]) or b[k] for k in range(T)]
        elif t is Next:
            c = vec(g.child)
            v = [c[succ[k]] for k in range(T)]
        elif t is Eventually:
            v = _lfp([True] * T, vec(g.child), succ)
        elif t is Always:
            v = _gfp([False] * T, vec(g.child), succ)
        elif t is Until:
            v = _lfp(vec(g.left), vec(g.right), succ)
        elif t is Release:
            v = _gfp(vec(g.left), vec(g.right), succ)
        else:
            raise TypeError("unknown formula node %r" % t)
        cache[g] = v
        return v

    return vec(f)[0]


def _lfp(a, b, succ):
    # least fixpoint of v = b | (a & X v)  (Until)
    T = len(succ)
    v = list(b)
    changed = True
    while changed:
        changed = False
        for k in range(T - 1, -1, -1):
            if not v[k] and a[k] and v[succ[k]]:
                v[k] = True
                changed = True
    return v


def _gfp(a, b, succ):
    # greatest fixpoint of v = b & (a | X v)  (Release)
    T = len(succ)
    v = [True] * T
    changed = True
    while changed:
        changed = False
        for k in range(T - 1, -1, -1):
            new = b[k] and (a[k] or v[succ[k]])
            if v[k] and not new:
                v[k] = False
                changed = True
    return v

"""Nondeterministic Buchi automata: LTL translation, lasso membership, emptiness.

The translator follows the classic tableau route: the NNF formula is read
as a very weak alternating automaton whose transition function is expanded
set-wise into a generalized automaton with one (transition-based)
acceptance condition per Until subformula, which is then degeneralized
with the usual acceptance counter.  Guards are conjunctions of atom
literals, never enumerated letters, so the alphabet 2^AP stays implicit.

Redundant transitions (one guard implying another with weaker obligations)
and states with identical behaviour are folded during construction; no
simulation-based minimization is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ltl import (
    Atom, AtomId, FalseF, Formula, LassoWord, Next, Not, Or, And, Release,
    TrueF, Until, fmt, is_nnf,
)


@dataclass(frozen=True)
class Guard:
    """Conjunction of atom literals; the empty conjunction is `true`."""

    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def conj(self, other: "Guard"):
        """Conjoin two guards; None if the result is contradictory."""
        pos = self.pos | other.pos
        neg = self.neg | other.neg
        if pos & neg:
            return None
        return Guard(pos, neg)

    def implies(self, other: "Guard") -> bool:
        return other.pos <= self.pos and other.neg <= self.neg

    def satisfied_by(self, letter) -> bool:
        return self.pos <= letter and not (self.neg & letter)

    def atoms(self) -> frozenset:
        return self.pos | self.neg

    def text(self) -> str:
        if not self.pos and not self.neg:
            return "true"
        lits = [a.text() for a in self.pos] + ["!" + a.text() for a in self.neg]
        return " & ".join(sorted(lits))

    def __repr__(self):
        return self.text()


TOP = Guard()


def guard_from_text(text: str) -> Guard:
    from .ltl import parse
    text = text.strip()
    if text == "true":
        return Guard()
    pos, neg = set(), set()
    for lit in text.split("&"):
        lit = lit.strip()
        target = neg if lit.startswith("!") else pos
        f = parse(lit.lstrip("!").strip())
        target.add(f.aid)
    if pos & neg:
        raise ValueError("contradictory guard %r" % text)
    return Guard(frozenset(pos), frozenset(neg))


@dataclass
class Nba:
    """NBA over 2^AP with dense integer state ids and literal-conjunction guards."""

    n: int
    initial: frozenset
    accepting: frozenset
    transitions: tuple
    universe: frozenset

    def __post_init__(self):
        self._by_letter: dict = {}
        self._succ: list | None = None

    def successors(self):
        if self._succ is None:
            succ = [[] for _ in range(self.n)]
            for src, g, dst in self.transitions:
                succ[src].append((g, dst))
            self._succ = succ
        return self._succ

    def edges_for_letter(self, letter):
        """Transitions enabled by a letter, cached per distinct letter."""
        got = self._by_letter.get(letter)
        if got is None:
            got = [(s, d) for s, g, d in self.transitions if g.satisfied_by(letter)]
            self._by_letter[letter] = got
        return got

    def to_text(self) -> str:
        lines = ["states: %d" % self.n,
                 "initial: %s" % ",".join(str(i) for i in sorted(self.initial)),
                 "accepting: %s" % ",".join(str(i) for i in sorted(self.accepting))]
        rows = sorted((s, d, g.text()) for s, g, d in self.transitions)
        lines += ["%d -> %d : %s" % r for r in rows]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Nba":
        n = 0
        initial: frozenset = frozenset()
        accepting: frozenset = frozenset()
        trans = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("states:"):
                n = int(line.split(":", 1)[1])
            elif line.startswith("initial:"):
                body = line.split(":", 1)[1].strip()
                initial = frozenset(int(x) for x in body.split(",") if x.strip())
            elif line.startswith("accepting:"):
                body = line.split(":", 1)[1].strip()
                accepting = frozenset(int(x) for x in body.split(",") if x.strip())
            else:
                head, guard = line.split(":", 1)
                src, dst = head.split("->")
                trans.append((int(src), guard_from_text(guard), int(dst)))
        universe = frozenset().union(*(g.atoms() for _, g, _ in trans)) if trans else frozenset()
        bad = [t for t in trans if t[0] >= n or t[2] >= n]
        if bad or any(i >= n for i in initial | accepting):
            raise ValueError("automaton references states outside 0..%d" % (n - 1))
        return Nba(n, initial, accepting, tuple(trans), universe)


# ---------------------------------------------------------------------------
# Lasso membership and emptiness
# ---------------------------------------------------------------------------

def _lasso_succ(word: LassoWord):
    letters = word.letters()
    T = len(letters)
    succ = list(range(1, T + 1))
    succ[T - 1] = len(word.prefix)
    return letters, succ


def accepts_lasso(b: Nba, w: LassoWord) -> bool:
    """True iff some run over prefix . period^omega visits accepting states infinitely often.

    Decided on the finite product of the lasso structure with the automaton:
    a run is accepting iff the product has a reachable cycle through an
    accepting state.  Atoms outside the automaton's universe are ignored.
    """
    letters, succ = _lasso_succ(w)
    T = len(letters)
    n = b.n
    edges = [b.edges_for_letter(letters[t]) for t in range(T)]
    # adjacency of enabled NBA moves, keyed by position
    adj = [dict() for _ in range(T)]
    for t in range(T):
        byq = adj[t]
        for s, d in edges[t]:
            byq.setdefault(s, []).append(d)

    start = [q0 for q0 in b.initial]
    seen = set((0, q) for q in start)
    stack = [(0, q) for q in start]
    while stack:
        t, q = stack.pop()
        nt = succ[t]
        for d in adj[t].get(q, ()):
            if (nt, d) not in seen:
                seen.add((nt, d))
                stack.append((nt, d))
    if not seen:
        return False
    # Tarjan over the reachable product; accepting iff some cycle holds an accepting state.
    index: dict = {}
    low: dict = {}
    onstack: set = set()
    order = [0]
    sstack: list = []

    def neighbors(node):
        t, q = node
        nt = succ[t]
        return [(nt, d) for d in adj[t].get(q, ()) if (nt, d) in seen]

    for root in sorted(seen):
        if root in index:
            continue
        work = [(root, iter(neighbors(root)))]
        index[root] = low[root] = order[0]
        order[0] += 1
        sstack.append(root)
        onstack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = order[0]
                    order[0] += 1
                    sstack.append(nxt)
                    onstack.add(nxt)
                    work.append((nxt, iter(neighbors(nxt))))
                    advanced = True
                    break
                if nxt in onstack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    m = sstack.pop()
                    onstack.discard(m)
                    comp.append(m)
                    if m == node:
                        break
                if len(comp) > 1:
                    if any(q in b.accepting for _, q in comp):
                        return True
                else:
                    t, q = comp[0]
                    if q in b.accepting and succ[t] == t and q in adj[t].get(q, ()):
                        return True
    return False


def is_empty(b: Nba):
    """Emptiness check; returns (verdict, witness).

    verdict is True iff no accepting lasso exists; otherwise a LassoWord
    witness with accepts_lasso(b, witness) == True is returned, built by
    realizing each guard along a path-plus-cycle with its positive atoms.
    """
    succ = [[] for _ in range(b.n)]
    for s, g, d in b.transitions:
        if not (g.pos & g.neg):
            succ[s].append((g, d))
    # reachability from initial states
    seen = set(b.initial)
    parent: dict = {q: None for q in b.initial}
    queue = sorted(b.initial)
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        for g, d in succ[u]:
            if d not in seen:
                seen.add(d)
                parent[d] = (u, g)
                queue.append(d)

    scc_id = _scc(b.n, succ)
    scc_size: dict = {}
    for q in range(b.n):
        scc_size[scc_id[q]] = scc_size.get(scc_id[q], 0) + 1

    for f in sorted(b.accepting):
        if f not in seen:
            continue
        cyclic = scc_size[scc_id[f]] > 1 or any(d == f for _, d in succ[f])
        if not cyclic:
            continue
        prefix = _guard_path(parent, f)
        period = _cycle_guards(succ, scc_id, f)
        witness = LassoWord(tuple(g.pos for g in prefix), tuple(g.pos for g in period))
        return (False, witness)
    return (True, None)


def _guard_path(parent, target):
    guards = []
    node = target
    while parent[node] is not None:
        u, g = parent[node]
        guards.append(g)
        node = u
    guards.reverse()
    return guards


def _cycle_guards(succ, scc_id, f):
    # BFS from f back to f staying inside its SCC; >= 1 edge.
    par: dict = {}
    queue = []
    for g, d in succ[f]:
        if scc_id[d] == scc_id[f] and d not in par:
            par[d] = (f, g)
            if d == f:
                return [g]
            queue.append(d)
    qi = 0
    while qi < len(queue):
        u = queue[qi]
        qi += 1
        for g, d in succ[u]:
            if scc_id[d] != scc_id[f]:
                continue
            if d == f:
                guards = [g]
                node = u
                while node != f:
                    pu, pg = par[node]
                    guards.append(pg)
                    node = pu
                guards.reverse()
                return guards
            if d not in par:
                par[d] = (u, g)
                queue.append(d)
    raise AssertionError("cyclic accepting state without a recoverable cycle")


def _scc(n, succ):
    """Iterative Tarjan; returns component id per node."""
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    onstack = [False] * n
    sstack: list = []
    counter = [0]
    ncomp = [0]
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                sstack.append(node)
                onstack[node] = True
            advanced = False
            edges = succ[node]
            while pi < len(edges):
                d = edges[pi][1]
                pi += 1
                if index[d] == -1:
                    work[-1] = (node, pi)
                    work.append((d, 0))
                    advanced = True
                    break
                if onstack[d]:
                    low[node] = min(low[node], index[d])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[node])
            if low[node] == index[node]:
                while True:
                    m = sstack.pop()
                    onstack[m] = False
                    comp[m] = ncomp[0]
                    if m == node:
                        break
                ncomp[0] += 1
    return comp


# ---------------------------------------------------------------------------
# LTL -> NBA translation
# ---------------------------------------------------------------------------

def _key(f: Formula) -> str:
    return fmt(f)


def _bar(f: Formula):
    """Disjunctive decomposition into sets of conjoined obligations."""
    t = type(f)
    if t is And:
        return [l | r for l in _bar(f.left) for r in _bar(f.right)]
    if t is Or:
        return _bar(f.left) + _bar(f.right)
    return [frozenset((f,))]


class _Translator:
    def __init__(self, f: Formula):
        if not is_nnf(f):
            raise ValueError("translate expects an NNF formula")
        self.formula = f
        self.delta_cache: dict = {}

    # -- alternating transition function --------------------------------
    def delta(self, f: Formula):
        got = self.delta_cache.get(f)
        if got is not None:
            return got
        t = type(f)
        if t is TrueF:
            alts = [(TOP, frozenset())]
        elif t is FalseF:
            alts = []
        elif t is Atom:
            alts = [(Guard(pos=frozenset((f.aid,))), frozenset())]
        elif t is Not:
            alts = [(Guard(neg=frozenset((f.child.aid,))), frozenset())]
        elif t is Next:
            alts = [(TOP, e) for e in _bar(f.child)]
        elif t is Or:
            alts = self.delta(f.left) + self.delta(f.right)
        elif t is And:
            alts = self._product(self.delta(f.left), self.delta(f.right))
        elif t is Until:
            alts = self.delta(f.right) + self._product(
                self.delta(f.left), [(TOP, frozenset((f,)))])
        elif t is Release:
            alts = self._product(
                self.delta(f.right),
                self.delta(f.left) + [(TOP, frozenset((f,)))])
        else:
            raise TypeError("not an NNF node: %r" % t)
        alts = _dedupe(alts)
        self.delta_cache[f] = alts
        return alts

    @staticmethod
    def _product(a, b):
        out = []
        for g1, e1 in a:
            for g2, e2 in b:
                g = g1.conj(g2)
                if g is not None:
                    out.append((g, e1 | e2))
        return out

    # -- generalized automaton over obligation sets ---------------------
    def build(self):
        phi = self.formula
        init_sets = sorted(set(_bar(phi)), key=lambda e: sorted(map(_key, e)))
        # Until subformulas drive the acceptance conditions.
        untils = sorted({g for g in _subformulas(phi) if type(g) is Until}, key=_key)
        fulfil_alts = {u: self.delta(u.right) for u in untils}

        states: dict = {}
        order: list = []
        for s in init_sets:
            if s not in states:
                states[s] = len(order)
                order.append(s)
        trans: list = []  # (src_id, guard, dst_id, acc frozenset of until indexes)
        wi = 0
        while wi < len(order):
            src = order[wi]
            wi += 1
            alts = [(TOP, frozenset())]
            for g in sorted(src, key=_key):
                alts = self._product(alts, self.delta(g))
            rows = []
            for guard, e in _dedupe(alts):
                acc = frozenset(
                    i for i, u in enumerate(untils)
                    if u not in e or any(
                        guard.implies(beta) and e2 <= e
                        for beta, e2 in fulfil_alts[u]))
                rows.append((guard, e, acc))
            rows = _prune_dominated(rows)
            for guard, e, acc in rows:
                if e not in states:
                    states[e] = len(order)
                    order.append(e)
                trans.append((states[src], guard, states[e], acc))

        gba = _Generalized(
            n=len(order),
            initial=frozenset(states[s] for s in init_sets),
            n_sets=len(untils),
            transitions=tuple(trans),
        )
        return _merge_gba_states(gba)


def _subformulas(f: Formula):
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in out:
            continue
        out.add(g)
        t = type(g)
        if t in (Not, Next):
            stack.append(g.child)
        elif t in (And, Or, Until, Release):
            stack.append(g.left)
            stack.append(g.right)
    return out


def _dedupe(alts):
    seen = set()
    out = []
    for g, e in alts:
        key = (g, e)
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def _prune_dominated(rows):
    """Drop (guard, obligations, acc) rows subsumed by a laxer, stronger row."""
    out = []
    for i, (g, e, a) in enumerate(rows):
        dominated = False
        for j, (g2, e2, a2) in enumerate(rows):
            if i == j:
                continue
            if g.implies(g2) and e2 <= e and a <= a2:
                if (g2, e2, a2) == (g, e, a) and j > i:
                    continue  # exact duplicate: keep the first
                dominated = True
                break
        if not dominated:
            out.append((g, e, a))
    return out


@dataclass
class _Generalized:
    """Generalized automaton with transition-based acceptance sets."""

    n: int
    initial: frozenset
    n_sets: int
    transitions: tuple  # (src, Guard, dst, frozenset of satisfied set indexes)

    def accepts_lasso(self, w: LassoWord) -> bool:
        """Reachable product cycle whose edges jointly cover every acceptance set."""
        letters, succ = _lasso_succ(w)
        T = len(letters)
        edges = []
        for t in range(T):
            enabled = [(s, d, a) for s, g, d, a in self.transitions
                       if g.satisfied_by(letters[t])]
            edges.append(enabled)
        adj = [dict() for _ in range(T)]
        for t in range(T):
            for s, d, a in edges[t]:
                adj[t].setdefault(s, []).append((d, a))
        seen = set((0, q) for q in self.initial)
        stack = list(seen)
        while stack:
            t, q = stack.pop()
            for d, _ in adj[t].get(q, ()):
                node = (succ[t], d)
                if node not in seen:
                    seen.add(node)
                    stack.append(node)
        nodes = sorted(seen)
        idx = {v: i for i, v in enumerate(nodes)}
        succ_lists = [[] for _ in nodes]
        acc_lists = [[] for _ in nodes]
        for t, q in nodes:
            i = idx[(t, q)]
            for d, a in adj[t].get(q, ()):
                node = (succ[t], d)
                if node in idx:
                    succ_lists[i].append((None, idx[node]))
                    acc_lists[i].append(a)
        comp = _scc(len(nodes), succ_lists)
        need = frozenset(range(self.n_sets))
        covered: dict = {}
        for i in range(len(nodes)):
            for (_, j), a in zip(succ_lists[i], acc_lists[i]):
                if comp[i] == comp[j]:
                    covered.setdefault(comp[i], set()).update(a)
                    covered[comp[i]].add(-1)  # marks a real internal edge
        for c, sets in covered.items():
            if need <= sets:
                return True
        return False


def _merge_gba_states(gba: _Generalized) -> _Generalized:
    """Iteratively merge states with identical outgoing rows."""
    n = gba.n
    trans = list(gba.transitions)
    initial = set(gba.initial)
    while True:
        rows_of: dict = {}
        for q in range(n):
            rows_of[q] = frozenset(
                (g, d, a) for s, g, d, a in trans if s == q)
        sig_to_rep: dict = {}
        remap = {}
        for q in range(n):
            sig = rows_of[q]
            if sig in sig_to_rep:
                remap[q] = sig_to_rep[sig]
            else:
                sig_to_rep[sig] = q
                remap[q] = q
        if all(remap[q] == q for q in range(n)):
            break
        keep = sorted(set(remap.values()))
        newid = {q: i for i, q in enumerate(keep)}
        trans = sorted({(newid[remap[s]], g, newid[remap[d]], a)
                        for s, g, d, a in trans},
                       key=lambda t: (t[0], t[2], t[1].text()))
        initial = {newid[remap[q]] for q in initial}
        n = len(keep)
    return _Generalized(n, frozenset(initial), gba.n_sets, tuple(trans))


def degeneralize(gba: _Generalized) -> Nba:
    """Counter-based degeneralization of a transition-based generalized automaton.

    Level j in 0..r counts acceptance sets already witnessed in order; the
    counter jumps over every consecutively satisfied set, level r is
    accepting and resets.
    """
    r = gba.n_sets
    by_src = [[] for _ in range(gba.n)]
    for s, g, d, a in gba.transitions:
        by_src[s].append((g, d, a))

    states: dict = {}
    order: list = []

    def intern(node):
        if node not in states:
            states[node] = len(order)
            order.append(node)
        return states[node]

    for q in sorted(gba.initial):
        intern((q, 0))
    trans = []
    wi = 0
    while wi < len(order):
        q, j = order[wi]
        wi += 1
        base = 0 if j == r else j
        for g, d, a in by_src[q]:
            k = base
            while k < r and k in a:
                k += 1
            trans.append((states[(q, j)], g, intern((d, k))))

    nba = Nba(
        n=len(order),
        initial=frozenset(states[(q, 0)] for q in sorted(gba.initial)),
        accepting=frozenset(i for (q, j), i in states.items() if j == r),
        transitions=tuple(trans),
        universe=frozenset().union(*(g.atoms() for _, g, _ in trans)) if trans else frozenset(),
    )
    return _simplify_nba(nba)


def _simplify_nba(b: Nba) -> Nba:
    """Reachability + live-cycle pruning, duplicate folding, guard subsumption."""
    succ = [[] for _ in range(b.n)]
    for s, g, d in b.transitions:
        succ[s].append((g, d))
    # forward reachability
    reach = set(b.initial)
    stack = sorted(b.initial)
    while stack:
        u = stack.pop()
        for _, d in succ[u]:
            if d not in reach:
                reach.add(d)
                stack.append(d)
    # states that can reach an accepting cycle
    comp = _scc(b.n, succ)
    size: dict = {}
    for q in range(b.n):
        size[comp[q]] = size.get(comp[q], 0) + 1
    good = set()
    for q in b.accepting:
        if size[comp[q]] > 1 or any(d == q for _, d in succ[q]):
            good.add(q)
    live = set(good)
    changed = True
    while changed:
        changed = False
        for s, g, d in b.transitions:
            if d in live and s not in live:
                live.add(s)
                changed = True
    keep = sorted(reach & live)
    if not keep:
        return Nba(0, frozenset(), frozenset(), (), b.universe)
    newid = {q: i for i, q in enumerate(keep)}
    kept = set(keep)
    trans = [(newid[s], g, newid[d]) for s, g, d in b.transitions
             if s in kept and d in kept]
    nba = Nba(
        n=len(keep),
        initial=frozenset(newid[q] for q in b.initial if q in kept),
        accepting=frozenset(newid[q] for q in b.accepting if q in kept),
        transitions=(),
        universe=b.universe,
    )
    # fold duplicate/subsumed transitions, then merge identical states
    nba.transitions = tuple(_fold_transitions(trans))
    return _merge_nba_states(nba)


def _fold_transitions(trans):
    by_pair: dict = {}
    for s, g, d in trans:
        by_pair.setdefault((s, d), []).append(g)
    out = []
    for (s, d), guards in by_pair.items():
        guards = list(dict.fromkeys(guards))
        kept = []
        for i, g in enumerate(guards):
            subsumed = False
            for j, g2 in enumerate(guards):
                if i != j and g.implies(g2) and not (g2.implies(g) and j > i):
                    subsumed = True
                    break
            if not subsumed:
                kept.append(g)
        out += [(s, g, d) for g in kept]
    out.sort(key=lambda t: (t[0], t[2], t[1].text()))
    return out


def _merge_nba_states(b: Nba) -> Nba:
    n, trans = b.n, list(b.transitions)
    initial, accepting = set(b.initial), set(b.accepting)
    while True:
        sig: dict = {}
        remap = {}
        for q in range(n):
            rows = frozenset((g, d) for s, g, d in trans if s == q)
            key = (q in accepting, rows)
            if key in sig:
                remap[q] = sig[key]
            else:
                sig[key] = q
                remap[q] = q
        if all(remap[q] == q for q in range(n)):
            break
        keep = sorted(set(remap.values()))
        newid = {q: i for i, q in enumerate(keep)}
        trans = list({(newid[remap[s]], g, newid[remap[d]]) for s, g, d in trans})
        initial = {newid[remap[q]] for q in initial}
        accepting = {newid[remap[q]] for q in accepting}
        n = len(keep)
    return Nba(n, frozenset(initial), frozenset(accepting),
               tuple(_fold_transitions(trans)), b.universe)


def build_generalized(f: Formula) -> _Generalized:
    """Tableau expansion of an NNF formula into the generalized automaton."""
    return _Translator(f).build()


def translate(f: Formula) -> Nba:
    """Translate an NNF formula into an NBA with L(result) = Words(f)."""
    return degeneralize(build_generalized(f))

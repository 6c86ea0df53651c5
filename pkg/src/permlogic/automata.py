"""NFAs without epsilon moves, regexes, products and Parikh images.

States are ``0 .. n-1``.  A Parikh vector is a tuple of counts aligned with
``alphabet``; helpers convert to and from ``{letter: count}`` dicts.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import LinearConstraint, Bounds, milp
from scipy.sparse import lil_matrix


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class Nfa:
    alphabet: tuple
    n: int
    initial: frozenset
    transitions: frozenset
    accepting: frozenset
    _delta: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise AutomatonError("repeated letter in alphabet")
        letters = set(self.alphabet)
        ok = range(self.n)
        for q in self.initial | self.accepting:
            if q not in ok:
                raise AutomatonError(f"state {q} out of range")
        delta = {}
        for q, a, p in self.transitions:
            if q not in ok or p not in ok:
                raise AutomatonError(f"transition ({q}, {a}, {p}) uses an unknown state")
            if a not in letters:
                raise AutomatonError(f"transition ({q}, {a}, {p}) uses an unknown letter")
            delta.setdefault((q, a), set()).add(p)
        object.__setattr__(self, "_delta", {k: frozenset(v) for k, v in delta.items()})

    def step(self, states, a):
        out = set()
        for q in states:
            out |= self._delta.get((q, a), frozenset())
        return out

    def accepts(self, word):
        cur = set(self.initial)
        for a in word:
            cur = self.step(cur, a)
            if not cur:
                return False
        return bool(cur & self.accepting)

    def sorted_transitions(self):
        return sorted(self.transitions, key=lambda t: (t[0], self.alphabet.index(t[1]), t[2]))


def accepts(a: Nfa, word) -> bool:
    return a.accepts(word)


def _trim(alphabet, n, initial, trans, accepting):
    """Keep states reachable from an initial state and renumber in BFS order."""
    succ = {}
    for q, a, p in trans:
        succ.setdefault(q, []).append((a, p))
    order = {}
    queue = deque()
    for q in sorted(initial):
        if q not in order:
            order[q] = len(order)
            queue.append(q)
    while queue:
        q = queue.popleft()
        for a, p in sorted(succ.get(q, []), key=lambda t: (alphabet.index(t[0]), t[1])):
            if p not in order:
                order[p] = len(order)
                queue.append(p)
    if not order:
        return Nfa(alphabet, 1, frozenset(), frozenset(), frozenset())
    return Nfa(alphabet, len(order),
               frozenset(order[q] for q in initial),
               frozenset((order[q], a, order[p]) for q, a, p in trans if q in order),
               frozenset(order[q] for q in accepting if q in order))


# --- regular expressions -----------------------------------------------------

@dataclass(frozen=True)
class Regex:
    pass


@dataclass(frozen=True)
class Eps(Regex):
    pass


@dataclass(frozen=True)
class Sym(Regex):
    letter: str


@dataclass(frozen=True)
class Cls(Regex):
    letters: frozenset

    def __post_init__(self):
        object.__setattr__(self, "letters", frozenset(self.letters))
        if not self.letters:
            raise AutomatonError("letter class must be nonempty")


@dataclass(frozen=True)
class Cat(Regex):
    parts: tuple


@dataclass(frozen=True)
class Alt(Regex):
    parts: tuple


@dataclass(frozen=True)
class Plus(Regex):
    inner: Regex


@dataclass(frozen=True)
class Star(Regex):
    inner: Regex


def regex_letters(r):
    if isinstance(r, Sym):
        return {r.letter}
    if isinstance(r, Cls):
        return set(r.letters)
    if isinstance(r, (Cat, Alt)):
        return set().union(*(regex_letters(p) for p in r.parts)) if r.parts else set()
    if isinstance(r, (Plus, Star)):
        return regex_letters(r.inner)
    return set()


def word_regex(word, box=None, fill=None):
    """Concatenation of ``word``'s letters, each ``box`` replaced by ``fill``."""
    return Cat(tuple(fill if a == box and box is not None else Sym(a) for a in word))


def compile_regex(r: Regex, alphabet=None) -> Nfa:
    """Thompson construction followed by epsilon elimination and trimming."""
    alphabet = tuple(alphabet) if alphabet is not None else tuple(sorted(regex_letters(r)))
    missing = regex_letters(r) - set(alphabet)
    if missing:
        raise AutomatonError(f"regex letters {sorted(missing)} not in alphabet")
    trans, eps = [], []
    counter = itertools.count()

    def build(node):
        s, t = next(counter), next(counter)
        if isinstance(node, Eps):
            eps.append((s, t))
        elif isinstance(node, Sym):
            trans.append((s, node.letter, t))
        elif isinstance(node, Cls):
            for a in (x for x in alphabet if x in node.letters):
                trans.append((s, a, t))
        elif isinstance(node, Cat):
            prev = s
            for p in node.parts:
                ps, pt = build(p)
                eps.append((prev, ps))
                prev = pt
            eps.append((prev, t))
        elif isinstance(node, Alt):
            for p in node.parts:
                ps, pt = build(p)
                eps.append((s, ps))
                eps.append((pt, t))
        elif isinstance(node, (Plus, Star)):
            ps, pt = build(node.inner)
            eps.append((s, ps))
            eps.append((pt, t))
            eps.append((pt, ps))
            if isinstance(node, Star):
                eps.append((s, t))
        else:
            raise AutomatonError(f"unknown regex node {node!r}")
        return s, t

    start, final = build(r)
    n = next(counter)
    eps_succ = [[] for _ in range(n)]
    for q, p in eps:
        eps_succ[q].append(p)

    def closure(q):
        seen, stack = {q}, [q]
        while stack:
            for p in eps_succ[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    clos = [closure(q) for q in range(n)]
    by_src = {}
    for q, a, p in trans:
        by_src.setdefault(q, []).append((a, p))
    new_trans = set()
    for q in range(n):
        for mid in clos[q]:
            for a, p in by_src.get(mid, []):
                new_trans.add((q, a, p))
    accepting = {q for q in range(n) if final in clos[q]}
    return _trim(alphabet, n, {start}, new_trans, accepting)


# --- products ----------------------------------------------------------------

def nfa_intersect(a: Nfa, b: Nfa) -> Nfa:
    if a.alphabet != b.alphabet:
        raise AutomatonError("alphabet mismatch in intersection")
    return product(a.alphabet, [a, b])


def product(alphabet, parts) -> Nfa:
    """Reachable synchronous product of several NFAs over one alphabet."""
    starts = list(itertools.product(*(sorted(p.initial) for p in parts)))
    index = {s: i for i, s in enumerate(starts)}
    queue = deque(starts)
    trans = set()
    while queue:
        tup = queue.popleft()
        for a in alphabet:
            options = [sorted(p._delta.get((q, a), ())) for p, q in zip(parts, tup)]
            for nxt in itertools.product(*options):
                if nxt not in index:
                    index[nxt] = len(index)
                    queue.append(nxt)
                trans.add((index[tup], a, index[nxt]))
    accepting = {i for s, i in index.items() if all(q in p.accepting for p, q in zip(parts, s))}
    if not index:
        return Nfa(alphabet, 1, frozenset(), frozenset(), frozenset())
    return Nfa(alphabet, len(index), frozenset(range(len(starts))), frozenset(trans),
               frozenset(accepting))


def threshold_automaton(alphabet, heavy, theta: int) -> Nfa:
    """Accept words in which every heavy letter occurs more than ``theta`` times."""
    alphabet = tuple(alphabet)
    heavy = [a for a in alphabet if a in set(heavy)]
    if set(heavy) - set(alphabet):
        raise AutomatonError("heavy letters must belong to the alphabet")
    if theta < 0:
        raise AutomatonError("theta must be nonnegative")
    top = theta + 1
    states = list(itertools.product(range(top + 1), repeat=len(heavy)))
    index = {s: i for i, s in enumerate(states)}
    trans = set()
    for s in states:
        for a in alphabet:
            t = list(s)
            if a in heavy:
                j = heavy.index(a)
                t[j] = min(top, t[j] + 1)
            trans.add((index[s], a, index[tuple(t)]))
    accepting = {index[s] for s in states if all(c == top for c in s)}
    return Nfa(alphabet, len(states), frozenset([index[states[0]]]), frozenset(trans),
               frozenset(accepting))


def universal_automaton(alphabet) -> Nfa:
    return Nfa(tuple(alphabet), 1, frozenset([0]), frozenset((0, a, 0) for a in alphabet),
               frozenset([0]))


# --- Parikh vectors ------------------------------------------------------------

def parikh_of(word, alphabet) -> tuple:
    pos = {a: i for i, a in enumerate(alphabet)}
    v = [0] * len(alphabet)
    for a in word:
        v[pos[a]] += 1
    return tuple(v)


def as_vector(v, alphabet) -> tuple:
    if isinstance(v, dict):
        extra = set(v) - set(alphabet)
        if extra:
            raise AutomatonError(f"vector letters {sorted(extra)} not in alphabet")
        return tuple(int(v.get(a, 0)) for a in alphabet)
    v = tuple(int(x) for x in v)
    if len(v) != len(alphabet):
        raise AutomatonError("vector length differs from alphabet size")
    return v


def as_dict(v, alphabet) -> dict:
    return {a: c for a, c in zip(alphabet, v)}


def parikh_word(a: Nfa, v):
    """Some accepted word with Parikh vector ``v``, or None.

    Exact layered search over ``(state, consumed counts)``; the length of any
    candidate word is fixed by ``v`` so the search is finite.
    """
    v = as_vector(v, a.alphabet)
    if any(c < 0 for c in v):
        return None
    zero = (0,) * len(v)
    parent = {}
    layer = []
    for q in sorted(a.initial):
        parent[(q, zero)] = None
        layer.append((q, zero))
    for _ in range(sum(v)):
        nxt = []
        for q, used in layer:
            for i, letter in enumerate(a.alphabet):
                if used[i] == v[i]:
                    continue
                u = used[:i] + (used[i] + 1,) + used[i + 1:]
                for p in sorted(a._delta.get((q, letter), ())):
                    key = (p, u)
                    if key not in parent:
                        parent[key] = ((q, used), letter)
                        nxt.append(key)
        layer = nxt
    for key in layer:
        if key[0] in a.accepting:
            word = []
            while parent[key] is not None:
                key, letter = parent[key]
                word.append(letter)
            return tuple(reversed(word))
    return None


def parikh_member(a: Nfa, v) -> bool:
    return parikh_word(a, v) is not None


def _weak_components(n, edges):
    """Union-find components over states touched by ``edges``."""
    root = list(range(n))

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    for q, p in edges:
        root[find(q)] = find(p)
    return find


def default_cap(a: Nfa, b: Nfa) -> int:
    return (a.n + b.n) * max(1, len(a.alphabet)) * 64


def parikh_intersection_nonempty(a: Nfa, b: Nfa, cap: int | None = None):
    """A Parikh vector shared by ``L(a)`` and ``L(b)``, or None within ``cap``.

    Integer program over edge flows of both automata (one unit from a chosen
    initial state to a chosen accepting state, letter totals tied together),
    with connectivity added as lazy cuts.  Each reported vector is
    re-checked with :func:`parikh_member`.
    """
    if a.alphabet != b.alphabet:
        raise AutomatonError("alphabet mismatch in Parikh intersection")
    cap = default_cap(a, b) if cap is None else cap
    if cap < 1:
        raise AutomatonError("cap must be at least 1")
    if not (a.initial and a.accepting and b.initial and b.accepting):
        return None
    alphabet = a.alphabet
    parts = []
    offset = 0
    for aut in (a, b):
        edges = aut.sorted_transitions()
        init = sorted(aut.initial)
        fin = sorted(aut.accepting)
        parts.append(dict(aut=aut, edges=edges, init=init, fin=fin, e0=offset,
                          z0=offset + len(edges), w0=offset + len(edges) + len(init)))
        offset += len(edges) + len(init) + len(fin)
    nvar = offset
    rows, lo, hi = [], [], []

    def add_row(coeffs, low, high):
        rows.append(coeffs)
        lo.append(low)
        hi.append(high)

    for P in parts:
        aut = P["aut"]
        for q in range(aut.n):
            coeffs = {}
            for k, (s, _, t) in enumerate(P["edges"]):
                if s == q:
                    coeffs[P["e0"] + k] = coeffs.get(P["e0"] + k, 0) + 1
                if t == q:
                    coeffs[P["e0"] + k] = coeffs.get(P["e0"] + k, 0) - 1
            if q in aut.initial:
                coeffs[P["z0"] + P["init"].index(q)] = -1
            if q in aut.accepting:
                coeffs[P["w0"] + P["fin"].index(q)] = 1
            add_row(coeffs, 0, 0)
        add_row({P["z0"] + i: 1 for i in range(len(P["init"]))}, 1, 1)
        add_row({P["w0"] + i: 1 for i in range(len(P["fin"]))}, 1, 1)
    for letter in alphabet:
        coeffs = {}
        for sign, P in zip((1, -1), parts):
            for k, (_, x, _) in enumerate(P["edges"]):
                if x == letter:
                    coeffs[P["e0"] + k] = sign
        add_row(coeffs, 0, 0)

    upper = np.ones(nvar)
    for P in parts:
        upper[P["e0"]:P["e0"] + len(P["edges"])] = cap
    objective = np.zeros(nvar)
    for P in parts[:1]:
        objective[P["e0"]:P["e0"] + len(P["edges"])] = 1

    seen_cuts = set()
    while True:
        A = lil_matrix((len(rows), nvar))
        for i, coeffs in enumerate(rows):
            for j, c in coeffs.items():
                A[i, j] = c
        res = milp(objective, constraints=LinearConstraint(A.tocsr(), lo, hi),
                   integrality=np.ones(nvar), bounds=Bounds(np.zeros(nvar), upper))
        if res.status == 2:
            return None
        if res.x is None:
            raise RuntimeError(f"integer solver failed: {res.message}")
        x = np.rint(res.x).astype(int)
        new_cuts = []
        for P in parts:
            aut = P["aut"]
            used = [k for k in range(len(P["edges"])) if x[P["e0"] + k] > 0]
            src = P["init"][int(np.argmax(x[P["z0"]:P["z0"] + len(P["init"])]))]
            find = _weak_components(aut.n, [(P["edges"][k][0], P["edges"][k][2]) for k in used])
            stray = sorted({find(P["edges"][k][0]) for k in used} - {find(src)})
            for comp_root in stray:
                comp = frozenset(q for q in range(aut.n) if find(q) == comp_root)
                key = (parts.index(P), comp)
                if key in seen_cuts:
                    raise RuntimeError("connectivity cut repeated")
                seen_cuts.add(key)
                inside = [k for k, (s, _, t) in enumerate(P["edges"]) if s in comp and t in comp]
                entering = [k for k, (s, _, t) in enumerate(P["edges"]) if s not in comp and t in comp]
                big = cap * len(inside)
                coeffs = {P["e0"] + k: 1 for k in inside}
                for k in entering:
                    coeffs[P["e0"] + k] = coeffs.get(P["e0"] + k, 0) - big
                for i, q in enumerate(P["init"]):
                    if q in comp:
                        coeffs[P["z0"] + i] = -big
                new_cuts.append(coeffs)
        if not new_cuts:
            break
        for coeffs in new_cuts:
            add_row(coeffs, -np.inf, 0)

    P = parts[0]
    counts = [0] * len(alphabet)
    for k, (_, letter, _) in enumerate(P["edges"]):
        counts[alphabet.index(letter)] += int(x[P["e0"] + k])
    v = tuple(counts)
    if not (parikh_member(a, v) and parikh_member(b, v)):
        raise RuntimeError(f"flow solution {v} failed re-verification")
    return v

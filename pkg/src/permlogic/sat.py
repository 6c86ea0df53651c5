"""Fingerprint consistency, the reduction to RLP, and bounded satisfiability.

A block element's non-far neighbours are itself, its in-block diagonal
neighbours, and whichever of the four boundary elements touch it: the row
predecessor of the top element (``↑``), the row successor of the bottom
element (``↓``), and the column neighbours of the leftmost and rightmost
elements (``←``, ``→``).  Every other element is at ``∞``; whether one with a
given valuation exists follows from the count buckets.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from functools import lru_cache

from .automata import Nfa, product
from .logic import AtomContext, SnfFormula, atomic_sat, eval_formula, to_snf, valuations
from .perm import (Fingerprint, LabeledPermutation, NType, Summary, ValuedPermutation,
                   place_block, summary_of, valuations_of)
from .rlp import LabelRestriction, RlpInstance, SolveStats, solve_rlp


class SatError(ValueError):
    pass


@dataclass(frozen=True)
class ConsistencyContext:
    Y: frozenset
    v1: frozenset = frozenset()
    v2: frozenset = frozenset()
    v3: frozenset = frozenset()

    def __post_init__(self):
        if self.v1 & self.v2 or self.v1 & self.v3 or self.v2 & self.v3:
            raise SatError("v-buckets must be disjoint")
        if not (self.v1 | self.v2 | self.v3) <= self.Y:
            raise SatError("v-buckets must be subsets of Y")

    @classmethod
    def of(cls, summary: Summary):
        return cls(summary.Y, summary.v1, summary.v2, summary.v3)

    def count_class(self, g):
        for i, v in enumerate((self.v1, self.v2, self.v3), 1):
            if g in v:
                return i
        return 4


@lru_cache(maxsize=None)
def _holds(s, t, s2, f):
    return atomic_sat(AtomContext(s, t, s2), f)


def neighbours(tau: Fingerprint, t: int):
    """``(type, valuation)`` of each non-far element other than element ``t`` itself."""
    L = len(tau.seq)
    out = []
    if tau.btype is NType.SE:
        prev_t, next_t = NType.NW, NType.SE
    else:
        prev_t, next_t = NType.NE, NType.SW
    if t > 0:
        out.append((prev_t, tau.seq[t - 1]))
    if t < L - 1:
        out.append((next_t, tau.seq[t + 1]))
    if t == 0 and tau.bR_minus is not None:
        out.append((NType.N, tau.bR_minus))
    if t == L - 1 and tau.bR_plus is not None:
        out.append((NType.S, tau.bR_plus))
    leftmost, rightmost = (L - 1, 0) if tau.btype is NType.NE else (0, L - 1)
    if t == leftmost and tau.bD_minus is not None:
        out.append((NType.W, tau.bD_minus))
    if t == rightmost and tau.bD_plus is not None:
        out.append((NType.E, tau.bD_plus))
    return out


def far_partners(s, near, ctx: ConsistencyContext):
    """Split ``ctx.Y`` into valuations surely / possibly held by a far element.

    ``near`` lists the valuations of the non-far elements (self included).
    A far element with valuation ``g`` exists iff the count of ``g`` exceeds
    the number of near elements carrying it; with the open ``>= 4`` bucket
    that is undecided once four or more near elements carry ``g``.
    """
    sure, maybe = [], []
    for g in sorted(ctx.Y, key=lambda v: (len(v), sorted(v))):
        j = sum(1 for v in near if v == g)
        k = ctx.count_class(g)
        if k <= 3:
            if k > j:
                sure.append(g)
        elif j <= 3:
            sure.append(g)
        else:
            maybe.append(g)
    return sure, maybe


def consistent_universal(tau: Fingerprint, chi, ctx: ConsistencyContext, counter=None) -> bool:
    """Does every element of a block with fingerprint ``tau`` satisfy ``forall y. chi``?

    Undecided far partners are assumed present, so a ``True`` answer is
    always safe.
    """
    for t, s in enumerate(tau.seq):
        near = neighbours(tau, t)
        tests = [(NType.SAME, s)] + near
        sure, maybe = far_partners(s, [s] + [g for _, g in near], ctx)
        tests += [(NType.FAR, g) for g in sure + maybe]
        if counter is not None:
            counter[0] += len(tests)
        if not all(_holds(s, nt, g, chi) for nt, g in tests):
            return False
    return True


def consistent_existential(tau: Fingerprint, psi, ctx: ConsistencyContext, counter=None) -> bool:
    """Does every element of a block with fingerprint ``tau`` satisfy ``exists y. psi``?

    Only far partners that surely exist count as witnesses.
    """
    for t, s in enumerate(tau.seq):
        near = neighbours(tau, t)
        tests = [(NType.SAME, s)] + near
        sure, _ = far_partners(s, [s] + [g for _, g in near], ctx)
        tests += [(NType.FAR, g) for g in sure]
        if counter is not None:
            counter[0] += len(tests)
        if not any(_holds(s, nt, g, psi) for nt, g in tests):
            return False
    return True


def consistent(tau: Fingerprint, snf: SnfFormula, ctx: ConsistencyContext) -> bool:
    return consistent_universal(tau, snf.chi, ctx) and \
        all(consistent_existential(tau, psi, ctx) for psi in snf.psis)


# --- reduction -------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionOutput:
    instance: RlpInstance
    summary: Summary


def _chain_automaton(alphabet, word_of):
    """Words whose first string starts and last string ends with ⊥, and
    consecutive strings overlap in two positions."""
    start = "start"
    states = {start: 0}
    trans = set()
    accepting = set()
    queue = [start]
    while queue:
        st = queue.pop(0)
        for tau in alphabet:
            w = word_of(tau)
            if st == start:
                if w[0] is not None:
                    continue
            elif st != (w[0], w[1]):
                continue
            nxt = (w[-2], w[-1])
            if nxt not in states:
                states[nxt] = len(states)
                queue.append(nxt)
                if nxt[1] is None:
                    accepting.add(states[nxt])
            trans.add((states[st], tau, states[nxt]))
    return Nfa(alphabet, len(states), frozenset([0]), frozenset(trans), frozenset(accepting))


def _coverage_automaton(alphabet):
    full = (1 << len(alphabet)) - 1
    trans = {(mask, a, mask | (1 << i)) for mask in range(full + 1) for i, a in enumerate(alphabet)}
    return Nfa(alphabet, full + 1, frozenset([0]), frozenset(trans), frozenset([full]))


def _counter_automaton(alphabet, g, bucket):
    """Count interior occurrences of ``g`` up to 4; accept exactly ``bucket``
    (or at least 4 when ``bucket`` is 4)."""
    trans = set()
    for c in range(5):
        for tau in alphabet:
            k = c + sum(1 for v in tau.seq if v == g)
            if bucket <= 3 and k > bucket:
                continue
            trans.add((c, tau, min(k, 4)))
    return Nfa(alphabet, 5, frozenset([0]), frozenset(trans), frozenset([bucket]))


def restrictions_for(X):
    out = set()
    for tau, tau2 in itertools.product(X, repeat=2):
        if tau.btype is not NType.NE and tau2.btype is not NType.NE:
            out.add(LabelRestriction(tau, NType.SE, tau2))
        if tau.btype is not NType.SE and tau2.btype is not NType.SE:
            out.add(LabelRestriction(tau, NType.NE, tau2))
    return frozenset(out)


def reduce_to_rlp(snf: SnfFormula, summary: Summary) -> ReductionOutput:
    ctx = ConsistencyContext.of(summary)
    alphabet = tuple(sorted(summary.X, key=Fingerprint.sort_key))
    for tau in alphabet:
        if not consistent(tau, snf, ctx):
            raise SatError(f"fingerprint {tau} is not consistent with the formula and summary")
    counters = [_counter_automaton(alphabet, g, ctx.count_class(g))
                for g in sorted(ctx.Y, key=lambda v: (len(v), sorted(v)))]
    cover = _coverage_automaton(alphabet)
    l1 = product(alphabet, [_chain_automaton(alphabet, lambda t: t.tau_r), cover] + counters)
    l2 = product(alphabet, [_chain_automaton(alphabet, lambda t: t.tau_d), cover] + counters)
    inst = RlpInstance(alphabet, restrictions_for(alphabet), l1, l2)
    return ReductionOutput(inst, summary)


def expand_witness(lp: LabeledPermutation) -> ValuedPermutation:
    """Replace each fingerprint letter by a block carrying its sequence."""
    row_start, acc = {}, 1
    for r in range(1, lp.n + 1):
        row_start[r] = acc
        acc += len(lp.labels[r - 1].seq)
    col_start, acc = {}, 1
    for c in range(1, lp.n + 1):
        r = lp.cols[c - 1]
        col_start[c] = acc
        acc += len(lp.labels[r - 1].seq)
    sigma = {}
    for (r, c), tau in lp.lam.items():
        for e, v in place_block(tau, row_start[r], col_start[c]):
            sigma[e] = v
    return ValuedPermutation.from_elements(sigma)


# --- bounded decision ---------------------------------------------------------------

@dataclass
class SatResult:
    status: str             # "SAT", "UNSAT_WITHIN_BOUNDS" or "BUDGET_EXCEEDED"
    model: ValuedPermutation | None = None
    bounds: dict = field(default_factory=dict)
    summary: Summary | None = None
    snf_model: ValuedPermutation | None = None
    candidates: int = 0

    @property
    def sat(self):
        return self.status == "SAT"


def _val_key(v):
    return (0,) if v is None else (1, len(v), tuple(sorted(v)))


class _Universe:
    """Fingerprints over the admissible valuations whose near-neighbour
    tests pass, generated on demand by overlap key.

    A skeleton is a block type plus sequence; each boundary can then be
    chosen independently, since it touches a single block element.
    """

    def __init__(self, snf, admissible, max_len):
        self.snf = snf
        self.admissible = admissible
        chi = snf.chi
        self.skeletons = []
        for L in range(1, max_len + 1):
            types = [NType.SAME] if L == 1 else [NType.SE, NType.NE]
            for btype in types:
                for seq in itertools.product(admissible, repeat=L):
                    skeleton = Fingerprint(btype, None, None, None, None, seq)
                    if not self._inner_ok(skeleton, chi):
                        continue
                    opts = [[None] + [g for g in admissible if self._bound_ok(skeleton, pos, g, chi)]
                            for pos in range(4)]
                    self.skeletons.append((skeleton, opts))
        self._cache = {}
        # per psi: valuations g with (s, nt, g) satisfying psi, and whether a far g works
        self._tables = []
        for psi in snf.psis:
            near = {(s, nt): frozenset(g for g in admissible if _holds(s, nt, g, psi))
                    for s in admissible for nt in NType}
            far = {s: bool(near[(s, NType.FAR)]) for s in admissible}
            self._tables.append((near, far))

    @staticmethod
    def keys(tau):
        return {"rs": tau.tau_r[:2], "re": tau.tau_r[-2:], "ds": tau.tau_d[:2], "de": tau.tau_d[-2:]}

    def candidates(self, kind, key):
        """Fingerprints whose ``kind`` key equals ``key``, in canonical order."""
        ck = (kind, key)
        if ck in self._cache:
            return self._cache[ck]
        pos = {"rs": 0, "re": 1, "ds": 2, "de": 3}[kind]
        bound = key[0] if kind in ("rs", "ds") else key[1]
        inner = key[1] if kind in ("rs", "ds") else key[0]
        out = []
        for skeleton, opts in self.skeletons:
            body = skeleton.tau_r[1:-1] if kind in ("rs", "re") else skeleton.tau_d[1:-1]
            if (body[0] if kind in ("rs", "ds") else body[-1]) != inner or bound not in opts[pos]:
                continue
            choices = list(opts)
            choices[pos] = [bound]
            for bounds in itertools.product(*choices):
                tau = Fingerprint(skeleton.btype, *bounds, skeleton.seq)
                if all(self._exists_possible(tau, table) for table in self._tables):
                    out.append(tau)
        out.sort(key=Fingerprint.sort_key)
        self._cache[ck] = out
        return out

    def starts(self):
        """Fingerprints of a block holding row 1."""
        out = []
        for s in self.admissible:
            out += self.candidates("rs", (None, s))
        return sorted(out, key=Fingerprint.sort_key)

    def side_possible(self, side):
        kind = ("rs", "re", "ds", "de")[side]
        for s in self.admissible:
            key = (None, s) if kind in ("rs", "ds") else (s, None)
            if self.candidates(kind, key):
                return True
        return False

    @staticmethod
    def _inner_ok(tau, chi):
        for t, s in enumerate(tau.seq):
            if not _holds(s, NType.SAME, s, chi):
                return False
            if not all(_holds(s, nt, g, chi) for nt, g in neighbours(tau, t)):
                return False
        return True

    @staticmethod
    def _bound_ok(skeleton, pos, g, chi):
        L = len(skeleton.seq)
        nt = (NType.N, NType.S, NType.W, NType.E)[pos]
        if skeleton.btype is NType.NE:
            t = (0, L - 1, L - 1, 0)[pos]
        else:
            t = (0, L - 1, 0, L - 1)[pos]
        return _holds(skeleton.seq[t], nt, g, chi)

    @staticmethod
    def _exists_possible(tau, table):
        near, far = table
        for t, s in enumerate(tau.seq):
            if far[s] or s in near[(s, NType.SAME)]:
                continue
            if not any(g is not None and g in near[(s, nt)] for nt, g in neighbours(tau, t)):
                return False
        return True


_PAIRS = (("re", "rs"), ("rs", "re"), ("de", "ds"), ("ds", "de"))


def _open_requirements(X):
    """Unmet overlap requirements ``(kind, key)`` in canonical order.

    Each non-⊥ end of a member's row/column string needs a member whose
    opposite end overlaps it.
    """
    keyed = {k: set() for k in ("rs", "re", "ds", "de")}
    for tau in X:
        for k, key in _Universe.keys(tau).items():
            keyed[k].add(key)
    out = []
    for tau in sorted(X, key=Fingerprint.sort_key):
        keys = _Universe.keys(tau)
        for mine, theirs in _PAIRS:
            key = keys[mine]
            end = key[-1] if mine in ("re", "de") else key[0]
            if end is None or key in keyed[theirs] or (theirs, key) in out:
                continue
            out.append((theirs, key))
    return out


def _bottom_counts(X):
    counts = [0, 0, 0, 0]
    for tau in X:
        for i, v in enumerate(tau.header[1:]):
            if v is None:
                counts[i] += 1
    return counts


def candidate_sets(universe: _Universe, max_fp: int, total: int):
    """Fingerprint sets with interior length exactly ``total``, closed under
    overlap requirements, with exactly one fingerprint per ⊥ side.

    Sets grow from a row-1 fingerprint; each step adds a fingerprint that
    meets the first open requirement (an unmatched overlap, else a missing
    ⊥ side next to an existing member).
    """
    if not all(universe.side_possible(i) for i in range(4)):
        return
    seen = set()

    def ok_to_add(X, tau, used):
        if tau in X or used + len(tau.seq) > total:
            return False
        bc = _bottom_counts(X)
        return all(not (v is None and bc[i] >= 1) for i, v in enumerate(tau.header[1:]))

    def rec(X, used):
        if X in seen:
            return
        seen.add(X)
        reqs = _open_requirements(X)
        missing = [i for i, c in enumerate(_bottom_counts(X)) if c == 0]
        per_kind = {}
        for kind, key in reqs:
            per_kind[kind] = per_kind.get(kind, 0) + 1
        need = max([*per_kind.values(), 1 if missing else 0, 0])
        if len(X) + need > max_fp or used + need > total:
            return
        if not reqs and not missing:
            if used == total:
                yield X
            return
        if reqs:
            options = universe.candidates(*reqs[0])
        else:
            side = missing[0]
            options = []
            for tau in sorted(X, key=Fingerprint.sort_key):
                for mine, theirs in _PAIRS:
                    options += [t for t in universe.candidates(theirs, _Universe.keys(tau)[mine])
                                if t.header[side + 1] is None and t not in options]
        for tau in options:
            if ok_to_add(X, tau, used):
                yield from rec(X | {tau}, used + len(tau.seq))

    for tau in universe.starts():
        if len(tau.seq) <= total:
            yield from rec(frozenset([tau]), len(tau.seq))


def bucket_assignments(X, Y):
    """``(v1, v2, v3)`` choices in canonical order, pruned by interior counts."""
    ys = sorted(Y, key=lambda v: (len(v), sorted(v)))
    least = {g: sum(1 for tau in X for v in tau.seq if v == g) for g in ys}
    for combo in itertools.product((1, 2, 3, 4), repeat=len(ys)):
        if any(k <= 3 and least[g] > k for g, k in zip(ys, combo)):
            continue
        yield tuple(frozenset(g for g, k in zip(ys, combo) if k == i) for i in (1, 2, 3))


class BudgetExhausted(Exception):
    pass


def decide_sat(phi, max_fingerprints: int = 6, max_block_len: int = 3, parikh_cap: int | None = None,
               theta: int = 1, time_budget: float | None = None, oracle: bool = False,
               max_size: int = 5) -> SatResult:
    """Bounded satisfiability through the reduction to RLP.

    Candidate fingerprint sets are visited by total interior length, then in
    search order; each is paired with every count-bucket assignment, reduced
    to an RLP instance and solved.  A SAT answer always carries a model
    checked with :func:`eval_formula`.
    """
    if max_fingerprints < 1 or max_block_len < 1:
        raise SatError("bounds must be positive")
    bounds = dict(max_fingerprints=max_fingerprints, max_block_len=max_block_len,
                  parikh_cap=parikh_cap, theta=theta)
    if oracle:
        from .oracle import SearchBudget, brute_sat
        res = brute_sat(phi, SearchBudget(max_n=max_size, max_letters=8,
                                          time_cap=time_budget or 3600.0))
        bounds = dict(oracle=True, max_size=max_size)
        status = {"SAT": "SAT", "NO_MODEL": "UNSAT_WITHIN_BOUNDS", "TIMEOUT": "BUDGET_EXCEEDED"}[res.status]
        return SatResult(status, res.model, bounds)

    start = time.monotonic()

    def tick():
        if time_budget is not None and time.monotonic() - start > time_budget:
            raise BudgetExhausted

    snf = to_snf(phi)
    admissible = [s for s in valuations(snf.vocabulary) if _holds(s, NType.SAME, s, snf.chi)]
    result = SatResult("UNSAT_WITHIN_BOUNDS", bounds=bounds)
    if not admissible:
        return result
    universe = _Universe(snf, admissible, max_block_len)
    try:
        tick()
        for total in range(1, max_fingerprints * max_block_len + 1):
            for X in candidate_sets(universe, max_fingerprints, total):
                tick()
                Y = valuations_of(X)
                for v1, v2, v3 in bucket_assignments(X, Y):
                    tick()
                    summary = Summary(X, Y, v1, v2, v3)
                    ctx = ConsistencyContext.of(summary)
                    if not all(consistent(tau, snf, ctx) for tau in X):
                        continue
                    result.candidates += 1
                    red = reduce_to_rlp(snf, summary)
                    lp = solve_rlp(red.instance, theta=theta, cap=parikh_cap, stats=SolveStats())
                    if lp is None:
                        continue
                    model = expand_witness(lp)
                    if summary_of(model) != summary:
                        raise AssertionError("expanded model does not reproduce the guessed summary")
                    if not eval_formula(model, snf.as_formula()):
                        raise AssertionError("expanded model fails the normal form")
                    erased = ValuedPermutation(model.rows, tuple(v - snf.fresh for v in model.vals))
                    if not eval_formula(erased, phi):
                        raise AssertionError("model fails the input formula")
                    result.status, result.model = "SAT", erased
                    result.summary, result.snf_model = summary, model
                    return result
    except BudgetExhausted:
        result.status = "BUDGET_EXCEEDED"
    return result

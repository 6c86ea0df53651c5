"""Restricted labeled permutations: guesses, the decision search, witnesses.

A guess fixes which letters are heavy (occur more than ``theta`` times) and a
small labeled permutation over the light letters plus the placeholder ``BOX``.
The search walks guesses in canonical order and tests each with a Parikh-image
intersection; a positive test is turned into an explicit witness.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

from .automata import (Cat, Cls, Nfa, Plus, Sym, compile_regex,
                       parikh_intersection_nonempty, parikh_word, product,
                       threshold_automaton)
from .constraints import DEFAULT_THRESHOLD, ConstraintError, GridDomain, LayerInfeasible, sparse_layer
from .perm import LabeledPermutation, NType, projection

RLP_THRESHOLD = DEFAULT_THRESHOLD
BOX = "□"
INF = math.inf
DIAGONAL = (NType.NE, NType.SE)


class RlpError(ValueError):
    pass


class WitnessError(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class LabelRestriction:
    a: str
    t: NType
    b: str

    def __post_init__(self):
        if self.t not in DIAGONAL:
            raise RlpError(f"restriction type must be ↗ or ↘, got {self.t}")


@dataclass(frozen=True)
class RlpInstance:
    alphabet: tuple
    restrictions: frozenset
    nfa1: Nfa
    nfa2: Nfa

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "restrictions", frozenset(self.restrictions))
        letters = set(self.alphabet)
        for res in self.restrictions:
            if res.a not in letters or res.b not in letters:
                raise RlpError(f"restriction {res} uses a letter outside the alphabet")
        if self.nfa1.alphabet != self.alphabet or self.nfa2.alphabet != self.alphabet:
            raise RlpError("automata must use the instance alphabet, in order")


@dataclass(frozen=True)
class Guess:
    g: dict
    small: LabeledPermutation
    theta: int = RLP_THRESHOLD

    @property
    def light(self):
        return tuple(a for a, k in self.g.items() if k != INF)

    @property
    def heavy(self):
        return tuple(a for a, k in self.g.items() if k == INF)


# --- restrictions ------------------------------------------------------------

def _forbidden_pairs(restrictions):
    """``(a, dr, dc, b)`` offsets a restriction set forbids."""
    out = set()
    for res in restrictions:
        out.add((res.a, 1, 1, res.b) if res.t is NType.SE else (res.a, -1, 1, res.b))
    return out


def _pair_ok(forbid, la, lb, dr, dc):
    """May a ``la`` element sit next to a ``lb`` element at offset ``(dr, dc)``?"""
    return (la, dr, dc, lb) not in forbid and (lb, -dr, -dc, la) not in forbid


def satisfies(lp: LabeledPermutation, restrictions) -> bool:
    forbid = _forbidden_pairs(restrictions)
    for r in range(1, lp.n):
        c, c2 = lp.rows[r - 1], lp.rows[r]
        if abs(c2 - c) == 1 and not _pair_ok(forbid, lp.labels[r - 1], lp.labels[r], 1, c2 - c):
            return False
    return True


# --- guesses -----------------------------------------------------------------

def _zone_violation(rows_of, labels_of, r, n):
    """Does some square zone ending at row ``r`` hold >= 2 elements, all boxes?

    ``rows_of[s]`` is the column of row ``s`` for the rows placed so far.
    """
    for i in range(r, 0, -1):
        l = r - i
        cols = [rows_of[s] for s in range(i, r + 1)]
        labs = [labels_of[s] for s in range(i, r + 1)]
        for j in range(1, n - l + 1):
            inside = [lab for c, lab in zip(cols, labs) if j <= c <= j + l]
            if len(inside) >= 2 and all(lab == BOX for lab in inside):
                return True
    return False


def zone_ok(lp: LabeledPermutation) -> bool:
    """No square zone of the grid holds two or more elements that are all boxes."""
    rows_of = {r: c for r, c in enumerate(lp.rows, 1)}
    labels_of = {r: a for r, a in enumerate(lp.labels, 1)}
    return not any(_zone_violation(rows_of, labels_of, r, lp.n) for r in range(1, lp.n + 1))


def size_bound(g) -> int:
    light = sum(k for k in g.values() if k != INF)
    return (1 + light) ** 2 + light


def validate_guess(guess: Guess, restrictions):
    """``(ok, reason)`` for the three guess conditions plus the size bound."""
    g, small = guess.g, guess.small
    for a, k in g.items():
        if k != INF and not (0 <= k <= guess.theta):
            return False, f"g({a})={k} outside 0..{guess.theta}"
    allowed = set(guess.light) | {BOX}
    stray = sorted(set(small.labels) - allowed)
    if stray:
        return False, f"labels {stray} are neither light letters nor {BOX}"
    for a in guess.light:
        if small.labels.count(a) != g[a]:
            return False, f"count: {a} appears {small.labels.count(a)} times, g({a})={g[a]}"
    if small.n > size_bound(g):
        return False, f"size: {small.n} exceeds bound {size_bound(g)}"
    if not zone_ok(small):
        return False, "zone: a square zone holds two or more boxes and nothing else"
    if not satisfies(small, restrictions):
        return False, "restriction: the small permutation violates R"
    return True, "ok"


def _match_words(u1, u2, forbid, zones=False):
    """Label-preserving permutations with row word ``u1`` and column word ``u2``.

    Yields ``rows`` tuples in lexicographic order.  Restrictions (and the zone
    condition when ``zones``) prune rows as they are placed.
    """
    n = len(u1)
    by_label = {}
    for c, a in enumerate(u2, 1):
        by_label.setdefault(a, []).append(c)
    rows_of, labels_of = {}, {}
    used = set()

    def rec(r):
        if r > n:
            yield tuple(rows_of[s] for s in range(1, n + 1))
            return
        a = u1[r - 1]
        for c in by_label.get(a, []):
            if c in used:
                continue
            if r > 1:
                pc = rows_of[r - 1]
                if abs(c - pc) == 1 and not _pair_ok(forbid, labels_of[r - 1], a, 1, c - pc):
                    continue
            rows_of[r], labels_of[r] = c, a
            if zones and _zone_violation(rows_of, labels_of, r, n):
                del rows_of[r], labels_of[r]
                continue
            used.add(c)
            yield from rec(r + 1)
            used.discard(c)
            del rows_of[r], labels_of[r]

    if Counter(u1) != Counter(u2):
        return
    yield from rec(1)


def _multiset(word):
    return frozenset(Counter(word).items())


def realize(w1, w2, restrictions):
    """First labeled permutation with projections ``w1``/``w2`` satisfying R, or None."""
    for rows in _match_words(tuple(w1), tuple(w2), _forbidden_pairs(restrictions)):
        return LabeledPermutation(rows, tuple(w1))
    return None


# --- automata of a guess -----------------------------------------------------

def box_regex(word, heavy):
    """Regex of ``word`` with every box replaced by a nonempty heavy word."""
    fill = Plus(Cls(frozenset(heavy))) if heavy else None
    return Cat(tuple(fill if a == BOX else Sym(a) for a in word))


def guess_automaton(base: Nfa, word, heavy, theta):
    if BOX in word and not heavy:
        raise RlpError("box in a guess without heavy letters")
    e = compile_regex(box_regex(word, heavy), base.alphabet)
    return product(base.alphabet, [base, e, threshold_automaton(base.alphabet, heavy, theta)])


def _heavy_closure(nfa: Nfa, states, heavy):
    """States reachable from ``states`` by a nonempty word over ``heavy``."""
    frontier = set()
    for a in heavy:
        frontier |= nfa.step(states, a)
    seen = set(frontier)
    while frontier:
        nxt = set()
        for a in heavy:
            nxt |= nfa.step(frontier, a)
        frontier = nxt - seen
        seen |= frontier
    return seen


def _box_words(nfa: Nfa, light, heavy, theta):
    """Words over ``light`` and ``BOX`` that ``nfa`` can follow with boxes read
    as nonempty heavy words, up to the zone-derived size bound.

    Order: by length, then by symbol order (light letters, then the box).
    """
    symbols = list(light) + ([BOX] if heavy else [])
    max_light = theta * len(light)
    max_len = (1 + max_light) ** 2 + max_light if heavy else max_light
    cache = {}

    def step(states, s):
        key = (states, s)
        if key not in cache:
            cache[key] = frozenset(_heavy_closure(nfa, states, heavy) if s == BOX else nfa.step(states, s))
        return cache[key]

    for length in range(1, max_len + 1):
        def rec(prefix, states, counts):
            if len(prefix) == length:
                light_total = sum(counts.values())
                if prefix.count(BOX) > (1 + light_total) ** 2:
                    return
                if heavy and BOX not in prefix:
                    return
                if states & nfa.accepting:
                    yield tuple(prefix)
                return
            for s in symbols:
                if s != BOX and counts.get(s, 0) >= theta:
                    continue
                nxt = step(states, s)
                if not nxt:
                    continue
                if s != BOX:
                    counts[s] = counts.get(s, 0) + 1
                prefix.append(s)
                yield from rec(prefix, nxt, counts)
                prefix.pop()
                if s != BOX:
                    counts[s] -= 1
        yield from rec([], frozenset(nfa.initial), {})


def heavy_sets(alphabet):
    """Subsets of the alphabet by size, then lexicographically."""
    for k in range(len(alphabet) + 1):
        yield from itertools.combinations(alphabet, k)


# --- witness construction ----------------------------------------------------

def build_witness(guess: Guess, w1, w2, restrictions=()) -> LabeledPermutation:
    """Explicit labeled permutation with projections ``w1`` and ``w2``.

    Light elements keep the relative layout of the guess; heavy letters are
    added one at a time, in alphabet order, as sparse layers that avoid every
    diagonal neighbour.
    """
    w1, w2 = tuple(w1), tuple(w2)
    if Counter(w1) != Counter(w2):
        raise WitnessError("w1 and w2 have different Parikh vectors")
    light, heavy = set(guess.light), guess.heavy
    for a in guess.light:
        if w1.count(a) != guess.g[a]:
            raise WitnessError(f"{a} occurs {w1.count(a)} times, guess says {guess.g[a]}")
    for a in heavy:
        if w1.count(a) <= guess.theta:
            raise WitnessError(f"heavy letter {a} occurs only {w1.count(a)} times")
    small = guess.small
    u1 = projection(small, "→")
    u2 = projection(small, "↓")
    if [a for a in u1 if a != BOX] != [a for a in w1 if a in light] or \
            [a for a in u2 if a != BOX] != [a for a in w2 if a in light]:
        raise WitnessError("light letters of w1/w2 do not follow the guess")

    # The j-th light row of the guess goes to the position of the j-th light
    # letter of w1; columns likewise.
    row_pos = [r for r, a in enumerate(w1, 1) if a in light]
    col_pos = [c for c, a in enumerate(w2, 1) if a in light]
    light_row_rank = {}
    for r, a in enumerate(u1, 1):
        if a != BOX:
            light_row_rank[r] = len(light_row_rank)
    light_col_rank = {}
    for c, a in enumerate(u2, 1):
        if a != BOX:
            light_col_rank[c] = len(light_col_rank)
    placed = {}
    for (r, c), a in small.lam.items():
        if a != BOX:
            placed[(row_pos[light_row_rank[r]], col_pos[light_col_rank[c]])] = a

    for a in heavy:
        rows = tuple(r for r, x in enumerate(w1, 1) if x == a)
        cols = tuple(c for c, x in enumerate(w2, 1) if x == a)
        try:
            layer = sparse_layer(GridDomain(rows, cols), placed.keys(), theta=min(guess.theta, len(rows) - 1))
        except (LayerInfeasible, ConstraintError) as exc:
            raise WitnessError(f"cannot layer heavy letter {a}: {exc}") from exc
        for e in layer.elements:
            placed[e] = a
    lp = LabeledPermutation.from_elements(placed)
    if projection(lp, "→") != w1 or projection(lp, "↓") != w2:
        raise WitnessError("projections differ from w1/w2")
    if not satisfies(lp, restrictions):
        raise WitnessError("built permutation violates R")
    return lp


def verify_witness(lp: LabeledPermutation, inst: RlpInstance) -> bool:
    if set(lp.labels) - set(inst.alphabet):
        raise RlpError("witness uses letters outside the alphabet")
    return (inst.nfa1.accepts(projection(lp, "→"))
            and inst.nfa2.accepts(projection(lp, "↓"))
            and satisfies(lp, inst.restrictions))


# --- the decision search -----------------------------------------------------

@dataclass
class SolveStats:
    theta: int = RLP_THRESHOLD
    cap: int | None = None
    pairs_tested: int = 0
    parikh_positive: int = 0
    guess: Guess | None = None
    words: tuple | None = None
    fallback: bool = False
    notes: list = field(default_factory=list)


def _words_with_vector(nfa: Nfa, v):
    """All accepted words with Parikh vector ``v``, lexicographic by alphabet."""
    alphabet = nfa.alphabet
    total = sum(v)

    def rec(states, left, prefix):
        if len(prefix) == total:
            if states & nfa.accepting:
                yield tuple(prefix)
            return
        for i, a in enumerate(alphabet):
            if left[i] == 0:
                continue
            nxt = nfa.step(states, a)
            if not nxt:
                continue
            left[i] -= 1
            prefix.append(a)
            yield from rec(nxt, left, prefix)
            prefix.pop()
            left[i] += 1

    yield from rec(set(nfa.initial), list(v), [])


def _fallback(inst, a1, a2, max_len):
    """Exact search for a realizable word pair of the guess automata, by length."""
    alphabet = inst.alphabet
    for total in range(1, max_len + 1):
        for v in itertools.product(range(total + 1), repeat=len(alphabet)):
            if sum(v) != total:
                continue
            words2 = list(_words_with_vector(a2, v))
            if not words2:
                continue
            for w1 in _words_with_vector(a1, v):
                for w2 in words2:
                    lp = realize(w1, w2, inst.restrictions)
                    if lp is not None:
                        return lp, (w1, w2)
    return None


def solve_rlp(inst: RlpInstance, theta: int = RLP_THRESHOLD, cap: int | None = None,
              stats: SolveStats | None = None, fallback_len: int = 8):
    """A witness for ``inst`` or None.

    Guesses are visited by heavy set, then row word, then column word; each
    row/column word pair is tested by Parikh intersection and, if positive,
    matched to a small permutation meeting the guess conditions.  Below the
    threshold 17 the layered construction may fail; a pair whose construction
    fails is then searched exactly for word pairs up to ``fallback_len``
    letters (recorded in ``stats.fallback``).
    """
    if theta < 1:
        raise RlpError("theta must be at least 1")
    stats = stats if stats is not None else SolveStats()
    stats.theta, stats.cap = theta, cap
    alphabet = inst.alphabet
    forbid = _forbidden_pairs(inst.restrictions)
    for heavy in heavy_sets(alphabet):
        light = tuple(a for a in alphabet if a not in heavy)
        rows_words = list(_box_words(inst.nfa1, light, heavy, theta))
        if not rows_words:
            continue
        cols_words = list(_box_words(inst.nfa2, light, heavy, theta))
        cols_by_key = {}
        for u2 in cols_words:
            cols_by_key.setdefault(_multiset(u2), []).append(u2)
        auto2 = {}
        for u1 in rows_words:
            partners = cols_by_key.get(_multiset(u1), [])
            if not partners:
                continue
            a1 = guess_automaton(inst.nfa1, u1, heavy, theta)
            for u2 in partners:
                small_rows = next(_match_words(u1, u2, forbid, zones=True), None)
                if small_rows is None:
                    continue
                if u2 not in auto2:
                    auto2[u2] = guess_automaton(inst.nfa2, u2, heavy, theta)
                a2 = auto2[u2]
                stats.pairs_tested += 1
                v = parikh_intersection_nonempty(a1, a2, cap)
                if v is None:
                    continue
                stats.parikh_positive += 1
                g = {a: (u1.count(a) if a in light else INF) for a in alphabet}
                guess = Guess(g, LabeledPermutation(small_rows, u1), theta)
                ok, reason = validate_guess(guess, inst.restrictions)
                if not ok:
                    raise AssertionError(f"search produced an invalid guess: {reason}")
                w1, w2 = parikh_word(a1, v), parikh_word(a2, v)
                try:
                    lp = build_witness(guess, w1, w2, inst.restrictions)
                    words = (w1, w2)
                except WitnessError as exc:
                    if theta >= RLP_THRESHOLD:
                        raise
                    stats.notes.append(f"construction failed at theta={theta}: {exc}")
                    found = _fallback(inst, a1, a2, fallback_len)
                    if found is None:
                        continue
                    stats.fallback = True
                    lp, words = found
                if not verify_witness(lp, inst):
                    raise AssertionError("constructed witness fails verification")
                stats.guess, stats.words = guess, words
                return lp
    return None


# --- shuffle problem ---------------------------------------------------------

def all_diagonal_restrictions(alphabet):
    return frozenset(LabelRestriction(a, t, b) for a in alphabet for b in alphabet for t in DIAGONAL)


def _gap_ok(p):
    return all(abs(p[i + 1] - p[i]) > 1 for i in range(len(p) - 1))


def shuffle_check(l1: Nfa, l2: Nfa, max_n: int, method: str = "rlp", theta: int = 1):
    """A word of ``l1`` and a gap permutation sending it into ``l2``, or None.

    Returns ``(word, p)`` with ``p`` 1-based, such that ``word[p(1)] ... word[p(n)]``
    is in ``l2`` and consecutive values of ``p`` differ by more than 1.
    ``method="brute"`` enumerates ``n <= max_n``; ``method="rlp"`` solves the
    RLP instance forbidding every diagonal adjacency.
    """
    if max_n < 1:
        raise RlpError("max_n must be at least 1")
    if method == "brute":
        for n in range(1, max_n + 1):
            for word in itertools.product(l1.alphabet, repeat=n):
                if not l1.accepts(word):
                    continue
                for p in itertools.permutations(range(1, n + 1)):
                    if _gap_ok(p) and l2.accepts(tuple(word[i - 1] for i in p)):
                        return tuple(word), p
        return None
    if method != "rlp":
        raise RlpError(f"unknown method {method!r}")
    inst = RlpInstance(l1.alphabet, all_diagonal_restrictions(l1.alphabet), l1, l2)
    lp = solve_rlp(inst, theta=theta, fallback_len=max_n)
    if lp is None:
        return None
    return projection(lp, "→"), tuple(lp.cols)

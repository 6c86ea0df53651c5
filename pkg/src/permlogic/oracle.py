"""Brute-force reference searches used as ground truth by the test suites.

Every artifact an oracle returns is re-checked with the ordinary evaluator or
verifier before it is handed back.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .automata import Nfa, parikh_of
from .logic import (And, Const, Exists, Forall, FormulaError, Not, Or, Pred, SuccD, SuccR,
                    eval_formula, free_vars, letters, valuations)
from .perm import LabeledPermutation, ValuedPermutation
from .rlp import RlpInstance, _forbidden_pairs, _pair_ok, verify_witness


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_n: int = 5
    max_letters: int = 3
    time_cap: float = 60.0

    def __post_init__(self):
        if self.max_n < 1 or self.max_letters < 1 or self.time_cap <= 0:
            raise ValueError("budget fields must be positive")


@dataclass(frozen=True)
class OracleResult:
    status: str           # "SAT", "NO_MODEL" or "TIMEOUT"
    model: object = None
    max_n: int = 0

    @property
    def sat(self):
        return self.status == "SAT"


# --- models --------------------------------------------------------------------

def _batch_eval(f, n, succ_r, succ_d, preds):
    """Truth table of ``f`` over a batch of valuations of one permutation.

    Returns a boolean array broadcastable to ``(B, n, n)``; axis 1 ranges over
    the value of ``x`` and axis 2 over ``y`` (elements indexed by row).
    """
    match f:
        case Const(v):
            return np.array(v).reshape(1, 1, 1)
        case Pred(p, v):
            col = preds[p]
            return col[:, :, None] if v == "x" else col[:, None, :]
        case SuccR(a, b) | SuccD(a, b):
            rel = succ_r if isinstance(f, SuccR) else succ_d
            if a == b:
                return np.zeros((1, 1, 1), dtype=bool)
            return (rel if a == "x" else rel.T)[None, :, :]
        case Not(s):
            return ~_batch_eval(s, n, succ_r, succ_d, preds)
        case And(a, b):
            return _batch_eval(a, n, succ_r, succ_d, preds) & _batch_eval(b, n, succ_r, succ_d, preds)
        case Or(a, b):
            return _batch_eval(a, n, succ_r, succ_d, preds) | _batch_eval(b, n, succ_r, succ_d, preds)
        case Exists(v, b) | Forall(v, b):
            inner = np.broadcast_to(_batch_eval(b, n, succ_r, succ_d, preds),
                                    (preds_batch(preds), n, n))
            axis = 1 if v == "x" else 2
            out = inner.any(axis=axis, keepdims=True) if isinstance(f, Exists) else \
                inner.all(axis=axis, keepdims=True)
            # the bound variable no longer matters: spread it back out
            return out
    raise FormulaError(f"not a formula: {f!r}")


def preds_batch(preds):
    return next(iter(preds.values())).shape[0] if preds else 1


def brute_sat(phi, budget: SearchBudget = SearchBudget()) -> OracleResult:
    """First model of ``phi`` by size, then permutation, then valuations.

    Permutations are lexicographic in row order; valuation tuples follow
    :func:`logic.valuations` order per element, first row most significant.
    All valuations of one permutation are evaluated as a numpy batch and the
    chosen model is re-checked with :func:`eval_formula`.
    """
    if free_vars(phi):
        raise FormulaError("brute_sat needs a closed formula")
    vocab = sorted(letters(phi))
    if len(vocab) > budget.max_letters:
        raise ValueError(f"{len(vocab)} letters exceed the budget of {budget.max_letters}")
    start = time.monotonic()
    vals = list(valuations(vocab))
    for n in range(1, budget.max_n + 1):
        combos = np.array(list(itertools.product(range(len(vals)), repeat=n)), dtype=np.int64)
        preds = {}
        for p in vocab:
            has = np.array([p in v for v in vals])
            preds[p] = has[combos]
        if not vocab:
            preds = {}
        for rows in itertools.permutations(range(1, n + 1)):
            if time.monotonic() - start > budget.time_cap:
                return OracleResult("TIMEOUT", None, n)
            cols = np.array(rows)
            succ_r = cols[None, :] == cols[:, None] + 1
            idx = np.arange(n)
            succ_d = idx[None, :] == idx[:, None] + 1
            # closed formula: any (x, y) slot holds the answer
            truth = np.broadcast_to(_batch_eval(phi, n, succ_r, succ_d, preds),
                                    (len(combos), n, n))[:, 0, 0]
            hits = np.flatnonzero(truth)
            if len(hits):
                combo = combos[hits[0]]
                m = ValuedPermutation(tuple(rows), tuple(vals[i] for i in combo))
                if not eval_formula(m, phi):
                    raise AssertionError("batch evaluator disagrees with eval_formula")
                return OracleResult("SAT", m, n)
    return OracleResult("NO_MODEL", None, budget.max_n)


# --- RLP -------------------------------------------------------------------------

def _words(nfa: Nfa, n):
    """Accepted words of length ``n``, lexicographic in alphabet order."""
    def rec(states, prefix):
        if len(prefix) == n:
            if states & nfa.accepting:
                yield tuple(prefix)
            return
        for a in nfa.alphabet:
            nxt = nfa.step(states, a)
            if nxt:
                prefix.append(a)
                yield from rec(nxt, prefix)
                prefix.pop()
    yield from rec(set(nfa.initial), [])


def brute_rlp(inst: RlpInstance, max_n: int, time_cap: float = 60.0):
    """First witness of size ``<= max_n``: by size, row word, then column choice.

    Columns are filled left to right, each picking the least unused row; a
    partial choice is abandoned as soon as the column word leaves ``nfa2`` or
    two column-adjacent elements break a restriction (diagonal neighbours are
    always in adjacent columns).  Raises :class:`BudgetExceeded` past the cap.
    """
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    forbid = _forbidden_pairs(inst.restrictions)
    start = time.monotonic()
    nfa2 = inst.nfa2
    for n in range(1, max_n + 1):
        for w1 in _words(inst.nfa1, n):
            if time.monotonic() - start > time_cap:
                raise BudgetExceeded(f"brute_rlp exceeded {time_cap}s at size {n}")
            p = []
            used = [False] * (n + 1)

            def rec(states):
                if len(p) == n:
                    return bool(states & nfa2.accepting)
                for r in range(1, n + 1):
                    if used[r]:
                        continue
                    a = w1[r - 1]
                    if p:
                        pr = p[-1]
                        if abs(r - pr) == 1 and not _pair_ok(forbid, w1[pr - 1], a, r - pr, 1):
                            continue
                    nxt = nfa2.step(states, a)
                    if not nxt:
                        continue
                    used[r] = True
                    p.append(r)
                    if rec(nxt):
                        return True
                    p.pop()
                    used[r] = False
                return False

            if rec(set(nfa2.initial)):
                rows = [0] * n
                for c, r in enumerate(p, 1):
                    rows[r - 1] = c
                lp = LabeledPermutation(tuple(rows), w1)
                if not verify_witness(lp, inst):
                    raise AssertionError("brute_rlp produced an invalid witness")
                return lp
    return None


# --- Parikh images -----------------------------------------------------------------

def brute_parikh(a: Nfa, max_len: int) -> set:
    """Parikh vectors of accepted words of length ``<= max_len``."""
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    out = set()
    for n in range(max_len + 1):
        for w in itertools.product(a.alphabet, repeat=n):
            if a.accepts(w):
                out.add(parikh_of(w, a.alphabet))
    return out

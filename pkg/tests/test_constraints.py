import itertools
import random

import pytest

from helpers import brute_exists, random_constraint
from permlogic.constraints import (Constraint, ConstraintError, GridDomain, construct_permutation,
                                   guaranteed_exists, rank_classes, sparse_layer)


def square(n, forbidden, k=None):
    forbidden = frozenset(forbidden)
    if k is None:
        k = max([0] + [sum(1 for r, _ in forbidden if r == i) for i in range(1, n + 1)]
                + [sum(1 for _, c in forbidden if c == i) for i in range(1, n + 1)])
    return Constraint(GridDomain.square(n), forbidden, k)


def test_unconstrained_gives_identity():
    p = construct_permutation(square(3, ()))
    assert sorted(p.elements) == [(1, 1), (2, 2), (3, 3)]


def test_derangement():
    p = construct_permutation(square(3, {(1, 1), (2, 2), (3, 3)}))
    assert sorted(p.elements) == [(1, 2), (2, 3), (3, 1)]


def test_blocked_row():
    assert construct_permutation(square(2, {(1, 1), (1, 2)})) is None


def test_line_cap_enforced():
    with pytest.raises(ConstraintError):
        Constraint(GridDomain.square(2), frozenset({(1, 1), (1, 2)}), 1)


def test_general_grid_and_normalization():
    z = Constraint(GridDomain((2, 5, 9), (1, 4, 7)), frozenset({(2, 1)}), 1)
    p = construct_permutation(z)
    assert sorted(p.elements) == [(2, 4), (5, 1), (9, 7)]
    assert p.normalized() == (2, 1, 3)


def test_matching_is_lexicographically_least():
    rng = random.Random(0)
    for _ in range(100):
        n = rng.randint(1, 5)
        z = random_constraint(rng, n, rng.randint(0, n), 0.5)
        p = construct_permutation(z)
        valid = [q for q in itertools.permutations(range(1, n + 1))
                 if all((r, c) not in z.forbidden for r, c in enumerate(q, 1))]
        if not valid:
            assert p is None
        else:
            assert tuple(c for _, c in sorted(p.elements)) == min(valid)


def test_agrees_with_exhaustive_search():
    rng = random.Random(1)
    for _ in range(200):
        n = rng.randint(1, 6)
        z = random_constraint(rng, n, rng.randint(1, n), rng.random())
        p = construct_permutation(z)
        assert (p is not None) == brute_exists(z)
        if p is not None:
            assert not p.elements & z.forbidden


def test_guaranteed_exists():
    assert guaranteed_exists(9, 4)
    assert not guaranteed_exists(8, 4)
    assert guaranteed_exists(3, 1)


def test_guarantee_is_only_sufficient():
    # a (4,2)-constraint with a solution although 4 > 4 fails
    z = square(4, {(1, 1), (1, 2), (2, 1), (2, 2)})
    assert not guaranteed_exists(4, 2) and construct_permutation(z) is not None


def _diag(a, b):
    return abs(a[0] - b[0]) == 1 and abs(a[1] - b[1]) == 1


def test_rank_classes_have_gaps():
    rows = (1, 2, 4, 5, 6, 9)
    odd, even = rank_classes(rows)
    assert odd == (1, 4, 6) and even == (2, 5, 9)


def test_sparse_layer_empty_placed():
    p = sparse_layer(GridDomain.square(18), set())
    els = sorted(p.elements)
    assert len(els) == 18
    assert not any(_diag(a, b) for a, b in itertools.combinations(els, 2))


def test_sparse_layer_needs_enough_rows():
    with pytest.raises(ConstraintError):
        sparse_layer(GridDomain.square(17), set())


def test_sparse_layer_threshold_override_reproduces_small_example():
    # letter d of the worked example with threshold 1: rows of d in ddccdab,
    # columns of d in bcddcda; a, b and the c layer already placed
    placed = {(6, 7), (7, 1), (3, 2), (4, 5)}
    p = sparse_layer(GridDomain((1, 2, 5), (3, 4, 6)), placed, theta=1)
    assert sorted(p.elements) == [(1, 6), (2, 4), (5, 3)]
    assert not any(_diag(a, b) for a in p.elements for b in placed)


def test_sparse_layer_random():
    rng = random.Random(2)
    for _ in range(200):
        n = rng.randint(18, 24)
        rows = sorted(rng.sample(range(1, 60), n))
        cols = sorted(rng.sample(range(1, 60), n))
        placed = set()
        for r in range(1, 61):
            if rng.random() < 0.7:
                placed.add((r, rng.randint(1, 60)))
        placed = {e for e in placed if e[0] not in rows and e[1] not in cols}
        p = sparse_layer(GridDomain(tuple(rows), tuple(cols)), placed)
        els = list(p.elements)
        assert sorted(r for r, _ in els) == rows and sorted(c for _, c in els) == cols
        assert not any(_diag(a, b) for a in els for b in placed)
        assert not any(_diag(a, b) for a, b in itertools.combinations(els, 2))

import itertools
import random

import pytest

from helpers import LETTERS, VALS, all_models, random_formula, random_model, random_qf
from permlogic.logic import (AtomContext, Const, Exists, FormulaError, Forall, Not, ParseError, Pred,
                             SuccD, SuccR, And, atomic_sat, eval_formula, free_vars, letters,
                             parse_formula, to_snf, to_text)
from permlogic.oracle import SearchBudget, brute_sat
from permlogic.perm import NType, ValuedPermutation, neighborhood_type

FIG1B_TEXT = "forall x. forall y. !((x -> y) & (y v x) & p(x))"
FIG1B_CHI = Not(And(And(SuccR("x", "y"), SuccD("y", "x")), Pred("p", "x")))
FIG1B = ValuedPermutation((3, 2, 4, 1), (frozenset("pq"), frozenset("q"), frozenset("qr"), frozenset("p")))


# --- parsing -------------------------------------------------------------------

def test_parse_simple():
    assert parse_formula("forall x. p(x)") == Forall("x", Pred("p", "x"))


def test_parse_running_example():
    assert parse_formula(FIG1B_TEXT) == Forall("x", Forall("y", FIG1B_CHI))


def test_parse_rejects_other_variables():
    with pytest.raises(ParseError) as e:
        parse_formula("forall z. p(z)")
    assert (e.value.line, e.value.col) == (1, 8)


def test_parse_error_position_on_later_line():
    with pytest.raises(ParseError) as e:
        parse_formula("forall x.\n  p(x) & & q(x)")
    assert (e.value.line, e.value.col) == (2, 10)


def test_parse_precedence():
    f = parse_formula("!p(x) | q(x) & x -> y")
    assert f == parse_formula("(!p(x)) | (q(x) & (x -> y))")


def test_v_is_an_identifier_outside_successor_position():
    assert parse_formula("v(x) & x v y") == And(Pred("v", "x"), SuccD("x", "y"))


def test_round_trip_random():
    rng = random.Random(1)
    for _ in range(300):
        f = random_formula(rng, 4)
        assert parse_formula(to_text(f)) == f


# --- evaluation ----------------------------------------------------------------

def naive_eval(m, f, env):
    """Direct reading of the semantics over (row, col) elements."""
    elems = [(r, m.rows[r - 1]) for r in range(1, m.n + 1)]
    val = dict(zip(elems, m.vals))
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Pred):
        return f.letter in val[env[f.var]]
    if isinstance(f, SuccR):
        (r, c), (r2, c2) = env[f.src], env[f.dst]
        return c2 == c + 1
    if isinstance(f, SuccD):
        (r, c), (r2, c2) = env[f.src], env[f.dst]
        return r2 == r + 1
    if isinstance(f, Not):
        return not naive_eval(m, f.sub, env)
    if isinstance(f, And):
        return naive_eval(m, f.left, env) and naive_eval(m, f.right, env)
    if isinstance(f, Exists):
        return any(naive_eval(m, f.body, {**env, f.var: e}) for e in elems)
    if isinstance(f, Forall):
        return all(naive_eval(m, f.body, {**env, f.var: e}) for e in elems)
    return naive_eval(m, f.left, env) or naive_eval(m, f.right, env)


def test_eval_running_example():
    assert eval_formula(FIG1B, parse_formula(FIG1B_TEXT))


def test_eval_constant():
    assert eval_formula(FIG1B, Const(True))


def test_eval_singleton_has_no_successor():
    m = ValuedPermutation((1,), (frozenset("p"),))
    assert not eval_formula(m, parse_formula("exists x. exists y. x -> y"))


def test_eval_unbound_variable():
    with pytest.raises(FormulaError):
        eval_formula(FIG1B, Pred("p", "x"))


def test_eval_agrees_with_naive_evaluator():
    rng = random.Random(2)
    for _ in range(400):
        m = random_model(rng, rng.randint(1, 6))
        f = random_formula(rng, 4)
        assert eval_formula(m, f) == naive_eval(m, f, {})


# --- atomic satisfaction ---------------------------------------------------------

PSI = parse_formula("x -> y & (a(x) | !b(y))")


def test_atomic_examples():
    assert atomic_sat(AtomContext(frozenset("b"), NType.NE, frozenset("ac")), PSI)
    assert not atomic_sat(AtomContext(frozenset("a"), NType.S, frozenset("ab")), PSI)


def test_atomic_self_is_not_a_successor():
    for s in VALS:
        assert not atomic_sat(AtomContext(s, NType.SAME, s), SuccR("x", "y"))
        assert not atomic_sat(AtomContext(s, NType.SAME, s), SuccD("y", "x"))


# a concrete pair realizing each type: (rows, index of x, index of y) in row order
REALIZE = {
    NType.SAME: ((1,), 0, 0),
    NType.E: ((1, 3, 2), 0, 2),      # y one column right, far in rows
    NType.W: ((2, 3, 1), 0, 2),
    NType.S: ((1, 3, 2), 0, 1),      # y one row down, far in columns
    NType.N: ((1, 3, 2), 1, 0),
    NType.SE: ((1, 2), 0, 1),
    NType.NW: ((1, 2), 1, 0),
    NType.SW: ((2, 1), 0, 1),
    NType.NE: ((2, 1), 1, 0),
    NType.FAR: ((1, 3, 5, 2, 4), 0, 2),
}


def test_realizations_have_the_intended_type():
    for t, (rows, i, j) in REALIZE.items():
        p = ValuedPermutation(rows, (frozenset(),) * len(rows))
        assert neighborhood_type(p, (i + 1, rows[i]), (j + 1, rows[j])) is t


def test_atomic_matches_concrete_models():
    rng = random.Random(3)
    for _ in range(300):
        psi = random_qf(rng, 3)
        t = rng.choice(list(NType))
        s = rng.choice(VALS)
        s2 = s if t is NType.SAME else rng.choice(VALS)
        rows, i, j = REALIZE[t]
        vals = [frozenset()] * len(rows)
        vals[i], vals[j] = s, s2
        m = ValuedPermutation(rows, tuple(vals))
        mu = {"x": (i + 1, rows[i]), "y": (j + 1, rows[j])}
        assert atomic_sat(AtomContext(s, t, s2), psi) == eval_formula(m, psi, mu)


# --- normal form -------------------------------------------------------------------

def test_snf_of_forall_exists():
    s = to_snf(parse_formula("forall x. exists y. x -> y"))
    assert s.chi == Const(True) and s.psis == (SuccR("x", "y"),) and not s.fresh


def test_snf_of_exists():
    s = to_snf(parse_formula("exists x. p(x)"))
    assert s.psis == (Pred("p", "y"),) and not s.fresh


def test_snf_of_running_example():
    s = to_snf(parse_formula(FIG1B_TEXT))
    assert s.chi == FIG1B_CHI and s.psis == ()


def test_snf_fresh_letters_are_namespaced():
    s = to_snf(parse_formula("exists x. forall y. p(y) | x -> y"))
    assert s.fresh == {"_snf0"} and s.user_vocabulary() == {"p"}


def test_snf_rejects_open_formula():
    with pytest.raises(FormulaError):
        to_snf(Pred("p", "x"))


def test_snf_shape_and_linear_size():
    rng = random.Random(4)
    for _ in range(200):
        f = random_formula(rng, 4)
        s = to_snf(f)
        assert not free_vars(s.chi) - {"x", "y"}
        assert len(to_text(s.as_formula())) <= 40 * len(to_text(f)) + 40


def _erase(m, fresh):
    return ValuedPermutation(m.rows, tuple(v - fresh for v in m.vals))


def test_snf_equisatisfiable_at_small_size():
    """phi has a model of size <= 4 iff its normal form has one."""
    rng = random.Random(5)
    checked = 0
    while checked < 50:
        f = random_formula(rng, 3)
        s = to_snf(f)
        if len(s.vocabulary) > 4:
            continue
        a = brute_sat(f, SearchBudget(max_n=4, max_letters=4))
        b = brute_sat(s.as_formula(), SearchBudget(max_n=4, max_letters=4))
        assert a.sat == b.sat, to_text(f)
        if b.sat:
            assert eval_formula(_erase(b.model, s.fresh), f)
        checked += 1


def test_snf_expansion_of_every_small_model():
    """Every model of phi expands, by choosing fresh letters, to a model of the normal form."""
    rng = random.Random(6)
    for _ in range(30):
        f = random_formula(rng, 3)
        s = to_snf(f)
        if len(s.fresh) > 2:
            continue
        fresh_vals = [frozenset(c) for k in range(len(s.fresh) + 1)
                      for c in itertools.combinations(sorted(s.fresh), k)]
        for m in itertools.islice(all_models(2), 0, None, 3):
            if not eval_formula(m, f):
                continue
            assert any(eval_formula(ValuedPermutation(m.rows, tuple(v | e for v, e in zip(m.vals, ext))),
                                    s.as_formula())
                       for ext in itertools.product(fresh_vals, repeat=m.n))


def test_letters():
    assert letters(parse_formula(FIG1B_TEXT)) == {"p"}
    assert set(LETTERS) == {"p", "q"}

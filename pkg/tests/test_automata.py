import itertools
import random

import pytest

from helpers import random_nfa, word_nfa
from permlogic.automata import (Alt, AutomatonError, Cat, Cls, Eps, Nfa, Plus, Star, Sym, compile_regex,
                                nfa_intersect, parikh_intersection_nonempty, parikh_member, parikh_of,
                                parikh_word, product, threshold_automaton, universal_automaton)
from permlogic.oracle import brute_parikh


def words(alphabet, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def language(a, max_len):
    return {w for w in words(a.alphabet, max_len) if a.accepts(w)}


def regex_match(r, w):
    """Reference matcher by splitting, independent of the automaton construction."""
    if isinstance(r, Eps):
        return not w
    if isinstance(r, Sym):
        return w == (r.letter,)
    if isinstance(r, Cls):
        return len(w) == 1 and w[0] in r.letters
    if isinstance(r, Alt):
        return any(regex_match(p, w) for p in r.parts)
    if isinstance(r, Cat):
        if not r.parts:
            return not w
        head, rest = r.parts[0], Cat(r.parts[1:])
        return any(regex_match(head, w[:i]) and regex_match(rest, w[i:]) for i in range(len(w) + 1))
    if isinstance(r, Star):
        return not w or regex_match(Plus(r.inner), w)
    # Plus: one nonempty chunk then the rest
    return regex_match(r.inner, w) or any(
        regex_match(r.inner, w[:i]) and regex_match(r, w[i:]) for i in range(1, len(w)))


def random_regex(rng, alphabet, depth):
    if depth == 0 or rng.random() < 0.3:
        k = rng.randint(0, 4)
        if k == 0:
            return Eps()
        if k == 1:
            return Cls(frozenset(rng.sample(alphabet, rng.randint(1, len(alphabet)))))
        return Sym(rng.choice(alphabet))
    k = rng.randint(0, 3)
    if k == 0:
        return Cat(tuple(random_regex(rng, alphabet, depth - 1) for _ in range(rng.randint(1, 3))))
    if k == 1:
        return Alt(tuple(random_regex(rng, alphabet, depth - 1) for _ in range(rng.randint(1, 3))))
    if k == 2:
        return Plus(random_regex(rng, alphabet, depth - 1))
    return Star(random_regex(rng, alphabet, depth - 1))


FIG3_ALPHABET = ("a", "b", "c", "d")


# --- regex compilation ------------------------------------------------------------

def test_letter():
    a = compile_regex(Sym("a"), ("a",))
    assert a.n == 2 and language(a, 3) == {("a",)}


def test_nonempty_heavy_words():
    a = compile_regex(Plus(Cls(frozenset("cd"))), ("c", "d"))
    assert language(a, 4) == {w for w in words("cd", 4) if w}


def test_epsilon():
    assert language(compile_regex(Eps(), ("a",)), 3) == {()}


def test_regex_agrees_with_reference_matcher():
    rng = random.Random(0)
    for _ in range(300):
        alphabet = tuple("abc"[:rng.randint(1, 3)])
        r = random_regex(rng, alphabet, 3)
        a = compile_regex(r, alphabet)
        for w in words(alphabet, 5 if len(alphabet) < 3 else 4):
            assert a.accepts(w) == regex_match(r, w)


def test_nfa_validation():
    with pytest.raises(AutomatonError):
        Nfa(("a",), 1, {0}, {(0, "b", 0)}, {0})
    with pytest.raises(AutomatonError):
        Nfa(("a",), 1, {0}, {(0, "a", 1)}, {0})


# --- products -------------------------------------------------------------------

def test_intersect_idempotent():
    rng = random.Random(1)
    for _ in range(50):
        a = random_nfa(rng, ("a", "b"))
        assert language(nfa_intersect(a, a), 5) == language(a, 5)


def test_intersect_disjoint_stars():
    ab = ("a", "b")
    a_star = compile_regex(Star(Sym("a")), ab)
    b_star = compile_regex(Star(Sym("b")), ab)
    assert language(nfa_intersect(a_star, b_star), 5) == {()}


def test_intersect_alphabet_mismatch():
    with pytest.raises(AutomatonError):
        nfa_intersect(universal_automaton(("a",)), universal_automaton(("b",)))


def test_intersect_random():
    rng = random.Random(2)
    for _ in range(100):
        alphabet = tuple("abc"[:rng.randint(1, 3)])
        a, b = random_nfa(rng, alphabet), random_nfa(rng, alphabet)
        assert language(nfa_intersect(a, b), 4) == language(a, 4) & language(b, 4)


def test_heavy_box_automaton_accepts_row_word():
    # light letters a, b keep their place; the box stands for a nonempty word over c, d
    e1 = compile_regex(Cat((Plus(Cls(frozenset("cd"))), Sym("a"), Sym("b"))), FIG3_ALPHABET)
    guess = product(FIG3_ALPHABET, [word_nfa("ddccdab", FIG3_ALPHABET), e1,
                                     threshold_automaton(FIG3_ALPHABET, ("c", "d"), 1)])
    assert guess.accepts(tuple("ddccdab"))
    assert not guess.accepts(tuple("ddcdab"))


# --- threshold automata ---------------------------------------------------------------

def test_threshold_no_heavy_is_universal():
    t = threshold_automaton(("a", "b"), (), 3)
    assert language(t, 4) == set(words("ab", 4))


def test_threshold_counts():
    t = threshold_automaton(("a",), ("a",), 1)
    assert t.accepts(("a", "a")) and not t.accepts(("a",))


def test_threshold_column_word():
    t = threshold_automaton(FIG3_ALPHABET, ("c", "d"), 1)
    assert t.accepts(tuple("bcddcda"))


def test_threshold_random():
    rng = random.Random(3)
    for _ in range(50):
        alphabet = tuple("abc"[:rng.randint(1, 3)])
        heavy = tuple(x for x in alphabet if rng.random() < 0.5)
        theta = rng.randint(0, 2)
        t = threshold_automaton(alphabet, heavy, theta)
        for w in words(alphabet, 4):
            assert t.accepts(w) == all(w.count(x) > theta for x in heavy)


# --- Parikh images ------------------------------------------------------------------

AB = ("a", "b")


def test_member_examples():
    astar_bstar = compile_regex(Cat((Star(Sym("a")), Star(Sym("b")))), AB)
    assert parikh_member(astar_bstar, {"a": 1, "b": 1})
    ab_star = compile_regex(Star(Cat((Sym("a"), Sym("b")))), AB)
    assert not parikh_member(ab_star, {"a": 2, "b": 1})


def test_member_word_is_accepted():
    ab_star = compile_regex(Star(Cat((Sym("a"), Sym("b")))), AB)
    w = parikh_word(ab_star, (3, 3))
    assert ab_star.accepts(w) and parikh_of(w, AB) == (3, 3)


def test_member_matches_enumeration():
    rng = random.Random(4)
    for _ in range(100):
        alphabet = tuple("abc"[:rng.randint(1, 3)])
        a = random_nfa(rng, alphabet, 3)
        image = brute_parikh(a, 6)
        for v in itertools.product(range(7), repeat=len(alphabet)):
            if sum(v) <= 6:
                assert parikh_member(a, v) == (v in image)


def test_brute_parikh_examples():
    a_star = compile_regex(Star(Sym("a")), ("a",))
    assert brute_parikh(a_star, 2) == {(0,), (1,), (2,)}
    ab_star = compile_regex(Star(Cat((Sym("a"), Sym("b")))), AB)
    assert brute_parikh(ab_star, 4) == {(0, 0), (1, 1), (2, 2)}


def test_intersection_examples():
    a = ("a",)
    assert parikh_intersection_nonempty(compile_regex(Star(Sym("a")), a), word_nfa("a", a)) == (1,)
    ab_star = compile_regex(Star(Cat((Sym("a"), Sym("b")))), AB)
    a_star_b = compile_regex(Cat((Star(Sym("a")), Sym("b"))), AB)
    assert parikh_intersection_nonempty(ab_star, a_star_b) == (1, 1)
    assert parikh_intersection_nonempty(word_nfa("aa", a), word_nfa("a", a)) is None


def test_intersection_needs_connected_support():
    # a cycle on a state unreachable from the start must not be used
    a = Nfa(AB, 3, {0}, {(0, "a", 1), (2, "b", 2)}, {1})
    b = compile_regex(Cat((Sym("a"), Plus(Sym("b")))), AB)
    assert parikh_intersection_nonempty(a, b) is None


def test_intersection_rejects_bad_cap():
    a = universal_automaton(AB)
    with pytest.raises(AutomatonError):
        parikh_intersection_nonempty(a, a, cap=0)


def test_intersection_monotone_in_cap():
    rng = random.Random(5)
    for _ in range(60):
        alphabet = tuple("ab"[:rng.randint(1, 2)])
        a, b = random_nfa(rng, alphabet), random_nfa(rng, alphabet)
        found = False
        for cap in (1, 2, 4, 8):
            v = parikh_intersection_nonempty(a, b, cap)
            if found:
                assert v is not None
            if v is not None:
                found = True
                assert parikh_member(a, v) and parikh_member(b, v)

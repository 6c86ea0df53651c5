"""Random instance generators shared by the test modules."""

import itertools

from permlogic.automata import Cat, Nfa, Sym, compile_regex
from permlogic.constraints import Constraint, GridDomain
from permlogic.logic import And, Exists, Forall, Not, Or, Pred, SuccD, SuccR
from permlogic.perm import (LabeledPermutation, ValuedPermutation, fingerprint_of, maximal_blocks, projection,
                            summary_of)
from permlogic.rlp import (BOX, DIAGONAL, INF, RLP_THRESHOLD, Guess, LabelRestriction, RlpInstance,
                           validate_guess)
from permlogic.sat import ConsistencyContext

LETTERS = ("p", "q")
VALS = (frozenset(), frozenset("p"), frozenset("q"), frozenset("pq"))


def word_nfa(word, alphabet):
    return compile_regex(Cat(tuple(Sym(a) for a in word)), tuple(alphabet))


def random_qf(rng, depth, letters=LETTERS):
    """Quantifier-free formula over x, y."""
    if depth == 0 or rng.random() < 0.3:
        v = rng.choice("xy")
        w = "y" if v == "x" else "x"
        k = rng.randint(0, 3)
        if k == 1:
            return SuccR(v, w)
        if k == 2:
            return SuccD(v, w)
        return Pred(rng.choice(letters), v)
    k = rng.randint(0, 2)
    if k == 0:
        return Not(random_qf(rng, depth - 1, letters))
    op = And if k == 1 else Or
    return op(random_qf(rng, depth - 1, letters), random_qf(rng, depth - 1, letters))


def random_formula(rng, depth, letters=LETTERS, free=()):
    """Formula whose free variables lie in ``free``; closed by default."""
    if depth == 0 or (free and rng.random() < 0.25):
        if not free:
            v = rng.choice("xy")
            return Exists(v, Pred(rng.choice(letters), v)) if rng.random() < 0.5 else \
                Forall(v, Pred(rng.choice(letters), v))
        v = rng.choice(free)
        others = [w for w in free if w != v]
        k = rng.randint(0, 2)
        if k and others:
            return (SuccR if k == 1 else SuccD)(v, others[0])
        return Pred(rng.choice(letters), v)
    k = rng.randint(0, 4)
    if k == 0:
        return Not(random_formula(rng, depth - 1, letters, free))
    if k in (1, 2):
        op = And if k == 1 else Or
        return op(random_formula(rng, depth - 1, letters, free),
                  random_formula(rng, depth - 1, letters, free))
    v = rng.choice("xy")
    inner = tuple(sorted(set(free) | {v}))
    q = Exists if k == 3 else Forall
    return q(v, random_formula(rng, depth - 1, letters, inner))


def random_model(rng, n, vals=VALS):
    rows = list(range(1, n + 1))
    rng.shuffle(rows)
    return ValuedPermutation(tuple(rows), tuple(rng.choice(vals) for _ in range(n)))


def all_models(n, vals=VALS):
    for rows in itertools.permutations(range(1, n + 1)):
        for vs in itertools.product(vals, repeat=n):
            yield ValuedPermutation(rows, vs)


def random_nfa(rng, alphabet, max_states=4, density=0.25, single_init=False):
    n = rng.randint(1, max_states)
    trans = {(q, a, p) for q in range(n) for a in alphabet for p in range(n) if rng.random() < density}
    init = {0} if single_init else ({q for q in range(n) if rng.random() < 0.4} or {0})
    final = {q for q in range(n) if rng.random() < 0.4} or {n - 1}
    return Nfa(alphabet, n, init, trans, final)


def random_rlp(rng):
    alphabet = tuple("ab"[:rng.randint(1, 2)])
    restr = {LabelRestriction(a, t, b) for a in alphabet for b in alphabet for t in DIAGONAL
             if rng.random() < 0.4}
    return RlpInstance(alphabet, restr,
                       random_nfa(rng, alphabet, 3, 0.35, True),
                       random_nfa(rng, alphabet, 3, 0.35, True))


def diagonal_neighbours(lp):
    """Pairs of rows whose elements are diagonally adjacent."""
    return [(r, r + 1) for r in range(1, lp.n) if abs(lp.rows[r] - lp.rows[r - 1]) == 1]



def random_witness_case(rng, theta=RLP_THRESHOLD, restrictions=()):
    """A guess valid for ``restrictions`` plus words realizing it, with equal Parikh vectors."""
    light = [x for x in ("a", "b") if rng.random() < 0.6]
    heavy = ["h", "k"][:rng.randint(1, 2)]
    g = {x: rng.randint(1, 2) for x in light}
    while True:
        labels = [x for x in light for _ in range(g[x])] + [BOX] * rng.randint(1, 3)
        rng.shuffle(labels)
        rows = list(range(1, len(labels) + 1))
        rng.shuffle(rows)
        small = LabeledPermutation(tuple(rows), tuple(labels))
        guess = Guess({**g, **{h: INF for h in heavy}}, small, theta)
        if validate_guess(guess, restrictions)[0]:
            break
    counts = {h: rng.randint(theta + 1, theta + 12) for h in heavy}

    def fill(word):
        pool = [h for h in heavy for _ in range(counts[h])]
        rng.shuffle(pool)
        boxes = word.count(BOX)
        cuts = sorted(rng.sample(range(1, len(pool)), boxes - 1))
        chunks = [pool[i:j] for i, j in zip([0] + cuts, cuts + [len(pool)])]
        out = []
        for x in word:
            out += chunks.pop(0) if x == BOX else [x]
        return tuple(out)

    return guess, fill(projection(small, "→")), fill(projection(small, "↓"))


def random_constraint(rng, n, k, density=1.0):
    """At most ``k`` forbidden cells per line, placed greedily at random."""
    per_row, per_col = [0] * (n + 1), [0] * (n + 1)
    cells = [(r, c) for r in range(1, n + 1) for c in range(1, n + 1)]
    rng.shuffle(cells)
    out = set()
    for r, c in cells:
        if per_row[r] < k and per_col[c] < k and rng.random() < density:
            out.add((r, c))
            per_row[r] += 1
            per_col[c] += 1
    return Constraint(GridDomain.square(n), frozenset(out), k)


def brute_exists(z):
    n = z.domain.n
    return any(all((r, c) not in z.forbidden for r, c in zip(z.domain.rows, p))
               for p in itertools.permutations(z.domain.cols, n))


def random_block_case(rng):
    """A model, one of its maximal blocks as a fingerprint, its context, and the block elements."""
    n = rng.randint(1, 7)
    rows = list(range(1, n + 1))
    rng.shuffle(rows)
    vals = VALS[:rng.randint(1, 4)]
    m = ValuedPermutation(tuple(rows), tuple(rng.choice(vals) for _ in range(n)))
    b = rng.choice(maximal_blocks(m))
    elems = [(r, m.rows[r - 1]) for r in b.rows()]
    return m, fingerprint_of(m, b), ConsistencyContext.of(summary_of(m)), elems

"""Two-variable formulas over two successor relations.

Formulas use exactly the variables ``x`` and ``y``.  ``SuccR(a, b)`` is the
column successor (``a -> b``: ``b`` sits in the next column) and
``SuccD(a, b)`` the row successor (``a |> b``: ``b`` sits in the next row).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator

from .perm import NType

VARS = ("x", "y")
FRESH_PREFIX = "_snf"


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, msg, line, col):
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line = line
        self.col = col


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Pred:
    letter: str
    var: str


@dataclass(frozen=True)
class SuccR:
    src: str
    dst: str


@dataclass(frozen=True)
class SuccD:
    src: str
    dst: str


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Const | Pred | SuccR | SuccD | Not | And | Or | Exists | Forall
TRUE = Const(True)
FALSE = Const(False)


def conj(parts):
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts):
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def iff(a, b):
    return Or(And(a, b), And(Not(a), Not(b)))


def free_vars(f) -> frozenset:
    match f:
        case Const():
            return frozenset()
        case Pred(_, v):
            return frozenset([v])
        case SuccR(a, b) | SuccD(a, b):
            return frozenset([a, b])
        case Not(s):
            return free_vars(s)
        case And(a, b) | Or(a, b):
            return free_vars(a) | free_vars(b)
        case Exists(v, b) | Forall(v, b):
            return free_vars(b) - {v}
    raise TypeError(f"not a formula: {f!r}")


def letters(f) -> frozenset:
    """Propositional letters occurring in ``f``."""
    match f:
        case Pred(p, _):
            return frozenset([p])
        case Not(s) | Exists(_, s) | Forall(_, s):
            return letters(s)
        case And(a, b) | Or(a, b):
            return letters(a) | letters(b)
    return frozenset()


def is_quantifier_free(f) -> bool:
    match f:
        case Exists() | Forall():
            return False
        case Not(s):
            return is_quantifier_free(s)
        case And(a, b) | Or(a, b):
            return is_quantifier_free(a) and is_quantifier_free(b)
    return True


def depth(f) -> int:
    match f:
        case Not(s) | Exists(_, s) | Forall(_, s):
            return 1 + depth(s)
        case And(a, b) | Or(a, b):
            return 1 + max(depth(a), depth(b))
    return 0


def swap_vars(f):
    """Exchange ``x`` and ``y`` everywhere, bound occurrences included."""
    sw = {"x": "y", "y": "x"}
    match f:
        case Const():
            return f
        case Pred(p, v):
            return Pred(p, sw[v])
        case SuccR(a, b):
            return SuccR(sw[a], sw[b])
        case SuccD(a, b):
            return SuccD(sw[a], sw[b])
        case Not(s):
            return Not(swap_vars(s))
        case And(a, b):
            return And(swap_vars(a), swap_vars(b))
        case Or(a, b):
            return Or(swap_vars(a), swap_vars(b))
        case Exists(v, b):
            return Exists(sw[v], swap_vars(b))
        case Forall(v, b):
            return Forall(sw[v], swap_vars(b))
    raise TypeError(f"not a formula: {f!r}")


# --- printing --------------------------------------------------------------

_PREC = {Or: 1, And: 2}


def to_text(f) -> str:
    """Render in the concrete syntax accepted by :func:`parse_formula`."""
    match f:
        case Const(v):
            return "true" if v else "false"
        case Pred(p, v):
            return f"{p}({v})"
        case SuccR(a, b):
            return f"{a} -> {b}"
        case SuccD(a, b):
            return f"{a} |> {b}"
        case Not(s):
            return "!" + _wrap(s, 3)
        case And(a, b):
            return f"{_wrap(a, 2)} & {_wrap(b, 3)}"
        case Or(a, b):
            return f"{_wrap(a, 1)} | {_wrap(b, 2)}"
        case Exists(v, b):
            return f"exists {v}. {to_text(b)}"
        case Forall(v, b):
            return f"forall {v}. {to_text(b)}"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f, prec):
    match f:
        case SuccR() | SuccD() | Exists() | Forall():
            return f"({to_text(f)})"
        case And() | Or():
            if _PREC[type(f)] < prec:
                return f"({to_text(f)})"
    return to_text(f)


# --- parsing ---------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _tokenize(text):
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            pos, line, col = pos + 1, line + 1, 1
            continue
        if ch.isspace():
            pos, col = pos + 1, col + 1
            continue
        if text.startswith(("->", "|>"), pos):
            tok = text[pos:pos + 2]
        elif ch in "!&|().":
            tok = ch
        else:
            m = _IDENT.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {ch!r}", line, col)
            tok = m.group()
        tokens.append((tok, line, col))
        pos, col = pos + len(tok), col + len(tok)
    tokens.append(("<eof>", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, expected=None):
        tok, line, col = self.toks[self.i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", line, col)
        self.i += 1
        return tok

    def error(self, msg):
        _, line, col = self.toks[self.i]
        return ParseError(msg, line, col)

    def var(self):
        tok, line, col = self.toks[self.i]
        if tok not in VARS:
            raise ParseError(f"variable must be x or y, found {tok!r}", line, col)
        self.i += 1
        return tok

    def formula(self):
        if self.peek() in ("forall", "exists"):
            q = self.take()
            v = self.var()
            self.take(".")
            body = self.formula()
            return Forall(v, body) if q == "forall" else Exists(v, body)
        return self.disjunction()

    def disjunction(self):
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("forall", "exists"):
            return self.formula()
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        return self.atom()

    def atom(self):
        tok, line, col = self.toks[self.i]
        if tok in ("true", "false"):
            self.i += 1
            return Const(tok == "true")
        # "v" is accepted as an ASCII spelling of "|>" between two variables
        if tok in VARS and self.toks[self.i + 1][0] in ("->", "|>", "v"):
            a = self.take()
            op = self.take()
            b = self.var()
            return SuccR(a, b) if op == "->" else SuccD(a, b)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) and tok not in ("forall", "exists"):
            if self.toks[self.i + 1][0] != "(":
                if len(tok) == 1 and tok.isalpha():
                    raise ParseError(f"variable must be x or y, found {tok!r}", line, col)
                raise ParseError(f"expected '(' after letter {tok!r}", line, col)
            self.i += 1
            self.take("(")
            v = self.var()
            self.take(")")
            return Pred(tok, v)
        raise ParseError(f"unexpected token {tok!r}", line, col)


def parse_formula(text: str):
    p = _Parser(text)
    f = p.formula()
    if p.peek() != "<eof>":
        raise p.error(f"trailing input {p.peek()!r}")
    return f


# --- semantics -------------------------------------------------------------

def eval_formula(m, f, mu=None) -> bool:
    """Truth of ``f`` in the valued permutation ``m`` under assignment ``mu``.

    ``mu`` maps variable names to elements ``(row, col)``.
    """
    mu = dict(mu or {})
    missing = free_vars(f) - mu.keys()
    if missing:
        raise FormulaError(f"unbound free variable(s): {sorted(missing)}")
    return _eval(m, f, mu)


def _eval(m, f, mu):
    match f:
        case Const(v):
            return v
        case Pred(p, v):
            return p in m.sigma[mu[v]]
        case SuccR(a, b):
            return mu[b][1] == mu[a][1] + 1
        case SuccD(a, b):
            return mu[b][0] == mu[a][0] + 1
        case Not(s):
            return not _eval(m, s, mu)
        case And(a, b):
            return _eval(m, a, mu) and _eval(m, b, mu)
        case Or(a, b):
            return _eval(m, a, mu) or _eval(m, b, mu)
        case Exists(v, b):
            return any(_eval(m, b, {**mu, v: e}) for e in m.elements())
        case Forall(v, b):
            return all(_eval(m, b, {**mu, v: e}) for e in m.elements())
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class AtomContext:
    """Valuation of ``x``, neighborhood type from ``x`` to ``y``, valuation of ``y``."""
    s: frozenset
    t: NType
    s2: frozenset


_RIGHT = {NType.NE, NType.E, NType.SE}    # y in column after x
_LEFT = {NType.NW, NType.W, NType.SW}     # x in column after y
_BELOW = {NType.SE, NType.S, NType.SW}    # y in row after x
_ABOVE = {NType.NE, NType.N, NType.NW}    # x in row after y


def atomic_sat(ctx: AtomContext, psi) -> bool:
    match psi:
        case Const(v):
            return v
        case Pred(p, v):
            return p in (ctx.s if v == "x" else ctx.s2)
        case SuccR(a, b):
            if a == b:
                return False
            return ctx.t in (_RIGHT if a == "x" else _LEFT)
        case SuccD(a, b):
            if a == b:
                return False
            return ctx.t in (_BELOW if a == "x" else _ABOVE)
        case Not(s):
            return not atomic_sat(ctx, s)
        case And(a, b):
            return atomic_sat(ctx, a) and atomic_sat(ctx, b)
        case Or(a, b):
            return atomic_sat(ctx, a) or atomic_sat(ctx, b)
    raise FormulaError(f"atomic_sat needs a quantifier-free formula, got {psi!r}")


# --- Scott normal form -----------------------------------------------------

@dataclass(frozen=True)
class SnfFormula:
    """``forall x forall y. chi  &  AND_i forall x exists y. psis[i]``."""
    chi: object
    psis: tuple
    vocabulary: frozenset
    fresh: frozenset = field(default=frozenset())

    def user_vocabulary(self):
        return self.vocabulary - self.fresh

    def as_formula(self):
        parts = [Forall("x", Forall("y", self.chi))]
        parts += [Forall("x", Exists("y", p)) for p in self.psis]
        return conj(parts)


def _conjuncts(f):
    if isinstance(f, And):
        yield from _conjuncts(f.left)
        yield from _conjuncts(f.right)
    else:
        yield f


def _to_xy(f, outer):
    """Rename so the outer variable becomes ``x``."""
    return f if outer == "x" else swap_vars(f)


class _SnfBuilder:
    def __init__(self):
        self.chis = []
        self.psis = []
        self.fresh = []

    def new_letter(self):
        name = f"{FRESH_PREFIX}{len(self.fresh)}"
        self.fresh.append(name)
        return name

    def define(self, node, occ_var):
        """Replace innermost quantified ``node`` by a fresh letter applied to ``occ_var``."""
        v, body = node.var, node.body
        w = "y" if v == "x" else "x"
        p = self.new_letter()
        if not free_vars(node):
            # sentence-level: the letter is constant over the structure
            self.chis.append(iff(Pred(p, "x"), Pred(p, "y")))
        head = Pred(p, w)
        # the axioms quantify w outside, v inside
        if isinstance(node, Exists):
            self.psis.append(_to_xy(Or(Not(head), body), w))
            self.chis.append(_to_xy(Or(Not(body), head), w))
        else:
            self.chis.append(_to_xy(Or(Not(head), body), w))
            self.psis.append(_to_xy(Or(head, Not(body)), w))
        return Pred(p, occ_var)

    def flatten(self, f, bound):
        """Bottom-up renaming until ``f`` is quantifier-free."""
        match f:
            case Not(s):
                return Not(self.flatten(s, bound))
            case And(a, b):
                return And(self.flatten(a, bound), self.flatten(b, bound))
            case Or(a, b):
                return Or(self.flatten(a, bound), self.flatten(b, bound))
            case Exists(v, b) | Forall(v, b):
                node = type(f)(v, self.flatten(b, bound + (v,)))
                fv = free_vars(node)
                occ = next(iter(fv)) if fv else (bound[-1] if bound else "x")
                return self.define(node, occ)
        return f

    def add_sentence(self, c):
        match c:
            case Forall(u, Forall(v, body)) if u != v:
                self.chis.append(_to_xy(self.flatten(body, (u, v)), u))
                return
            case Forall(u, Exists(v, body)) if u != v:
                self.psis.append(_to_xy(self.flatten(body, (u, v)), u))
                return
            case Forall(u, body):
                self.chis.append(_to_xy(self.flatten(body, (u,)), u))
                return
            case Exists(u, body):
                # nonempty structures: exists u. b  ==  forall x exists y. b[y]
                b = self.flatten(body, (u,))
                self.psis.append(b if u == "y" else swap_vars(b))
                return
        self.chis.append(self.flatten(c, ()))


def to_snf(f) -> SnfFormula:
    if free_vars(f):
        raise FormulaError(f"formula is not closed: free {sorted(free_vars(f))}")
    b = _SnfBuilder()
    for c in _conjuncts(f):
        b.add_sentence(c)
    chis = [c for c in b.chis if c != TRUE]
    chi = conj(chis)
    vocab = letters(chi).union(*(letters(p) for p in b.psis)) | letters(f)
    return SnfFormula(chi, tuple(b.psis), frozenset(vocab), frozenset(b.fresh))


def valuations(vocabulary) -> Iterator[frozenset]:
    """All subsets of ``vocabulary`` in canonical order (by size, then name)."""
    letters_ = sorted(vocabulary)
    for k in range(len(letters_) + 1):
        for combo in itertools.combinations(letters_, k):
            yield frozenset(combo)

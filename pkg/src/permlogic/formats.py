"""Readers and writers for the text formats ``.fo``, ``.pm``, ``.con``, ``.nfa`` and ``.rlp``.

All formats are UTF-8 and line oriented (except ``.fo``); ``#`` starts a
comment.  Errors carry the 1-based line and column of the offending token.
"""

from __future__ import annotations

from .automata import AutomatonError, Nfa
from .constraints import Constraint, ConstraintError, GridDomain
from .logic import ParseError, parse_formula, to_text
from .perm import LabeledPermutation, NType, PermError, ValuedPermutation
from .rlp import LabelRestriction, RlpError, RlpInstance


class FormatError(ValueError):
    def __init__(self, msg, line=0, col=0):
        where = f" at line {line}, column {col}" if line else ""
        super().__init__(f"{msg}{where}")
        self.line = line
        self.col = col


def _lines(text):
    """Yield ``(line_no, [(col, token), ...])`` for non-blank, comment-free lines."""
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        toks = []
        i = 0
        while i < len(body):
            if body[i].isspace():
                i += 1
                continue
            j = i
            while j < len(body) and not body[j].isspace():
                j += 1
            toks.append((i + 1, body[i:j]))
            i = j
        if toks:
            yield no, toks


def _int(tok, no):
    col, s = tok
    try:
        return int(s)
    except ValueError:
        raise FormatError(f"expected an integer, got {s!r}", no, col) from None


def _ints(toks, no):
    """Integers from tokens that may also be comma separated."""
    out = []
    for col, s in toks:
        off = 0
        for part in s.split(","):
            if part:
                out.append(_int((col + off, part), no))
            off += len(part) + 1
    return out


def _header(knobs):
    """Comment lines echoing the effective knobs; an unset cap prints as ``auto``."""
    if not knobs:
        return ""
    return "".join(f"# {k} = {'auto' if v is None else v}\n" for k, v in knobs.items())


# --- formulas -----------------------------------------------------------------------

def read_formula(text):
    try:
        return parse_formula(text)
    except ParseError as e:
        raise FormatError(str(e).split(" at line ")[0], e.line, e.col) from None


def write_formula(f, knobs=None):
    return _header(knobs) + to_text(f) + "\n"


# --- models -------------------------------------------------------------------------

def read_model(text) -> ValuedPermutation:
    lines = list(_lines(text))
    if not lines:
        raise FormatError("empty model file", 1, 1)
    no, toks = lines[0]
    if len(toks) != 2 or toks[0][1] != "n":
        raise FormatError("first line must be 'n <N>'", no, toks[0][0])
    n = _int(toks[1], no)
    if n < 1:
        raise FormatError("n must be positive", no, toks[1][0])
    if len(lines) - 1 != n:
        where = lines[-1][0] if len(lines) > 1 else no
        raise FormatError(f"expected {n} element lines, found {len(lines) - 1}", where, 1)
    sigma = {}
    seen_r, seen_c = set(), set()
    for no, toks in lines[1:]:
        if len(toks) != 3:
            raise FormatError("element line must be '<r> <c> <letters>'", no, toks[0][0])
        r, c = _int(toks[0], no), _int(toks[1], no)
        if not 1 <= r <= n:
            raise FormatError(f"row {r} outside 1..{n}", no, toks[0][0])
        if not 1 <= c <= n:
            raise FormatError(f"column {c} outside 1..{n}", no, toks[1][0])
        if r in seen_r:
            raise FormatError(f"row {r} appears twice", no, toks[0][0])
        if c in seen_c:
            raise FormatError(f"column {c} appears twice", no, toks[1][0])
        seen_r.add(r)
        seen_c.add(c)
        col, s = toks[2]
        letters = [] if s == "-" else s.split(",")
        if any(not a.isidentifier() for a in letters):
            raise FormatError(f"bad letter list {s!r}", no, col)
        sigma[(r, c)] = letters
    try:
        return ValuedPermutation.from_elements(sigma)
    except PermError as e:
        raise FormatError(str(e), lines[0][0], 1) from None


def write_model(m, knobs=None) -> str:
    if isinstance(m, LabeledPermutation):
        m = m.to_valued()
    out = [_header(knobs), f"n {m.n}\n"]
    for (r, c), v in zip(m.elements(), m.vals):
        out.append(f"{r} {c} {','.join(sorted(v)) if v else '-'}\n")
    return "".join(out)


def labeled_of(m: ValuedPermutation) -> LabeledPermutation:
    """The labeled permutation of a model whose valuations are all singletons."""
    if any(len(v) != 1 for v in m.vals):
        raise FormatError("a labeled permutation needs exactly one letter per element")
    return LabeledPermutation(m.rows, tuple(next(iter(v)) for v in m.vals))


# --- constraints ----------------------------------------------------------------------

def read_constraint(text) -> Constraint:
    lines = list(_lines(text))
    expect = ("rows", "cols", "k")
    if len(lines) < 3:
        raise FormatError("constraint file needs 'rows', 'cols' and 'k' lines", len(lines) + 1, 1)
    parsed = []
    for (no, toks), word in zip(lines, expect):
        if toks[0][1] != word:
            raise FormatError(f"expected '{word}'", no, toks[0][0])
        parsed.append(_ints(toks[1:], no))
    rows, cols, k = parsed
    if len(k) != 1:
        raise FormatError("'k' takes one integer", lines[2][0], lines[2][1][0][0])
    forbidden = set()
    for no, toks in lines[3:]:
        if toks[0][1] != "forbid" or len(toks) != 3:
            raise FormatError("expected 'forbid <r> <c>'", no, toks[0][0])
        forbidden.add((_int(toks[1], no), _int(toks[2], no)))
    try:
        return Constraint(GridDomain(tuple(rows), tuple(cols)), frozenset(forbidden), k[0])
    except ConstraintError as e:
        raise FormatError(str(e), lines[0][0], 1) from None


def write_constraint(z: Constraint, knobs=None) -> str:
    out = [_header(knobs),
           "rows " + " ".join(map(str, z.domain.rows)) + "\n",
           "cols " + " ".join(map(str, z.domain.cols)) + "\n",
           f"k {z.k}\n"]
    out += [f"forbid {r} {c}\n" for r, c in sorted(z.forbidden)]
    return "".join(out)


# --- automata -------------------------------------------------------------------------

def _nfa_from_lines(lines, alphabet=None):
    states = None
    init, final, trans = [], [], []
    first = lines[0][0] if lines else 1
    for no, toks in lines:
        key = toks[0][1]
        if key == "alphabet":
            if alphabet is not None and tuple(t for _, t in toks[1:]) != tuple(alphabet):
                raise FormatError("automaton alphabet differs from the instance alphabet", no, toks[0][0])
            alphabet = tuple(t for _, t in toks[1:])
        elif key == "states":
            if len(toks) != 2:
                raise FormatError("expected 'states <m>'", no, toks[0][0])
            states = _int(toks[1], no)
        elif key == "init":
            init += _ints(toks[1:], no)
        elif key == "final":
            final += _ints(toks[1:], no)
        elif key == "trans":
            if len(toks) != 4:
                raise FormatError("expected 'trans <q> <letter> <q'>'", no, toks[0][0])
            trans.append((_int(toks[1], no), toks[2][1], _int(toks[3], no)))
        else:
            raise FormatError(f"unknown directive {key!r}", no, toks[0][0])
    if alphabet is None:
        raise FormatError("missing 'alphabet' line", first, 1)
    if states is None:
        raise FormatError("missing 'states' line", first, 1)
    try:
        return Nfa(alphabet, states, init, trans, final)
    except AutomatonError as e:
        raise FormatError(str(e), first, 1) from None


def read_nfa(text) -> Nfa:
    return _nfa_from_lines(list(_lines(text)))


def _nfa_body(a: Nfa):
    out = [f"states {a.n}\n",
           "init " + " ".join(map(str, sorted(a.initial))) + "\n",
           "final " + " ".join(map(str, sorted(a.accepting))) + "\n"]
    out += [f"trans {q} {x} {p}\n" for q, x, p in a.sorted_transitions()]
    return out


def write_nfa(a: Nfa, knobs=None) -> str:
    return _header(knobs) + "alphabet " + " ".join(a.alphabet) + "\n" + "".join(_nfa_body(a))


# --- RLP instances ----------------------------------------------------------------------

_RTYPES = {"SE": NType.SE, "NE": NType.NE}


def read_rlp(text) -> RlpInstance:
    lines = list(_lines(text))
    if not lines or lines[0][1][0][1] != "alphabet":
        raise FormatError("first line must be 'alphabet ...'", lines[0][0] if lines else 1, 1)
    alphabet = tuple(t for _, t in lines[0][1][1:])
    restrictions = []
    blocks = {}
    current = None
    for no, toks in lines[1:]:
        key = toks[0][1]
        if key in ("nfa1", "nfa2"):
            if key in blocks:
                raise FormatError(f"repeated '{key}' block", no, toks[0][0])
            current = blocks[key] = []
        elif current is not None:
            current.append((no, toks))
        elif key == "restrict":
            if len(toks) != 4 or toks[2][1] not in _RTYPES:
                raise FormatError("expected 'restrict <a> <SE|NE> <b>'", no, toks[0][0])
            a, b = toks[1][1], toks[3][1]
            for col, x in (toks[1], toks[3]):
                if x not in alphabet:
                    raise FormatError(f"letter {x!r} not in the alphabet", no, col)
            restrictions.append(LabelRestriction(a, _RTYPES[toks[2][1]], b))
        else:
            raise FormatError(f"unknown directive {key!r}", no, toks[0][0])
    for key in ("nfa1", "nfa2"):
        if key not in blocks:
            raise FormatError(f"missing '{key}' block", lines[-1][0], 1)
    nfa1 = _nfa_from_lines(blocks["nfa1"], alphabet)
    nfa2 = _nfa_from_lines(blocks["nfa2"], alphabet)
    try:
        return RlpInstance(alphabet, frozenset(restrictions), nfa1, nfa2)
    except RlpError as e:
        raise FormatError(str(e), lines[0][0], 1) from None


def write_rlp(inst: RlpInstance, knobs=None) -> str:
    names = {v: k for k, v in _RTYPES.items()}
    out = [_header(knobs), "alphabet " + " ".join(inst.alphabet) + "\n"]
    for res in sorted(inst.restrictions, key=lambda x: (x.a, names[x.t], x.b)):
        out.append(f"restrict {res.a} {names[res.t]} {res.b}\n")
    out += ["nfa1\n", *_nfa_body(inst.nfa1), "nfa2\n", *_nfa_body(inst.nfa2)]
    return "".join(out)

"""Valued permutations, neighborhood types, maximal blocks and fingerprints.

Elements are ``(row, col)`` pairs, both 1-based.  A permutation of size ``n``
is stored as ``rows[r - 1] = c``.  The absent boundary valuation is ``None``.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from functools import cached_property


class PermError(ValueError):
    pass


class NType(enum.Enum):
    SAME = "•"
    NE = "↗"
    N = "↑"
    NW = "↖"
    W = "←"
    SW = "↙"
    S = "↓"
    SE = "↘"
    E = "→"
    FAR = "∞"

    def __str__(self):
        return self.value


def _check_bijection(rows):
    n = len(rows)
    if n < 1:
        raise PermError("permutations must be nonempty")
    if sorted(rows) != list(range(1, n + 1)):
        raise PermError(f"not a permutation of [{n}]: {list(rows)}")


class _PermBase:
    rows: tuple

    @property
    def n(self):
        return len(self.rows)

    @cached_property
    def cols(self):
        """``cols[c - 1]`` is the row of the element in column ``c``."""
        out = [0] * self.n
        for r, c in enumerate(self.rows, 1):
            out[c - 1] = r
        return tuple(out)

    def elements(self):
        return [(r, c) for r, c in enumerate(self.rows, 1)]

    def __contains__(self, e):
        r, c = e
        return 1 <= r <= self.n and self.rows[r - 1] == c


@dataclass(frozen=True)
class ValuedPermutation(_PermBase):
    """``rows[r-1]`` is the column of row ``r``; ``vals[r-1]`` its valuation."""
    rows: tuple
    vals: tuple

    def __post_init__(self):
        _check_bijection(self.rows)
        if len(self.vals) != len(self.rows):
            raise PermError("one valuation per element required")

    @classmethod
    def from_elements(cls, sigma):
        """Build from a mapping ``{(r, c): iterable_of_letters}``."""
        items = sorted(sigma.items())
        rows = tuple(c for (_, c), _ in items)
        if [r for (r, _), _ in items] != list(range(1, len(items) + 1)):
            raise PermError("rows must be exactly 1..n")
        return cls(rows, tuple(frozenset(v) for _, v in items))

    @cached_property
    def sigma(self):
        return {(r, c): v for (r, c), v in zip(self.elements(), self.vals)}

    def row_val(self, r):
        """Valuation of the element in row ``r``, or ``None`` off the edge."""
        return self.vals[r - 1] if 1 <= r <= self.n else None

    def col_val(self, c):
        return self.vals[self.cols[c - 1] - 1] if 1 <= c <= self.n else None


@dataclass(frozen=True)
class LabeledPermutation(_PermBase):
    """A permutation with exactly one letter per element."""
    rows: tuple
    labels: tuple

    def __post_init__(self):
        _check_bijection(self.rows)
        if len(self.labels) != len(self.rows):
            raise PermError("one label per element required")

    @classmethod
    def from_elements(cls, lam):
        items = sorted(lam.items())
        if [r for (r, _), _ in items] != list(range(1, len(items) + 1)):
            raise PermError("rows must be exactly 1..n")
        return cls(tuple(c for (_, c), _ in items), tuple(a for _, a in items))

    @cached_property
    def lam(self):
        return {(r, c): a for (r, c), a in zip(self.elements(), self.labels)}

    def to_valued(self):
        return ValuedPermutation(self.rows, tuple(frozenset([a]) for a in self.labels))


def type_of_offsets(dr, dc):
    """Neighborhood type for a pair whose second element is offset by (dr, dc)."""
    if dr == 0 and dc == 0:
        return NType.SAME
    if dr == 1:
        return {1: NType.SE, -1: NType.SW}.get(dc, NType.S)
    if dr == -1:
        return {1: NType.NE, -1: NType.NW}.get(dc, NType.N)
    if dc == 1:
        return NType.E
    if dc == -1:
        return NType.W
    return NType.FAR


def neighborhood_type(p, e1, e2) -> NType:
    if e1 not in p or e2 not in p:
        raise PermError(f"{e1 if e1 not in p else e2} is not an element")
    return type_of_offsets(e2[0] - e1[0], e2[1] - e1[1])


# --- blocks ----------------------------------------------------------------

BLOCK_TYPES = (NType.SAME, NType.SE, NType.NE)


@dataclass(frozen=True)
class Block:
    """Region ``[i, i+k] x [j, j+k]`` whose elements form one diagonal."""
    i: int
    j: int
    k: int
    btype: NType

    def rows(self):
        return range(self.i, self.i + self.k + 1)

    def elements(self):
        if self.btype is NType.NE:
            return [(self.i + t, self.j + self.k - t) for t in range(self.k + 1)]
        return [(self.i + t, self.j + t) for t in range(self.k + 1)]


def maximal_blocks(p) -> list:
    """Partition the elements of ``p`` into maximal diagonal runs, by top row."""
    rows = p.rows
    out = []
    start, direction = 1, 0
    for r in range(2, p.n + 2):
        step = rows[r - 1] - rows[r - 2] if r <= p.n else None
        if step in (1, -1) and direction in (0, step):
            direction = step
            continue
        k = r - 1 - start
        if k == 0:
            out.append(Block(start, rows[start - 1], 0, NType.SAME))
        elif direction == 1:
            out.append(Block(start, rows[start - 1], k, NType.SE))
        else:
            out.append(Block(start, rows[r - 2], k, NType.NE))
        start, direction = r, 0
    return out


def block_of(p, blocks=None):
    """Map each row to the index of its maximal block."""
    blocks = maximal_blocks(p) if blocks is None else blocks
    owner = {}
    for idx, b in enumerate(blocks):
        for r in b.rows():
            owner[r] = idx
    return owner


def _val_key(v):
    return (0,) if v is None else (1, len(v), tuple(sorted(v)))


@dataclass(frozen=True)
class Fingerprint:
    btype: NType
    bR_minus: frozenset | None
    bR_plus: frozenset | None
    bD_minus: frozenset | None
    bD_plus: frozenset | None
    seq: tuple

    def __post_init__(self):
        if not self.seq:
            raise PermError("fingerprint sequence must be nonempty")
        if (self.btype is NType.SAME) != (len(self.seq) == 1):
            raise PermError("type • exactly for single-element blocks")

    @property
    def header(self):
        return (self.btype, self.bR_minus, self.bR_plus, self.bD_minus, self.bD_plus)

    @property
    def tau_r(self):
        """Row-order string: row boundary, sequence, row boundary."""
        return (self.bR_minus, *self.seq, self.bR_plus)

    @property
    def tau_d(self):
        """Column-order string: column boundary, sequence by column, column boundary."""
        body = self.seq if self.btype is NType.SE else self.seq[::-1]
        return (self.bD_minus, *body, self.bD_plus)

    def sort_key(self):
        return (len(self.seq), BLOCK_TYPES.index(self.btype),
                tuple(_val_key(v) for v in self.seq),
                tuple(_val_key(v) for v in self.header[1:]))

    def __str__(self):
        def show(v):
            return "⊥" if v is None else "{" + ",".join(sorted(v)) + "}"
        return (f"({self.btype}, {show(self.bR_minus)}, {show(self.bR_plus)}, "
                f"{show(self.bD_minus)}, {show(self.bD_plus)}, "
                f"⟨{' '.join(show(v) for v in self.seq)}⟩)")


def fingerprint_of(m: ValuedPermutation, b: Block) -> Fingerprint:
    if b not in maximal_blocks(m):
        raise PermError(f"{b} is not a maximal block")
    last_col = b.j + b.k
    return Fingerprint(
        b.btype,
        m.row_val(b.i - 1),
        m.row_val(b.i + b.k + 1),
        m.col_val(b.j - 1),
        m.col_val(last_col + 1),
        tuple(m.row_val(r) for r in b.rows()),
    )


def fingerprints(m) -> list:
    return [fingerprint_of(m, b) for b in maximal_blocks(m)]


def place_block(fp: Fingerprint, i: int, j: int):
    """Elements and valuations of a block with fingerprint ``fp`` at top-left ``(i, j)``."""
    k = len(fp.seq) - 1
    b = Block(i, j, k, fp.btype)
    return list(zip(b.elements(), fp.seq))


def projection(lp: LabeledPermutation, direction: str) -> tuple:
    """Row-order (``"→"``) or column-order (``"↓"``) word of labels."""
    if direction in ("→", "row", "r"):
        return tuple(lp.labels)
    if direction in ("↓", "col", "d"):
        return tuple(lp.labels[r - 1] for r in lp.cols)
    raise ValueError(f"unknown direction {direction!r}")


# --- summaries -------------------------------------------------------------

@dataclass(frozen=True)
class Summary:
    X: frozenset
    Y: frozenset
    v1: frozenset
    v2: frozenset
    v3: frozenset

    def __post_init__(self):
        if self.v1 & self.v2 or self.v1 & self.v3 or self.v2 & self.v3:
            raise PermError("v-buckets must be disjoint")

    def count_class(self, g):
        """Exact count 1..3 of valuation ``g``, 4 meaning "four or more"."""
        for i, v in enumerate((self.v1, self.v2, self.v3), 1):
            if g in v:
                return i
        return 4


def valuations_of(X) -> frozenset:
    return frozenset(v for tau in X for v in tau.tau_r if v is not None)


def summary_of(m: ValuedPermutation) -> Summary:
    X = frozenset(fingerprints(m))
    counts = Counter(m.vals)
    buckets = [frozenset(v for v, k in counts.items() if k == i) for i in (1, 2, 3)]
    return Summary(X, valuations_of(X), *buckets)


# --- surgery ---------------------------------------------------------------

def cut_region(m: ValuedPermutation, r, c, r2, c2) -> ValuedPermutation:
    """Remove the elements of ``[r+1, r2] x [c+1, c2]`` and renumber."""
    if (r, c) not in m or (r2, c2) not in m:
        raise PermError("cut corners must be elements")
    if not (r < r2 and c < c2):
        raise PermError("cut corners must satisfy r < r2 and c < c2")
    cut_rows = range(r + 1, r2 + 1)
    if r2 - r != c2 - c or any(not c < m.rows[s - 1] <= c2 for s in cut_rows):
        raise PermError("cut rectangle does not hold a sub-permutation")
    keep = [s for s in range(1, m.n + 1) if s not in cut_rows]
    col_shift = c2 - c
    rows = tuple(m.rows[s - 1] - (col_shift if m.rows[s - 1] > c2 else 0) for s in keep)
    return ValuedPermutation(rows, tuple(m.vals[s - 1] for s in keep))


def replace_block(m: ValuedPermutation, target: Block, donor: Fingerprint) -> ValuedPermutation:
    """Overwrite the valuations of ``target`` with the sequence of ``donor``."""
    fp = fingerprint_of(m, target)
    if fp.header != donor.header:
        raise PermError("donor header differs from the target block's header")
    if len(fp.seq) != len(donor.seq):
        raise PermError("donor and target blocks differ in size")
    vals = list(m.vals)
    for t, v in enumerate(donor.seq):
        vals[target.i + t - 1] = v
    return ValuedPermutation(m.rows, tuple(vals))


_INT64_MAX = 2 ** 63 - 1


def block_bound(letter_count: int) -> int:
    """Largest block size a minimal model needs, for ``letter_count`` letters."""
    if letter_count < 0:
        raise ValueError("letter_count must be nonnegative")
    v = letter_count
    out = 3 * 2 ** (4 * v + 3) + 2 ** (3 * (v + 1)) + 3 * 2 ** v
    if out > _INT64_MAX:
        raise OverflowError(f"block bound for {letter_count} letters exceeds 64-bit range")
    return out


def render(m) -> str:
    """ASCII grid for debugging; rows top to bottom."""
    lines = []
    for r in range(1, m.n + 1):
        cells = ["."] * m.n
        lab = m.labels[r - 1] if isinstance(m, LabeledPermutation) else \
            ("".join(sorted(m.vals[r - 1])) or "-")
        cells[m.rows[r - 1] - 1] = str(lab)[:3]
        lines.append(" ".join(f"{c:>3}" for c in cells))
    return "\n".join(lines)

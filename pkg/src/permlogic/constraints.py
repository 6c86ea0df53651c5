"""Permutations avoiding forbidden cells, built by bipartite matching.

A constraint lives on a grid ``S x T`` of row and column indices (not
necessarily contiguous).  Matching is deterministic: the permutation returned
is the lexicographically least one in row order.
"""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_THRESHOLD = 17


class ConstraintError(ValueError):
    pass


class LayerInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class GridDomain:
    rows: tuple
    cols: tuple

    def __post_init__(self):
        if len(self.rows) != len(self.cols) or not self.rows:
            raise ConstraintError("grid needs |S| = |T| >= 1")
        object.__setattr__(self, "rows", tuple(sorted(set(self.rows))))
        object.__setattr__(self, "cols", tuple(sorted(set(self.cols))))
        if len(self.rows) != len(self.cols):
            raise ConstraintError("grid rows/cols must be distinct integers")

    @classmethod
    def square(cls, n):
        return cls(tuple(range(1, n + 1)), tuple(range(1, n + 1)))

    @property
    def n(self):
        return len(self.rows)


@dataclass(frozen=True)
class Constraint:
    domain: GridDomain
    forbidden: frozenset
    k: int

    def __post_init__(self):
        rs, cs = set(self.domain.rows), set(self.domain.cols)
        if any(r not in rs or c not in cs for r, c in self.forbidden):
            raise ConstraintError("forbidden cell outside the grid")
        if self.line_load() > self.k:
            raise ConstraintError(f"a line holds more than k={self.k} forbidden cells")

    def line_load(self):
        """Largest number of forbidden cells in any single row or column."""
        per_row, per_col = {}, {}
        for r, c in self.forbidden:
            per_row[r] = per_row.get(r, 0) + 1
            per_col[c] = per_col.get(c, 0) + 1
        return max([0, *per_row.values(), *per_col.values()])


@dataclass(frozen=True)
class GridPermutation:
    domain: GridDomain
    elements: frozenset

    def __post_init__(self):
        if sorted(r for r, _ in self.elements) != list(self.domain.rows) or \
                sorted(c for _, c in self.elements) != list(self.domain.cols):
            raise ConstraintError("not a permutation over the grid")

    def normalized(self):
        """Row-to-column tuple of the order-isomorphic permutation of [n]."""
        col_rank = {c: i for i, c in enumerate(self.domain.cols, 1)}
        by_row = dict(self.elements)
        return tuple(col_rank[by_row[r]] for r in self.domain.rows)


def _lexmin_matching(n, adj):
    """Lexicographically least perfect matching of rows 0..n-1, or None.

    ``adj[i]`` lists allowed columns of row ``i`` in ascending order.
    """
    match_row = [-1] * n
    match_col = [-1] * n

    def augment(i, seen):
        for c in adj[i]:
            if seen[c]:
                continue
            seen[c] = True
            if match_col[c] < 0 or augment(match_col[c], seen):
                match_row[i], match_col[c] = c, i
                return True
        return False

    for i in range(n):
        if not augment(i, [False] * n):
            return None

    # Walk rows in order, moving each row to the least column it can take while
    # later rows re-route along an alternating path.
    fixed = [False] * n
    radj = [[] for _ in range(n)]
    for i in range(n):
        for c in adj[i]:
            radj[c].append(i)
    for i in range(n):
        target = match_row[i]
        parent = {target: None}
        queue = [target]
        for col in queue:
            for r in radj[col]:
                if r == i or fixed[r]:
                    continue
                mc = match_row[r]
                if mc not in parent:
                    parent[mc] = col
                    queue.append(mc)
        best = min(c for c in adj[i] if c in parent)
        if best != target:
            chain = []
            col = best
            while col != target:
                chain.append((match_col[col], parent[col]))
                col = parent[col]
            for mover, nxt in chain:
                match_row[mover], match_col[nxt] = nxt, mover
            match_row[i], match_col[best] = best, i
        fixed[i] = True
    return match_row


def construct_permutation(z: Constraint):
    """A permutation over ``z.domain`` avoiding every forbidden cell, or None."""
    rows, cols = z.domain.rows, z.domain.cols
    adj = [[ci for ci, c in enumerate(cols) if (r, c) not in z.forbidden] for r in rows]
    m = _lexmin_matching(len(rows), adj)
    if m is None:
        return None
    return GridPermutation(z.domain, frozenset((rows[i], cols[m[i]]) for i in range(len(rows))))


def guaranteed_exists(n: int, k: int) -> bool:
    """Sufficient condition for every (n, k)-constraint to be satisfiable."""
    return n > 2 * k


def diagonal_neighbors(cell):
    r, c = cell
    return [(r - 1, c - 1), (r - 1, c + 1), (r + 1, c - 1), (r + 1, c + 1)]


def adjacency_cells(grid_cells, placed):
    """Cells of ``grid_cells`` diagonally adjacent to some cell of ``placed``."""
    hit = set()
    for e in placed:
        hit.update(diagonal_neighbors(e))
    return frozenset(cell for cell in grid_cells if cell in hit)


def rank_classes(values):
    """Split sorted ``values`` into odd-rank and even-rank members (1-based)."""
    values = sorted(values)
    return tuple(values[0::2]), tuple(values[1::2])


def _constraint(domain, forbidden):
    z = Constraint(domain, forbidden, 10 ** 9)
    return Constraint(domain, forbidden, z.line_load())


def sparse_layer(grid: GridDomain, placed, theta: int = DEFAULT_THRESHOLD) -> GridPermutation:
    """Permutation over ``grid`` with no element diagonally adjacent to
    ``placed`` or to another returned element.

    Two phases: odd-rank rows/columns first, then even-rank ones with the
    phase-one output added to the obstacles.
    """
    if grid.n < theta + 1:
        raise ConstraintError(f"sparse_layer needs at least {theta + 1} rows, grid has {grid.n}")
    placed = frozenset(placed)
    odd_rows, even_rows = rank_classes(grid.rows)
    odd_cols, even_cols = rank_classes(grid.cols)

    sub1 = GridDomain(odd_rows, odd_cols)
    cells1 = {(r, c) for r in odd_rows for c in odd_cols}
    z1 = _constraint(sub1, adjacency_cells(cells1, placed))
    p1 = construct_permutation(z1)
    if p1 is None:
        raise LayerInfeasible(f"odd-rank phase has no matching ({sub1.n} lines)")

    out = set(p1.elements)
    if even_rows:
        sub2 = GridDomain(even_rows, even_cols)
        cells2 = {(r, c) for r in even_rows for c in even_cols}
        z2 = _constraint(sub2, adjacency_cells(cells2, placed | p1.elements))
        p2 = construct_permutation(z2)
        if p2 is None:
            raise LayerInfeasible(f"even-rank phase has no matching ({sub2.n} lines)")
        out |= p2.elements
    return GridPermutation(grid, frozenset(out))

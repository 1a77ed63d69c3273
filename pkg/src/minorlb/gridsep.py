"""Mechanical checks of the grid separator inequalities.

A :class:`GridSubset` of ``GRID_n`` with ``|A| = beta**2``.  Every comparison
against ``beta`` is carried out on squares, so no square root is taken.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GridSubset:
    n: int
    cells: frozenset

    def __post_init__(self):
        cells = frozenset((int(r), int(c)) for r, c in self.cells)
        for r, c in cells:
            if not (0 <= r < self.n and 0 <= c < self.n):
                raise ValueError(f"cell {(r, c)} outside the {self.n}x{self.n} grid")
        object.__setattr__(self, "cells", cells)

    @property
    def beta_squared(self) -> int:
        return len(self.cells)

    def within_size_hypothesis(self) -> bool:
        """|A| <= n^2 / 2."""
        return 2 * len(self.cells) <= self.n * self.n

    @classmethod
    def from_ids(cls, n: int, ids) -> "GridSubset":
        return cls(n, frozenset(divmod(int(v), n) for v in ids))


def rows_cols_intersected_not_filled(a: GridSubset) -> tuple[int, int]:
    n = a.n
    row_hits = [0] * n
    col_hits = [0] * n
    for r, c in a.cells:
        row_hits[r] += 1
        col_hits[c] += 1
    rows = sum(1 for h in row_hits if 0 < h < n)
    cols = sum(1 for h in col_hits if 0 < h < n)
    return rows, cols


def separator_case(a: GridSubset) -> str:
    """Which family reaches beta: ``rows``, ``cols``, ``both`` or ``neither``."""
    rows, cols = rows_cols_intersected_not_filled(a)
    b2 = a.beta_squared
    r_ok, c_ok = rows * rows >= b2, cols * cols >= b2
    if r_ok and c_ok:
        return "both"
    if r_ok:
        return "rows"
    if c_ok:
        return "cols"
    return "neither"


def _boundary(a: GridSubset) -> list[tuple[int, int]]:
    n = a.n
    out = []
    for r, c in sorted(a.cells):
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < n and 0 <= cc < n and (rr, cc) not in a.cells:
                out.append((r, c))
                break
    return out


def far_boundary_hypothesis(a: GridSubset, b) -> bool:
    """``|A| <= n^2/2`` and ``|B| <= beta/4``."""
    return a.within_size_hypothesis() and 16 * len(b) ** 2 <= a.beta_squared


def boundary_far_vertices(a: GridSubset, b) -> set:
    """Cells of ``A`` with a neighbour outside ``A`` and grid distance at least
    ``beta / (4|B|)`` from every cell of ``B``.

    Grid distance in ``GRID_n`` is the Manhattan distance.  A violated
    hypothesis does not stop the computation; see :func:`far_boundary_hypothesis`.
    """
    b = {(int(r), int(c)) for r, c in b}
    if not b <= a.cells:
        raise ValueError("B must be a subset of A")
    boundary = _boundary(a)
    if not b:
        return set(boundary)
    k = len(b)
    b2 = a.beta_squared
    out = set()
    for r, c in boundary:
        # d >= beta/(4k)  <=>  (4 k d)^2 >= beta^2
        if all((4 * k * (abs(r - br) + abs(c - bc))) ** 2 >= b2 for br, bc in b):
            out.add((r, c))
    return out

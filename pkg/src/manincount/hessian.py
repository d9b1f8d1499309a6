"""Hessian rank audit for the cubic C = (y_1^2+...+y_n^2) z - x^3.

The interesting geometric fact is quantitative: every integer point with
z = 0 has Hessian rank <= 3, so the box [-B, B]^(n+2) holds at least
(2B+1)^(n+1) points of rank <= 3.  For n + 2 >= 6 that breaks the
B^(r+eps) bound a rank-stratified count would need, which is exactly what
these counters let a test observe.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from multiprocessing import get_context

from .arith import ResourceBudgetError
from .counting import resolve_workers

__all__ = [
    "CubicPoint",
    "HessianMatrix",
    "count_rank_points",
    "hessian_at",
    "rank_over_rationals",
    "rank_profile",
]

# (2B+1)^(n+2) points; covers B = 5 at n = 4
_ENUM_BUDGET = 2_000_000


@dataclass(frozen=True)
class CubicPoint:
    """Integer point (x, y_1..y_n, z) in coordinate order (x, y, z)."""

    x: int
    y: tuple[int, ...]
    z: int

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class HessianMatrix:
    """Symmetric integer (n+2) x (n+2) matrix of second partials."""

    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        m = len(self.entries)
        for row in self.entries:
            if len(row) != m:
                raise ValueError("matrix must be square")
        for i in range(m):
            for j in range(i):
                if self.entries[i][j] != self.entries[j][i]:
                    raise ValueError("matrix must be symmetric")

    @property
    def size(self) -> int:
        return len(self.entries)


def hessian_at(p: CubicPoint) -> HessianMatrix:
    """Second partials of (sum y_i^2) z - x^3 at p, rows (x, y_1..y_n, z):

    H_xx = -6x, H_{y_i y_i} = 2z, H_{y_i z} = 2 y_i, everything else 0.
    """
    n = p.n
    m = n + 2
    rows = [[0] * m for _ in range(m)]
    rows[0][0] = -6 * p.x
    for i in range(1, n + 1):
        rows[i][i] = 2 * p.z
        rows[i][n + 1] = rows[n + 1][i] = 2 * p.y[i - 1]
    return HessianMatrix(tuple(tuple(r) for r in rows))


def _int_rank(rows: list[list[int]]) -> int:
    """Exact rank by Bareiss fraction-free elimination."""
    m = len(rows)
    if m == 0:
        return 0
    ncols = len(rows[0])
    rank = 0
    prev = 1
    row = 0
    for col in range(ncols):
        pivot = None
        for r in range(row, m):
            if rows[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        rows[row], rows[pivot] = rows[pivot], rows[row]
        piv = rows[row][col]
        for r in range(row + 1, m):
            f = rows[r][col]
            for c in range(col, ncols):
                rows[r][c] = (rows[r][c] * piv - f * rows[row][c]) // prev
        prev = piv
        row += 1
        rank += 1
        if row == m:
            break
    return rank


def rank_over_rationals(h: HessianMatrix) -> int:
    """Exact rank of the matrix over Q (no tolerances involved)."""
    return _int_rank([list(r) for r in h.entries])


def _rank_point(x: int, y: tuple[int, ...], z: int) -> int:
    return rank_over_rationals(hessian_at(CubicPoint(x, y, z)))


def _slice_profile(args: tuple[int, int, int]) -> dict[int, int]:
    x, B, n = args
    counts: dict[int, int] = {}
    rng = range(-B, B + 1)
    for z in rng:
        for y in product(rng, repeat=n):
            r = _rank_point(x, y, z)
            counts[r] = counts.get(r, 0) + 1
    return counts


@lru_cache(maxsize=16)
def _profile_cached(B: int, n: int, workers: int) -> tuple[tuple[int, int], ...]:
    jobs = [(x, B, n) for x in range(-B, B + 1)]
    if workers == 1:
        parts = [_slice_profile(j) for j in jobs]
    else:
        with get_context("fork").Pool(workers) as pool:
            parts = pool.map(_slice_profile, jobs)
    total: dict[int, int] = {}
    for part in parts:
        for r, c in part.items():
            total[r] = total.get(r, 0) + c
    return tuple(sorted(total.items()))


def rank_profile(B: int, n: int = 4, workers: int | None = None) -> dict[int, int]:
    """Number of points of each Hessian rank in the box [-B, B]^(n+2).

    The counts partition (2B+1)^(n+2).  One enumeration serves every rank.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    if n < 3:
        raise ValueError("n must be >= 3")
    if (2 * B + 1) ** (n + 2) > _ENUM_BUDGET:
        raise ResourceBudgetError(
            f"rank enumeration over (2*{B}+1)^{n + 2} points exceeds the "
            f"{_ENUM_BUDGET}-point budget"
        )
    return dict(_profile_cached(B, n, resolve_workers(workers)))


def count_rank_points(B: int, n: int = 4, r: int = 0, workers: int | None = None) -> int:
    """Points in the box [-B, B]^(n+2) whose Hessian rank is exactly r."""
    if not 0 <= r <= n + 2:
        raise ValueError(f"rank must lie in 0..{n + 2}")
    return rank_profile(B, n, workers).get(r, 0)

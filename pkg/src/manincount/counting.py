"""Exact counting: the divisor sums S(x,y) and T(B), their mean value
M(X,Y), the bracketing operator, and the affine/projective point counts
with independent brute-force oracles.

All counters are exact; divisor-range conditions are integer
cross-multiplications (d*B >= m**3 and the like), never floats.  The
heavy sums split the outer range into contiguous blocks so they can run
on a process pool; exact integer addition makes the result independent
of the worker count.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from multiprocessing import get_context
from typing import Callable, Iterator, Sequence

from .arith import (
    factorize,
    mobius_sieve,
    primes_upto,
    rn_exact_table,
    rn_star_prime_powers,
)

__all__ = [
    "CountQuery",
    "GridPoint",
    "apply_D",
    "count_affine_bruteforce",
    "count_affine_exact",
    "count_projective",
    "count_projective_bruteforce",
    "identity_scan",
    "introot",
    "mean_value_M",
    "resolve_workers",
    "s_sum",
    "t_sum",
]

WORKERS_ENV = "MANIN_WORKERS"


@dataclass(frozen=True)
class CountQuery:
    """A point-count request: height bound B, dimension n, affine or projective."""

    B: int
    n: int = 4
    mode: str = "affine"

    def __post_init__(self) -> None:
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")
        if self.n < 4 or self.n % 4 != 0:
            raise ValueError(f"n must be a positive multiple of 4, got {self.n}")
        if self.mode not in ("affine", "projective"):
            raise ValueError(f"mode must be 'affine' or 'projective', got {self.mode!r}")


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else MANIN_WORKERS, else 1."""
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def introot(x: int, e: int) -> int:
    """floor(x**(1/e)) for x >= 0, e >= 1, by integer Newton iteration.

    A float root seeds the estimate when it fits; the Newton descent and
    the final adjustment enforce r**e <= x < (r+1)**e exactly.
    """
    if x < 0 or e < 1:
        raise ValueError("need x >= 0 and e >= 1")
    if e == 1 or x < 2:
        return x
    try:
        r = max(1, int(round(x ** (1.0 / e))))
    except OverflowError:
        r = 1 << -(-x.bit_length() // e)  # 2^ceil(bits/e) lies above the root
    while True:
        nr = ((e - 1) * r + x // r ** (e - 1)) // e
        if nr >= r:
            break
        r = nr
    while r**e > x:
        r -= 1
    while (r + 1) ** e <= x:
        r += 1
    return r


# ---------------------------------------------------------------------------
# factoring a contiguous block of integers


def _factor_range(lo: int, hi: int) -> list[list[tuple[int, int]]]:
    """Factorizations of lo..hi-1 by a segmented sieve over the block.

    After dividing out every prime <= sqrt(hi-1) the residual cofactor is
    1 or prime, so no per-element primality work is needed.
    """
    size = hi - lo
    rem = list(range(lo, hi))
    facs: list[list[tuple[int, int]]] = [[] for _ in range(size)]
    for p in primes_upto(isqrt(hi - 1) if hi > 1 else 1):
        for m in range(((lo + p - 1) // p) * p, hi, p):
            i = m - lo
            e = 0
            while rem[i] % p == 0:
                rem[i] //= p
                e += 1
            facs[i].append((p, e))
    for i in range(size):
        if rem[i] > 1:
            facs[i].append((rem[i], 1))
    return facs


# ---------------------------------------------------------------------------
# bounded sums of r_{4k}* over divisors of n**3
#
# The enumeration walks prime-by-prime, largest prime first.  Whenever the
# whole remaining subtree fits under the bound it is folded in closed form
# (the inner sums are multiplicative), so the walk only ever touches the
# boundary region.


def _cube_tables(factors: Sequence[tuple[int, int]], k: int):
    fs = sorted(factors, reverse=True)
    pws: list[list[int]] = []
    rvs: list[list[int]] = []
    for p, e in fs:
        e3 = 3 * e
        pw = [1] * (e3 + 1)
        for j in range(1, e3 + 1):
            pw[j] = pw[j - 1] * p
        pws.append(pw)
        rvs.append(rn_star_prime_powers(p, e3, k))
    r = len(fs)
    full_tail = [1] * (r + 1)
    sum_tail = [1] * (r + 1)
    for i in range(r - 1, -1, -1):
        full_tail[i] = full_tail[i + 1] * pws[i][-1]
        sum_tail[i] = sum_tail[i + 1] * sum(rvs[i])
    return pws, rvs, full_tail, sum_tail


def _rstar_sum_upto(factors: Sequence[tuple[int, int]], k: int, limit: int) -> int:
    """Sum of r_{4k}*(d) over divisors d of n**3 with d <= limit."""
    if limit < 1:
        return 0
    pws, rvs, full_tail, sum_tail = _cube_tables(factors, k)

    def rec(i: int, d: int, r: int) -> int:
        if d * full_tail[i] <= limit:
            return r * sum_tail[i]
        s = 0
        pw = pws[i]
        rv = rvs[i]
        for j in range(len(pw)):
            dn = d * pw[j]
            if dn > limit:
                break
            s += rec(i + 1, dn, r * rv[j])
        return s

    return rec(0, 1, 1)


def _rstar_sum_range(factors: Sequence[tuple[int, int]], k: int, lo: int, hi: int) -> int:
    """Sum of r_{4k}*(d) over divisors d of n**3 with lo <= d <= hi."""
    if hi < lo or hi < 1:
        return 0
    pws, rvs, full_tail, sum_tail = _cube_tables(factors, k)

    def rec(i: int, d: int, r: int) -> int:
        if d >= lo and d * full_tail[i] <= hi:
            return r * sum_tail[i]
        if i == len(pws):
            return r if d >= lo else 0
        s = 0
        pw = pws[i]
        rv = rvs[i]
        for j in range(len(pw)):
            dn = d * pw[j]
            if dn > hi:
                break
            s += rec(i + 1, dn, r * rv[j])
        return s

    return rec(0, 1, 1)


def _divisors_in_range(factors: Sequence[tuple[int, int]], lo: int, hi: int) -> Iterator[int]:
    """Divisors d of n**3 with lo <= d <= hi (cube exponents), any order."""
    fs = sorted(factors, reverse=True)

    def rec(i: int, d: int) -> Iterator[int]:
        if i == len(fs):
            if d >= lo:
                yield d
            return
        p, e = fs[i]
        pw = 1
        for _ in range(3 * e + 1):
            dn = d * pw
            if dn > hi:
                break
            yield from rec(i + 1, dn)
            pw *= p

    if hi >= 1:
        yield from rec(0, 1)


# ---------------------------------------------------------------------------
# block workers (top level so a process pool can address them)


def _block_s(args: tuple[int, int, int, int]) -> int:
    lo, hi, k, y = args
    facs = _factor_range(lo, hi)
    return sum(_rstar_sum_upto(f, k, y) for f in facs)


def _block_t(args: tuple[int, int, int, int]) -> int:
    lo, hi, k, B = args
    facs = _factor_range(lo, hi)
    total = 0
    for i, f in enumerate(facs):
        n = lo + i
        total += _rstar_sum_upto(f, k, (n**3 - 1) // B)
    return total


def _block_affine4(args: tuple[int, int, int, int]) -> int:
    lo, hi, k, B = args
    facs = _factor_range(lo, hi)
    B2 = B * B
    total = 0
    for i, f in enumerate(facs):
        m = lo + i
        total += _rstar_sum_range(f, k, (m**3 + B - 1) // B, B2)
    return total


def _run_blocks(fn: Callable[[tuple], int], x: int, extra: tuple, workers: int) -> int:
    """Apply a block worker over [1, x] in contiguous chunks, summed in order."""
    if x < 1:
        return 0
    nblocks = 1 if workers == 1 else min(4 * workers, x)
    bounds = [1 + (x * i) // nblocks for i in range(nblocks + 1)]
    jobs = [(bounds[i], bounds[i + 1]) + extra for i in range(nblocks) if bounds[i] < bounds[i + 1]]
    if workers == 1:
        return sum(fn(job) for job in jobs)
    with get_context("fork").Pool(workers) as pool:
        return sum(pool.map(fn, jobs))


# ---------------------------------------------------------------------------
# the divisor sums


def s_sum(x: int, y: int, k: int = 1, workers: int | None = None) -> int:
    """S(x, y) = sum over n <= x and d | n**3 with d <= y of r_{4k}*(d)."""
    if x < 1:
        raise ValueError("x must be >= 1")
    if y < 0:
        raise ValueError("y must be >= 0")
    return _run_blocks(_block_s, x, (k, y), resolve_workers(workers))


def t_sum(B: int, k: int = 1, workers: int | None = None) -> int:
    """T(B) = sum over n <= B and d | n**3 with d*B < n**3 of r_{4k}*(d)."""
    if B < 1:
        raise ValueError("B must be >= 1")
    return _run_blocks(_block_t, B, (k, B), resolve_workers(workers))


# ---------------------------------------------------------------------------
# affine counts


# Largest lattice table built so far, per n.  Convolution prefixes are
# stable, so a longer table serves every smaller limit; growth doubles to
# amortize rebuilds when callers sweep B upward.
_RN_TABLES: dict[int, list[int]] = {}


def _rn_table(n: int, limit: int) -> list[int]:
    t = _RN_TABLES.get(n)
    if t is None or len(t) <= limit:
        target = max(limit, 2 * (len(t) - 1) if t else 0, 4096)
        t = rn_exact_table(n, target)
        _RN_TABLES[n] = t
    return t


def count_affine_exact(B: int, n: int = 4, workers: int | None = None) -> int:
    """Number of integral (x, y1..yn, z) on x**3 = (y1^2+...+yn^2) z with
    max(|x|, sqrt(sum y^2), |z|) <= B and x, z nonzero.

    Evaluates 2 * sum_{m<=B} sum_{d | m^3, m^3/B <= d <= B^2} r_n(d); for
    n = 4 the inner values come from r_4 = 8 r_4*, for larger n from the
    exact lattice table.  The divisor range walks both bounds directly,
    which keeps this structurally separate from s_sum - t_sum.
    """
    q = CountQuery(B, n, "affine")
    if q.n == 4:
        inner = _run_blocks(_block_affine4, B, (1, B), resolve_workers(workers))
        return 16 * inner
    table = _rn_table(n, B * B)
    total = 0
    for m in range(1, B + 1):
        f = factorize(m).factors
        lo = (m**3 + B - 1) // B
        total += sum(table[d] for d in _divisors_in_range(f, lo, B * B))
    return 2 * total


def count_affine_bruteforce(B: int, n: int = 4) -> int:
    """Oracle for count_affine_exact: walk (x, z) divisor pairs directly.

    For each x in 1..B and each positive z | x**3 with z <= B, the y-layer
    contributes r_n(x**3 / z) taken from the lattice-convolution table
    (never from the 8 r_4* identity), and the x < 0 half doubles the count.
    """
    CountQuery(B, n, "affine")
    table = _rn_table(n, B * B)
    B2 = B * B
    total = 0
    for x in range(1, B + 1):
        cube = x**3
        f = factorize(x).factors
        for z in _divisors_in_range(f, 1, B):
            Q = cube // z
            if 1 <= Q <= B2:
                total += table[Q]
    return 2 * total


# ---------------------------------------------------------------------------
# projective counts


def count_projective(B: int, n: int = 4, workers: int | None = None) -> int:
    """Coprime-representative count with height max(...)**(n-1) <= B.

    Moebius inversion over the scaling classes: with R = floor(B**(1/(n-1))),
    N_n(B) = sum_{d <= R} mu(d) * N*_n(floor(R/d)).
    """
    CountQuery(B, n, "projective")
    R = introot(B, n - 1)
    if R < 1:
        return 0
    mu = mobius_sieve(R)
    cache: dict[int, int] = {}
    total = 0
    for d in range(1, R + 1):
        if mu[d] == 0:
            continue
        m = R // d
        if m not in cache:
            cache[m] = count_affine_exact(m, n, workers)
        total += mu[d] * cache[m]
    return total


@lru_cache(maxsize=4)
def _vectors_by_norm(n: int, qmax: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All y in Z^n with sum of squares q <= qmax, grouped by q."""
    out: list[list[tuple[int, ...]]] = [[] for _ in range(qmax + 1)]

    def rec(i: int, q: int, prefix: tuple[int, ...]) -> None:
        if i == n:
            out[q].append(prefix)
            return
        r = isqrt(qmax - q)
        for v in range(-r, r + 1):
            rec(i + 1, q + v * v, prefix + (v,))

    rec(0, 0, ())
    return tuple(tuple(g) for g in out)


def count_projective_bruteforce(B: int, n: int = 4) -> int:
    """Oracle for count_projective: enumerate solutions in the box of
    radius R = floor(B**(1/(n-1))) and keep tuples whose n+2 coordinates
    have gcd 1.

    For n = 4 the y-vectors are enumerated literally and the gcd is taken
    per tuple.  For n >= 8 full vector enumeration is hopeless, so the
    y-layer is counted by sieving the common divisor e | gcd(x, z):
    sum_{e | gcd(x,z), e^2 | Q} mu(e) r_n(Q / e^2).
    """
    CountQuery(B, n, "projective")
    R = introot(B, n - 1)
    if R < 1:
        return 0
    R2 = R * R
    total = 0
    if n == 4:
        vecs = _vectors_by_norm(4, R2)
        for x in range(1, R + 1):
            cube = x**3
            f = factorize(x).factors
            for z in _divisors_in_range(f, 1, R):
                Q = cube // z
                if not 1 <= Q <= R2:
                    continue
                g0 = math.gcd(x, z)
                for y in vecs[Q]:
                    if math.gcd(g0, math.gcd(*[abs(v) for v in y])) == 1:
                        total += 1
        return 2 * total
    table = _rn_table(n, R2)
    mu = mobius_sieve(R)
    for x in range(1, R + 1):
        cube = x**3
        f = factorize(x).factors
        for z in _divisors_in_range(f, 1, R):
            Q = cube // z
            if not 1 <= Q <= R2:
                continue
            g0 = math.gcd(x, z)
            for e in range(1, isqrt(Q) + 1):
                if g0 % e == 0 and Q % (e * e) == 0 and mu[e] != 0:
                    total += mu[e] * table[Q // (e * e)]
    return 2 * total


# ---------------------------------------------------------------------------
# mean value and the bracketing operator


def _floor_rational(x: Fraction | int) -> int:
    return math.floor(x)


def mean_value_M(X: Fraction | int, Y: Fraction | int, k: int = 1) -> Fraction:
    """M(X, Y) = sum_{n<=X} sum_{d|n^3, d<=Y} r_{4k}*(d) (X-n) (Y-d), exact.

    Equals the double integral of S over [1,X] x [1,Y] because S is a step
    function jumping only at integer n and d.  Arguments may be rational.
    """
    X = Fraction(X)
    Y = Fraction(Y)
    total = Fraction(0)
    ylim = _floor_rational(Y)
    for n in range(1, _floor_rational(X) + 1):
        f = factorize(n).factors
        inner = Fraction(0)
        pws, rvs, _, _ = _cube_tables(f, k)

        def rec(i: int, d: int, r: int) -> None:
            nonlocal inner
            if i == len(pws):
                inner += r * (Y - d)
                return
            for j in range(len(pws[i])):
                dn = d * pws[i][j]
                if dn > ylim:
                    break
                rec(i + 1, dn, r * rvs[i][j])

        if ylim >= 1:
            rec(0, 1, 1)
        total += (X - n) * inner
    return total


def apply_D(f: Callable[[Fraction, Fraction], Fraction], X, H, Y, J):
    """The second-difference operator: f(H,J) - f(H,Y) - f(X,J) + f(X,Y)."""
    return f(H, J) - f(H, Y) - f(X, J) + f(X, Y)


@dataclass(frozen=True)
class GridPoint:
    """A bracketing box: base point (X, Y) with side lengths H <= X, J <= Y.

    Applying the second difference of the mean value M over the shifted
    boxes pins H*J*S(X, Y) from both sides, all in exact rationals.
    """

    X: Fraction
    Y: Fraction
    H: Fraction
    J: Fraction

    def __post_init__(self) -> None:
        if not (self.X >= 1 and self.Y >= 1):
            raise ValueError("need X >= 1 and Y >= 1")
        if not (0 < self.H <= self.X and 0 < self.J <= self.Y):
            raise ValueError("need 0 < H <= X and 0 < J <= Y")

    def lower_bracket(self, k: int = 1) -> Fraction:
        M = lambda a, b: mean_value_M(a, b, k)  # noqa: E731
        return apply_D(M, self.X - self.H, self.X, self.Y - self.J, self.Y)

    def upper_bracket(self, k: int = 1) -> Fraction:
        M = lambda a, b: mean_value_M(a, b, k)  # noqa: E731
        return apply_D(M, self.X, self.X + self.H, self.Y, self.Y + self.J)

    def middle(self, k: int = 1) -> Fraction:
        return self.H * self.J * s_sum(math.floor(self.X), math.floor(self.Y), k)


# ---------------------------------------------------------------------------
# one-pass profile of S, T and the affine count over every B <= Bmax


def identity_scan(Bmax: int) -> tuple[list[int], list[int], list[int]]:
    """Arrays S[B], T[B], A[B] for all 1 <= B <= Bmax (index 0 unused), where
    S[B] = s_sum(B, B^2), T[B] = t_sum(B) and A[B] = count_affine_exact(B, 4).

    One pass over the pairs (m, d | m^3): each pair contributes to S for
    B >= max(m, ceil(sqrt(d))), to T for m <= B <= floor((m^3-1)/d), and to
    A (times 16) for B >= max(m, ceil(m^3/d), ceil(sqrt(d))).  Difference
    arrays turn those into prefix sums.
    """
    if Bmax < 1:
        raise ValueError("Bmax must be >= 1")
    dS = [0] * (Bmax + 2)
    dT = [0] * (Bmax + 2)
    dA = [0] * (Bmax + 2)
    lim = Bmax * Bmax
    for m in range(1, Bmax + 1):
        cube = m**3
        f = factorize(m).factors
        pws, rvs, _, _ = _cube_tables(f, 1)

        def rec(i: int, d: int, r: int) -> None:
            if i == len(pws):
                sq = isqrt(d - 1) + 1  # ceil(sqrt(d))
                b0 = m if m >= sq else sq
                if b0 <= Bmax:
                    dS[b0] += r
                b1 = (cube - 1) // d
                if b1 >= m:
                    dT[m] += r
                    if b1 <= Bmax:
                        dT[b1 + 1] -= r
                lo = (cube + d - 1) // d  # ceil(m^3 / d)
                b2 = b0 if b0 >= lo else lo
                if b2 <= Bmax:
                    dA[b2] += 16 * r
                return
            for j in range(len(pws[i])):
                dn = d * pws[i][j]
                if dn > lim:
                    break
                rec(i + 1, dn, r * rvs[i][j])

        rec(0, 1, 1)
    S = [0] * (Bmax + 1)
    T = [0] * (Bmax + 1)
    A = [0] * (Bmax + 1)
    accS = accT = accA = 0
    for B in range(1, Bmax + 1):
        accS += dS[B]
        accT += dT[B]
        accA += dA[B]
        S[B] = accS
        T[B] = accT
        A[B] = accA
    return S, T, A

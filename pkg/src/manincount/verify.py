"""Verification suites: every library-level invariant as a runnable check.

Each suite returns a list of CheckResult and stops at the first failure,
carrying the failing case in the detail field.  The command line front
end serializes these; the test suite reuses the same functions so the
CLI and pytest agree on what "verified" means.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, floor, isqrt

from mpmath import mp, mpf, workdps

from . import arith, asymptotics, counting, hessian

__all__ = [
    "CheckResult",
    "SUITES",
    "rn_lattice_oracle",
    "run_suite",
    "suite_bracketing",
    "suite_constants",
    "suite_hessian",
    "suite_identities",
    "suite_oracles",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _check(results: list[CheckResult], name: str, ok: bool, detail: str = "") -> bool:
    results.append(CheckResult(name, ok, detail))
    return ok


# ---------------------------------------------------------------------------
# independent lattice oracle: partitions of d into at most n squares


def rn_lattice_oracle(n: int, d: int) -> int:
    """#{y in Z^n : sum y_i^2 = d} by enumerating square partitions.

    Walks multisets of positive squares summing to d with at most n parts
    and counts ordered signed placements with multinomials.  Shares no code
    with the convolution tables or the divisor-sum formulas.
    """
    if d == 0:
        return 1
    squares = [i * i for i in range(1, isqrt(d) + 1)]
    total = 0

    def rec(remaining: int, idx: int, used: int, perm_div: int) -> None:
        nonlocal total
        if remaining == 0:
            t = used
            total += factorial(n) // (perm_div * factorial(n - t)) * (1 << t)
            return
        if idx < 0 or used == n:
            return
        s = squares[idx]
        rec(remaining, idx - 1, used, perm_div)
        mult = 0
        while remaining >= s and used < n:
            remaining -= s
            used += 1
            mult += 1
            rec(remaining, idx - 1, used, perm_div * factorial(mult))

    rec(d, len(squares) - 1, 0, 1)
    return total


# ---------------------------------------------------------------------------
# suites


def suite_identities(budget: str = "quick", workers: int | None = None) -> list[CheckResult]:
    """The affine decomposition N*_4(B) = 16 (S(B, B^2) - T(B)) for every B."""
    out: list[CheckResult] = []
    bmax = 500 if budget == "quick" else 10_000
    S, T, A = counting.identity_scan(bmax)
    for B in range(1, bmax + 1):
        if A[B] != 16 * (S[B] - T[B]):
            _check(out, "affine-identity", False,
                   f"B={B}: A={A[B]}, 16(S-T)={16 * (S[B] - T[B])}")
            return out
    _check(out, "affine-identity", True, f"all B <= {bmax}")
    samples = sorted({1, 2, 3, 5, 17, 100, 211, bmax // 7 + 1, bmax // 2, bmax})
    for B in samples:
        okS = S[B] == counting.s_sum(B, B * B, 1, workers=workers)
        okT = T[B] == counting.t_sum(B, 1, workers=workers)
        okA = A[B] == counting.count_affine_exact(B, 4, workers=workers)
        if not _check(out, f"scan-vs-api-B{B}", okS and okT and okA,
                      f"S ok={okS} T ok={okT} A ok={okA}"):
            return out
    return out


def suite_oracles(budget: str = "quick", workers: int | None = None) -> list[CheckResult]:
    """Brute-force counters against the exact ones, and the r-function routes."""
    out: list[CheckResult] = []
    b_aff = 50 if budget == "quick" else 200
    b_proj = 64 if budget == "quick" else 512
    d_r4 = 2000 if budget == "quick" else 10_000
    d_rn = 60 if budget == "quick" else 200

    for n in (4, 8):
        counting.count_affine_bruteforce(b_aff, n)  # warm the largest table once
        for B in range(1, b_aff + 1):
            a = counting.count_affine_exact(B, n, workers=workers)
            b = counting.count_affine_bruteforce(B, n)
            if a != b:
                _check(out, f"affine-oracle-n{n}", False, f"B={B}: exact={a} brute={b}")
                return out
        _check(out, f"affine-oracle-n{n}", True, f"all B <= {b_aff}")

    for B in range(1, b_proj + 1):
        a = counting.count_projective(B, 4, workers=workers)
        b = counting.count_projective_bruteforce(B, 4)
        if a != b:
            _check(out, "projective-oracle-n4", False, f"B={B}: exact={a} brute={b}")
            return out
    _check(out, "projective-oracle-n4", True, f"all B <= {b_proj}")

    table4 = arith.rn_exact_table(4, d_r4)
    for d in range(1, d_r4 + 1):
        if arith.r4(d) != table4[d]:
            _check(out, "r4-oracle", False, f"d={d}: r4={arith.r4(d)} table={table4[d]}")
            return out
    _check(out, "r4-oracle", True, f"all d <= {d_r4}")

    for n in (8, 12):
        table = arith.rn_exact_table(n, d_rn)
        for d in range(0, d_rn + 1):
            ref = rn_lattice_oracle(n, d)
            if table[d] != ref:
                _check(out, f"rn-table-oracle-n{n}", False,
                       f"d={d}: table={table[d]} lattice={ref}")
                return out
        _check(out, f"rn-table-oracle-n{n}", True, f"all d <= {d_rn}")

    r8_2 = arith.rn_star(arith.factorize(2), 2)
    _check(out, "r8-prime-power", r8_2 == 7 and arith.rn_exact_table(8, 2)[2] == 16 * 7,
           f"rn_star(2, k=2)={r8_2}")
    return out


def suite_constants(budget: str = "quick", workers: int | None = None) -> list[CheckResult]:
    """Cross-route, dual-line and leading-coefficient constant identities."""
    out: list[CheckResult] = []
    plim = 10_000 if budget == "quick" else 100_000
    plim_cross = 100_000 if budget == "quick" else 1_000_000
    digits = 30
    with workdps(digits + 10):
        c4 = asymptotics.constant_C4(plim_cross, digits)
        g11 = asymptotics.euler_product_G(1, 1, 1, plim_cross, digits)
        residual = abs(c4.value - mpf(3) / 16 * g11.value)
        combined = (abs(c4.value) * c4.tail_bound
                    + mpf(3) / 16 * abs(g11.value) * g11.tail_bound)
        rel = residual / abs(c4.value)
        if not _check(out, "cross-route-C4", residual <= combined and rel < mpf(10) ** -12,
                      f"residual={mp.nstr(residual, 6)} combined_tails={mp.nstr(combined, 6)} "
                      f"rel={mp.nstr(rel, 6)}"):
            return out

        for k in (1, 2, 3):
            try:
                c = asymptotics.constant_Cn(k, plim, digits, consistency_tol=1e-9)
            except asymptotics.InternalConsistencyError as exc:
                _check(out, f"dual-line-k{k}", False, str(exc))
                return out
            p = asymptotics.poly_P(k, digits, plim)
            rel = abs(p.a2 - c.value) / abs(c.value)
            if not _check(out, f"leading-coeff-k{k}", rel < mpf(10) ** -8,
                          f"a2 vs C rel={mp.nstr(rel, 6)}"):
                return out
            _check(out, f"dual-line-k{k}", True, f"C_script={mp.nstr(c.value, 12)}")

        bundle = asymptotics.constants_bundle(4, plim, digits)
        if not _check(out, "prefactor-16/3", bundle.prefactor == Fraction(16, 3),
                      f"got {bundle.prefactor}"):
            return out

        for (s, w, k) in ((1, 1, 1), (1, 3, 2)):
            lo = asymptotics.euler_product_G(s, w, k, plim // 10, digits)
            hi = asymptotics.euler_product_G(s, w, k, plim // 5, digits)
            drift = abs(lo.value - hi.value) / abs(lo.value)
            if not _check(out, f"tail-honesty-{s}-{w}-{k}", drift <= lo.tail_bound,
                          f"drift={mp.nstr(drift, 6)} tail={mp.nstr(lo.tail_bound, 6)}"):
                return out
    return out


def suite_bracketing(budget: str = "quick", seed: int = 0,
                     workers: int | None = None) -> list[CheckResult]:
    """Second-difference bracketing of S by the mean value M, exact rationals."""
    out: list[CheckResult] = []
    trials = 200
    rng = random.Random(seed)
    for i in range(trials):
        qx, qy = rng.randint(1, 16), rng.randint(1, 16)
        X = Fraction(rng.randint(qx, 50 * qx), qx)
        Y = Fraction(rng.randint(qy, 200 * qy), qy)
        box = counting.GridPoint(X, Y,
                                 H=X * Fraction(rng.randint(1, 64), 64),
                                 J=Y * Fraction(rng.randint(1, 64), 64))
        if not box.lower_bracket() <= box.middle() <= box.upper_bracket():
            _check(out, "bracketing", False,
                   f"case {i}: X={box.X} Y={box.Y} H={box.H} J={box.J}: "
                   f"{box.lower_bracket()} <= {box.middle()} <= {box.upper_bracket()} fails")
            return out
    _check(out, "bracketing", True, f"{trials} seeded cases (seed={seed})")
    return out


def suite_hessian(budget: str = "quick", workers: int | None = None) -> list[CheckResult]:
    """Rank-stratified box counts and the z = 0 rank collapse."""
    out: list[CheckResult] = []
    bmax = 2 if budget == "quick" else 3
    n = 4
    from itertools import product as iproduct

    for B in range(1, bmax + 1):
        rng = range(-B, B + 1)
        worst = 0
        for x in rng:
            for y in iproduct(rng, repeat=n):
                r = hessian.rank_over_rationals(
                    hessian.hessian_at(hessian.CubicPoint(x, y, 0)))
                worst = max(worst, r)
                if r > 3:
                    _check(out, f"z0-rank-B{B}", False, f"x={x} y={y}: rank {r} > 3")
                    return out
        _check(out, f"z0-rank-B{B}", True, f"max rank {worst} over z=0 slice")

        prof = hessian.rank_profile(B, n, workers=workers)
        total = sum(prof.values())
        if not _check(out, f"rank-partition-B{B}", total == (2 * B + 1) ** (n + 2),
                      f"sum {total}"):
            return out
        cum3 = sum(c for r, c in prof.items() if r <= 3)
        if not _check(out, f"rank-le3-growth-B{B}", cum3 >= (2 * B + 1) ** (n + 1),
                      f"rank<=3 count {cum3} vs {(2 * B + 1) ** (n + 1)}"):
            return out
    return out


SUITES = {
    "identities": suite_identities,
    "oracles": suite_oracles,
    "constants": suite_constants,
    "bracketing": suite_bracketing,
    "hessian": suite_hessian,
}


def run_suite(name: str, budget: str = "quick", seed: int = 0,
              workers: int | None = None) -> list[CheckResult]:
    """Run one named suite (or 'all'); results stop at the first failure."""
    if name == "all":
        results: list[CheckResult] = []
        for key in SUITES:
            results.extend(run_suite(key, budget, seed, workers))
            if results and not results[-1].ok:
                return results
        return results
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    fn = SUITES[name]
    if name == "bracketing":
        return fn(budget, seed=seed, workers=workers)
    return fn(budget, workers=workers)

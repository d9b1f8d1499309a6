"""High-precision Euler products, the constants driving the point-count
asymptotics, the residue polynomial P(t), and the main-term predictors.

Everything runs through mpmath at a caller-chosen number of digits
(30 minimum for constants work; double precision has no headroom for the
dual-route identities).  Euler products accumulate over primes in fixed
ascending order inside fixed-size blocks, so a given (s, w, k,
prime_limit, digits) always reproduces the same bits regardless of how
the blocks are farmed out.

Normalization note: the leading constant is defined here as
C_script(4k) = (3 / (16 k (2k-1))) * G(1, 2k-1), with the matching
direct-product form (27/512) zeta(4) prod_p>2 (...) at k = 1.  The two
routes agree far below the tail bounds, and the exact counters converge
to these values (ratio -> 1 with O(1/log B) error); see the acceptance
suite's trend criterion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from mpmath import mp, mpf, workdps

from .arith import bernoulli, primes_upto

__all__ = [
    "ConstantsBundle",
    "DomainError",
    "EulerProductValue",
    "InternalConsistencyError",
    "NumericalError",
    "PolynomialP",
    "cached_bundle",
    "cached_poly",
    "constant_C4",
    "constant_Cn",
    "constants_bundle",
    "euler_product_G",
    "local_factor",
    "poly_P",
    "predict_S",
    "predict_T",
    "predict_counts",
    "zbar",
    "zeta_real",
]

_GUARD_DIGITS = 10
_BLOCK = 2048
_DEFAULT_PRIME_LIMIT = 100_000
_DEFAULT_DIGITS = 30


class DomainError(ValueError):
    """Argument outside the convergence / validity region."""


class InternalConsistencyError(RuntimeError):
    """Two supposedly equal evaluation routes disagree beyond tolerance."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge as required."""


@dataclass(frozen=True)
class EulerProductValue:
    """A truncated Euler product with a rigorous multiplicative tail bound.

    The untruncated product lies in [value*(1-tail_bound), value*(1+tail_bound)].
    """

    value: mpf
    prime_limit: int
    tail_bound: mpf


@dataclass(frozen=True)
class PolynomialP:
    """The residue quadratic P(t) = a2 t^2 + a1 t + a0 with derivative data."""

    a0: mpf
    a1: mpf
    a2: mpf
    k: int
    step_used: float
    error_estimate: mpf

    def __call__(self, t) -> mpf:
        return self.a2 * t * t + self.a1 * t + self.a0

    def deriv1(self, t) -> mpf:
        return 2 * self.a2 * t + self.a1

    def deriv2(self, t) -> mpf:
        return 2 * self.a2


@dataclass(frozen=True)
class ConstantsBundle:
    """The constants for one dimension n = 4k, with provenance."""

    n: int
    C_script: mpf
    C_star: mpf
    C_proj: mpf
    zeta_values: dict[int, mpf]
    bernoulli_used: Fraction
    prefactor: Fraction
    prime_limit: int
    digits: int
    tail_bound: mpf
    notes: tuple[str, ...] = ()


def zeta_real(sigma, digits: int = _DEFAULT_DIGITS) -> mpf:
    """Riemann zeta on the real axis, sigma >= 1.001, to ``digits`` digits.

    Backed by mpmath's Euler-Maclaurin evaluation; the test suite checks it
    against crude partial sums with an integral tail bound.
    """
    if sigma < 1 + 1e-3:
        raise DomainError(f"zeta_real needs sigma >= 1.001 (pole at 1), got {sigma}")
    with workdps(digits + _GUARD_DIGITS):
        return +mp.zeta(mpf(sigma))


def zbar(sigma, digits: int = _DEFAULT_DIGITS) -> mpf:
    """(sigma - 1) * zeta(sigma), analytic through sigma = 1.

    Inside |sigma - 1| < 1e-4 the value comes from the Stieltjes-constant
    Taylor series 1 + sum_n (-1)^n g_n (sigma-1)^(n+1) / n!, which is what
    makes the triple-pole cancellation in P(t) numerically stable.
    """
    with workdps(digits + _GUARD_DIGITS):
        x = mpf(sigma) - 1
        if abs(x) < mpf("1e-4"):
            total = mpf(1)
            xp = x
            for nn in range(0, 12):
                total += (-1) ** nn * mp.stieltjes(nn) * xp / factorial(nn)
                xp *= x
            return +total
        return +(x * mp.zeta(mpf(sigma)))


def _check_domain(s, w, k: int, eps: float = 1e-9) -> None:
    for j in range(4):
        if s + j * w - j * (2 * k - 1) < mpf(1) / 2 + eps:
            raise DomainError(
                f"(s, w) = ({s}, {w}) violates s + {j}w - {j}(2k-1) >= 1/2 + eps for k={k}"
            )


def local_factor(p: int, s, w, k: int = 1, digits: int = _DEFAULT_DIGITS) -> mpf:
    """The Euler factor G_p(s, w) for the double divisor sum with r_{4k}*.

    Requires min_j (s + j w - j(2k-1)) >= 1/2 (absolute convergence region).
    """
    _check_domain(s, w, k)
    with workdps(digits + _GUARD_DIGITS):
        s = mpf(s)
        w = mpf(w)
        if p == 2:
            return +_g2(s, w, k)
        return +_gp_odd(mpf(p), s, w, k)


def _gp_odd(p: mpf, s, w, k: int) -> mpf:
    z = p ** (2 * k - 1)
    num = (
        1
        + (z + 1) * p ** (-s - w)
        + (z * z + z + 1) * p ** (-s - 2 * w)
        + (z * z + z) * p ** (-s - 3 * w)
        + z * z * p ** (-2 * s - 4 * w)
    )
    return (
        num
        * (1 - z * p ** (-s - w))
        * (1 - z * z * p ** (-s - 2 * w))
        / (1 - p ** (-s - 3 * w))
    )


def _g2(s, w, k: int) -> mpf:
    two = mpf(2)
    if k == 1:
        num = 1 + 3 * two ** (-s - w) + 3 * two ** (-s - 2 * w) + two ** (-s - 3 * w + 1)
        den = 1 - two ** (-s - 3 * w)
        pr = mpf(1)
        for j in (1, 2, 3):
            pr *= 1 - two ** (-(s + j * w - j))
        return num / den * pr
    q = 2 ** (2 * k - 1)
    sign = -1 if k % 2 else 1
    a = 1 - mpf(sign) / (1 - q)
    b = mpf(sign) * (1 - 2 ** (2 * k)) / (1 - q)
    pr = mpf(1)
    for j in (1, 2, 3):
        pr *= 1 - two ** (-(s + j * w - j * (2 * k - 1)))
    mid = (
        1
        + a
        * (1 + two ** (-w + (2 * k - 1)) + two ** (-2 * w + 2 * (2 * k - 1)))
        / (two ** (s + w - (2 * k - 1)) - two ** (-2 * w + 2 * (2 * k - 1)))
        - b * two ** (-s - w) * (1 + two ** (-w) + two ** (-2 * w)) / (1 - two ** (-s - 3 * w))
    )
    return pr * mid


def _tail_log_bound(s, w, k: int, P: int) -> mpf:
    """Upper bound for sum_{p > P} |log G_p(s, w)|.

    At the balanced point (1, 1, k=1) the factor is (1 - p^-3)^2/(1 - p^-4)
    and the sharp bound sum 3/p^3 <= 3/(2 P^2 log P) applies.  Elsewhere a
    proven envelope |G_p - 1| <= 1.1 (3 p^-2m + 2 p^-3m + 15 p^-(m+2k-1)
    + p^-(m+3)), m = min_j (s + jw - j(2k-1)), is integrated term by term.
    """
    if (k, s, w) == (1, 1, 1):
        return mpf(3) / (2 * mpf(P) ** 2 * mp.log(P))
    m0 = min(mpf(s) + j * mpf(w) - j * (2 * k - 1) for j in range(4))

    def tail_power(a: mpf) -> mpf:
        # sum_{n > P} n^-a <= P^(1-a) / (a - 1)
        return mpf(P) ** (1 - a) / (a - 1)

    env = mpf("1.1") * (
        3 * tail_power(2 * m0)
        + 2 * tail_power(3 * m0)
        + 15 * tail_power(m0 + 2 * k - 1)
        + tail_power(m0 + 3)
    )
    return mpf("1.01") * env


def euler_product_G(
    s,
    w,
    k: int = 1,
    prime_limit: int = _DEFAULT_PRIME_LIMIT,
    digits: int = _DEFAULT_DIGITS,
) -> EulerProductValue:
    """G(s, w) = prod_p G_p(s, w) truncated at prime_limit, with tail bound."""
    _check_domain(s, w, k)
    if prime_limit < 2:
        raise ValueError("prime_limit must be >= 2")
    primes = primes_upto(prime_limit)
    with workdps(digits + _GUARD_DIGITS):
        s = mpf(s)
        w = mpf(w)
        prod = mpf(1)
        # fixed-size blocks, multiplied in ascending order: the reduction
        # tree does not depend on how many workers execute the blocks
        for lo in range(0, len(primes), _BLOCK):
            block = mpf(1)
            for p in primes[lo : lo + _BLOCK]:
                block *= _g2(s, w, k) if p == 2 else _gp_odd(mpf(p), s, w, k)
            prod *= block
        tail_log = _tail_log_bound(s, w, k, prime_limit)
        return EulerProductValue(+prod, prime_limit, +mp.expm1(tail_log))


def constant_C4(prime_limit: int = 10**6, digits: int = _DEFAULT_DIGITS) -> EulerProductValue:
    """The n = 4 leading constant by its direct product form:

        (27/512) zeta(4) prod_{p > 2} (1 + 2/p + 3/p^2 + 2/p^3 + 1/p^4)(1 - 1/p)^2.

    Cross-route identity: this equals (3/16) G(1, 1) exactly in the limit,
    and to within the combined tail bounds at any common truncation.
    """
    if prime_limit < 100:
        raise ValueError("prime_limit must be >= 100")
    primes = primes_upto(prime_limit)
    with workdps(digits + _GUARD_DIGITS):
        prod = mpf(1)
        for lo in range(0, len(primes), _BLOCK):
            block = mpf(1)
            for p in primes[lo : lo + _BLOCK]:
                if p == 2:
                    continue
                u = mpf(1) / p
                block *= (1 + 2 * u + 3 * u**2 + 2 * u**3 + u**4) * (1 - u) ** 2
            prod *= block
        value = mpf(27) / 512 * mp.zeta(4) * prod
        # per-factor log is 2 log(1 - p^-3), so |log| <= 3 p^-3 termwise
        tail_log = mpf(3) / (2 * mpf(prime_limit) ** 2 * mp.log(prime_limit))
        return EulerProductValue(+value, prime_limit, +mp.expm1(tail_log))


def constant_Cn(
    k: int,
    prime_limit: int = _DEFAULT_PRIME_LIMIT,
    digits: int = _DEFAULT_DIGITS,
    consistency_tol: float = 1e-9,
) -> EulerProductValue:
    """The leading constant for n = 4k, evaluated along both of its forms.

    Compact form: (3 / (16 k (2k-1))) G(1, 2k-1).  Expanded form: an exact
    dyadic prefactor times zeta(6k-2) times the odd-prime product
    (1 + 2/p + 3/p^2k + 2/p^(4k-1) + 1/p^4k)(1 - 1/p)^2.  The compact value
    is returned; disagreement beyond ``consistency_tol`` (relative) raises
    InternalConsistencyError.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    g = euler_product_G(1, 2 * k - 1, k, prime_limit, digits)
    with workdps(digits + _GUARD_DIGITS):
        compact = mpf(3) / (16 * k * (2 * k - 1)) * g.value

        sign = -1 if k % 2 else 1
        half = Fraction(1, 2)
        bracket = (2 ** (2 * k + 1) - 4) * (1 - half ** (6 * k - 2)) + sign * (
            2 - half ** (2 * k) - half ** (4 * k - 1) - half ** (6 * k - 3)
        )
        pref = Fraction(3) * bracket / (128 * k * (2 * k - 1) * (2 ** (2 * k - 1) - 1))
        prod = mpf(1)
        primes = primes_upto(prime_limit)
        for lo in range(0, len(primes), _BLOCK):
            block = mpf(1)
            for p in primes[lo : lo + _BLOCK]:
                if p == 2:
                    continue
                u = mpf(1) / p
                block *= (
                    1 + 2 * u + 3 * u ** (2 * k) + 2 * u ** (4 * k - 1) + u ** (4 * k)
                ) * (1 - u) ** 2
            prod *= block
        expanded = mpf(pref.numerator) / pref.denominator * mp.zeta(6 * k - 2) * prod

        rel = abs(compact - expanded) / abs(compact)
        if rel > consistency_tol:
            raise InternalConsistencyError(
                f"constant_Cn(k={k}): compact and expanded forms differ by {mp.nstr(rel, 6)} "
                f"relative (tolerance {consistency_tol})"
            )
        return EulerProductValue(+compact, prime_limit, g.tail_bound)


def constants_bundle(
    n: int,
    prime_limit: int = _DEFAULT_PRIME_LIMIT,
    digits: int = _DEFAULT_DIGITS,
) -> ConstantsBundle:
    """All constants for dimension n = 4k.

    C_star = C_script * (2n / (|B_{n/2}| (2^{n/2} - 1))) * (n(n-2) / (3(3n-4)))
    with the rational prefactor kept exact (16/3 at n = 4), and
    C_proj = C_star / ((n-1)^2 zeta(n-1)).
    """
    if n < 4 or n % 4 != 0:
        raise ValueError(f"n must be a positive multiple of 4, got {n}")
    k = n // 4
    c = constant_Cn(k, prime_limit, digits)
    b = bernoulli(n // 2)
    notes = []
    if b < 0:
        notes.append(
            f"B_{n // 2} = {b} is negative; the affine prefactor uses |B_{n // 2}| "
            "(the only sign making the count positive)"
        )
    pref = Fraction(2 * n) / (abs(b) * (2 ** (n // 2) - 1)) * Fraction(n * (n - 2), 3 * (3 * n - 4))
    with workdps(digits + _GUARD_DIGITS):
        znm1 = +mp.zeta(n - 1)
        z6k2 = +mp.zeta(6 * k - 2)
        c_star = +(mpf(pref.numerator) / pref.denominator * c.value)
        c_proj = +(c_star / ((n - 1) ** 2 * znm1))
    return ConstantsBundle(
        n=n,
        C_script=c.value,
        C_star=c_star,
        C_proj=c_proj,
        zeta_values={n - 1: znm1, 6 * k - 2: z6k2},
        bernoulli_used=b,
        prefactor=pref,
        prime_limit=prime_limit,
        digits=digits,
        tail_bound=c.tail_bound,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# the residue polynomial


def _g_of_s(s, k: int, prime_limit: int, digits: int) -> mpf:
    """g_k(s) = 3 (s-1)^3 F3*(s) / ((6k-2-s)(6k+1-s) s (s+1)) with the
    triple pole cancelled analytically:
    (s-1)^3 zeta(s) zeta((2s+1)/3) zeta((s+2)/3) = (9/2) zb(s) zb((2s+1)/3) zb((s+2)/3).
    """
    with workdps(digits + _GUARD_DIGITS):
        s = mpf(s)
        w3 = (6 * k - 2 - s) / 3
        g = euler_product_G(s, w3, k, prime_limit, digits).value
        num = (
            mpf(3)
            * mpf(9)
            / 2
            * zbar(s, digits)
            * zbar((2 * s + 1) / 3, digits)
            * zbar((s + 2) / 3, digits)
            * g
        )
        return +(num / ((6 * k - 2 - s) * (6 * k + 1 - s) * s * (s + 1)))


def poly_P(
    k: int = 1,
    digits: int = _DEFAULT_DIGITS,
    prime_limit: int = _DEFAULT_PRIME_LIMIT,
    step: float = 1e-3,
) -> PolynomialP:
    """Taylor data of g_k at s = 1: a2 = g(1)/2, a1 = g'(1), a0 = g''(1)/2.

    These are the coefficients of the quadratic P(t) whose value, slope and
    curvature drive the S(x, y) main term.  Derivatives use central
    differences at steps h, h/2, h/4 plus one Richardson level; the table
    must contract monotonically or NumericalError is raised.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    with workdps(digits + _GUARD_DIGITS):
        h = mpf(step)
        g_at: dict[int, mpf] = {}
        # scaled offsets in units of h/4: -4,-2,-1,0,1,2,4
        for m in (-4, -2, -1, 0, 1, 2, 4):
            g_at[m] = _g_of_s(1 + m * h / 4, k, prime_limit, digits)

        def d1(step_units: int) -> mpf:
            hh = h * step_units / 4
            return (g_at[step_units] - g_at[-step_units]) / (2 * hh)

        def d2(step_units: int) -> mpf:
            hh = h * step_units / 4
            return (g_at[step_units] - 2 * g_at[0] + g_at[-step_units]) / (hh * hh)

        d1_seq = [d1(4), d1(2), d1(1)]
        d2_seq = [d2(4), d2(2), d2(1)]
        gaps1 = [abs(d1_seq[0] - d1_seq[1]), abs(d1_seq[1] - d1_seq[2])]
        gaps2 = [abs(d2_seq[0] - d2_seq[1]), abs(d2_seq[1] - d2_seq[2])]
        if gaps1[1] > gaps1[0] or gaps2[1] > gaps2[0]:
            raise NumericalError(
                f"finite-difference table for g_{k} does not contract: "
                f"d1 gaps {[mp.nstr(x, 4) for x in gaps1]}, d2 gaps {[mp.nstr(x, 4) for x in gaps2]}"
            )
        rich1 = [(4 * d1_seq[i + 1] - d1_seq[i]) / 3 for i in range(2)]
        rich2 = [(4 * d2_seq[i + 1] - d2_seq[i]) / 3 for i in range(2)]
        err = max(abs(rich1[1] - rich1[0]), abs(rich2[1] - rich2[0]))
        return PolynomialP(
            a0=+(rich2[1] / 2),
            a1=+rich1[1],
            a2=+(g_at[0] / 2),
            k=k,
            step_used=step,
            error_estimate=+err,
        )


# ---------------------------------------------------------------------------
# main-term predictors


_POLY_CACHE: dict[tuple[int, int, int], PolynomialP] = {}
_BUNDLE_CACHE: dict[tuple[int, int, int], ConstantsBundle] = {}


def cached_poly(k: int, digits: int = _DEFAULT_DIGITS,
                prime_limit: int = _DEFAULT_PRIME_LIMIT) -> PolynomialP:
    """poly_P memoized per (k, digits, prime_limit); values are unchanged."""
    key = (k, digits, prime_limit)
    poly = _POLY_CACHE.get(key)
    if poly is None:
        poly = poly_P(k, digits, prime_limit)
        _POLY_CACHE[key] = poly
    return poly


def cached_bundle(n: int, digits: int = _DEFAULT_DIGITS,
                  prime_limit: int = _DEFAULT_PRIME_LIMIT) -> ConstantsBundle:
    """constants_bundle memoized per (n, digits, prime_limit)."""
    key = (n, digits, prime_limit)
    bundle = _BUNDLE_CACHE.get(key)
    if bundle is None:
        bundle = constants_bundle(n, prime_limit, digits)
        _BUNDLE_CACHE[key] = bundle
    return bundle


def predict_S(
    x,
    y,
    k: int = 1,
    mode: str = "full",
    poly: PolynomialP | None = None,
    digits: int = _DEFAULT_DIGITS,
    prime_limit: int = _DEFAULT_PRIME_LIMIT,
) -> mpf:
    """Main term of S(x, y) (no error term).

    mode='full': x y^(2k-1) (4k P(psi) + (2k - 2/3) P'(psi) - (1/3) P''(psi))
    with psi = log x - (1/3) log y; mode='leading': 4k C_script x y^(2k-1) psi^2.
    At k = 1 these are the familiar xy (4P + (4/3)P' - (1/3)P'') and
    4 C xy psi^2.  Valid for 10 <= x <= y <= x^3.
    """
    if mode not in ("full", "leading"):
        raise ValueError(f"mode must be 'full' or 'leading', got {mode!r}")
    with workdps(digits + _GUARD_DIGITS):
        x = mpf(x)
        y = mpf(y)
        if x < 10 or y < x or y > x**3:
            raise DomainError(f"need 10 <= x <= y <= x^3, got x={x}, y={y}")
        if poly is None:
            poly = cached_poly(k, digits, prime_limit)
        psi = mp.log(x) - mp.log(y) / 3
        scale = x * y ** (2 * k - 1)
        if mode == "leading":
            return +(4 * k * poly.a2 * scale * psi**2)
        main = (
            4 * k * poly(psi)
            + (2 * k - mpf(2) / 3) * poly.deriv1(psi)
            - poly.deriv2(psi) / 3
        )
        return +(scale * main)


def predict_T(
    B,
    k: int = 1,
    poly: PolynomialP | None = None,
    digits: int = _DEFAULT_DIGITS,
    prime_limit: int = _DEFAULT_PRIME_LIMIT,
) -> mpf:
    """Main term of T(B) for k = 1: (1/9) C_script B^3 (log B)^2.

    Only n = 4 is exposed: the dyadic bracketing that produces the 1/9
    has only been worked out for that case.
    """
    if k != 1:
        raise NotImplementedError("predict_T is only available for k = 1 (n = 4)")
    with workdps(digits + _GUARD_DIGITS):
        B = mpf(B)
        if B < 10:
            raise DomainError(f"need B >= 10, got {B}")
        if poly is None:
            poly = cached_poly(k, digits, prime_limit)
        return +(poly.a2 / 9 * B**3 * mp.log(B) ** 2)


def predict_counts(
    B,
    n: int = 4,
    bundle: ConstantsBundle | None = None,
    digits: int = _DEFAULT_DIGITS,
    prime_limit: int = _DEFAULT_PRIME_LIMIT,
) -> tuple[mpf, mpf]:
    """(N*_n prediction, N_n prediction) = (C*_n B^(n-1) (log B)^2, C_n B (log B)^2)."""
    if bundle is None:
        bundle = cached_bundle(n, digits, prime_limit)
    elif bundle.n != n:
        raise ValueError(f"bundle is for n={bundle.n}, not n={n}")
    with workdps(digits + _GUARD_DIGITS):
        B = mpf(B)
        if B < 10:
            raise DomainError(f"need B >= 10, got {B}")
        lg2 = mp.log(B) ** 2
        return +(bundle.C_star * B ** (n - 1) * lg2), +(bundle.C_proj * B * lg2)

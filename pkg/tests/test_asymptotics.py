from fractions import Fraction

import pytest
from mpmath import mp, mpf, workdps

from manincount.arith import primes_upto
from manincount.asymptotics import (
    DomainError,
    constant_C4,
    constant_Cn,
    constants_bundle,
    euler_product_G,
    local_factor,
    poly_P,
    predict_S,
    predict_T,
    predict_counts,
    zbar,
    zeta_real,
)

PLIM = 10_000
DIGITS = 30


def g2_exact(k: int) -> Fraction:
    """The 2-adic Euler factor at (s, w) = (1, 2k-1) in exact rationals."""
    w = 2 * k - 1
    half = Fraction(1, 2)
    if k == 1:
        num = 1 + 3 * half**2 + 3 * half**3 + 2 * half**4
        den = 1 - half**4
        return num / den * (1 - half) ** 3
    q = 2 ** (2 * k - 1)
    sign = -1 if k % 2 else 1
    a = 1 - Fraction(sign, 1 - q)
    b = Fraction(sign) * (1 - 2 ** (2 * k)) / (1 - q)
    mid = 1 + 3 * a - b * half ** (1 + w) * (1 + half**w + half ** (2 * w)) / (1 - half ** (1 + 3 * w))
    return Fraction(1, 8) * mid


def dyadic_prefactor(k: int) -> Fraction:
    """The closed dyadic factor of the expanded constant formula."""
    half = Fraction(1, 2)
    sign = -1 if k % 2 else 1
    bracket = (2 ** (2 * k + 1) - 4) * (1 - half ** (6 * k - 2)) + sign * (
        2 - half ** (2 * k) - half ** (4 * k - 1) - half ** (6 * k - 3)
    )
    return Fraction(3) * bracket / (128 * k * (2 * k - 1) * (2 ** (2 * k - 1) - 1))


class TestZeta:
    def test_classical_values(self):
        with workdps(40):
            assert abs(zeta_real(2, 30) - mp.pi**2 / 6) < mpf(10) ** -28
            assert abs(zeta_real(4, 30) - mp.pi**4 / 90) < mpf(10) ** -28

    def test_crude_sum_oracle_zeta3(self):
        with workdps(40):
            N = 5000
            partial = sum(mpf(1) / mpf(n) ** 3 for n in range(1, N + 1))
            lo = partial + mpf(1) / (2 * (N + 1) ** 2)
            hi = partial + mpf(1) / (2 * N**2)
            z3 = zeta_real(3, 30)
            assert lo <= z3 <= hi

    def test_pole_guard(self):
        with pytest.raises(DomainError):
            zeta_real(1.0005)

    def test_zbar_taylor_matches_direct(self):
        with workdps(40):
            for eps in ("9e-5", "-9e-5", "5e-5"):
                sigma = 1 + mpf(eps)
                direct = (sigma - 1) * mp.zeta(sigma)
                assert abs(zbar(sigma, 30) - direct) < mpf(10) ** -30
            assert zbar(1, 30) == 1


class TestLocalFactor:
    def test_g2_at_11(self):
        with workdps(40):
            assert abs(local_factor(2, 1, 1, 1) - mpf(3) / 10) < mpf(10) ** -30

    def test_odd_prime_algebraic_identity(self):
        # G_p(1,1) = (1 + 2/p + 3/p^2 + 2/p^3 + 1/p^4)(1 - 1/p)^2 / (1 - 1/p^4)
        with workdps(40):
            for p in primes_upto(1000):
                if p == 2:
                    continue
                u = mpf(1) / p
                alg = (1 + 2 * u + 3 * u**2 + 2 * u**3 + u**4) * (1 - u) ** 2 / (1 - u**4)
                assert abs(local_factor(p, 1, 1, 1) - alg) < mpf(10) ** -30, p

    def test_general_k_reduces_to_k1_at_2(self):
        from manincount.asymptotics import _g2

        with workdps(40):
            for (s, w) in ((mpf(1), mpf(1)), (mpf("1.3"), mpf("0.8")), (mpf(2), mpf("1.5"))):
                direct = _g2(s, w, 1)
                q = 2
                a = 1 - mpf(-1) / (1 - q)
                b = mpf(-1) * (1 - 4) / (1 - q)
                pr = mpf(1)
                for j in (1, 2, 3):
                    pr *= 1 - mpf(2) ** (-(s + j * w - j))
                mid = (
                    1
                    + a * (1 + mpf(2) ** (-w + 1) + mpf(2) ** (-2 * w + 2))
                    / (mpf(2) ** (s + w - 1) - mpf(2) ** (-2 * w + 2))
                    - b * mpf(2) ** (-s - w) * (1 + mpf(2) ** (-w) + mpf(2) ** (-2 * w))
                    / (1 - mpf(2) ** (-s - 3 * w))
                )
                assert abs(direct - pr * mid) < mpf(10) ** -30

    def test_decay_on_prime_grid(self):
        with workdps(30):
            for (s, w, k) in ((1, 1, 1), (1, 3, 2), (mpf("1.2"), mpf("0.9"), 1)):
                for p in (101, 1009, 9973):
                    dev = abs(local_factor(p, s, w, k) - 1)
                    assert dev <= 20 * mpf(p) ** mpf("-1.5"), (s, w, k, p)

    def test_domain_error_names_j(self):
        # w = 0.8 satisfies the j = 1, 2 constraints but not j = 3
        with pytest.raises(DomainError, match="3w"):
            local_factor(3, 1, 0.8, 1)
        with pytest.raises(DomainError, match="1w"):
            local_factor(3, 1, 0.4, 1)


class TestEulerProduct:
    def test_single_factor(self):
        v = euler_product_G(1, 1, 1, prime_limit=2, digits=30)
        with workdps(40):
            assert abs(v.value - local_factor(2, 1, 1, 1)) < mpf(10) ** -30

    def test_monotone_convergence(self):
        with workdps(40):
            prev = None
            for P in (1000, 10_000, 100_000):
                cur = euler_product_G(1, 1, 1, P, 30)
                if prev is not None:
                    assert abs(cur.value - prev.value) <= prev.tail_bound * abs(prev.value) * 2
                prev = cur
            assert prev.tail_bound < mpf(10) ** -9  # at P = 1e5

    def test_general_k_point(self):
        v1 = euler_product_G(1, 3, 2, 2000, 30)
        v2 = euler_product_G(1, 3, 2, 4000, 30)
        with workdps(40):
            assert abs(v1.value - v2.value) / abs(v1.value) <= v1.tail_bound

    def test_worker_split_irrelevant(self):
        # block structure is fixed, so any farm-out reproduces the same bits
        a = euler_product_G(1, 1, 1, 30_000, 30)
        b = euler_product_G(1, 1, 1, 30_000, 30)
        assert mp.nstr(a.value, 40) == mp.nstr(b.value, 40)


class TestConstants:
    def test_cross_route(self):
        with workdps(40):
            c4 = constant_C4(100_000, DIGITS)
            g = euler_product_G(1, 1, 1, 100_000, DIGITS)
            resid = abs(c4.value - mpf(3) / 16 * g.value)
            assert resid <= abs(c4.value) * c4.tail_bound + mpf(3) / 16 * abs(g.value) * g.tail_bound
            assert resid / abs(c4.value) < mpf(10) ** -12

    def test_prime_limit_doubling_within_tail(self):
        with workdps(40):
            a = constant_C4(50_000, DIGITS)
            b = constant_C4(100_000, DIGITS)
            assert abs(a.value - b.value) <= abs(a.value) * a.tail_bound

    def test_dyadic_identity_exact(self):
        # expanded-line prefactor == (3/(16k(2k-1))) * G_2(1,2k-1) * (1 - 2^-(6k-2))
        for k in range(1, 6):
            lhs = Fraction(3, 16 * k * (2 * k - 1)) * g2_exact(k) * (1 - Fraction(1, 2 ** (6 * k - 2)))
            assert lhs == dyadic_prefactor(k), k

    def test_dual_line_agreement(self):
        for k in (1, 2, 3):
            constant_Cn(k, PLIM, DIGITS, consistency_tol=1e-9)  # raises on failure

    def test_bundle_n4(self):
        b = constants_bundle(4, PLIM, DIGITS)
        assert b.prefactor == Fraction(16, 3)
        assert b.bernoulli_used == Fraction(1, 6)
        with workdps(40):
            assert abs(b.C_star - Fraction(16, 3) * b.C_script) < mpf(10) ** -30
            assert abs(b.C_proj - b.C_star / (9 * mp.zeta(3))) < mpf(10) ** -25
        assert b.notes == ()

    def test_bundle_n8_uses_abs_bernoulli(self):
        b = constants_bundle(8, PLIM, DIGITS)
        assert b.bernoulli_used == Fraction(-1, 30)
        assert b.prefactor == Fraction(2 * 8) / (Fraction(1, 30) * 15) * Fraction(8 * 6, 3 * 20)
        assert b.prefactor == Fraction(128, 5)
        assert any("negative" in note for note in b.notes)
        assert b.C_star > 0 and b.C_proj > 0

    def test_bad_n(self):
        with pytest.raises(ValueError):
            constants_bundle(6, PLIM, DIGITS)


class TestPolyP:
    def test_leading_coefficient_matches_constant(self):
        for k in (1, 2, 3):
            p = poly_P(k, DIGITS, PLIM)
            c = constant_Cn(k, PLIM, DIGITS)
            with workdps(40):
                assert abs(p.a2 - c.value) / abs(c.value) < mpf(10) ** -8, k

    def test_error_estimate_small(self):
        p = poly_P(1, DIGITS, PLIM)
        assert p.error_estimate < mpf(10) ** -10
        assert p.step_used == 1e-3

    def test_polynomial_evaluation(self):
        p = poly_P(1, DIGITS, PLIM)
        with workdps(40):
            t = mpf("1.7")
            assert abs(p(t) - (p.a2 * t**2 + p.a1 * t + p.a0)) == 0
            assert p.deriv2(t) == 2 * p.a2


class TestPredictors:
    def test_T_over_S_leading_is_quarter(self):
        poly = poly_P(1, DIGITS, PLIM)
        with workdps(40):
            B = mpf(1000)
            r = predict_T(B, 1, poly=poly) / predict_S(B, B * B, 1, "leading", poly=poly)
            assert abs(r - mpf(1) / 4) < mpf(10) ** -30

    def test_full_at_psi_zero(self):
        poly = poly_P(1, DIGITS, PLIM)
        with workdps(40):
            x = mpf(50)
            got = predict_S(x, x**3, 1, "full", poly=poly)
            want = x * x**3 * (4 * poly.a0 + mpf(4) / 3 * poly.a1 - mpf(2) / 3 * poly.a2)
            assert abs(got - want) / abs(want) < mpf(10) ** -30

    def test_nstar_consistency_with_S_minus_T(self):
        poly = poly_P(1, DIGITS, PLIM)
        bundle = constants_bundle(4, PLIM, DIGITS)
        with workdps(40):
            B = mpf(5000)
            lhs = 16 * (predict_S(B, B * B, 1, "leading", poly=poly) - predict_T(B, 1, poly=poly))
            rhs = predict_counts(B, 4, bundle=bundle)[0]
            assert abs(lhs - rhs) / rhs < mpf(10) ** -25

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            predict_S(5, 25, 1)
        with pytest.raises(DomainError):
            predict_S(100, 100**4, 1)
        with pytest.raises(NotImplementedError):
            predict_T(100, 2)
        with pytest.raises(DomainError):
            predict_T(2, 1)

    def test_full_predictor_tracks_k2_sums(self):
        # x y^3 (8P + (10/3)P' - P''/3) should sit within a few percent of
        # the exact k=2 sums already at modest B, closing as B grows
        from manincount.counting import s_sum

        poly = poly_P(2, DIGITS, PLIM)
        with workdps(40):
            r400 = s_sum(400, 400**2, 2) / predict_S(400, 400**2, 2, "full", poly=poly)
            r1600 = s_sum(1600, 1600**2, 2) / predict_S(1600, 1600**2, 2, "full", poly=poly)
            assert abs(r400 - 1) < mpf("0.06")
            assert abs(r1600 - 1) < mpf("0.04")
            assert abs(r1600 - 1) < abs(r400 - 1)

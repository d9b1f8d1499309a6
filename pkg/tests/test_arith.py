import random
from fractions import Fraction
from math import comb

import pytest

from manincount.arith import (
    Factorization,
    ResourceBudgetError,
    bernoulli,
    divisor_count,
    divisors_of_cube,
    factorize,
    mobius_sieve,
    r4,
    r4_star,
    rn_exact_table,
    rn_star,
)


def trial_division(m):
    """Independent factorization oracle: plain trial division up to sqrt(m)."""
    out = []
    d = 2
    while d * d <= m:
        e = 0
        while m % d == 0:
            m //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1
    if m > 1:
        out.append((m, 1))
    return tuple(out)


def r4_star_by_definition(d):
    return sum(l for l in range(1, d + 1) if d % l == 0 and l % 4 != 0)


class TestFactorize:
    def test_examples(self):
        assert factorize(1).factors == ()
        assert factorize(12).factors == ((2, 2), (3, 1))
        assert factorize(999999937).factors == trial_division(999999937)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            factorize(0)

    def test_random_against_trial_division(self):
        rng = random.Random(42)
        for _ in range(300):
            m = rng.randint(1, 10**7)
            assert factorize(m).factors == trial_division(m)

    def test_large_semiprime_second_stage(self):
        p, q = 1_000_000_007, 1_000_000_009
        assert factorize(p * q).factors == ((p, 1), (q, 1))

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            Factorization(6, ((3, 1), (2, 1)))  # not increasing
        with pytest.raises(ValueError):
            Factorization(6, ((2, 1),))  # wrong product
        with pytest.raises(ValueError):
            Factorization(8, ((4, 1), (2, 1)))  # 4 is not prime


class TestDivisorsOfCube:
    def test_divisors_of_8(self):
        ds = sorted(d for d, _ in divisors_of_cube(factorize(2)))
        assert ds == [1, 2, 4, 8]

    def test_divisors_of_216_up_to_10(self):
        ds = sorted(d for d, _ in divisors_of_cube(factorize(6), 10))
        assert ds == [1, 2, 3, 4, 6, 8, 9]

    def test_unit(self):
        assert [d for d, _ in divisors_of_cube(factorize(1), 1000)] == [1]

    def test_count_is_product_of_3e_plus_1(self):
        for m in (2, 12, 30, 360, 1001):
            f = factorize(m)
            expected = 1
            for _, e in f.factors:
                expected *= 3 * e + 1
            items = list(divisors_of_cube(f))
            assert len(items) == expected
            assert len({d for d, _ in items}) == expected  # no repeats

    def test_each_divisor_carries_its_factorization(self):
        for d, fd in divisors_of_cube(factorize(12), 100):
            assert fd.value == d


class TestR4Star:
    def test_examples(self):
        assert r4_star(factorize(1)) == 1
        assert r4_star(factorize(2)) == 3
        assert r4_star(factorize(12)) == 12

    def test_against_divisor_sum_definition(self):
        for d in range(1, 800):
            assert r4_star(factorize(d)) == r4_star_by_definition(d)

    def test_multiplicative(self):
        rng = random.Random(7)
        for _ in range(200):
            a = rng.randint(1, 100)
            b = rng.randint(1, 100)
            if a * b > 10**4:
                continue
            from math import gcd

            if gcd(a, b) != 1:
                continue
            fa, fb, fab = factorize(a), factorize(b), factorize(a * b)
            assert r4_star(fab) == r4_star(fa) * r4_star(fb)
            assert rn_star(fab, 3) == rn_star(fa, 3) * rn_star(fb, 3)

    def test_bounded_by_d_tau(self):
        for d in range(1, 10**4 + 1):
            f = factorize(d)
            assert r4_star(f) <= d * divisor_count(f)


class TestRnStar:
    def test_examples(self):
        assert rn_star(factorize(3), 2) == 28  # 1 + 3^3
        assert rn_star(factorize(2), 2) == 7
        assert rn_star(factorize(1), 5) == 1

    def test_k1_reduces_to_r4_star(self):
        for d in range(1, 10**4 + 1, 7):
            f = factorize(d)
            assert rn_star(f, 1) == r4_star(f)

    def test_power_of_two_k1_always_3(self):
        for mu in range(1, 12):
            assert rn_star(factorize(2**mu), 1) == 3


class TestR4AndTables:
    def test_r4_examples(self):
        assert r4(1) == 8
        assert r4(4) == 24
        assert r4(3) == 32

    def test_table_entries(self):
        t8 = rn_exact_table(8, 4)
        assert t8[0] == 1
        assert t8[1] == 16
        assert t8[2] == 112  # two nonzero slots out of 8 with signs: C(8,2)*4

    def test_r4_table_matches_r4(self):
        t4 = rn_exact_table(4, 3000)
        for d in range(1, 3001):
            assert t4[d] == r4(d)

    def test_budget_error_names_limit(self):
        with pytest.raises(ResourceBudgetError, match="limit=10000000000"):
            rn_exact_table(8, 10**10)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            rn_exact_table(6, 10)


class TestBernoulli:
    KNOWN = {
        2: Fraction(1, 6),
        4: Fraction(-1, 30),
        6: Fraction(1, 42),
        8: Fraction(-1, 30),
        10: Fraction(5, 66),
        12: Fraction(-691, 2730),
    }

    def test_known_values(self):
        for m, v in self.KNOWN.items():
            assert bernoulli(m) == v

    def test_recurrence_oracle(self):
        # sum_{j=0}^{m} C(m+1, j) B_j = 0 with B_1 = -1/2 and zero odd tail
        B = {0: Fraction(1), 1: Fraction(-1, 2)}
        for m in range(2, 31):
            B[m] = bernoulli(m) if m % 2 == 0 else Fraction(0)
        for m in range(2, 30):
            total = sum(comb(m + 1, j) * B[j] for j in range(m + 1))
            assert total == 0, m

    def test_odd_rejected(self):
        for m in (1, 3, 7):
            with pytest.raises(ValueError):
                bernoulli(m)


class TestMobius:
    def test_examples(self):
        mu = mobius_sieve(20)
        assert mu[1] == 1
        assert mu[6] == 1
        assert mu[12] == 0
        assert mu[2] == -1

    def test_against_factorization(self):
        mu = mobius_sieve(5000)
        for d in range(1, 5001):
            f = factorize(d)
            if any(e > 1 for _, e in f.factors):
                assert mu[d] == 0
            else:
                assert mu[d] == (-1) ** len(f.factors)

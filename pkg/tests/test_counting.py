import random
from fractions import Fraction
from math import floor

import pytest

from manincount.arith import r4_star, factorize
from manincount.counting import (
    CountQuery,
    apply_D,
    count_affine_bruteforce,
    count_affine_exact,
    count_projective,
    count_projective_bruteforce,
    identity_scan,
    introot,
    mean_value_M,
    s_sum,
    t_sum,
)


def s_sum_naive(x, y):
    total = 0
    for n in range(1, x + 1):
        cube = n**3
        for d in range(1, min(cube, y) + 1):
            if cube % d == 0:
                total += r4_star(factorize(d))
    return total


def t_sum_naive(B):
    total = 0
    for n in range(1, B + 1):
        cube = n**3
        for d in range(1, cube + 1):
            if cube % d == 0 and d * B < cube:
                total += r4_star(factorize(d))
    return total


class TestIntroot:
    def test_exact_powers(self):
        for b in range(1, 40):
            for e in (2, 3, 5, 7):
                assert introot(b**e, e) == b
                assert introot(b**e + 1, e) == b
                if b > 1:
                    assert introot(b**e - 1, e) == b - 1

    def test_edges(self):
        assert introot(0, 3) == 0
        assert introot(1, 9) == 1
        assert introot(10**18, 1) == 10**18


class TestSsum:
    def test_examples(self):
        assert s_sum(1, 1) == 1
        assert s_sum(2, 2) == 5
        assert s_sum(2, 8) == 11

    def test_against_naive(self):
        rng = random.Random(3)
        for _ in range(20):
            x = rng.randint(1, 25)
            y = rng.randint(1, x**3 + 10)
            assert s_sum(x, y) == s_sum_naive(x, y)

    def test_monotone_in_both_arguments(self):
        prev = 0
        for x in range(1, 40):
            cur = s_sum(x, 50)
            assert cur >= prev
            prev = cur
        prev = 0
        for y in range(0, 300, 13):
            cur = s_sum(12, y)
            assert cur >= prev
            prev = cur

    def test_worker_count_invariant(self):
        ref = s_sum(300, 300**2)
        for w in (2, 3, 5):
            assert s_sum(300, 300**2, workers=w) == ref

    def test_env_var_sets_default(self, monkeypatch):
        monkeypatch.setenv("MANIN_WORKERS", "2")
        assert s_sum(100, 100**2) == s_sum(100, 100**2, workers=1)


class TestTsum:
    def test_examples(self):
        assert t_sum(1) == 0
        assert t_sum(2) == 4
        assert t_sum(3) == t_sum_naive(3)

    def test_against_naive(self):
        for B in range(1, 28):
            assert t_sum(B) == t_sum_naive(B)

    def test_worker_count_invariant(self):
        assert t_sum(250, workers=4) == t_sum(250)


class TestAffine:
    def test_examples(self):
        assert count_affine_exact(1, 4) == 16
        assert count_affine_exact(2, 4) == 64
        assert count_affine_exact(1, 8) == 32

    def test_bruteforce_examples(self):
        assert count_affine_bruteforce(1, 4) == 16
        assert count_affine_bruteforce(2, 4) == 64
        assert count_affine_bruteforce(1, 8) == 32

    @pytest.mark.parametrize("n", [4, 8])
    def test_oracle_equivalence_sample(self, n):
        count_affine_bruteforce(60, n)  # warm the table at the largest size
        for B in range(1, 61):
            assert count_affine_exact(B, n) == count_affine_bruteforce(B, n), B

    def test_decomposition_identity(self):
        for B in (1, 2, 3, 10, 37, 100):
            assert count_affine_exact(B, 4) == 16 * (s_sum(B, B * B) - t_sum(B))

    def test_query_validation(self):
        with pytest.raises(ValueError):
            CountQuery(0, 4, "affine")
        with pytest.raises(ValueError):
            CountQuery(5, 6, "affine")
        with pytest.raises(ValueError):
            CountQuery(5, 4, "elliptic")


class TestProjective:
    def test_examples(self):
        assert count_projective(1, 4) == 16
        assert count_projective(8, 4) == 48
        assert count_projective(1, 8) == 32

    def test_bruteforce_examples(self):
        assert count_projective_bruteforce(1, 4) == 16
        assert count_projective_bruteforce(8, 4) == 48
        assert count_projective_bruteforce(1, 8) == 32

    def test_oracle_equivalence_sample(self):
        for B in list(range(1, 90)) + [125, 216, 217, 341, 342, 343, 511, 512]:
            assert count_projective(B, 4) == count_projective_bruteforce(B, 4), B

    def test_oracle_equivalence_n8(self):
        for B in (1, 127, 128, 129, 2187, 16384):
            assert count_projective(B, 8) == count_projective_bruteforce(B, 8), B


class TestMeanValue:
    def test_examples(self):
        assert mean_value_M(1, 1) == 0
        assert mean_value_M(2, 2) == 1
        assert mean_value_M(Fraction(5, 2), 2) == 2

    def test_direct_sum_oracle(self):
        rng = random.Random(11)
        for _ in range(25):
            X = Fraction(rng.randint(1, 60), rng.randint(1, 5))
            Y = Fraction(rng.randint(1, 120), rng.randint(1, 5))
            if X < 1 or Y < 1:
                continue
            total = Fraction(0)
            for n in range(1, floor(X) + 1):
                cube = n**3
                for d in range(1, floor(Y) + 1):
                    if cube % d == 0:
                        total += r4_star(factorize(d)) * (X - n) * (Y - d)
            assert mean_value_M(X, Y) == total

    def test_zero_below_one(self):
        assert mean_value_M(Fraction(1, 2), 5) == 0


class TestApplyD:
    def test_product_rule(self):
        rng = random.Random(5)
        for _ in range(40):
            a, b, c, d = (Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(4))
            f = lambda x, y: (x * x + a * x) * (y + b)  # noqa: E731
            X, H, Y, J = (Fraction(rng.randint(-30, 30), rng.randint(1, 7)) for _ in range(4))
            f1 = lambda x: x * x + a * x  # noqa: E731
            f2 = lambda y: y + b  # noqa: E731
            assert apply_D(f, X, H, Y, J) == (f1(H) - f1(X)) * (f2(J) - f2(Y))

    def test_constant_collapses(self):
        assert apply_D(lambda x, y: Fraction(7), 1, 2, 3, 4) == 0

    def test_bracketing_seeded(self):
        rng = random.Random(1)
        for _ in range(30):
            X = Fraction(rng.randint(2, 40), rng.randint(1, 4))
            Y = Fraction(rng.randint(2, 150), rng.randint(1, 4))
            H = X * Fraction(rng.randint(1, 16), 16)
            J = Y * Fraction(rng.randint(1, 16), 16)
            mid = H * J * s_sum(floor(X), floor(Y))
            low = apply_D(mean_value_M, X - H, X, Y - J, Y)
            high = apply_D(mean_value_M, X, X + H, Y, Y + J)
            assert low <= mid <= high


class TestIdentityScan:
    def test_matches_api(self):
        S, T, A = identity_scan(150)
        for B in (1, 2, 3, 7, 50, 149, 150):
            assert S[B] == s_sum(B, B * B)
            assert T[B] == t_sum(B)
            assert A[B] == count_affine_exact(B, 4)

    def test_identity_everywhere(self):
        S, T, A = identity_scan(400)
        for B in range(1, 401):
            assert A[B] == 16 * (S[B] - T[B])


class TestGridPoint:
    def test_invariants(self):
        from manincount.counting import GridPoint

        with pytest.raises(ValueError):
            GridPoint(Fraction(5), Fraction(5), Fraction(6), Fraction(1))
        with pytest.raises(ValueError):
            GridPoint(Fraction(5), Fraction(5), Fraction(1), Fraction(0))
        box = GridPoint(Fraction(7, 2), Fraction(9), Fraction(2), Fraction(9))
        assert box.lower_bracket() <= box.middle() <= box.upper_bracket()

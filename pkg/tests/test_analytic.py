import math
from fractions import Fraction

import numpy as np
import pytest

from spinest import analytic as A
from spinest.analytic import ErrorQuery, two_observable_error
from spinest.estimators import bayes_joint_table, cross_weights
from spinest.povm import optimal_sharpness_pair
from tests.oracles import bayes_joint_error_bruteforce, linear_estimator_error


class TestTwoObservable:
    def test_separate_unbiased(self):
        assert two_observable_error(ErrorQuery("sep-unbiased", 1)) == pytest.approx(4 / 3, abs=1e-15)

    def test_joint_unbiased(self):
        q = ErrorQuery("joint-unbiased", 2, eta=math.pi / 6)
        assert two_observable_error(q) == pytest.approx(7 / 12, abs=1e-12)

    def test_separate_biased(self):
        assert two_observable_error(ErrorQuery("sep-biased", 2)) == pytest.approx(1 / 3, abs=1e-15)

    def test_joint_biased(self):
        q = ErrorQuery("joint-biased", 2, eta=math.pi / 6)
        assert two_observable_error(q) == pytest.approx(14 / 45, abs=1e-12)

    def test_cross_weighted_parallel(self):
        q = ErrorQuery("cross-weighted", 2, adotb=1.0)
        assert two_observable_error(q) == pytest.approx(2 / 9, abs=1e-12)

    def test_split(self):
        q = ErrorQuery("sep-unbiased-split", 2, n1=1)
        assert two_observable_error(q) == pytest.approx(8 / 9)
        assert two_observable_error(ErrorQuery("sep-unbiased-split", 2, n1=2)) == pytest.approx(2 / 3)

    @pytest.mark.parametrize("n", [1, 3, 8, 20])
    def test_split_minimum_at_even_split(self, n):
        for f in (A.separate_unbiased_split, A.separate_biased_split):
            vals = [f(n, n1) for n1 in range(1, 2 * n)]
            assert int(np.argmin(vals)) + 1 == n

    def test_split_needs_n1(self):
        with pytest.raises(ValueError):
            two_observable_error(ErrorQuery("sep-unbiased-split", 2))
        with pytest.raises(ValueError):
            ErrorQuery("sep-unbiased-split", 2, n1=4)

    def test_joint_needs_angle(self):
        with pytest.raises(ValueError):
            two_observable_error(ErrorQuery("joint-biased", 2))

    def test_three_observable_rejected(self):
        with pytest.raises(ValueError):
            two_observable_error(ErrorQuery("three-joint", 2))

    @pytest.mark.parametrize("n", [1, 2, 5, 13])
    @pytest.mark.parametrize("c", [0.0, 0.25, 0.6, 0.95])
    def test_cross_weighted_against_direct_average(self, n, c):
        k, lam = cross_weights(n, c)
        assert A.cross_weighted(n, c) == pytest.approx(linear_estimator_error(n, k, lam, c), abs=1e-9)

    @pytest.mark.parametrize("n", [1, 4, 9])
    def test_joint_biased_minimises_over_gain(self, n):
        # eps_a(K) = K^2/(2N)(1/a^2 - 1/3) + (1-K)^2/3, scanned over K
        alpha = optimal_sharpness_pair(0.5).alpha
        ks = np.linspace(0, 1, 200001)
        eps = ks**2 / (2 * n) * (1 / alpha**2 - 1 / 3) + (1 - ks) ** 2 / 3
        assert 2 * eps.min() == pytest.approx(A.joint_biased(n, alpha), abs=1e-10)

    def test_biased_separate_minimises_over_gain(self):
        n = 3
        ks = np.linspace(0, 1, 300001)
        eps = (ks - 1) ** 2 / 3 + 2 * ks**2 / (3 * n)
        assert 2 * eps.min() == pytest.approx(A.separate_biased(n), abs=1e-10)


class TestCrossover:
    def test_value(self):
        assert A.crossover_angle() == pytest.approx(0.729728, abs=1e-6)

    @pytest.mark.parametrize("n", [1, 5, 20])
    def test_equal_errors(self, n):
        eta = A.crossover_angle()
        j = two_observable_error(ErrorQuery("joint-unbiased", n, eta=eta))
        assert abs(j - A.separate_unbiased(n)) <= 1e-12

    @pytest.mark.parametrize("n", [1, 5, 20])
    def test_sides(self, n):
        below = two_observable_error(ErrorQuery("joint-unbiased", n, eta=0.7))
        above = two_observable_error(ErrorQuery("joint-unbiased", n, eta=math.pi / 2))
        assert below < A.separate_unbiased(n) < above
        assert A.joint_biased(n, optimal_sharpness_pair(0.7).alpha) < A.separate_biased(n)
        assert A.joint_biased(n, optimal_sharpness_pair(0.75).alpha) > A.separate_biased(n)


class TestBayes:
    def test_single_values(self):
        assert A.bayes_single_error(1) == pytest.approx(4 / 9, abs=1e-15)
        assert A.bayes_single_error(10) == pytest.approx(1 / 9, abs=1e-15)

    def test_single_sum_matches_closed(self):
        for n in range(1, 51):
            assert abs(A.bayes_single_error(n) - A.bayes_single_error(n, "closed")) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 5, 17, 30])
    def test_joint_limits(self, n):
        assert A.bayes_joint_error(n, 0.0) == pytest.approx(4 / (3 * (n + 2)), abs=1e-12)
        assert A.bayes_joint_error(n, 1.0) == pytest.approx(2 / (3 * (n + 1)), abs=1e-12)

    def test_joint_intermediate_against_bruteforce(self):
        v = A.bayes_joint_error(2, 0.5)
        assert v == pytest.approx(bayes_joint_error_bruteforce(2, 0.5), abs=1e-12)
        assert 2 / 9 < v < 1 / 3

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("c", [0.2, 0.7, -0.5])
    def test_joint_bruteforce(self, n, c):
        assert A.bayes_joint_error(n, c) == pytest.approx(bayes_joint_error_bruteforce(n, c), abs=1e-12)


class TestSphereAverage:
    """The exact uniform-sphere error of tabulated estimators."""

    @pytest.mark.parametrize("n, c", [(1, 0.4), (3, 0.8), (6, 0.1)])
    def test_reproduces_cross_weighted(self, n, c):
        k, lam = cross_weights(n, c)
        m = (2 * np.arange(n + 1) - n) / n
        ta = k * m[:, None] + lam * m[None, :]
        assert A.sphere_average_error(ta, ta.T, n, c) == pytest.approx(A.cross_weighted(n, c), abs=1e-13)

    @pytest.mark.parametrize("n", [1, 2, 7])
    def test_bayes_joint_agrees_at_limits(self, n):
        for c in (0.0, 1.0):
            assert A.bayes_joint_sphere_error(n, c) == pytest.approx(A.bayes_joint_error(n, c), abs=1e-12)

    def test_bayes_joint_agrees_for_single_copy(self):
        for c in (0.3, 0.8):
            assert A.bayes_joint_sphere_error(1, c) == pytest.approx(A.bayes_joint_error(1, c), abs=1e-12)

    @pytest.mark.parametrize("n, c", [(2, 0.5), (5, math.cos(math.pi / 6)), (10, 0.5)])
    def test_bayes_joint_model_mismatch(self, n, c):
        # B outcomes share the state's azimuth, so the conditional-independence model underestimates
        assert A.bayes_joint_sphere_error(n, c) > A.bayes_joint_error(n, c) + 1e-3

    def test_bayes_joint_sphere_value(self):
        t = bayes_joint_table(2, 0.5)
        from scipy import integrate

        sin_eta = math.sqrt(1 - 0.25)

        def integrand(phi, z):
            x = math.sqrt(1 - z * z) * math.cos(phi)
            ea, eb = z, sin_eta * x + 0.5 * z
            tot = 0.0
            for r in range(3):
                for s in range(3):
                    pa = math.comb(2, r) * ((1 + ea) / 2) ** r * ((1 - ea) / 2) ** (2 - r)
                    pb = math.comb(2, s) * ((1 + eb) / 2) ** s * ((1 - eb) / 2) ** (2 - s)
                    tot += pa * pb * ((ea - t[r, s]) ** 2 + (eb - t[s, r]) ** 2)
            return tot

        val = integrate.dblquad(integrand, -1, 1, 0, 2 * math.pi, epsabs=1e-12)[0] / (4 * math.pi)
        assert A.bayes_joint_sphere_error(2, 0.5) == pytest.approx(val, abs=1e-10)


class TestThreeObservable:
    def test_values(self):
        assert A.three_observable_error("three-sep-unbiased", 1) == 2.0
        assert A.three_observable_error("three-sep-biased", 1) == pytest.approx(2 / 3)
        assert A.three_observable_error("three-joint", 4) == 0.5

    def test_unknown(self):
        with pytest.raises(ValueError):
            A.three_observable_error("three-bayes", 2)

    def test_joint_form(self):
        a2 = 1 / 3
        for n in range(1, 20):
            assert A.three_observable_error("three-joint", n) == pytest.approx((3 - a2) / (3 - a2 + 2 * a2 * n))
            assert A.joint_biased_error(math.sqrt(a2), 2 * n, 3) == pytest.approx(4 / (4 + n))

    def test_joint_on_all_copies(self):
        for n in range(1, 20):
            assert A.three_joint_error_on_copies(n) == pytest.approx(8 / (8 + 3 * n))
            assert A.three_observable_error("three-sep-biased", n) < A.three_joint_error_on_copies(n)


class TestProperties:
    @pytest.mark.parametrize("eta", [0.0, 0.3, A.crossover_angle(), 1.2, math.pi / 2])
    def test_decreasing_in_n(self, eta):
        for s in A.TWO_OBSERVABLE:
            if s == "sep-unbiased-split":
                continue
            vals = [two_observable_error(ErrorQuery(s, n, eta=eta)) for n in range(1, 31)]
            assert all(b < a for a, b in zip(vals, vals[1:])), s
        for s in A.THREE_OBSERVABLE:
            vals = [A.three_observable_error(s, n) for n in range(1, 31)]
            assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_vanish_asymptotically(self):
        n = 10**7
        for s in ("sep-unbiased", "joint-unbiased", "sep-biased", "joint-biased", "cross-weighted"):
            assert two_observable_error(ErrorQuery(s, n, eta=0.4)) < 1e-6

    def test_exact_rational_closed_forms(self):
        # cross-weighted error at a.b = 1/2 and N = 3, in exact arithmetic
        c2, n = Fraction(1, 4), 3
        expected = 4 * (n * c2 - n - 2) / (3 * (n * n * c2 - (n + 2) ** 2))
        assert A.cross_weighted(3, 0.5) == pytest.approx(float(expected), abs=1e-15)

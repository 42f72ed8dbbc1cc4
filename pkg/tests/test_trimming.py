import numpy as np
import pytest

from trimsim.distmodel import DistSpec, EmpiricalSample, InputError, empirical_from_values, normal, uniform
from trimsim.rng import SeedSpec
from trimsim.trimming import (
    TrimmingFunction,
    brute_force_joint_trim,
    check_membership,
    common_trim_distance,
    joint_optimal_trim,
    joint_optimal_trim_dp,
    optimal_trim_to_target,
    trim_with_function,
    trimmed_empirical_process,
)
from trimsim.wasserstein import TabulatedQuantile, w2


class TestTrimmingFunction:
    def test_cap_enforced(self):
        with pytest.raises(InputError):
            TrimmingFunction(0.5, np.array([2.5, 0.0, 1.5, 0.0]))

    def test_mean_one_enforced(self):
        with pytest.raises(InputError):
            TrimmingFunction(0.5, np.array([1.0, 1.0, 1.0, 0.5]))

    def test_identity(self):
        h = TrimmingFunction.identity(0.3, 16)
        t = np.linspace(0, 1, 7)
        assert np.allclose(h(t), t)
        assert np.allclose(h.inverse(t), t)

    def test_endpoint_values(self):
        h = TrimmingFunction(0.25, np.array([4 / 3, 4 / 3, 4 / 3, 0.0]))
        assert h(0.0) == 0.0
        assert h(1.0) == 1.0

    def test_inverse_of_flat_region(self):
        h = TrimmingFunction(0.5, np.array([2.0, 0.0]))
        # h is flat at 1 on [0.5, 1]; the inverse maps 1 to the left end
        assert abs(h.inverse(np.array([1.0]))[0] - 0.5) < 1e-12


class TestTrimWithFunction:
    def test_identity_keeps_weights(self):
        s = empirical_from_values([0.0, 1.0, 2.0])
        out = trim_with_function(s, TrimmingFunction.identity(0.2))
        assert np.allclose(out.weights, s.weights)

    def test_top_quarter_removed(self):
        s = empirical_from_values([0.0, 1.0, 2.0, 3.0])
        h = TrimmingFunction(0.25, np.array([4 / 3, 4 / 3, 4 / 3, 0.0]))
        out = trim_with_function(s, h)
        assert np.allclose(out.weights, [1 / 3, 1 / 3, 1 / 3, 0.0])

    def test_uniform_halved(self):
        u = DistSpec((uniform(0, 1),))
        h = TrimmingFunction(0.5, np.concatenate([np.full(8, 2.0), np.zeros(8)]))
        out = trim_with_function(u, h)
        # cdf doubles on [0, 1/2]
        assert abs(out.cdf(0.25) - 0.5) < 1e-9
        assert abs(out.quantile(np.array([0.5]))[0] - 0.25) < 1e-3

    def test_cap_violation_detected(self):
        s = empirical_from_values([0.0, 1.0])
        h = TrimmingFunction(0.5, np.array([2.0, 0.0]))
        # alpha=0.5 cap is fine here; shrink alpha to force violation
        h_bad = TrimmingFunction.__new__(TrimmingFunction)
        object.__setattr__(h_bad, "alpha", 0.0)
        object.__setattr__(h_bad, "slopes", h.slopes)
        with pytest.raises(InputError):
            trim_with_function(s, h_bad)


class TestOptimalTrimToTarget:
    def test_alpha_zero_is_plain_distance(self):
        x = empirical_from_values([0.0, 1.0, 2.0])
        y = empirical_from_values([0.0, 1.0, 4.0])
        sol = optimal_trim_to_target(x, y, 0.0)
        assert abs(sol.distance - w2(x, y)) < 1e-12
        assert np.allclose(sol.weights_p, x.weights)

    def test_outlier_fully_trimmed(self):
        x = empirical_from_values([0.0, 1.0, 2.0, 100.0])
        y = empirical_from_values([0.0, 1.0, 2.0])
        sol = optimal_trim_to_target(x, y, 0.25)
        assert sol.distance < 1e-6
        assert np.allclose(sol.weights_p, [1 / 3, 1 / 3, 1 / 3, 0.0], atol=1e-8)

    def test_monotone_in_alpha(self):
        rng = np.random.default_rng(7)
        x = empirical_from_values(rng.normal(size=30))
        y = empirical_from_values(rng.normal(size=30) + 1.0)
        vals = [optimal_trim_to_target(x, y, a).distance for a in (0.0, 0.1, 0.2, 0.3)]
        assert all(b <= a + 1e-8 for a, b in zip(vals, vals[1:]))

    def test_continuous_target(self):
        rng = np.random.default_rng(8)
        x = empirical_from_values(rng.normal(size=100))
        p = DistSpec((normal(0, 1),))
        sol = optimal_trim_to_target(x, p, 0.2)
        assert sol.distance <= w2(x, p) + 1e-9
        assert check_membership(sol.weights_p, x.weights, 0.2)

    def test_alpha_domain(self):
        x = empirical_from_values([0.0, 1.0])
        with pytest.raises(InputError):
            optimal_trim_to_target(x, x, 1.0)
        with pytest.raises(InputError):
            optimal_trim_to_target(x, x, -0.1)


class TestJointOptimalTrim:
    def test_identical_samples(self):
        x = empirical_from_values([0.0, 1.0, 2.0])
        assert joint_optimal_trim(x, x, 0.0).distance == 0.0

    def test_spec_example(self):
        x = empirical_from_values([0.0, 1.0, 2.0, 10.0])
        y = empirical_from_values([0.0, 1.0, 2.0, 3.0])
        sol = joint_optimal_trim(x, y, 0.25)
        assert sol.distance < 1e-9

    def test_dp_dispatch_and_convex_match(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            n = int(rng.integers(3, 9))
            k = int(rng.integers(1, min(2, n - 1) + 1))
            x = empirical_from_values(rng.normal(size=n) * 2)
            y = empirical_from_values(rng.normal(size=n) * 2)
            auto = joint_optimal_trim(x, y, k / n)
            assert auto.solver == "dp"
            conv = joint_optimal_trim(x, y, k / n, solver="convex", seed=SeedSpec(1))
            assert abs(auto.distance - conv.distance) < 1e-6

    def test_membership_and_distance_consistency(self):
        rng = np.random.default_rng(10)
        x = empirical_from_values(rng.normal(size=40))
        y = empirical_from_values(rng.normal(size=40) + 0.8)
        sol = joint_optimal_trim(x, y, 0.17, solver="convex")
        assert check_membership(sol.weights_p, x.weights, 0.17)
        assert check_membership(sol.weights_q, y.weights, 0.17)
        assert abs(sol.distance - w2(sol.trimmed_p, sol.trimmed_q)) < 1e-10

    def test_unequal_sizes_use_convex(self):
        rng = np.random.default_rng(11)
        x = empirical_from_values(rng.normal(size=30))
        y = empirical_from_values(rng.normal(size=45))
        sol = joint_optimal_trim(x, y, 0.1)
        assert sol.solver == "convex"
        assert sol.distance <= w2(x, y) + 1e-9

    def test_dp_requested_but_infeasible(self):
        x = empirical_from_values([0.0, 1.0, 2.0])
        y = empirical_from_values([0.0, 1.0])
        with pytest.raises(InputError):
            joint_optimal_trim(x, y, 0.1, solver="dp")

    def test_bound_chain(self):
        """joint <= one-sided <= untrimmed, and joint <= common."""
        rng = np.random.default_rng(12)
        x = empirical_from_values(rng.normal(size=25))
        y = empirical_from_values(rng.normal(size=25) + 0.5)
        for a in (0.1, 0.2):
            joint = joint_optimal_trim(x, y, a, solver="convex").distance
            one = optimal_trim_to_target(x, y, a).distance
            common, _ = common_trim_distance(x, y, a)
            assert joint <= one + 1e-8
            assert one <= w2(x, y) + 1e-8
            assert joint <= common + 1e-6


class TestDpSolver:
    def test_k_zero(self):
        x = np.array([0.0, 1.0, 3.0])
        y = np.array([0.5, 1.0, 2.0])
        sol = joint_optimal_trim_dp(x, y, 0)
        from trimsim.wasserstein import w2_equal_size

        assert abs(sol.distance - w2_equal_size(x, y)) < 1e-12

    def test_spec_example(self):
        sol = joint_optimal_trim_dp([0, 1, 2, 10], [0, 1, 2, 3], 1)
        assert sol.distance < 1e-12

    def test_matches_brute_force(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            n = int(rng.integers(3, 11))
            k = int(rng.integers(1, min(3, n - 1) + 1))
            x = rng.normal(size=n) * 3
            y = rng.normal(size=n) * 3
            assert (
                abs(
                    joint_optimal_trim_dp(x, y, k).distance
                    - brute_force_joint_trim(x, y, k).distance
                )
                < 1e-9
            )

    def test_input_validation(self):
        with pytest.raises(InputError):
            joint_optimal_trim_dp([0, 1], [0, 1, 2], 1)
        with pytest.raises(InputError):
            joint_optimal_trim_dp([0, 1], [0, 1], 2)


class TestBruteForce:
    def test_zero_achievable(self):
        sol = brute_force_joint_trim([0.0, 10.0], [0.0, 0.0], 1)
        assert sol.distance == 0.0

    def test_refuses_large(self):
        with pytest.raises(InputError):
            brute_force_joint_trim(np.zeros(13), np.zeros(13), 1)
        with pytest.raises(InputError):
            brute_force_joint_trim(np.zeros(10), np.zeros(10), 5)


class TestCommonTrim:
    def test_identical(self):
        x = empirical_from_values([0.0, 1.0, 2.0])
        d, h = common_trim_distance(x, x, 0.25)
        assert d == 0.0

    def test_small_grid_vs_exhaustive(self):
        import itertools

        rng = np.random.default_rng(14)
        for _ in range(10):
            x = empirical_from_values(rng.normal(size=8))
            y = empirical_from_values(rng.normal(size=8))
            d, h = common_trim_distance(x, y, 0.25, gridsize=8)
            t = (np.arange(8) + 0.5) / 8
            gap2 = (x.quantile(t) - y.quantile(t)) ** 2
            best = min(
                np.sum(np.delete(gap2, drop)) / (0.75 * 8)
                for drop in itertools.combinations(range(8), 2)
            )
            assert abs(d ** 2 - best) < 1e-9

    def test_quantiles_differing_on_small_set(self):
        """Zero when the quantile gap lives on measure <= alpha."""
        n = 4096
        t = (np.arange(n) + 0.5) / n

        class Curve:
            def __init__(self, bump):
                self.bump = bump

            def quantile(self, t):
                t = np.asarray(t, float)
                out = np.array(t)
                if self.bump:
                    out = np.where(t > 0.9, t + 5.0, out)
                return out

        d, h = common_trim_distance(Curve(False), Curve(True), 0.15)
        assert d < 1e-9

    def test_tie_break_toward_lower_levels(self):
        # constant positive gap: every cell ties; the low levels go first
        x = empirical_from_values([0.0])
        y = empirical_from_values([1.0])
        d, h = common_trim_distance(x, y, 0.25, gridsize=8)
        assert np.all(h.slopes[:2] == 0.0)
        assert np.all(h.slopes[3:] > 0.0)


class TestTrimmedProcess:
    def test_alpha_zero_is_classical_process(self):
        rng = np.random.default_rng(15)
        u = empirical_from_values(rng.random(200))
        target = DistSpec((uniform(0, 1),))
        t, D = trimmed_empirical_process(u, target, 0.0, gridsize=101)
        n = u.size
        direct = np.sqrt(n) * (u.cdf(t) - t)
        assert np.allclose(D, direct, atol=1e-8)

    def test_endpoints(self):
        rng = np.random.default_rng(16)
        u = empirical_from_values(rng.random(50))
        target = DistSpec((uniform(0, 1),))
        t, D = trimmed_empirical_process(u, target, 0.3, gridsize=2)
        assert t[0] == 0.0 and t[-1] == 1.0
        assert abs(D[-1]) < 1e-9

    def test_overtrimming_shrinks_sup(self):
        """Trimming uniform data toward the uniform flattens the process."""
        target = DistSpec((uniform(0, 1),))
        wins = 0
        for s in range(20):
            u = empirical_from_values(SeedSpec(100, (s,)).generator().random(300))
            _, d0 = trimmed_empirical_process(u, target, 0.0, gridsize=128)
            _, d3 = trimmed_empirical_process(u, target, 0.3, gridsize=128)
            wins += np.max(np.abs(d3)) <= np.max(np.abs(d0))
        assert wins >= 15

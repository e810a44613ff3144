import numpy as np
import pytest

from spinest import kernels
from spinest.bloch import X_AXIS, Z_AXIS, sample_pure_state
from spinest.montecarlo import TrialPlan, _compile, _layout, sample_states, simulate_counts, simulate_trials
from spinest.povm import joint_povm_three, projective_povm
from spinest.rng import TrialStream, derive_substream, draws, mix64, seed_key, trial_keys


class TestStreams:
    def test_splitmix_reference(self):
        # first output of SplitMix64 seeded with 0 is mix64(GOLDEN)
        assert int(mix64(np.uint64(0x9E3779B97F4A7C15))) == 0xE220A8397B1DCDAF

    def test_deterministic(self):
        a = TrialStream(7, 3).random(10)
        b = TrialStream(7, 3).random(10)
        np.testing.assert_array_equal(a, b)

    def test_sequential_matches_batch(self):
        s = TrialStream(7, 3)
        first = [s.random() for _ in range(5)]
        np.testing.assert_array_equal(first, TrialStream(7, 3).random(5))
        assert s.position == 5

    def test_trials_and_seeds_differ(self):
        base = TrialStream(1, 0).random(4)
        assert not np.array_equal(base, TrialStream(1, 1).random(4))
        assert not np.array_equal(base, TrialStream(2, 0).random(4))

    def test_unit_interval(self):
        u = draws(trial_keys(seed_key(0), np.arange(1000)), np.arange(1000)[:, None] % 7)
        assert u.min() >= 0.0 and u.max() < 1.0

    def test_uniformity(self):
        u = draws(trial_keys(seed_key(4), np.arange(200_000)), 0)
        counts, _ = np.histogram(u, bins=20, range=(0, 1))
        chi2 = ((counts - 10_000) ** 2 / 10_000).sum()
        assert chi2 < 50  # 19 dof; p ~ 1e-4

    def test_draws_uncorrelated(self):
        tk = trial_keys(seed_key(9), np.arange(100_000))
        assert abs(np.corrcoef(draws(tk, 0), draws(tk, 1))[0, 1]) < 0.015


class TestKernels:
    def test_backend_selected(self):
        assert kernels.BACKEND in kernels.BACKENDS
        assert "python" in kernels.BACKENDS

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.get_kernel("fortran")

    @pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled kernel not built")
    @pytest.mark.parametrize("strategy, eta", [("joint-biased", 0.4), ("sep-unbiased", 1.0), ("three-joint", None)])
    def test_backend_parity(self, strategy, eta):
        n = 5
        s_py, u_py = simulate_trials(TrialPlan(strategy, n, 1, 11, eta=eta, backend="python"), 0, 5000)
        s_c, u_c = simulate_trials(TrialPlan(strategy, n, 1, 11, eta=eta, backend="cython"), 0, 5000)
        np.testing.assert_array_equal(u_py, u_c)
        np.testing.assert_allclose(s_py, s_c, rtol=0, atol=1e-15)

    def test_states_match_trial_stream(self):
        states, _ = simulate_trials(TrialPlan("three-joint", 2, 1, 21), 100, 10)
        ref = np.array([tuple(sample_pure_state(derive_substream(21, 100 + i))) for i in range(10)])
        np.testing.assert_allclose(states, ref, atol=1e-15)
        head, _ = simulate_trials(TrialPlan("three-joint", 2, 1, 21), 0, 3)
        np.testing.assert_allclose(sample_states(21, 3), head, atol=1e-15)

    def test_offset_invariance(self):
        plan = TrialPlan("sep-biased", 3, 1, 5, eta=0.2)
        s_all, u_all = simulate_trials(plan, 0, 300)
        s_tail, u_tail = simulate_trials(plan, 200, 100)
        np.testing.assert_array_equal(u_all[200:], u_tail)
        np.testing.assert_array_equal(s_all[200:], s_tail)

    def test_counts_in_range(self):
        plan = TrialPlan("joint-unbiased", 4, 1, 1, eta=0.7)
        _, ups = simulate_trials(plan, 0, 2000)
        layout = _layout(plan)
        assert ups.shape == (2000, 2)
        assert ups.min() >= 0 and ups.max() <= 8
        assert len(_compile(layout)) == 4


class TestSimulateCounts:
    def test_eigenstate(self):
        c = simulate_counts(projective_povm(Z_AXIS), Z_AXIS, 100, derive_substream(0, 0))
        assert c.up == (100,) and c.shots == (100,)

    def test_fair_coin(self):
        c = simulate_counts(projective_povm(Z_AXIS), X_AXIS, 10**6, derive_substream(0, 1))
        assert abs(c.up[0] / 1e6 - 0.5) < 3 * 0.5e-3

    def test_joint_three_marginal(self):
        c = simulate_counts(joint_povm_three(), Z_AXIS, 10**6, derive_substream(0, 2))
        p = 0.5 * (1 + 1 / np.sqrt(3))
        assert abs(c.up[2] / 1e6 - p) < 3 * np.sqrt(p * (1 - p) / 1e6)
        assert abs(c.up[0] / 1e6 - 0.5) < 3 * 0.5e-3

    def test_zero_copies(self):
        with pytest.raises(ValueError):
            simulate_counts(projective_povm(Z_AXIS), Z_AXIS, 0, derive_substream(0, 0))

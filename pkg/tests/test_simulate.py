import math

import numpy as np
import pytest
from scipy import stats

from phasebound.mse import covariant_mse
from phasebound.simulate import (
    OutcomeSampler,
    SampleBatch,
    SamplingError,
    empirical_mse,
    noon_plateau_demo,
    phase_period,
    resolve_branch,
    sample_outcomes,
    two_step_demo,
    wrap,
    wrapped_error,
)
from phasebound.states import StateVector, build_noon, build_sine, vacuum

from .conftest import random_state


def noon2_cdf(t):
    # integral of cos^2(2u)/pi from -pi to t
    return (t + math.pi) / (2 * math.pi) + np.sin(4 * t) / (8 * math.pi)


class TestWrap:
    def test_definition(self):
        theta = 0.5
        for hat, expected in [(0.5 - math.pi - 0.1, 0.5 + math.pi - 0.1), (1.0, 1.0), (0.5 + math.pi, 0.5 - math.pi)]:
            assert wrapped_error(hat, theta) == pytest.approx(expected - theta)

    def test_range(self, rng):
        x = rng.uniform(-50, 50, 1000)
        w = wrap(x)
        assert np.all((w >= -math.pi) & (w < math.pi))
        np.testing.assert_allclose(np.cos(w), np.cos(x), atol=1e-12)

    def test_shift_invariance(self):
        batch = sample_outcomes(build_noon(1), 3.0, 5000, 11)
        base = empirical_mse(batch)
        for shift in (0.4, 2.5, -3.0):
            moved = SampleBatch(
                float(wrap(batch.theta_true + shift)), wrap(batch.estimates + shift), batch.seed, batch.count
            )
            assert empirical_mse(moved)[0] == pytest.approx(base[0], rel=1e-9)


class TestSampler:
    def test_vacuum_uniform(self):
        b = sample_outcomes(vacuum(), 1.3, 100_000, 1)
        u = (b.estimates + math.pi) / (2 * math.pi)
        assert stats.kstest(u, "uniform").pvalue > 0.01
        assert np.all((b.estimates >= -math.pi) & (b.estimates < math.pi))

    def test_noon2_chi_square(self):
        b = sample_outcomes(build_noon(2), 0.0, 100_000, 2)
        edges = np.linspace(-math.pi, math.pi, 65)
        observed, _ = np.histogram(b.estimates, edges)
        expected = np.diff(noon2_cdf(edges)) * b.count
        assert stats.chisquare(observed, expected).pvalue > 0.01

    def test_deterministic(self):
        a = sample_outcomes(build_sine(5), 0.2, 1000, 42)
        b = sample_outcomes(build_sine(5), 0.2, 1000, 42)
        c = sample_outcomes(build_sine(5), 0.2, 1000, 43)
        np.testing.assert_array_equal(a.estimates, b.estimates)
        assert not np.array_equal(a.estimates, c.estimates)

    def test_aliasing_guard(self):
        with pytest.raises(SamplingError):
            OutcomeSampler(build_noon(100), grid_points=200)

    def test_rejects_count(self):
        with pytest.raises(ValueError):
            sample_outcomes(vacuum(), 0.0, 0, 1)
        with pytest.raises(ValueError):
            empirical_mse(sample_outcomes(vacuum(), 0.0, 1, 1))


class TestEmpiricalMSE:
    @pytest.mark.parametrize("state", [vacuum(), build_noon(1), build_sine(32)], ids=["vacuum", "noon1", "sine32"])
    def test_matches_covariant(self, state):
        mse, se = empirical_mse(sample_outcomes(state, -0.8, 1_000_000, 5))
        assert abs(mse - covariant_mse(state)) < 3 * se

    def test_random_states(self, rng):
        for i in range(10):
            s = random_state(rng, -int(rng.integers(0, 8)), int(rng.integers(0, 8)))
            mse, se = empirical_mse(sample_outcomes(s, rng.uniform(-3, 3), 100_000, i))
            assert abs(mse - covariant_mse(s)) < 4 * se


class TestBranches:
    def test_period(self):
        assert phase_period(build_noon(4)) == pytest.approx(math.pi / 4)
        assert phase_period(build_sine(4)) == pytest.approx(2 * math.pi)
        assert phase_period(vacuum()) == pytest.approx(2 * math.pi)
        assert phase_period(StateVector.from_amplitudes(-3, [1, 0, 0, 1, 0, 0, 1])) == pytest.approx(2 * math.pi / 3)

    def test_resolve(self):
        got = resolve_branch(np.array([0.0, 0.2, 0.26, 1.0]), 0.5, 0.5)
        np.testing.assert_allclose(got, [0.5, 0.7, 0.26, 0.5])

    def test_resolve_tie_goes_low(self):
        assert resolve_branch(1.0, 0.0, 2.0) == pytest.approx(-1.0)


class TestPlateau:
    def test_bound_holds(self):
        rows = noon_plateau_demo([100, 200], 0.1, 3000, 9, n_theta=9, contrast_E=200)
        for r in rows[:-1]:
            assert r["worst_mse"] >= r["lower_bound"] - 3 * r["stderr"]
        assert rows[-1]["state"] == "sine"
        assert rows[-1]["worst_mse"] < 1e-4

    def test_warns_below_regime(self):
        with pytest.warns(RuntimeWarning):
            noon_plateau_demo([10], 0.1, 100, 1, n_theta=3)

    def test_rejects_eps(self):
        with pytest.raises(ValueError):
            noon_plateau_demo([100], 1.0, 100, 1)

    def test_reproducible(self):
        a = noon_plateau_demo([80], 0.1, 500, 3, n_theta=5)
        b = noon_plateau_demo([80], 0.1, 500, 3, n_theta=5)
        assert a == b


class TestTwoStep:
    def test_near_asymptote(self):
        rep = two_step_demo(64, 0.25, 10_000, 1)
        assert not rep["degenerate"]
        assert rep["two_step_mse"] < 4 * math.pi**2 / 4 / 64**2

    def test_one_shot_when_split_is_one(self):
        rep = two_step_demo(64, 1.0, 1000, 1)
        assert rep["degenerate"]
        assert rep["two_step_mse"] == rep["one_shot_mse"]

    def test_noon_second_stage_is_worse(self):
        sine = two_step_demo(64, 0.25, 10_000, 2)
        noon = two_step_demo(64, 0.25, 10_000, 2, stage2="noon")
        assert noon["two_step_mse"] > 5 * sine["two_step_mse"]

    def test_validation(self):
        with pytest.raises(ValueError):
            two_step_demo(4, 0.5, 10, 1)
        with pytest.raises(ValueError):
            two_step_demo(64, 0.0, 10, 1)

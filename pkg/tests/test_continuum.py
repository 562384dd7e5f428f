import math

import numpy as np
import pytest

from phasebound.continuum import (
    ContinuumFunction,
    dirichlet_ground_state,
    discrete_dirichlet_eigenvalue,
    extend_by_zero,
    gaussian_profile,
    p2_expectation,
    q2_expectation,
    scaling_convergence,
    sine_profile,
    uncertainty_check,
)

PI2_4 = math.pi**2 / 4


def observed_order(values, exact):
    errs = [abs(v - exact) for v in values]
    return [math.log2(a / b) for a, b in zip(errs, errs[1:])]


class TestExpectations:
    def test_gaussian(self):
        g = ContinuumFunction.from_callable(gaussian_profile, -12, 12, 4001)
        assert q2_expectation(g) == pytest.approx(1.0, abs=1e-4)
        assert p2_expectation(g) == pytest.approx(0.25, abs=1e-4)

    def test_sine(self):
        f = ContinuumFunction.from_callable(sine_profile, -1, 1, 2001)
        assert p2_expectation(f) == pytest.approx(PI2_4, rel=1e-5)

    def test_constant(self):
        f = ContinuumFunction.from_callable(np.ones_like, -1, 1, 401)
        assert q2_expectation(f) == pytest.approx(1 / 3, abs=1e-4)
        assert p2_expectation(f) == pytest.approx(0.0, abs=1e-12)

    def test_normalized(self):
        f = ContinuumFunction.from_callable(lambda x: 3 * np.exp(-x**2), -8, 8, 801)
        assert f.norm() == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("profile,lo,hi,exact", [
        (gaussian_profile, -12, 12, 0.25),
        (sine_profile, -1, 1, PI2_4),
    ])
    def test_second_order(self, profile, lo, hi, exact):
        vals = [p2_expectation(ContinuumFunction.from_callable(profile, lo, hi, M)) for M in (101, 201, 401, 801)]
        assert min(observed_order(vals, exact)) >= 1.9

    def test_q2_order(self):
        f = lambda x: np.exp(-x**2) * (1 + x) ** 2
        ref = q2_expectation(ContinuumFunction.from_callable(f, -3, 3, 64001))
        vals = [q2_expectation(ContinuumFunction.from_callable(f, -3, 3, M)) for M in (51, 101, 201)]
        assert min(observed_order(vals, ref)) >= 1.9

    def test_richardson_improves(self):
        g = ContinuumFunction.from_callable(gaussian_profile, -12, 12, 1001)
        assert abs(p2_expectation(g, richardson=True) - 0.25) < abs(p2_expectation(g) - 0.25) / 10

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            q2_expectation(ContinuumFunction(-1, 1, np.ones(5)))


class TestDirichlet:
    def test_eigenvalue(self):
        ev, f = dirichlet_ground_state(101)
        assert abs(ev / PI2_4 - 1) < 1e-3
        assert f.samples[0] == 0 and f.samples[-1] == 0

    @pytest.mark.parametrize("M", [16, 101, 401, 1601])
    def test_closed_form(self, M):
        ev, _ = dirichlet_ground_state(M)
        assert ev == pytest.approx(discrete_dirichlet_eigenvalue(M), rel=1e-10)

    def test_convergence_rate(self):
        errs = [abs(dirichlet_ground_state(M)[0] - PI2_4) for M in (51, 101, 201, 401)]
        ratios = [a / b for a, b in zip(errs, errs[1:])]
        assert all(3.5 < r < 4.5 for r in ratios)

    def test_eigenfunction(self):
        _, f = dirichlet_ground_state(401)
        ref = ContinuumFunction(-1, 1, sine_profile(f.x)).normalized()
        d = ContinuumFunction(-1, 1, f.samples - ref.samples).norm()
        assert d < 1e-3

    def test_rejects(self):
        with pytest.raises(ValueError):
            dirichlet_ground_state(10)


class TestUncertainty:
    def test_gaussian_saturates(self):
        res = uncertainty_check(ContinuumFunction.from_callable(gaussian_profile, -12, 12, 4001))
        assert res.product == pytest.approx(0.25, abs=1e-4)
        assert res.ok

    def test_dirichlet_strict(self):
        _, f = dirichlet_ground_state(401)
        res = uncertainty_check(extend_by_zero(f, -12, 12))
        assert res.ok and res.product > 0.25
        # the zero extension has a kink at +-1, so differences converge only at O(h)
        assert res.product == pytest.approx(PI2_4 * (1 / 3 - 2 / math.pi**2), rel=5e-3)

    def test_random_smooth(self, rng):
        for _ in range(20):
            c = rng.normal(size=4)
            w = rng.uniform(0.3, 2.0)
            shift = rng.uniform(-1, 1)
            f = lambda x: np.exp(-((x - shift) ** 2) / w) * (c[0] + c[1] * x + c[2] * x**2) * np.exp(1j * c[3] * x)
            res = uncertainty_check(ContinuumFunction.from_callable(f, -12, 12, 4001))
            assert res.ok

    def test_boundary_mass(self):
        with pytest.raises(ValueError):
            uncertainty_check(ContinuumFunction.from_callable(np.ones_like, -1, 1, 101))


class TestScaling:
    def test_sine(self):
        f = ContinuumFunction.from_callable(sine_profile, -1, 1, 4001)
        table = scaling_convergence(f, [16, 32, 64, 128])
        vals = [r["scaled_mse"] for r in table.rows]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert table.gap(PI2_4) < 0.03

    def test_gaussian(self):
        f = ContinuumFunction.from_callable(gaussian_profile, -12, 12, 4001)
        table = scaling_convergence(f, [16, 32, 64, 128])
        assert table.gap(0.25) < 0.03
        assert table.final_gap < 1e-6

    def test_sampled_profile_without_callable(self):
        f = ContinuumFunction.from_callable(gaussian_profile, -12, 12, 4001)
        bare = ContinuumFunction(f.x_lo, f.x_hi, f.samples)
        table = scaling_convergence(bare, [16])
        assert table.gap(0.25) < 1e-3

    def test_phase_matters(self):
        flipped = lambda x: np.sign(x) * np.exp(-x**2 / 4)
        a = scaling_convergence(ContinuumFunction.from_callable(gaussian_profile, -12, 12, 4000), [20])
        b = scaling_convergence(ContinuumFunction.from_callable(flipped, -12, 12, 4000), [20])
        assert b.rows[0]["mse"] > 2 * a.rows[0]["mse"]

"""Monte-Carlo check of the covariant measurement.

Outcomes are drawn by inverse-CDF sampling from the exact outcome density on
a dense periodic grid.  Errors are wrapped into ``[-pi, pi)`` around the true
phase before squaring.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ._random import stream
from .mse import amplitude_sum_grid, covariant_mse
from .optimize import noon_local_minimax_lower
from .states import StateVector, build_noon, build_sine, metrics

TWO_PI = 2 * math.pi


class SamplingError(RuntimeError):
    """The tabulated density failed its normalization check."""


@dataclass(frozen=True)
class SampleBatch:
    theta_true: float
    estimates: np.ndarray
    seed: int
    count: int


def wrap(x):
    """Map angles into ``[-pi, pi)``."""
    return np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi


def wrapped_error(theta_hat, theta):
    """``T_theta(theta_hat) - theta``: the estimate shifted by a multiple of 2pi into ``[theta - pi, theta + pi)``."""
    return wrap(np.asarray(theta_hat, dtype=float) - theta)


class OutcomeSampler:
    """Inverse-CDF sampler for the error ``theta_hat - theta_true`` of one state."""

    def __init__(self, state: StateVector, grid_points: int | None = None):
        n_max = metrics(state).n_max
        size = max(4096, 16 * n_max) if grid_points is None else int(grid_points)
        theta, amp = amplitude_sum_grid(state, size)
        dens = np.abs(amp) ** 2 / TWO_PI
        # close the periodic grid at +pi
        grid = np.append(theta, math.pi)
        dens = np.append(dens, dens[0])
        cells = 0.5 * (dens[1:] + dens[:-1]) * (TWO_PI / size)
        total = math.fsum(cells)
        if abs(total - 1.0) > 1e-6:
            raise SamplingError(f"density integrates to {total!r} on a {size}-point grid")
        cdf = np.concatenate([[0.0], np.cumsum(cells)]) / total
        cdf[-1] = 1.0
        self.state = state
        self.grid = grid
        self.cdf = cdf

    def errors(self, count: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(count)
        return wrap(np.interp(u, self.cdf, self.grid))

    def sample(self, theta_true: float, count: int, rng: np.random.Generator) -> np.ndarray:
        return wrap(theta_true + self.errors(count, rng))


def sample_outcomes(state: StateVector, theta_true: float, count: int, seed: int) -> SampleBatch:
    """Draw ``count`` i.i.d. covariant estimates for ``state`` at ``theta_true``."""
    if count < 1:
        raise ValueError("count must be positive")
    rng = stream(seed, "sample_outcomes")
    est = OutcomeSampler(state).sample(theta_true, count, rng)
    est.setflags(write=False)
    return SampleBatch(float(theta_true), est, int(seed), int(count))


def empirical_mse(batch: SampleBatch) -> tuple[float, float]:
    """Mean wrapped squared error and its standard error."""
    if batch.count < 2:
        raise ValueError("need at least two samples")
    sq = wrapped_error(batch.estimates, batch.theta_true) ** 2
    mean = math.fsum(sq) / sq.size
    var = math.fsum((sq - mean) ** 2) / (sq.size - 1)
    return mean, math.sqrt(var / sq.size)


def _mse_stats(err: np.ndarray) -> tuple[float, float]:
    sq = err**2
    mean = math.fsum(sq) / sq.size
    var = math.fsum((sq - mean) ** 2) / (sq.size - 1)
    return mean, math.sqrt(var / sq.size)


def phase_period(state: StateVector) -> float:
    """Smallest period of ``theta -> U_theta |phi>`` up to a global phase: 2pi / gcd of index gaps."""
    support = state.indices[state.amplitudes != 0]
    g = reduce(math.gcd, (int(k) for k in np.diff(support)), 0)
    return TWO_PI / g if g else TWO_PI


def resolve_branch(estimates, reference, period: float):
    """Shift each estimate by a multiple of ``period`` to the copy nearest ``reference``.

    Ties go to the smaller candidate.
    """
    est = np.asarray(estimates, dtype=float)
    offset = np.mod(est - reference + period / 2, period) - period / 2
    return reference + offset


def noon_plateau_demo(
    n_list,
    eps: float,
    count: int,
    seed: int,
    theta0: float = 0.0,
    n_theta: int = 33,
    contrast_E: int | None = None,
) -> list[dict]:
    """Worst empirical MSE of noon(n) over true phases in ``[theta0 - eps, theta0 + eps]``.

    The covariant estimate of noon(n) only determines the phase modulo its
    period, so it is moved to the copy nearest ``theta0``.  Each row carries
    the analytic local lower bound.  With ``contrast_E`` a final row reports
    the plain covariant estimate of the sine state on the same phases.
    """
    if not 0 < eps <= math.pi / 4:
        raise ValueError("eps must lie in (0, pi/4]")
    if all(n <= TWO_PI / eps for n in n_list):
        warnings.warn(
            f"all n <= 2pi/eps = {TWO_PI / eps:.1f}: the plateau regime is not reached",
            RuntimeWarning,
            stacklevel=2,
        )
    thetas = np.linspace(theta0 - eps, theta0 + eps, n_theta)
    rows = []
    for n in n_list:
        state = build_noon(int(n))
        sampler = OutcomeSampler(state)
        period = phase_period(state)
        worst = (-1.0, 0.0, 0.0)
        for i, th in enumerate(thetas):
            rng = stream(seed, "noon_plateau", int(n), i)
            est = resolve_branch(sampler.sample(th, count, rng), theta0, period)
            mse, se = _mse_stats(est - th)
            if mse > worst[0]:
                worst = (mse, se, th)
        rows.append(
            {
                "state": "noon",
                "n": int(n),
                "worst_mse": worst[0],
                "stderr": worst[1],
                "worst_theta": worst[2],
                "lower_bound": noon_local_minimax_lower(int(n), eps),
                "n2_worst": n * n * worst[0],
            }
        )
    if contrast_E is not None:
        state = build_sine(int(contrast_E))
        sampler = OutcomeSampler(state)
        worst = (-1.0, 0.0, 0.0)
        for i, th in enumerate(thetas):
            rng = stream(seed, "sine_contrast", int(contrast_E), i)
            mse, se = _mse_stats(wrapped_error(sampler.sample(th, count, rng), th))
            if mse > worst[0]:
                worst = (mse, se, th)
        rows.append(
            {
                "state": "sine",
                "n": int(contrast_E),
                "worst_mse": worst[0],
                "stderr": worst[1],
                "worst_theta": worst[2],
                "lower_bound": 0.0,
                "n2_worst": contrast_E**2 * worst[0],
            }
        )
    return rows


def two_step_demo(
    E_total: int,
    split: float,
    trials: int,
    seed: int,
    stage2: str = "sine",
) -> dict:
    """Coarse-then-fine estimation with a photon budget split between two states.

    Stage one measures a sine state with ``E1 = round(split * E_total)``.
    Stage two measures ``stage2`` (``"sine"`` or ``"noon"``) with the rest and
    its estimate is moved to the periodic copy nearest the stage-one estimate.
    True phases are uniform on the circle.
    """
    if E_total < 8:
        raise ValueError("E_total must be at least 8")
    if not 0 < split <= 1:
        raise ValueError("split must lie in (0, 1]")
    if stage2 not in ("sine", "noon"):
        raise ValueError("stage2 must be 'sine' or 'noon'")
    E1 = int(round(split * E_total))
    E2 = E_total - E1
    rng_theta = stream(seed, "two_step_theta")
    theta = rng_theta.uniform(-math.pi, math.pi, trials)

    one_shot = OutcomeSampler(build_sine(E_total))
    one_err = wrapped_error(one_shot.sample(theta, trials, stream(seed, "two_step_one_shot")), theta)
    one_mse, one_se = _mse_stats(one_err)

    degenerate = E1 < 1 or E2 < 1
    if degenerate:
        mse, se = one_mse, one_se
    else:
        coarse = OutcomeSampler(build_sine(E1)).sample(theta, trials, stream(seed, "two_step_stage1"))
        fine_state = build_sine(E2) if stage2 == "sine" else build_noon(E2)
        fine = OutcomeSampler(fine_state).sample(theta, trials, stream(seed, "two_step_stage2"))
        final = resolve_branch(fine, coarse, phase_period(fine_state))
        mse, se = _mse_stats(wrapped_error(final, theta))
    return {
        "E_total": int(E_total),
        "E1": E1,
        "E2": E2,
        "stage2": stage2,
        "trials": int(trials),
        "degenerate": degenerate,
        "two_step_mse": mse,
        "two_step_stderr": se,
        "one_shot_mse": one_mse,
        "one_shot_stderr": one_se,
        "one_shot_exact": covariant_mse(build_sine(E_total)),
        "asymptotic": math.pi**2 / 4 / E_total**2,
    }

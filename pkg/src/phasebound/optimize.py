"""Constrained minimization of the covariant MSE and noon-state analysis."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._random import stream
from .mse import _kernel_entries, covariant_mse
from .states import StateVector, metrics
from .toeplitz import SymmetricToeplitz, smallest_eigenpair


class OptimizationError(RuntimeError):
    """Raised when a constrained solve cannot be completed."""


class ConstraintKind(str, enum.Enum):
    AVG_SQUARE = "avg"
    MAX_PHOTON = "max"


@dataclass(frozen=True)
class Constraint:
    kind: ConstraintKind
    E: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ConstraintKind(self.kind))
        if not self.E > 0:
            raise ValueError("E must be positive")
        if self.kind is ConstraintKind.MAX_PHOTON and int(self.E) != self.E:
            raise ValueError("the max-photon constraint needs an integer E")

    @classmethod
    def avg_square(cls, E: float) -> "Constraint":
        return cls(ConstraintKind.AVG_SQUARE, E)

    @classmethod
    def max_photon(cls, E: int) -> "Constraint":
        return cls(ConstraintKind.MAX_PHOTON, E)

    def value(self, state: StateVector) -> float:
        m = metrics(state)
        if self.kind is ConstraintKind.AVG_SQUARE:
            return m.n2_avg
        return float(m.n_max)

    def bound(self) -> float:
        return self.E**2 if self.kind is ConstraintKind.AVG_SQUARE else self.E


@dataclass
class OptimizationResult:
    state: StateVector
    value: float
    multiplier: float | None
    constraint_value: float
    iterations: int
    residual: float
    degenerate: bool = False
    info: dict = field(default_factory=dict)


def optimize_max_constraint(E: int, method: str = "auto") -> OptimizationResult:
    """Minimal MSE over states supported on ``[-E, E]``.

    This is the smallest eigenvalue of the ``(2E+1)``-dimensional Toeplitz
    section of the kernel, and the state is its eigenvector.
    """
    if int(E) != E or E < 0:
        raise ValueError("E must be a nonnegative integer")
    E = int(E)
    toep = SymmetricToeplitz(_kernel_entries(2 * E))
    pair = smallest_eigenpair(toep, method=method)
    state = StateVector.from_amplitudes(-E, pair.vector)
    return OptimizationResult(
        state=state,
        value=pair.value,
        multiplier=None,
        constraint_value=float(metrics(state).n_max),
        iterations=1,
        residual=pair.residual,
        degenerate=pair.degenerate,
        info={"gap": pair.gap, "method": pair.method},
    )


def optimize_avg_constraint(
    E: float,
    truncation: int | None = None,
    rtol: float = 1e-6,
    max_iter: int = 200,
    method: str = "auto",
) -> OptimizationResult:
    """Minimal MSE subject to ``sum n^2 |a_n|^2 <= E^2``.

    Bisects the multiplier ``lam`` of the penalized ground-state problem
    ``Theta + lam * diag(n^2)`` on indices ``[-truncation, truncation]``.
    The second moment of the ground state decreases with ``lam``; the result
    is taken from the feasible end of the bracket, so the constraint holds
    and is active to ``rtol``.
    """
    if not E > 0:
        raise ValueError("E must be positive")
    T = int(math.ceil(8 * E)) if truncation is None else int(truncation)
    if T < 1:
        raise ValueError("truncation must be positive")
    toep = SymmetricToeplitz(_kernel_entries(2 * T))
    n2 = np.arange(-T, T + 1, dtype=float) ** 2
    target = float(E) ** 2
    evals = 0

    def solve(lam):
        nonlocal evals
        evals += 1
        pair = smallest_eigenpair(toep, diag=lam * n2, method=method)
        return pair, float(np.dot(n2, pair.vector**2))

    pair0, g0 = solve(0.0)
    if g0 <= target * (1 + rtol):
        raise OptimizationError(
            f"constraint inactive at lam=0 (second moment {g0:.6g} <= E^2={target:.6g}); "
            f"truncation {T} is too small"
        )
    lo, hi = 0.0, 1.0 / max(target, 1.0) ** 2
    pair_hi, g_hi = solve(hi)
    while g_hi > target:
        lo = hi
        hi *= 2.0
        if evals > max_iter:
            raise OptimizationError("could not bracket the multiplier")
        pair_hi, g_hi = solve(hi)

    while (target - g_hi) / target > rtol:
        if evals > max_iter:
            raise OptimizationError(
                f"bisection did not converge in {max_iter} solves "
                f"(relative gap {(target - g_hi) / target:.3g})"
            )
        mid = 0.5 * (lo + hi)
        pair_mid, g_mid = solve(mid)
        if g_mid > target:
            lo = mid
        else:
            hi, pair_hi, g_hi = mid, pair_mid, g_mid

    state = StateVector.from_amplitudes(-T, pair_hi.vector)
    value = covariant_mse(state)
    return OptimizationResult(
        state=state,
        value=value,
        multiplier=hi,
        constraint_value=g_hi,
        iterations=evals,
        residual=pair_hi.residual,
        degenerate=pair_hi.degenerate,
        info={"truncation": T, "penalized_eigenvalue": pair_hi.value, "gap": pair_hi.gap},
    )


def optimize(constraint: Constraint, **kwargs) -> OptimizationResult:
    if constraint.kind is ConstraintKind.MAX_PHOTON:
        return optimize_max_constraint(int(constraint.E), **kwargs)
    return optimize_avg_constraint(constraint.E, **kwargs)


@dataclass
class PhaseResult:
    phases: np.ndarray
    value: float
    state: StateVector
    converged: bool
    gradient_norm: float
    sweeps: int


def _descend(r, T, phases, max_sweeps, tol):
    z = r * np.exp(1j * phases)
    Tz = T @ z
    diag = T[0, 0]
    value = float(np.vdot(z, Tz).real)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for k in range(r.size):
            s = Tz[k] - diag * z[k]
            if s == 0:
                continue
            znew = r[k] * np.exp(1j * (np.angle(s) + math.pi))
            delta = znew - z[k]
            if delta != 0:
                Tz += T[:, k] * delta
                z[k] = znew
        new_value = float(np.vdot(z, Tz).real)
        if value - new_value <= tol * max(1.0, abs(value)):
            value = new_value
            break
        value = new_value
    Tz = T @ z
    value = float(np.vdot(z, Tz).real)
    grad = 2.0 * np.imag(np.conj(z) * Tz)
    return np.angle(z), value, float(np.linalg.norm(grad)), sweeps


def min_phase_mse(
    moduli,
    restarts: int = 16,
    seed: int = 0,
    lo: int | None = None,
    max_sweeps: int = 1000,
    tol: float = 1e-15,
) -> PhaseResult:
    """Best phases for fixed moduli, by cyclic coordinate descent.

    Each coordinate update is exact: with ``s = sum_{m != n} Theta_{n-m} z_m``
    the optimal phase is ``arg(s) + pi``.  The best of the all-zero start and
    ``restarts`` random starts is returned; the value is an upper estimate of
    the phase-optimized MSE (exact for two-point supports).

    ``moduli`` is a :class:`StateVector` (its moduli are used) or an array of
    amplitudes for indices ``lo, lo+1, ...``.  Only index differences enter the
    objective, so ``lo`` just labels the returned state.
    """
    if isinstance(moduli, StateVector):
        lo = moduli.lo if lo is None else lo
        r = np.abs(moduli.amplitudes)
    else:
        r = np.abs(np.asarray(moduli, dtype=complex).ravel())
        lo = 0 if lo is None else lo
    norm = np.linalg.norm(r)
    if norm == 0:
        raise ValueError("moduli are all zero")
    r = r / norm
    # zero moduli never interact, so work on the principal section of the support
    support = np.flatnonzero(r)
    entries = _kernel_entries(int(support[-1] - support[0]))
    T = entries[np.abs(support[:, None] - support[None, :])]
    rs = r[support]

    starts = [np.zeros(rs.size)]
    for i in range(restarts):
        rng = stream(seed, "min_phase_mse", i)
        starts.append(rng.uniform(-math.pi, math.pi, rs.size))

    best = None
    for start in starts:
        out = _descend(rs, T, start.copy(), max_sweeps, tol)
        if best is None or out[1] < best[1]:
            best = out
    sub_phases, value, gnorm, sweeps = best
    phases = np.zeros(r.size)
    phases[support] = sub_phases
    state = StateVector.from_amplitudes(lo, r * np.exp(1j * phases), normalize=True)
    return PhaseResult(
        phases=phases,
        value=value,
        state=state,
        converged=gnorm < 1e-8,
        gradient_norm=gnorm,
        sweeps=sweeps,
    )


def noon_local_minimax_lower(n: int, eps: float) -> float:
    """Lower bound ``(pi/n * floor(n eps / pi))^2`` on the local minimax MSE of noon(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < eps <= math.pi:
        raise ValueError("eps must lie in (0, pi]")
    return (math.pi / n * math.floor(n * eps / math.pi)) ** 2


@dataclass(frozen=True)
class GridMinimaxInstance:
    """``K`` equally likely-looking candidates spaced ``delta`` apart, chosen with probabilities ``p``."""

    K: int
    delta: float
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).ravel()
        if self.K < 1 or p.size != self.K:
            raise ValueError("need K >= 1 probabilities")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_noon(cls, n: int, eps: float, probabilities=None) -> "GridMinimaxInstance":
        K = math.floor(n * eps / math.pi)
        if K < 1:
            raise ValueError(f"eps={eps} is below pi/n: no candidate ambiguity")
        p = np.full(K, 1.0 / K) if probabilities is None else probabilities
        return cls(K, 2 * math.pi / n, p)


def grid_minimax_risk(instance: GridMinimaxInstance, decision: int) -> float:
    """Expected squared error ``sum_i p_i delta^2 (j - i)^2`` when the truth is candidate ``j``."""
    if not 1 <= decision <= instance.K:
        raise ValueError("decision must lie in 1..K")
    i = np.arange(1, instance.K + 1)
    return float(instance.delta**2 * np.dot(instance.probabilities, (decision - i) ** 2))


def worst_case(instance: GridMinimaxInstance) -> float:
    return max(grid_minimax_risk(instance, j) for j in range(1, instance.K + 1))


def worst_case_lower_bounds(instance: GridMinimaxInstance) -> dict:
    """Lower bounds on :func:`worst_case`.

    ``rigorous`` is ``delta^2 ((K-1)/2)^2``, valid for every ``p``.
    ``half_width`` uses ``(K/2)^2``, which the K=1 case already violates;
    it is reported for comparison only.
    """
    K, d = instance.K, instance.delta
    return {"rigorous": d**2 * ((K - 1) / 2) ** 2, "half_width": d**2 * (K / 2) ** 2}


def noon_divergence_sweep(n_list, restarts: int = 0, seed: int = 0) -> list[dict]:
    """Phase-optimized MSE of noon(n) and its Heisenberg-scaled value ``n^2 C``."""
    rows = []
    for n in n_list:
        n = int(n)
        r = np.zeros(2 * n + 1)
        r[0] = r[-1] = 1 / math.sqrt(2)
        res = min_phase_mse(r, restarts=restarts, seed=seed, lo=-n)
        rows.append({"n": n, "C": res.value, "n2C": n * n * res.value})
    return rows

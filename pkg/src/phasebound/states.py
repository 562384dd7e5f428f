"""Input states on the photon-difference lattice.

A state is a coefficient sequence ``a_n`` over signed indices: ``n > 0`` is
``|n,0>``, ``n < 0`` is ``|0,-n>`` and ``n = 0`` is the vacuum.  The phase
shift multiplies ``a_n`` by ``exp(i n theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

NORM_TOL = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Dense amplitudes for indices ``lo..hi`` (inclusive); zero elsewhere."""

    lo: int
    hi: int
    amplitudes: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if self.lo > 0 or self.hi < 0:
            raise ValueError(f"support [{self.lo}, {self.hi}] must contain index 0")
        if amps.size != self.hi - self.lo + 1:
            raise ValueError(
                f"expected {self.hi - self.lo + 1} amplitudes, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, lo: int, amplitudes, normalize: bool = True, **diag):
        """Build a state from raw amplitudes starting at index ``lo``.

        The index range is padded so that it contains 0.
        """
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        if amps.size == 0:
            raise ValueError("empty amplitude array")
        lo = int(lo)
        hi = lo + amps.size - 1
        if lo > 0:
            amps = np.concatenate([np.zeros(lo, dtype=complex), amps])
            lo = 0
        if hi < 0:
            amps = np.concatenate([amps, np.zeros(-hi, dtype=complex)])
            hi = 0
        if normalize:
            norm = np.linalg.norm(amps)
            if not np.isfinite(norm) or norm == 0.0:
                raise ValueError("cannot normalize a zero or non-finite vector")
            amps = amps / norm
        return cls(lo, hi, amps, diag)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def amplitude(self, n: int) -> complex:
        if self.lo <= n <= self.hi:
            return complex(self.amplitudes[n - self.lo])
        return 0j

    def padded(self, lo: int, hi: int) -> np.ndarray:
        """Amplitudes on ``lo..hi``, zero-filled; the range must cover the support."""
        if lo > self.lo or hi < self.hi:
            raise ValueError("padding range must contain the stored range")
        out = np.zeros(hi - lo + 1, dtype=complex)
        out[self.lo - lo : self.hi - lo + 1] = self.amplitudes
        return out

    def trimmed(self) -> "StateVector":
        """Drop exactly-zero amplitudes at both ends (keeping index 0)."""
        nz = np.flatnonzero(self.amplitudes)
        first = min(nz[0] + self.lo, 0)
        last = max(nz[-1] + self.lo, 0)
        amps = self.amplitudes[first - self.lo : last - self.lo + 1]
        return StateVector(int(first), int(last), amps, dict(self.diagnostics))

    def to_dict(self) -> dict:
        return {
            "lo": int(self.lo),
            "hi": int(self.hi),
            "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data: dict, tol: float = 1e-9) -> "StateVector":
        """Inverse of :meth:`to_dict`; rejects vectors off unit norm by more than ``tol``."""
        lo, hi = int(data["lo"]), int(data["hi"])
        pairs = np.asarray(data["amplitudes"], dtype=float).reshape(-1, 2)
        amps = pairs[:, 0] + 1j * pairs[:, 1]
        if amps.size != hi - lo + 1:
            raise ValueError("amplitude count does not match [lo, hi]")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > tol:
            raise ValueError(f"state file is not normalized (norm^2 = {norm2!r})")
        if abs(norm2 - 1.0) > NORM_TOL:
            amps = amps / math.sqrt(norm2)
        return cls(lo, hi, amps)


@dataclass(frozen=True)
class PhotonMetrics:
    n2_avg: float
    n_max: int
    n_mean: float


def metrics(state: StateVector) -> PhotonMetrics:
    """Second moment, largest occupied |n| and signed mean of the index."""
    n = state.indices.astype(float)
    p = state.probabilities
    occupied = state.indices[state.amplitudes != 0]
    n_max = int(np.max(np.abs(occupied))) if occupied.size else 0
    # fsum keeps symmetric supports at an exact zero mean
    return PhotonMetrics(
        n2_avg=math.fsum(n * n * p),
        n_max=n_max,
        n_mean=math.fsum(n * p),
    )


def vacuum() -> StateVector:
    return StateVector(0, 0, np.array([1.0 + 0j]))


def build_noon(n: int) -> StateVector:
    """(|n,0> + |0,n>)/sqrt(2)."""
    if int(n) != n or n < 1:
        raise ValueError(f"noon state needs a positive integer n, got {n!r}")
    n = int(n)
    amps = np.zeros(2 * n + 1, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return StateVector(-n, n, amps)


def build_gaussian(E: float, cutoff_sigmas: float = 8.0) -> StateVector:
    """Gaussian profile ``exp(-n^2 / (4 E^2))`` truncated at ``ceil(cutoff_sigmas * E)``.

    The normalization constant is stored in ``diagnostics["c"]``.
    """
    if not E > 0:
        raise ValueError("E must be positive")
    if not cutoff_sigmas > 0:
        raise ValueError("cutoff_sigmas must be positive")
    m = int(math.ceil(cutoff_sigmas * E))
    n = np.arange(-m, m + 1, dtype=float)
    w = np.exp(-(n**2) / (4.0 * E * E))
    c = 1.0 / np.linalg.norm(w)
    return StateVector(-m, m, (c * w).astype(complex), {"c": float(c)})


def sine_weights(E: int) -> np.ndarray:
    n = np.arange(-E, E + 1, dtype=float)
    return np.sin(np.pi * (E + n + 1) / (2 * E + 2))


def build_sine(E: int) -> StateVector:
    """Sine profile on ``[-E, E]``, the finite-E optimum shape for the max-photon bound."""
    if int(E) != E or E < 1:
        raise ValueError(f"sine state needs a positive integer E, got {E!r}")
    E = int(E)
    w = sine_weights(E)
    c = 1.0 / np.linalg.norm(w)
    return StateVector(-E, E, (c * w).astype(complex), {"c": float(c)})


def _poisson_cutoff(alpha: float, tail_tolerance: float) -> tuple[int, float]:
    """Smallest K with sum_{k>K} Poisson(alpha^2)(k) < tail_tolerance."""
    mu = alpha * alpha
    k = np.arange(0, int(mu + 40 * math.sqrt(mu) + 60))
    logp = k * math.log(mu) - mu - gammaln(k + 1)
    p = np.exp(logp)
    # tail[K] = sum_{k > K} p_k, summed from the far end to keep small tails accurate
    tail = np.concatenate([np.cumsum(p[::-1])[::-1][1:], [0.0]])
    K = int(np.argmax(tail < tail_tolerance))
    return K, float(tail[K])


def build_coherent_noon(alpha: float, tail_tolerance: float = 1e-12) -> StateVector:
    """(|alpha,0>_c + |0,alpha>_c) normalized, truncated by Poisson tail mass.

    ``alpha`` is the coherent amplitude (mean photon number ``alpha**2``).
    Both branches put ``exp(-alpha^2/2)`` on the vacuum, so index 0 gets twice
    that.  ``diagnostics["discarded"]`` is the discarded probability of the
    normalized state.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not 0 < tail_tolerance <= 1e-6:
        raise ValueError("tail_tolerance must lie in (0, 1e-6]")
    alpha = float(alpha)
    K, tail = _poisson_cutoff(alpha, tail_tolerance)
    k = np.arange(0, K + 1)
    branch = np.exp(k * math.log(alpha) - alpha * alpha / 2 - 0.5 * gammaln(k + 1))
    norm2 = 2.0 * (1.0 + math.exp(-alpha * alpha))
    amps = np.concatenate([branch[:0:-1], [2.0 * branch[0]], branch[1:]])
    # each branch discards `tail` of its own mass; the state's norm^2 is norm2
    discarded = 2.0 * tail / norm2
    amps = amps / np.linalg.norm(amps)
    return StateVector(
        -K,
        K,
        amps.astype(complex),
        {
            "alpha": alpha,
            "mean_photons": alpha * alpha,
            "norm2": norm2,
            "discarded": discarded,
            "cutoff": K,
        },
    )


def from_continuum(
    f: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    E: float,
    x_max: float = 1.0,
    x_grid: np.ndarray | None = None,
) -> StateVector:
    """Sample a profile at ``x = n/E`` for ``|n| <= x_max * E`` and normalize.

    ``f`` is either a callable or an array of samples on ``x_grid`` (linearly
    interpolated).  Samples that vanish to rounding (below 1e-14 of the peak)
    are set to zero so a profile with a root at the boundary has the expected
    support.
    """
    if not E > 0:
        raise ValueError("E must be positive")
    m = int(math.floor(x_max * E + 1e-9))
    n = np.arange(-m, m + 1)
    x = n / E
    if callable(f):
        vals = np.asarray(f(x), dtype=complex)
    else:
        if x_grid is None:
            raise ValueError("x_grid is required for sampled profiles")
        y = np.asarray(f, dtype=complex)
        vals = np.interp(x, x_grid, y.real) + 1j * np.interp(x, x_grid, y.imag)
    vals = np.broadcast_to(vals, x.shape).astype(complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError("profile has non-finite samples; build delta profiles with build_noon")
    peak = np.max(np.abs(vals))
    if peak == 0.0:
        raise ValueError("profile has zero norm on the grid")
    vals[np.abs(vals) < 1e-14 * peak] = 0.0
    state = StateVector.from_amplitudes(-m, vals)
    return state.trimmed()

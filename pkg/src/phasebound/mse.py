"""Mean-square error of the canonical covariant measurement.

With the true phase fixed at 0 (the risk of a covariant measurement does not
depend on it) the estimate has density ``|sum_n a_n exp(-i n t)|^2 / 2pi`` on
``[-pi, pi)`` and the MSE is the quadratic form ``a^H Theta a`` with the
Toeplitz kernel ``Theta_k = (1/2pi) int t^2 exp(i k t) dt``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .states import StateVector, metrics
from .toeplitz import SymmetricToeplitz

DIRECT_LIMIT = 2048
GAUSS_ORDER = 8


def kernel_entry(k: int) -> float:
    """Lag-``k`` entry of the MSE kernel: pi^2/3 at 0, 2(-1)^k/k^2 otherwise."""
    k = abs(int(k))
    if k == 0:
        return math.pi**2 / 3
    return 2.0 * (-1) ** k / (k * k)


@dataclass(frozen=True)
class ToeplitzKernel:
    max_lag: int
    entries: np.ndarray

    def __getitem__(self, k):
        return self.entries[abs(k)]

    def matrix(self, size: int | None = None) -> np.ndarray:
        size = self.max_lag + 1 if size is None else size
        return scipy.linalg.toeplitz(self.entries[:size])


def kernel(max_lag: int) -> ToeplitzKernel:
    entries = _kernel_entries(int(max_lag)).copy()
    entries.setflags(write=False)
    return ToeplitzKernel(int(max_lag), entries)


@lru_cache(maxsize=32)
def _kernel_entries(max_lag: int) -> np.ndarray:
    k = np.arange(max_lag + 1, dtype=float)
    out = np.empty(max_lag + 1)
    out[0] = math.pi**2 / 3
    out[1:] = 2.0 * np.where(k[1:] % 2 == 0, 1.0, -1.0) / k[1:] ** 2
    return out


def covariant_mse(state: StateVector, method: str = "auto") -> float:
    """MSE ``sum conj(a_n) Theta_{n-m} a_m`` of the covariant measurement.

    ``method="direct"`` forms the dense Toeplitz matrix; ``"fft"`` applies it
    through a circulant embedding.  ``"auto"`` switches at ``DIRECT_LIMIT``.
    """
    a = state.amplitudes
    d = a.size
    if method == "auto":
        method = "direct" if d <= DIRECT_LIMIT else "fft"
    entries = _kernel_entries(d - 1)
    if method == "direct":
        Ta = scipy.linalg.toeplitz(entries) @ a
    elif method == "fft":
        Ta = SymmetricToeplitz(entries).matvec(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(np.vdot(a, Ta).real)


def amplitude_sum(state: StateVector, theta) -> np.ndarray:
    """``sum_n a_n exp(-i n theta)`` at arbitrary points (direct evaluation)."""
    theta = np.asarray(theta, dtype=float)
    flat = theta.ravel()
    n = state.indices
    out = np.empty(flat.size, dtype=complex)
    step = max(1, 4_000_000 // n.size)
    for s in range(0, flat.size, step):
        out[s : s + step] = np.exp(-1j * np.outer(flat[s : s + step], n)) @ state.amplitudes
    return out.reshape(theta.shape)


def amplitude_sum_grid(state: StateVector, size: int) -> tuple[np.ndarray, np.ndarray]:
    """``sum_n a_n exp(-i n t)`` on ``t_j = -pi + 2 pi j / size`` by FFT.

    Index ``n`` only enters through ``n mod size`` on this grid, so folding the
    amplitudes into ``size`` bins is exact for any ``size``.
    """
    theta = -math.pi + 2 * math.pi * np.arange(size) / size
    n = state.indices
    folded = np.zeros(size, dtype=complex)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    np.add.at(folded, n % size, sign * state.amplitudes)
    return theta, np.fft.fft(folded)


def outcome_density(state: StateVector, theta_true, theta_hat) -> np.ndarray:
    """Density of the estimate: ``|sum_n a_n exp(i n (theta_true - theta_hat))|^2 / 2pi``."""
    diff = np.asarray(theta_hat, dtype=float) - np.asarray(theta_true, dtype=float)
    val = np.abs(amplitude_sum(state, diff)) ** 2 / (2 * math.pi)
    return val if val.ndim else float(val)


def _gauss_panels(points: int, order: int = GAUSS_ORDER):
    panels = max(1, points // order)
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-math.pi, math.pi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def quadrature_mse_oracle(state: StateVector, grid_points: int = 4096) -> float:
    """Integrate ``t^2 |sum a_n exp(-i n t)|^2 / 2pi`` numerically over ``[-pi, pi]``.

    Composite Gauss-Legendre (order 8) on ``grid_points // 8`` equal panels,
    with amplitudes summed directly at the nodes.  Independent of the Toeplitz
    closed form.
    """
    n_max = metrics(state).n_max
    if grid_points < 4 * (n_max + 1):
        raise ValueError(
            f"grid of {grid_points} points undersamples n_max={n_max}; "
            f"need at least {4 * (n_max + 1)}"
        )
    nodes, weights = _gauss_panels(grid_points)
    dens = np.abs(amplitude_sum(state, nodes)) ** 2
    return float(np.sum(weights * nodes**2 * dens) / (2 * math.pi))


def quadrature_kernel_entry(k: int, grid_points: int = 4096) -> float:
    """``(1/2pi) int t^2 cos(k t) dt`` by the same composite rule."""
    nodes, weights = _gauss_panels(grid_points)
    return float(np.sum(weights * nodes**2 * np.cos(k * nodes)) / (2 * math.pi))


def integrate_density(state: StateVector, grid_points: int = 4096, theta_true: float = 0.0) -> float:
    nodes, weights = _gauss_panels(grid_points)
    return float(np.sum(weights * outcome_density(state, theta_true, nodes)))

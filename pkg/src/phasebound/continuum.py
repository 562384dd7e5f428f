"""Continuum limit of the rescaled coefficient profile ``f(x) ~ sqrt(E) a_{E x}``.

In this limit the Heisenberg-scaled MSE ``E^2 C`` becomes ``<f|P^2|f>`` and the
photon constraints become ``<f|Q^2|f> <= 1`` (average) or support in
``[-1, 1]`` (maximum).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.integrate import trapezoid

from .mse import covariant_mse
from .states import from_continuum

DEFAULT_HALF_WIDTH = 12.0


@dataclass(frozen=True)
class ContinuumFunction:
    """Samples of a profile on a uniform grid over ``[x_lo, x_hi]``.

    ``func`` optionally keeps the analytic profile so lattice states can be
    sampled exactly instead of interpolated.
    """

    x_lo: float
    x_hi: float
    samples: np.ndarray
    func: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex).ravel()
        if s.size < 2 or not self.x_hi > self.x_lo:
            raise ValueError("need at least two samples on a nonempty interval")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def M(self) -> int:
        return self.samples.size

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / (self.M - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.M)

    def norm(self) -> float:
        return math.sqrt(trapezoid(np.abs(self.samples) ** 2, dx=self.h))

    def normalized(self) -> "ContinuumFunction":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("zero function")
        func = None if self.func is None else _scaled(self.func, 1.0 / nrm)
        return ContinuumFunction(self.x_lo, self.x_hi, self.samples / nrm, func)

    @classmethod
    def from_callable(cls, f, x_lo=-DEFAULT_HALF_WIDTH, x_hi=DEFAULT_HALF_WIDTH, M=4001):
        x = np.linspace(x_lo, x_hi, M)
        return cls(x_lo, x_hi, np.asarray(f(x), dtype=complex), f).normalized()


def _scaled(f, c):
    return lambda x: c * np.asarray(f(x), dtype=complex)


def gaussian_profile(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2 / 4)


def sine_profile(x):
    """``sin(pi (1 + x) / 2)`` on ``[-1, 1]``, zero outside."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1, np.sin(np.pi * (1 + x) / 2), 0.0)


def _check(f: ContinuumFunction):
    if f.M < 8:
        raise ValueError("need at least 8 grid points")


def derivative(f: ContinuumFunction) -> np.ndarray:
    """Second-order finite differences: central inside, one-sided at the ends."""
    _check(f)
    return np.gradient(f.samples, f.h, edge_order=2)


def q2_expectation(f: ContinuumFunction) -> float:
    """``int x^2 |f|^2 dx`` (trapezoidal)."""
    _check(f)
    return float(trapezoid(f.x**2 * np.abs(f.samples) ** 2, dx=f.h))


def p2_expectation(f: ContinuumFunction, richardson: bool = False) -> float:
    """``int |f'|^2 dx``; nonnegative by construction.

    With ``richardson=True`` the O(h^2) value is combined with the one from
    every other sample, ``(4 P(h) - P(2h)) / 3``.  Needs ``M - 1`` even and
    ``M >= 15``; otherwise the plain value is returned.
    """
    fine = float(trapezoid(np.abs(derivative(f)) ** 2, dx=f.h))
    if not richardson or (f.M - 1) % 2 or f.M < 15:
        return fine
    coarse_f = ContinuumFunction(f.x_lo, f.x_hi, f.samples[::2])
    coarse = float(trapezoid(np.abs(derivative(coarse_f)) ** 2, dx=coarse_f.h))
    return (4.0 * fine - coarse) / 3.0


def dirichlet_ground_state(M: int, x_lo: float = -1.0, x_hi: float = 1.0):
    """Lowest eigenpair of the three-point ``-d^2/dx^2`` with zero boundary values.

    Returns ``(eigenvalue, ContinuumFunction)``; the function is normalized,
    positive inside, and exactly zero at both endpoints.
    """
    if M < 16:
        raise ValueError("M must be at least 16")
    h = (x_hi - x_lo) / (M - 1)
    inner = M - 2
    d = np.full(inner, 2.0 / h**2)
    e = np.full(inner - 1, -1.0 / h**2)
    vals, vecs = scipy.linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
    v = vecs[:, 0]
    v = v if v[inner // 2] >= 0 else -v
    samples = np.concatenate([[0.0], v, [0.0]])
    return float(vals[0]), ContinuumFunction(x_lo, x_hi, samples).normalized()


def discrete_dirichlet_eigenvalue(M: int, length: float = 2.0) -> float:
    """Closed form ``(2/h^2)(1 - cos(pi h / L))`` of the lowest discrete eigenvalue."""
    h = length / (M - 1)
    return 2.0 / h**2 * (1.0 - math.cos(math.pi * h / length))


def extend_by_zero(f: ContinuumFunction, x_lo: float, x_hi: float) -> ContinuumFunction:
    """Embed ``f`` into a wider interval on the same grid spacing."""
    h = f.h
    left = int(round((f.x_lo - x_lo) / h))
    right = int(round((x_hi - f.x_hi) / h))
    samples = np.concatenate([np.zeros(left), f.samples, np.zeros(right)])
    return ContinuumFunction(f.x_lo - left * h, f.x_hi + right * h, samples, f.func)


@dataclass(frozen=True)
class UncertaintyResult:
    product: float
    ok: bool
    var_q: float
    var_p: float


def uncertainty_check(f: ContinuumFunction, tol: float = 1e-6, edge_tol: float = 1e-8) -> UncertaintyResult:
    """Position-momentum variance product of ``f``; ``ok`` if it is at least 1/4 - tol."""
    _check(f)
    s = f.samples
    if max(abs(s[0]), abs(s[-1])) >= edge_tol:
        raise ValueError("function carries mass at the boundary")
    p = np.abs(s) ** 2
    norm2 = trapezoid(p, dx=f.h)
    x = f.x
    mean_q = trapezoid(x * p, dx=f.h) / norm2
    var_q = trapezoid((x - mean_q) ** 2 * p, dx=f.h) / norm2
    ds = derivative(f)
    mean_p = trapezoid(np.imag(np.conj(s) * ds), dx=f.h) / norm2
    var_p = p2_expectation(f, richardson=True) / norm2 - mean_p**2
    product = float(var_q * var_p)
    return UncertaintyResult(product, product >= 0.25 - tol, float(var_q), float(var_p))


@dataclass
class ScalingTable:
    rows: list
    limit: float

    def gap(self, reference: float | None = None) -> float:
        """Relative distance of the last row from ``reference`` (default: ``limit``)."""
        ref = self.limit if reference is None else reference
        return abs(self.rows[-1]["scaled_mse"] - ref) / abs(ref)

    @property
    def final_gap(self) -> float:
        return self.gap()


def scaling_convergence(f: ContinuumFunction, E_list) -> ScalingTable:
    """``E^2 * covariant_mse`` of the lattice states sampled from ``f`` at ``x = n/E``.

    The column tends to ``<f|P^2|f>`` (reported as ``limit``).
    """
    x_max = max(-f.x_lo, f.x_hi)
    if f.func is not None:
        base = f.func

        def profile(x):
            inside = (x >= f.x_lo) & (x <= f.x_hi)
            return np.where(inside, base(x), 0.0)
    else:
        profile = f.samples
    rows = []
    for E in E_list:
        if f.func is not None:
            state = from_continuum(profile, E, x_max=x_max)
        else:
            state = from_continuum(profile, E, x_max=x_max, x_grid=f.x)
        mse = covariant_mse(state)
        rows.append({"E": float(E), "mse": mse, "scaled_mse": E * E * mse, "dim": state.amplitudes.size})
    return ScalingTable(rows, p2_expectation(f, richardson=True))

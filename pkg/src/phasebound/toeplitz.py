"""Symmetric Toeplitz helpers: FFT matvec and smallest eigenpair."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

DENSE_LIMIT = 2049


class SymmetricToeplitz:
    """Real symmetric Toeplitz matrix given by its first column ``col``.

    Products use a circulant embedding of size ``2d`` so a matvec costs
    O(d log d).
    """

    def __init__(self, col):
        self.col = np.asarray(col, dtype=float)
        self.n = self.col.size
        circ = np.concatenate([self.col, [0.0], self.col[:0:-1]])
        self._spectrum = np.fft.fft(circ)

    @property
    def shape(self):
        return (self.n, self.n)

    def matvec(self, x):
        x = np.asarray(x)
        pad = np.zeros(2 * self.n, dtype=complex)
        pad[: self.n] = x
        y = np.fft.ifft(self._spectrum * np.fft.fft(pad))[: self.n]
        if np.isrealobj(x):
            return y.real
        return y

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.col)

    def as_linear_operator(self, shift_diag=None) -> scipy.sparse.linalg.LinearOperator:
        if shift_diag is None:
            return scipy.sparse.linalg.LinearOperator(
                self.shape, matvec=self.matvec, dtype=float
            )
        diag = np.asarray(shift_diag, dtype=float)
        return scipy.sparse.linalg.LinearOperator(
            self.shape, matvec=lambda v: self.matvec(v) + diag * np.ravel(v), dtype=float
        )


@dataclass
class Eigenpair:
    value: float
    vector: np.ndarray
    gap: float
    residual: float
    method: str

    @property
    def degenerate(self) -> bool:
        return self.gap < 1e-10


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Fix the sign: centre entry nonnegative, else the largest entry positive."""
    mid = v.size // 2
    if abs(v[mid]) > 1e-14 * np.max(np.abs(v)):
        pivot = v[mid]
    else:
        pivot = v[np.argmax(np.abs(v))]
    return -v if pivot < 0 else v


def diag_is_even(diag) -> bool:
    return diag is None or np.array_equal(np.asarray(diag), np.asarray(diag)[::-1])


def smallest_eigenpair(
    toep: SymmetricToeplitz,
    diag=None,
    method: str = "auto",
    tol: float = 0.0,
) -> Eigenpair:
    """Smallest eigenpair of ``T + diag(diag)``.

    ``method`` is ``"dense"`` (LAPACK tridiagonal route), ``"lanczos"``
    (implicitly restarted Lanczos on the FFT matvec, shift-inverted about 0
    through Levinson solves when there is no diagonal term) or ``"auto"``,
    which picks dense up to ``DENSE_LIMIT``.
    """
    n = toep.n
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "lanczos"
    if n == 1:
        val = float(toep.col[0] + (0.0 if diag is None else diag[0]))
        return Eigenpair(val, np.ones(1), np.inf, 0.0, "dense")
    if method == "dense":
        A = toep.dense()
        if diag is not None:
            A[np.diag_indices(n)] += diag
        vals, vecs = scipy.linalg.eigh(A, subset_by_index=[0, 1])
        val, vec, gap = float(vals[0]), vecs[:, 0], float(vals[1] - vals[0])
    elif method == "lanczos":
        op = toep.as_linear_operator(diag)
        v0 = np.ones(n) / np.sqrt(n)
        if diag is None:
            # shift-invert about 0 with Levinson solves; the low spectrum is tightly clustered
            inv = scipy.sparse.linalg.LinearOperator(
                toep.shape, matvec=lambda b: scipy.linalg.solve_toeplitz(toep.col, b), dtype=float
            )
            vals, vecs = scipy.sparse.linalg.eigsh(
                op, k=2, sigma=0.0, which="LM", OPinv=inv, tol=tol, v0=v0
            )
        else:
            vals, vecs = scipy.sparse.linalg.eigsh(
                op, k=2, which="SA", tol=tol, v0=v0, ncv=min(n, 64), maxiter=20 * n
            )
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        val, vec, gap = float(vals[0]), vecs[:, 0], float(vals[1] - vals[0])
    else:
        raise ValueError(f"unknown method {method!r}")
    if gap < 1e-10 and diag_is_even(diag):
        # degenerate ground space of a centrosymmetric matrix: prefer the even member
        cands = [vecs[:, i] + vecs[::-1, i] for i in range(2)]
        best = max(cands, key=np.linalg.norm)
        if np.linalg.norm(best) > 1e-8:
            vec = best
    vec = _canonical_sign(vec / np.linalg.norm(vec))
    applied = toep.matvec(vec) + (0.0 if diag is None else diag * vec)
    residual = float(np.linalg.norm(applied - val * vec))
    return Eigenpair(val, vec, gap, residual, method)

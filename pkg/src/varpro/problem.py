"""Tikhonov-regularized inner problem and its direct solve backends.

For parameters y the stacked operator is K(y) = [A(y); lam L] with data
d = [b; 0].  The inner least-squares problem min ||K(y) x - d|| is solved
either densely (Cholesky on the normal equations, small instances) or through
pointwise Fourier filters when A(y) and L are jointly diagonalized by the DFT.
Both backends also expose the projector and pseudoinverse actions the
Jacobian formula needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import LinOp, _spd_factor, SingularMatrixError
from .operators import OperatorFamily, RegOperator, _real_part

# Dense assembly above this many columns is refused rather than attempted.
DENSE_LIMIT = 2048


class ModelError(Exception):
    """The stacked normal matrix is not positive definite, i.e. the null
    spaces of A(y) and L intersect nontrivially."""


@dataclass
class TikhonovProblem:
    """Data misfit with general-form Tikhonov term: A(y), L, lam, b."""

    family: OperatorFamily
    L: RegOperator
    lam: float
    b: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.lam <= 0.0:
            raise ValueError("lam must be positive")
        if self.L.cols != self.family.n:
            raise ValueError("regularization operator geometry does not match A")
        if self.b.shape != (self.family.m,):
            raise ValueError("data length does not match operator rows")

    @property
    def m(self) -> int:
        return self.family.m

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def q(self) -> int:
        return self.L.rows

    @property
    def d(self) -> np.ndarray:
        return np.concatenate([self.b, np.zeros(self.q)])

    def apply_K(self, y, x: np.ndarray) -> np.ndarray:
        return np.concatenate([self.family.apply(y, x), self.lam * self.L.apply(x)])

    def apply_Kt(self, y, v: np.ndarray) -> np.ndarray:
        top, bot = v[: self.m], v[self.m :]
        return self.family.apply_transpose(y, top) + self.lam * self.L.apply_transpose(bot)

    def k_linop(self, y) -> LinOp:
        """Matrix-free K(y) with per-call precomputation hoisted out of the
        applies (symbol arrays for spectral families, a dense A otherwise)."""
        m, n, q, lam = self.m, self.n, self.q, self.lam
        sA = self.family.symbols(y)
        if sA is not None:
            sL = self.L.symbols()
            shape = self.family.grid_shape

            def matvec(x, sA=sA, sL=sL):
                xt = np.fft.fftn(np.asarray(x).reshape(shape, order="F"))
                top = _real_part(np.fft.ifftn(sA * xt)).ravel(order="F")
                bot = _real_part(np.fft.ifftn(sL * xt)).ravel(order="F")
                return np.concatenate([top, lam * bot])

            def rmatvec(v, sA=sA, sL=sL):
                ut = np.fft.fftn(np.asarray(v[:m]).reshape(shape, order="F"))
                wt = np.fft.fftn(np.asarray(v[m:]).reshape(shape, order="F"))
                out = np.fft.ifftn(np.conj(sA) * ut + lam * np.conj(sL) * wt)
                return _real_part(out).ravel(order="F")

            return LinOp(m + q, n, matvec, rmatvec)

        A = self.family.to_dense(y)

        def matvec(x, A=A):
            return np.concatenate([A @ x, lam * self.L.apply(x)])

        def rmatvec(v, A=A):
            return A.T @ v[:m] + lam * self.L.apply_transpose(v[m:])

        return LinOp(m + q, n, matvec, rmatvec)

    def backend(self, y, which: str = "auto"):
        """Direct-solve backend at y: 'spectral', 'dense', or 'auto'."""
        if which == "spectral":
            return SpectralBackend(self, y)
        if which == "dense":
            return DenseBackend(self, y)
        if which != "auto":
            raise ValueError(f"unknown backend {which!r}")
        if self.family.symbols(y) is not None:
            return SpectralBackend(self, y)
        if self.n <= DENSE_LIMIT:
            return DenseBackend(self, y)
        raise ModelError(
            f"no spectral structure and {self.n} columns exceeds the dense limit"
        )


class DenseBackend:
    """Assembled K(y) with a cached Cholesky factor of K^T K."""

    def __init__(self, prob: TikhonovProblem, y):
        self.prob = prob
        self.A = prob.family.to_dense(y)
        self.K = np.vstack([self.A, prob.lam * prob.L.to_dense()])
        try:
            self._factor = _spd_factor(self.K.T @ self.K, "stacked normal matrix")
        except SingularMatrixError as exc:
            raise ModelError(
                f"N(A(y)) and N(L) intersect: {exc}"
            ) from exc

    def solve_normal(self, w: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self._factor, w)

    def solve_x(self) -> np.ndarray:
        return self.solve_normal(self.K.T @ self.prob.d)

    def apply_A(self, x):
        return self.A @ x

    def apply_At(self, v):
        return self.A.T @ v

    def pinv_apply(self, v):
        return self.solve_normal(self.K.T @ v)

    def pperp(self, v):
        return v - self.K @ self.pinv_apply(v)

    def kdag_t(self, w):
        return self.K @ self.solve_normal(w)


class SpectralBackend:
    """Fourier-filter actions for jointly DFT-diagonalizable A(y) and L."""

    def __init__(self, prob: TikhonovProblem, y):
        sA = prob.family.symbols(y)
        if sA is None:
            raise ValueError("family has no spectral structure")
        self.prob = prob
        self.shape = prob.family.grid_shape
        self.sA = sA
        self.sL = prob.L.symbols()
        self.w = np.abs(sA) ** 2 + prob.lam**2 * np.abs(self.sL) ** 2
        if not np.all(np.isfinite(self.w)) or float(self.w.min()) <= 0.0:
            raise ModelError(
                "filter weights |A|^2 + lam^2 |L|^2 vanish: N(A(y)) and N(L) intersect"
            )

    def _fwd(self, x) -> np.ndarray:
        return np.fft.fftn(np.asarray(x).reshape(self.shape, order="F"))

    def _inv(self, xt) -> np.ndarray:
        return _real_part(np.fft.ifftn(xt)).ravel(order="F")

    def _split(self, v):
        m = self.prob.m
        return self._fwd(v[:m]), self._fwd(v[m:])

    def solve_x(self) -> np.ndarray:
        bt = self._fwd(self.prob.b)
        return self._inv(np.conj(self.sA) * bt / self.w)

    def apply_A(self, x):
        return self._inv(self.sA * self._fwd(x))

    def apply_At(self, v):
        return self._inv(np.conj(self.sA) * self._fwd(v))

    def pinv_apply(self, v):
        ut, wt = self._split(v)
        zt = (np.conj(self.sA) * ut + self.prob.lam * np.conj(self.sL) * wt) / self.w
        return self._inv(zt)

    def pperp(self, v):
        ut, wt = self._split(v)
        lam = self.prob.lam
        zt = (np.conj(self.sA) * ut + lam * np.conj(self.sL) * wt) / self.w
        top = self._inv(ut - self.sA * zt)
        bot = self._inv(wt - lam * self.sL * zt)
        return np.concatenate([top, bot])

    def kdag_t(self, w):
        zt = self._fwd(w) / self.w
        top = self._inv(self.sA * zt)
        bot = self._inv(self.prob.lam * self.sL * zt)
        return np.concatenate([top, bot])

"""Gaussian blur operator families and regularization operators.

Three concrete families are provided: a zero-boundary symmetric-Toeplitz
Gaussian blur in 1-D, its periodic (circulant) counterpart, and an isotropic
2-D Gaussian blur with periodic boundary conditions (block circulant with
circulant blocks).  Each family exposes forward and transpose actions together
with analytic derivatives with respect to the width parameter.  Image vectors
are stored column-major (Fortran order).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .linalg import LinOp


# -- 1-D kernels -------------------------------------------------------------

def gaussian_kernel_1d(sigma: float, n: int) -> np.ndarray:
    """Unnormalized Gaussian kernel entries exp(-j^2 / (2 sigma^2)), j = 0..n-1.

    Entry 0 is always 1; the width sigma = 0 degenerates to the delta kernel
    by continuity.  Even in sigma.  Both the zero-boundary Toeplitz and the
    circulant blur families build their first column from this kernel.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if sigma == 0.0:
        col = np.zeros(n)
        col[0] = 1.0
        return col
    j = np.arange(n, dtype=float)
    return np.exp(-(j * j) / (2.0 * sigma * sigma))


def dgaussian_kernel_1d(sigma: float, n: int) -> np.ndarray:
    """Width-derivative of :func:`gaussian_kernel_1d` (zero at sigma = 0)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if sigma == 0.0:
        return np.zeros(n)
    j = np.arange(n, dtype=float)
    return (j * j / sigma**3) * np.exp(-(j * j) / (2.0 * sigma * sigma))


def gaussian_column_1d(sigma: float, n: int) -> np.ndarray:
    """First column of the 1-D Gaussian blur matrix, normalized to sum one."""
    a = gaussian_kernel_1d(sigma, n)
    return a / a.sum()


def dgaussian_column_1d(sigma: float, n: int) -> np.ndarray:
    """Width-derivative of :func:`gaussian_column_1d` (quotient rule)."""
    a = gaussian_kernel_1d(sigma, n)
    da = dgaussian_kernel_1d(sigma, n)
    s = a.sum()
    return da / s - a * (da.sum() / (s * s))


def toeplitz_blur_matrix(sigma: float, n: int) -> np.ndarray:
    """Dense zero-boundary symmetric Toeplitz blur matrix."""
    return scipy.linalg.toeplitz(gaussian_column_1d(sigma, n))


def toeplitz_apply_1d(sigma: float, x: np.ndarray) -> np.ndarray:
    """Apply the zero-boundary 1-D Gaussian blur to a signal."""
    x = np.asarray(x, dtype=float)
    return toeplitz_blur_matrix(sigma, x.shape[0]) @ x


# -- 2-D PSF and BCCB convolution --------------------------------------------

def gaussian_psf_2d(width: float, n: int) -> np.ndarray:
    """Isotropic Gaussian point spread function on an n x n grid.

    Centered at (n // 2, n // 2) with full image support; entries are
    normalized to sum to one.  Defined for positive widths only.
    """
    if width <= 0.0:
        raise ValueError("blur width must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    c = n // 2
    i = np.arange(n, dtype=float) - c
    d2 = i[:, None] ** 2 + i[None, :] ** 2
    e = np.exp(-d2 / (2.0 * width * width))
    return e / e.sum()


def dgaussian_psf_2d(width: float, n: int) -> np.ndarray:
    """Width-derivative of the normalized PSF (quotient rule through the sum)."""
    if width <= 0.0:
        raise ValueError("blur width must be positive")
    c = n // 2
    i = np.arange(n, dtype=float) - c
    d2 = i[:, None] ** 2 + i[None, :] ** 2
    e = np.exp(-d2 / (2.0 * width * width))
    de = (d2 / width**3) * e
    s = e.sum()
    return de / s - e * (de.sum() / (s * s))


def _real_part(z: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(z.real))) if z.size else 1.0)
    imag = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if imag > 1e-10 * scale:
        raise ValueError(f"inverse transform produced imaginary residue {imag:.3e}")
    return np.ascontiguousarray(z.real)


def bccb_eigenvalues(psf: np.ndarray) -> np.ndarray:
    """Eigenvalue array of the periodic convolution with a centered PSF."""
    n = psf.shape[0]
    c = n // 2
    return np.fft.fft2(np.roll(psf, (-c, -c), axis=(0, 1)))


def bccb_apply(psf: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Circular 2-D convolution of a column-major image vector with a PSF."""
    psf = np.asarray(psf, dtype=float)
    x = np.asarray(x, dtype=float)
    n = psf.shape[0]
    if psf.shape != (n, n) or x.shape != (n * n,):
        raise ValueError("psf must be n x n and x must have length n^2")
    return bccb_apply_eigs(bccb_eigenvalues(psf), x)


def bccb_apply_eigs(eigs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply a DFT-diagonal operator given its eigenvalue array."""
    n = eigs.shape[0]
    X = np.asarray(x).reshape((n, n), order="F")
    out = np.fft.ifft2(eigs * np.fft.fft2(X))
    return _real_part(out).ravel(order="F")


def laplacian_apply(x: np.ndarray, n: int) -> np.ndarray:
    """Periodic five-point Laplacian of a column-major n x n image vector."""
    X = np.asarray(x, dtype=float).reshape((n, n), order="F")
    out = (
        -4.0 * X
        + np.roll(X, 1, axis=0)
        + np.roll(X, -1, axis=0)
        + np.roll(X, 1, axis=1)
        + np.roll(X, -1, axis=1)
    )
    return out.ravel(order="F")


def laplacian_eigenvalues(n: int) -> np.ndarray:
    """Real eigenvalue array of the periodic five-point Laplacian."""
    ang = 2.0 * np.pi * np.arange(n) / n
    return -4.0 + 2.0 * np.cos(ang)[:, None] + 2.0 * np.cos(ang)[None, :]


# -- operator families -------------------------------------------------------

def _width(y) -> float:
    arr = np.asarray(y, dtype=float).reshape(-1)
    if arr.shape != (1,):
        raise ValueError("these blur families take a single width parameter")
    return float(arr[0])


class OperatorFamily:
    """Differentiable map y -> A(y) with forward, transpose, and parameter
    derivative actions.

    ``param_floor`` optionally carries exclusive lower bounds on the
    parameters (the 2-D Gaussian width must stay positive); solvers use it for
    step damping.  Families that are diagonalized by the DFT override
    ``symbols``/``dsymbols`` and set ``grid_shape``.
    """

    param_dim: int = 1
    m: int = 0
    n: int = 0
    param_floor: np.ndarray | None = None
    grid_shape: tuple[int, ...] | None = None

    def apply(self, y, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_transpose(self, y, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_dparam(self, y, j: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_dparam_transpose(self, y, j: int, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def symbols(self, y) -> np.ndarray | None:
        return None

    def dsymbols(self, y, j: int) -> np.ndarray | None:
        return None

    def to_dense(self, y) -> np.ndarray:
        cols = [self.apply(y, e) for e in np.eye(self.n)]
        return np.column_stack(cols)

    def dparam_dense(self, y, j: int) -> np.ndarray:
        cols = [self.apply_dparam(y, j, e) for e in np.eye(self.n)]
        return np.column_stack(cols)


class GaussianBlur1D(OperatorFamily):
    """Zero-boundary symmetric Toeplitz Gaussian blur on length-n signals.

    Applies are dense matrix products; the family exists for closed-form
    analysis and small experiments, not performance.
    """

    def __init__(self, n: int):
        self.m = n
        self.n = n

    def apply(self, y, x):
        return toeplitz_blur_matrix(_width(y), self.n) @ np.asarray(x, dtype=float)

    apply_transpose = apply  # symmetric

    def apply_dparam(self, y, j, x):
        col = dgaussian_column_1d(_width(y), self.n)
        return scipy.linalg.toeplitz(col) @ np.asarray(x, dtype=float)

    apply_dparam_transpose = apply_dparam

    def to_dense(self, y):
        return toeplitz_blur_matrix(_width(y), self.n)

    def dparam_dense(self, y, j):
        return scipy.linalg.toeplitz(dgaussian_column_1d(_width(y), self.n))


class PeriodicGaussianBlur1D(OperatorFamily):
    """Circulant blur on the n-cycle with the same first column as the
    Toeplitz family (the two coincide at n = 2).

    The column decays from index 0 without wraparound symmetrization, so the
    symbols are genuinely complex; every nonzero frequency loses modulus
    monotonically as the width grows, which the symmetrized variant violates
    once the width is comparable to the period.
    """

    def __init__(self, n: int):
        self.m = n
        self.n = n
        self.grid_shape = (n,)

    def _column(self, y) -> np.ndarray:
        return gaussian_column_1d(_width(y), self.n)

    def symbols(self, y):
        return np.fft.fft(self._column(y))

    def dsymbols(self, y, j):
        return np.fft.fft(dgaussian_column_1d(_width(y), self.n))

    def _filter(self, eigs, x):
        out = np.fft.ifft(eigs * np.fft.fft(np.asarray(x, dtype=float)))
        return _real_part(out)

    def apply(self, y, x):
        return self._filter(self.symbols(y), x)

    def apply_transpose(self, y, v):
        return self._filter(np.conj(self.symbols(y)), v)

    def apply_dparam(self, y, j, x):
        return self._filter(self.dsymbols(y, j), x)

    def apply_dparam_transpose(self, y, j, v):
        return self._filter(np.conj(self.dsymbols(y, j)), v)

    def to_dense(self, y):
        return scipy.linalg.circulant(self._column(y))

    def dparam_dense(self, y, j):
        return scipy.linalg.circulant(dgaussian_column_1d(_width(y), self.n))


class GaussianBlur2D(OperatorFamily):
    """Isotropic 2-D Gaussian blur with periodic boundaries on n x n images.

    The operator is block circulant with circulant blocks, so every action is
    a pointwise filter in the 2-D Fourier domain.  The width must be positive.
    """

    def __init__(self, n: int):
        self.m = n * n
        self.n = n * n
        self.side = n
        self.grid_shape = (n, n)
        self.param_floor = np.zeros(1)

    def symbols(self, y):
        return bccb_eigenvalues(gaussian_psf_2d(_width(y), self.side))

    def dsymbols(self, y, j):
        return bccb_eigenvalues(dgaussian_psf_2d(_width(y), self.side))

    def apply(self, y, x):
        return bccb_apply_eigs(self.symbols(y), x)

    def apply_transpose(self, y, v):
        return bccb_apply_eigs(np.conj(self.symbols(y)), v)

    def apply_dparam(self, y, j, x):
        return bccb_apply_eigs(self.dsymbols(y, j), x)

    def apply_dparam_transpose(self, y, j, v):
        return bccb_apply_eigs(np.conj(self.dsymbols(y, j)), v)


class RegOperator:
    """Regularization operator L: exact identity or periodic five-point
    Laplacian over a 1-D or 2-D periodic grid."""

    def __init__(self, kind: str, grid_shape: tuple[int, ...]):
        if kind not in ("identity", "laplacian"):
            raise ValueError(f"unknown regularization operator kind {kind!r}")
        if kind == "laplacian" and len(grid_shape) != 2:
            raise ValueError("the five-point Laplacian needs a 2-D grid")
        self.kind = kind
        self.grid_shape = tuple(grid_shape)
        self.rows = int(np.prod(self.grid_shape))
        self.cols = self.rows

    @classmethod
    def identity(cls, grid_shape) -> "RegOperator":
        return cls("identity", tuple(np.atleast_1d(grid_shape)))

    @classmethod
    def laplacian(cls, n: int) -> "RegOperator":
        return cls("laplacian", (n, n))

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return np.asarray(x, dtype=float)
        return laplacian_apply(x, self.grid_shape[0])

    apply_transpose = apply  # both kinds are symmetric

    def symbols(self) -> np.ndarray:
        if self.kind == "identity":
            return np.ones(self.grid_shape)
        return laplacian_eigenvalues(self.grid_shape[0])

    def to_dense(self) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(self.rows)
        cols = [self.apply(e) for e in np.eye(self.cols)]
        return np.column_stack(cols)

    def as_linop(self) -> LinOp:
        return LinOp(self.rows, self.cols, self.apply, self.apply_transpose)

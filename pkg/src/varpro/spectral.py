"""Closed-form analysis for DFT-diagonalizable blur families.

For a circulant blur built from a kernel column a(sigma) with a_0 = 1, the
eigenvalues are mu_k = G_k / G_0 where G is the unnormalized DFT of the
column.  With L = I the reduced functional and its derivative have the closed
forms

    phi(sigma)  = sum_k lam^2 / (2 (|mu_k|^2 + lam^2)) |bhat_k|^2
    phi'(sigma) = -sum_{k>=1} lam^2 Re(conj(mu_k) mu_k') /
                  (|mu_k|^2 + lam^2)^2 |bhat_k|^2

with bhat the unitary DFT of the data.  The no-blur checker verifies the
three conditions under which sigma = 0 is the unique global minimizer:
identity limit, evenness in sigma, and modal energy decay (every nonzero
frequency loses modulus as the width grows, i.e. Re(conj(mu_k) mu_k') < 0 for
sigma > 0, which makes every summand of phi' positive).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .operators import dgaussian_kernel_1d, gaussian_kernel_1d


class DegenerateKernelError(Exception):
    """The kernel column sums to zero, so normalized symbols are undefined."""


@dataclass(frozen=True)
class SpectralKernel:
    """Kernel column a(sigma) and its derivative for a circulant family.

    ``column(sigma)`` returns the unnormalized entries (convention a_0 = 1 for
    kernels normalized at zero shift); ``even`` asserts a(sigma) = a(-sigma).
    """

    n: int
    column: Callable[[float], np.ndarray]
    dcolumn: Callable[[float], np.ndarray]
    even: bool = True


def gaussian_spectral_kernel(n: int) -> SpectralKernel:
    """Gaussian kernel a_j = exp(-j^2 / (2 sigma^2)), the first column shared
    with the Toeplitz blur family.  Its circulant symbols are complex and
    satisfy the modal decay condition for every width."""
    return SpectralKernel(
        n=n,
        column=lambda sigma: gaussian_kernel_1d(sigma, n),
        dcolumn=lambda sigma: dgaussian_kernel_1d(sigma, n),
        even=True,
    )


@dataclass(frozen=True)
class FourierSymbols:
    """Unnormalized DFT sums G_k and normalized eigenvalues mu_k = G_k / G_0."""

    g: np.ndarray
    mu: np.ndarray


def fourier_symbols(kernel: SpectralKernel, sigma: float) -> FourierSymbols:
    g = np.fft.fft(kernel.column(sigma))
    if g[0] == 0:
        raise DegenerateKernelError("kernel column sums to zero")
    mu = g / g[0]
    mu[0] = 1.0  # exact by convention; complex division may round
    return FourierSymbols(g=g, mu=mu)


def dmu(kernel: SpectralKernel, sigma: float) -> np.ndarray:
    """Derivative of the normalized eigenvalues with respect to sigma."""
    g = np.fft.fft(kernel.column(sigma))
    if g[0] == 0:
        raise DegenerateKernelError("kernel column sums to zero")
    dg = np.fft.fft(kernel.dcolumn(sigma))
    return (dg * g[0] - g * dg[0]) / (g[0] * g[0])


def phi_spectral(kernel: SpectralKernel, sigma: float, lam: float, b_tilde: np.ndarray) -> float:
    """Reduced functional (no parameter regularization, L = I) in closed form.

    ``b_tilde`` is the unitary DFT of the data, e.g. fft(b) / sqrt(n).
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    mu = fourier_symbols(kernel, sigma).mu
    weights = lam**2 / (2.0 * (np.abs(mu) ** 2 + lam**2))
    return float(np.sum(weights * np.abs(np.asarray(b_tilde)) ** 2))


def dphi_spectral(kernel: SpectralKernel, sigma: float, lam: float, b_tilde: np.ndarray) -> float:
    """Derivative of :func:`phi_spectral` with respect to sigma."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    mu = fourier_symbols(kernel, sigma).mu
    dm = dmu(kernel, sigma)
    num = lam**2 * np.real(np.conj(mu) * dm)
    den = (np.abs(mu) ** 2 + lam**2) ** 2
    terms = -(num / den) * np.abs(np.asarray(b_tilde)) ** 2
    return float(np.sum(terms[1:]))


@dataclass
class NoBlurReport:
    """Outcome of the degeneracy conditions on a sigma grid.

    ``identity_limit_ok``: A(sigma_min) is within 1e-8 of the identity.
    ``evenness_ok``: symbols agree at +/- sigma to 1e-12 across the grid.
    ``modal_decay_ok``: Re(conj(mu_k) mu_k') stays nonpositive for every
    k >= 1 on the grid, so each phi' summand is nonnegative.
    ``verdict`` is True when all three hold; together with data that has
    energy at some nonzero frequency this pins sigma = 0 as the unique global
    minimizer of the unregularized reduced functional.
    """

    identity_limit_ok: bool
    identity_gap: float
    evenness_ok: bool
    evenness_gap: float
    modal_decay_ok: bool
    modal_max: float
    verdict: bool


IDENTITY_TOL = 1e-8
EVENNESS_TOL = 1e-12
MODAL_TOL = 1e-14


def check_noblur_conditions(kernel: SpectralKernel, sigma_grid) -> NoBlurReport:
    """Check the three degeneracy conditions on a sorted positive grid."""
    grid = np.asarray(sigma_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0.0) or np.any(np.diff(grid) < 0.0):
        raise ValueError("sigma grid must be positive and sorted")

    # (i) identity limit, checked at the smallest grid point.  The circulant
    # built from the normalized column has |A - I| bounded by the largest
    # deviation of the column from e_1.
    col = kernel.column(float(grid[0]))
    s = col.sum()
    if s == 0:
        raise DegenerateKernelError("kernel column sums to zero")
    norm_col = col / s
    identity_gap = float(max(abs(norm_col[0] - 1.0), np.max(np.abs(norm_col[1:])) if kernel.n > 1 else 0.0))

    evenness_gap = 0.0
    modal_max = -np.inf
    for sigma in grid:
        mu = fourier_symbols(kernel, float(sigma)).mu
        mu_neg = fourier_symbols(kernel, float(-sigma)).mu
        evenness_gap = max(evenness_gap, float(np.max(np.abs(mu - mu_neg))))
        decay = np.real(np.conj(mu) * dmu(kernel, float(sigma)))
        if kernel.n > 1:
            modal_max = max(modal_max, float(np.max(decay[1:])))

    identity_ok = identity_gap < IDENTITY_TOL
    evenness_ok = evenness_gap <= EVENNESS_TOL
    modal_ok = modal_max <= MODAL_TOL
    return NoBlurReport(
        identity_limit_ok=identity_ok,
        identity_gap=identity_gap,
        evenness_ok=evenness_ok,
        evenness_gap=evenness_gap,
        modal_decay_ok=modal_ok,
        modal_max=modal_max,
        verdict=identity_ok and evenness_ok and modal_ok,
    )

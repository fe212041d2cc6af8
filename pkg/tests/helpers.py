"""Shared oracles for the test-suite: grid+bisection minimizer location,
finite differences, and small problem builders."""

from __future__ import annotations

import numpy as np

import varpro as vp


def central_diff(f, t: float, h: float):
    return (f(t + h) - f(t - h)) / (2.0 * h)


def grid_bisect_min(phi, dphi, grid, bisections: int = 60) -> float:
    """Locate the minimizer of a smooth scalar function: brute-force scan of
    phi over the grid, then bisection on the sign change of dphi around the
    best grid point."""
    grid = np.asarray(grid, dtype=float)
    values = np.array([phi(t) for t in grid])
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    dlo, dhi = dphi(lo), dphi(hi)
    if not (dlo < 0.0 < dhi):
        return grid[i]
    for _ in range(bisections):
        mid = 0.5 * (lo + hi)
        if dphi(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_minimizer(prob, reg, grid) -> float:
    return grid_bisect_min(
        lambda t: vp.evaluate_reduced(prob, reg, [t]).phi,
        lambda t: float(vp.evaluate_reduced(prob, reg, [t]).grad[0]),
        grid,
    )


def toeplitz_problem(n: int = 16, lam: float = 0.8, seed: int = 0, noise: float = 0.05):
    """Small zero-boundary 1-D problem with identity L."""
    rng = np.random.default_rng(seed)
    fam = vp.GaussianBlur1D(n)
    L = vp.RegOperator.identity((n,))
    x_true = rng.standard_normal(n)
    b_true = fam.apply([1.5], x_true)
    b = b_true + noise * np.linalg.norm(b_true) / np.sqrt(n) * rng.standard_normal(n)
    return vp.TikhonovProblem(fam, L, lam, b), x_true


def circulant_problem(n: int = 16, lam: float = 0.7, seed: int = 0):
    """Small circulant 1-D problem with identity L (spectral-capable)."""
    rng = np.random.default_rng(seed)
    fam = vp.PeriodicGaussianBlur1D(n)
    L = vp.RegOperator.identity((n,))
    b = rng.standard_normal(n)
    return vp.TikhonovProblem(fam, L, lam, b)

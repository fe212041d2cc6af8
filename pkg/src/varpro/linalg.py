"""Dense and matrix-free linear algebra kernels.

Vectors and matrices are plain float64 numpy arrays.  This module provides
the matrix-free operator type :class:`LinOp`, a Golub-Kahan bidiagonalization
least-squares solver stopped by the relative criterion
``||K^T r|| / (||r|| ||K||) < eps``, a seeded power-iteration estimator for
the operator 2-norm, and small dense SPD solvers used both for the Newton
systems and as direct oracles for the iterative paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

# Fixed seed/iteration count for the internal operator-norm estimate so that
# solver runs are reproducible without caller-side configuration.
DEFAULT_NORM_SEED = 1234
DEFAULT_NORM_ITERATIONS = 30

# A residual this far below the data norm is zero at working precision; the
# criterion ratio is then 0/0 and the iterate is already optimal.
CONSISTENT_FLOOR = 1e-14


class SingularMatrixError(Exception):
    """A symmetric factorization met a non-positive pivot."""


@dataclass(frozen=True)
class LinOp:
    """Matrix-free linear operator with forward and transpose actions.

    ``matvec`` maps length-n to length-m, ``rmatvec`` maps length-m to
    length-n; the two must be adjoint to each other.
    """

    m: int
    n: int
    matvec: Callable[[np.ndarray], np.ndarray]
    rmatvec: Callable[[np.ndarray], np.ndarray]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    def transpose(self) -> "LinOp":
        return LinOp(m=self.n, n=self.m, matvec=self.rmatvec, rmatvec=self.matvec)

    def to_dense(self) -> np.ndarray:
        cols = [self.matvec(e) for e in np.eye(self.n)]
        return np.column_stack(cols) if cols else np.zeros((self.m, 0))


def as_linop(op) -> LinOp:
    """Coerce a LinOp or a 2-D array into a LinOp."""
    if isinstance(op, LinOp):
        return op
    mat = np.asarray(op, dtype=float)
    if mat.ndim != 2:
        raise ValueError("expected a LinOp or a 2-D array")
    return LinOp(
        m=mat.shape[0],
        n=mat.shape[1],
        matvec=lambda x, _m=mat: _m @ x,
        rmatvec=lambda v, _m=mat: _m.T @ v,
    )


def adjoint_gap(op: LinOp, probes: int = 10, seed: int = 0) -> float:
    """Largest relative mismatch of <Au, v> vs <u, A^T v> over seeded probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        u = rng.standard_normal(op.n)
        v = rng.standard_normal(op.m)
        au = op.matvec(u)
        atv = op.rmatvec(v)
        scale = abs(au @ v) + abs(u @ atv) + 1e-300
        worst = max(worst, abs(au @ v - u @ atv) / scale)
    return worst


@dataclass
class LsqrResult:
    """Outcome of :func:`lsqr_solve`.

    ``residual`` stores ``K x - d`` for the returned iterate;
    ``final_criterion_value`` is ``||K^T r|| / (||r|| ||K||)`` computed from
    that residual (a residual at machine-level zero, ``||r|| <= 1e-14 ||d||``,
    counts as criterion 0), and ``converged`` is True only if a stopping rule
    fired before the iteration cap.  ``residual_norms`` collects
    ``||K x_i - d||`` after every iteration; ``condition_estimate`` is the
    solver-internal estimate of cond(K) accumulated during the
    bidiagonalization.
    """

    x: np.ndarray
    residual: np.ndarray
    iterations_used: int
    final_criterion_value: float
    converged: bool
    residual_norms: list[float]
    condition_estimate: float


def _sym_ortho(a: float, b: float) -> tuple[float, float, float]:
    """Stable Givens rotation (c, s, r) with c*a + s*b = r, -s*a + c*b = 0."""
    if b == 0.0:
        return math.copysign(1.0, a) if a != 0.0 else 1.0, 0.0, abs(a)
    if a == 0.0:
        return 0.0, math.copysign(1.0, b), abs(b)
    if abs(b) > abs(a):
        tau = a / b
        s = math.copysign(1.0, b) / math.sqrt(1.0 + tau * tau)
        c = s * tau
        r = b / s
    else:
        tau = b / a
        c = math.copysign(1.0, a) / math.sqrt(1.0 + tau * tau)
        s = c * tau
        r = a / c
    return c, s, r


def lsqr_solve(
    K,
    d: np.ndarray,
    tolerance: float,
    max_iterations: int,
    operator_norm_estimate: float | None = None,
    consistent_rtol: float | None = None,
) -> LsqrResult:
    """Solve min ||K x - d|| by LSQR with a relative-residual stopping rule.

    Iterations start from the zero vector and stop at the first iterate whose
    true residual ``r = K x - d`` satisfies ``||K^T r|| / (||r|| ||K||) <
    tolerance`` (a zero residual counts as satisfied), or at
    ``max_iterations``.  ``||K||`` is ``operator_norm_estimate`` when given,
    otherwise a seeded power-iteration estimate.  ``consistent_rtol``, when
    set, additionally stops once ``||r|| <= consistent_rtol * ||d||``, which
    is the natural rule for consistent systems where the least-squares
    criterion is bounded away from zero.
    """
    K = as_linop(K)
    d = np.asarray(d, dtype=float)
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    if max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    if d.shape != (K.m,):
        raise ValueError(f"rhs length {d.shape} does not match operator rows {K.m}")

    norm_d = float(np.linalg.norm(d))
    x = np.zeros(K.n)
    if norm_d == 0.0:
        return LsqrResult(x, np.zeros(K.m), 0, 0.0, True, [], 1.0)

    if operator_norm_estimate is None:
        norm_k = estimate_op_norm(K, DEFAULT_NORM_ITERATIONS, DEFAULT_NORM_SEED)
    else:
        norm_k = float(operator_norm_estimate)
        if norm_k <= 0.0:
            raise ValueError("operator_norm_estimate must be positive")

    u = d / norm_d
    beta = norm_d
    v = K.rmatvec(u)
    alfa = float(np.linalg.norm(v))
    if alfa == 0.0:
        # d is orthogonal to the range of K: x = 0 solves the normal equations.
        return LsqrResult(x, -d, 0, 0.0, True, [norm_d], 1.0)
    v = v / alfa

    w = v.copy()
    phibar = beta
    rhobar = alfa
    anorm2 = 0.0
    ddnorm = 0.0
    residual_norms: list[float] = []
    residual = -d
    criterion = math.inf
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        u = K.matvec(v) - alfa * u
        beta = float(np.linalg.norm(u))
        if beta > 0.0:
            u = u / beta
        anorm2 += alfa * alfa + beta * beta
        v = K.rmatvec(u) - beta * v
        alfa = float(np.linalg.norm(v))
        if alfa > 0.0:
            v = v / alfa

        c, s, rho = _sym_ortho(rhobar, beta)
        theta = s * alfa
        rhobar = -c * alfa
        phi = c * phibar
        phibar = s * phibar

        ddnorm += float(np.linalg.norm(w / rho)) ** 2
        x = x + (phi / rho) * w
        w = v - (theta / rho) * w

        # Stopping test on the true residual; two extra operator applies per
        # iteration buy exact agreement between the stored criterion value and
        # any later recomputation.
        residual = K.matvec(x) - d
        rnorm = float(np.linalg.norm(residual))
        residual_norms.append(rnorm)
        if rnorm <= CONSISTENT_FLOOR * norm_d or norm_k <= 0.0:
            criterion = 0.0
        else:
            criterion = float(np.linalg.norm(K.rmatvec(residual))) / (rnorm * norm_k)
        if criterion < tolerance:
            converged = True
            break
        if consistent_rtol is not None and rnorm <= consistent_rtol * norm_d:
            converged = True
            break

    condition = math.sqrt(anorm2) * math.sqrt(ddnorm) if ddnorm > 0.0 else 1.0
    return LsqrResult(x, residual, iterations, criterion, converged, residual_norms, condition)


def estimate_op_norm(K, iterations: int = DEFAULT_NORM_ITERATIONS, seed: int = DEFAULT_NORM_SEED) -> float:
    """Power-iteration estimate of the operator 2-norm of K.

    Runs the given number of power iterations on K^T K from a seeded random
    start and returns the square root of the final Rayleigh-quotient-style
    estimate.  Deterministic for a fixed seed; a zero operator returns 0.
    """
    K = as_linop(K)
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if K.n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(K.n)
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return 0.0
    v = v / nv
    lam = 0.0
    for _ in range(iterations):
        w = K.rmatvec(K.matvec(v))
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return math.sqrt(lam)


def _first_bad_minor(mat: np.ndarray) -> int:
    """Index of the first leading minor that is not positive definite."""
    for k in range(1, mat.shape[0] + 1):
        try:
            np.linalg.cholesky(mat[:k, :k])
        except np.linalg.LinAlgError:
            return k - 1
    return mat.shape[0] - 1


# Cholesky pivots this far below the largest one indicate numerical rank
# deficiency (cond >= ~1e14); rounding can otherwise turn an exactly singular
# matrix into a "successful" factorization.
PIVOT_RTOL = 1e-7


def _spd_factor(mat: np.ndarray, context: str):
    try:
        factor = scipy.linalg.cho_factor(mat, lower=True)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
        pivot = _first_bad_minor(mat)
        raise SingularMatrixError(f"{context}: non-positive pivot at index {pivot}") from None
    diag = np.abs(np.diag(factor[0]))
    if diag.size and float(diag.min()) <= PIVOT_RTOL * float(diag.max()):
        pivot = int(np.argmin(diag))
        raise SingularMatrixError(f"{context}: negligible pivot at index {pivot}")
    return factor


def solve_spd(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Solve H z = g for symmetric positive definite H via Cholesky."""
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float)
    factor = _spd_factor(H, "SPD system")
    return scipy.linalg.cho_solve(factor, g)


def dense_normal_solve(K: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Least-squares solve via the normal equations (K^T K) x = K^T d.

    Serves as the direct oracle for the iterative solver on small instances;
    requires K to have full column rank.
    """
    K = np.asarray(K, dtype=float)
    d = np.asarray(d, dtype=float)
    factor = _spd_factor(K.T @ K, "normal matrix")
    return scipy.linalg.cho_solve(factor, K.T @ d)

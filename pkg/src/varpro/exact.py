"""Exact variable projection: inner solve, projected residual, analytic
Jacobian, reduced functional, and the quasi-Newton outer loop.

The reduced functional is phi(y) = 0.5 ||f(y)||^2 + R(y) with
f(y) = K(y) x(y) - d, and the outer iteration takes full quasi-Newton steps
s = -H^{-1} (J^T f + grad R) with H = J^T J + hess R.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import SingularMatrixError, solve_spd
from .problem import TikhonovProblem
from .regularizers import DomainError, Regularizer

# Fraction-to-boundary factor: damped steps keep every positive-domain
# coordinate at or above this fraction of its current value.
BOUNDARY_FRACTION = 0.05


class SolverError(RuntimeError):
    """Outer iteration failed; carries the partial trace in ``trace``."""

    def __init__(self, message: str, trace: "SolverTrace | None" = None):
        super().__init__(message)
        self.trace = trace


@dataclass
class ReducedEval:
    """Everything the outer loop needs at one parameter point."""

    y: np.ndarray
    x: np.ndarray
    f: np.ndarray
    phi: float
    grad: np.ndarray
    jac: np.ndarray
    hess: np.ndarray


@dataclass
class SolverConfig:
    """Outer-loop controls.

    The step test is scale-aware: stop when ||s|| <= step_tolerance *
    max(1, ||y||).  Setting both tolerances to zero runs the full iteration
    budget, which reproduces fixed-iteration convergence plots.
    """

    max_outer_iterations: int = 30
    step_tolerance: float = 1e-8
    gradient_tolerance: float = 1e-10


@dataclass
class IterationRecord:
    k: int
    y: np.ndarray
    phi: float
    grad_norm: float
    step_norm: float
    inner_iterations: int = 0
    cum_inner_iterations: int = 0
    eps: float = math.nan
    wall_ms: float = 0.0
    rre_x: float | None = None
    rre_y: float | None = None
    step_scale: float = 1.0


@dataclass
class SolverTrace:
    records: list[IterationRecord]
    y: np.ndarray
    x: np.ndarray
    stop_reason: str
    warnings: list[str] = field(default_factory=list)

    @property
    def cumulative_inner_iterations(self) -> int:
        return self.records[-1].cum_inner_iterations if self.records else 0

    def ys(self) -> np.ndarray:
        return np.array([r.y for r in self.records])

    def phis(self) -> np.ndarray:
        return np.array([r.phi for r in self.records])


@dataclass
class EvalBundle:
    """Adapter between the shared loop and the exact/inexact evaluators."""

    phi: float
    grad: np.ndarray
    hess: np.ndarray
    x: np.ndarray
    inner_iterations: int = 0
    eps: float = math.nan
    warnings: list[str] = field(default_factory=list)


def solve_x(prob: TikhonovProblem, y, backend: str = "auto") -> np.ndarray:
    """Exact minimizer of 0.5 ||K(y) x - d||^2."""
    return prob.backend(y, backend).solve_x()


def residual_f(prob: TikhonovProblem, y, x: np.ndarray) -> np.ndarray:
    """Stacked residual [A(y) x - b; lam L x]; equals the negated orthogonal
    projection of d when x is the exact inner solution."""
    return np.concatenate(
        [prob.family.apply(y, x) - prob.b, prob.lam * prob.L.apply(x)]
    )


def _jacobian_columns(prob: TikhonovProblem, be, y, x: np.ndarray) -> np.ndarray:
    b_minus_ax = prob.b - be.apply_A(x)
    q = prob.q
    cols = []
    for j in range(prob.family.param_dim):
        u = np.concatenate([prob.family.apply_dparam(y, j, x), np.zeros(q)])
        w = prob.family.apply_dparam_transpose(y, j, b_minus_ax)
        cols.append(be.pperp(u) + be.kdag_t(w))
    return np.column_stack(cols)


def jacobian_f(prob: TikhonovProblem, y, x: np.ndarray, backend: str = "auto") -> np.ndarray:
    """Analytic Jacobian of f at y; x must be the exact inner solution."""
    return _jacobian_columns(prob, prob.backend(y, backend), y, x)


def evaluate_reduced(
    prob: TikhonovProblem, reg: Regularizer, y, backend: str = "auto"
) -> ReducedEval:
    """Bundle x, f, phi, gradient, Jacobian, and approximate Hessian at y."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    reg.check_domain(y)
    be = prob.backend(y, backend)
    x = be.solve_x()
    f = np.concatenate([be.apply_A(x) - prob.b, prob.lam * prob.L.apply(x)])
    jac = _jacobian_columns(prob, be, y, x)
    phi = 0.5 * float(f @ f) + reg.value(y)
    grad = jac.T @ f + reg.gradient(y)
    hess = jac.T @ jac + reg.hessian(y)
    hess = 0.5 * (hess + hess.T)
    if not (np.isfinite(phi) and np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
        raise FloatingPointError(f"non-finite reduced evaluation at y = {y}")
    return ReducedEval(y=y, x=x, f=f, phi=phi, grad=grad, jac=jac, hess=hess)


def _fraction_to_boundary(y: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, float]:
    """Damp s so y + s stays in the open positive orthant.

    Triggered only when a full step would leave it; the damped step keeps
    every coordinate at or above BOUNDARY_FRACTION times its current value.
    """
    if np.all(y + s > 0.0):
        return s, 1.0
    shrink = np.where(s < 0.0, (1.0 - BOUNDARY_FRACTION) * y / (-s), np.inf)
    alpha = min(1.0, float(np.min(shrink)))
    return alpha * s, alpha


def _quasi_newton_loop(
    evaluate,
    y0,
    cfg: SolverConfig,
    positive_domain: bool,
    truth,
) -> SolverTrace:
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    x_true = y_true = None
    if truth is not None:
        x_true, y_true = truth
        x_true = np.asarray(x_true, dtype=float)
        y_true = np.atleast_1d(np.asarray(y_true, dtype=float))

    records: list[IterationRecord] = []
    warnings: list[str] = []
    cum_inner = 0
    bundle = None
    stop_reason = "max_iterations"

    def make_record(k, bundle, step_norm, alpha, wall_ms):
        nonlocal cum_inner
        cum_inner += bundle.inner_iterations
        rre_x = rre_y = None
        if x_true is not None:
            rre_x = float(np.linalg.norm(bundle.x - x_true) / np.linalg.norm(x_true))
            rre_y = float(np.linalg.norm(y - y_true) / np.linalg.norm(y_true))
        return IterationRecord(
            k=k,
            y=y.copy(),
            phi=bundle.phi,
            grad_norm=float(np.linalg.norm(bundle.grad)),
            step_norm=step_norm,
            inner_iterations=bundle.inner_iterations,
            cum_inner_iterations=cum_inner,
            eps=bundle.eps,
            wall_ms=wall_ms,
            rre_x=rre_x,
            rre_y=rre_y,
            step_scale=alpha,
        )

    def partial_trace():
        return SolverTrace(records, y.copy(), bundle.x if bundle is not None else np.zeros(0), "error", warnings)

    for k in range(cfg.max_outer_iterations + 1):
        t0 = time.perf_counter()
        try:
            bundle = evaluate(y, k)
        except DomainError as exc:
            raise SolverError(f"iteration {k}: {exc}", partial_trace()) from exc
        warnings.extend(bundle.warnings)

        if k == cfg.max_outer_iterations:
            records.append(make_record(k, bundle, 0.0, 1.0, 1e3 * (time.perf_counter() - t0)))
            stop_reason = "max_iterations"
            break

        try:
            step = -solve_spd(bundle.hess, bundle.grad)
        except SingularMatrixError as exc:
            records.append(make_record(k, bundle, 0.0, 1.0, 1e3 * (time.perf_counter() - t0)))
            raise SolverError(
                f"iteration {k}: singular quasi-Newton system ({exc})", partial_trace()
            ) from exc

        alpha = 1.0
        if positive_domain:
            step, alpha = _fraction_to_boundary(y, step)
        step_norm = float(np.linalg.norm(step))
        records.append(make_record(k, bundle, step_norm, alpha, 1e3 * (time.perf_counter() - t0)))

        if records[-1].grad_norm <= cfg.gradient_tolerance:
            stop_reason = "gradient"
            break
        if step_norm <= cfg.step_tolerance * max(1.0, float(np.linalg.norm(y))):
            stop_reason = "step"
            break
        y = y + step

    return SolverTrace(records, y.copy(), bundle.x, stop_reason, warnings)


def solve_exact(
    prob: TikhonovProblem,
    reg: Regularizer,
    y0,
    cfg: SolverConfig | None = None,
    truth=None,
    backend: str = "auto",
) -> SolverTrace:
    """Quasi-Newton minimization of the reduced functional with exact inner
    solves.  Full steps, except the fraction-to-boundary damping on
    positive-domain problems."""
    cfg = cfg or SolverConfig()

    def evaluate(y, k):
        ev = evaluate_reduced(prob, reg, y, backend)
        return EvalBundle(phi=ev.phi, grad=ev.grad, hess=ev.hess, x=ev.x)

    positive = reg.positive_domain or prob.family.param_floor is not None
    return _quasi_newton_loop(evaluate, y0, cfg, positive, truth)

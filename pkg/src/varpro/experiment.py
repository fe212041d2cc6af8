"""Experiment orchestration: problem synthesis, scans, solver runs, file I/O.

All randomness flows from the configured seed, so identical configurations
produce byte-identical outputs apart from the wall-clock column in the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import phantoms
from .config import ConfigError, ExperimentConfig, config_text, validate
from .exact import SolverConfig, SolverError, SolverTrace, evaluate_reduced, solve_exact
from .fileio import atomic_write_text
from .inexact import ToleranceSchedule, solve_inexact
from .metrics import Metrics, compute_metrics
from .operators import GaussianBlur1D, GaussianBlur2D, OperatorFamily, RegOperator
from .pgm import read_pgm, write_pgm
from .problem import TikhonovProblem
from .regularizers import (
    DomainError,
    LogBarrierRegularizer,
    NoRegularizer,
    QuadraticRegularizer,
    Regularizer,
)

BUILTIN_1D = ("step", "bump")
BUILTIN_2D = ("shapes",)


def build_family(cfg: ExperimentConfig) -> OperatorFamily:
    if cfg.dimension == 1:
        return GaussianBlur1D(cfg.n)
    return GaussianBlur2D(cfg.n)


def build_reg_operator(cfg: ExperimentConfig) -> RegOperator:
    kind = cfg.l_operator
    if kind == "auto":
        kind = "laplacian" if cfg.dimension == 2 else "identity"
    if kind == "identity":
        shape = (cfg.n, cfg.n) if cfg.dimension == 2 else (cfg.n,)
        return RegOperator.identity(shape)
    return RegOperator.laplacian(cfg.n)


def build_regularizer(cfg: ExperimentConfig) -> Regularizer:
    if cfg.reg == "none":
        return NoRegularizer()
    if cfg.reg == "quadratic":
        return QuadraticRegularizer(cfg.mu, [cfg.anchor])
    return LogBarrierRegularizer([cfg.mu])


def true_signal(cfg: ExperimentConfig) -> np.ndarray:
    """Ground truth as a flat vector (column-major for images)."""
    name = cfg.image
    if cfg.dimension == 1:
        if name == "step":
            return phantoms.step_signal(cfg.n)
        if name == "bump":
            return phantoms.bump_signal(cfg.n)
        raise ConfigError(f"unknown 1-D signal {name!r} (choose from {BUILTIN_1D})")
    if name == "shapes":
        return phantoms.shapes_image(cfg.n).ravel(order="F")
    img = read_pgm(name)
    if img.shape != (cfg.n, cfg.n):
        raise ConfigError(f"PGM {name!r} is {img.shape}, expected {(cfg.n, cfg.n)}")
    return img.ravel(order="F")


def generate_problem(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Ground truth and noisy blurred data for the configured experiment.

    The noise is white Gaussian with componentwise standard deviation
    noise_level * ||A(y_true) x_true|| / sqrt(m), so its expected norm is the
    configured fraction of the clean data norm.
    """
    validate(cfg)
    family = build_family(cfg)
    x_true = true_signal(cfg)
    b_true = family.apply([cfg.y_true], x_true)
    if cfg.noise_level > 0.0:
        rng = np.random.default_rng(cfg.seed)
        sigma = cfg.noise_level * float(np.linalg.norm(b_true)) / math.sqrt(b_true.size)
        b = b_true + sigma * rng.standard_normal(b_true.size)
    else:
        b = b_true.copy()
    return x_true, b


def make_problem(cfg: ExperimentConfig, b: np.ndarray) -> TikhonovProblem:
    return TikhonovProblem(build_family(cfg), build_reg_operator(cfg), cfg.lam, b)


# -- reduced-functional scans -------------------------------------------------

def scan_phi(cfg: ExperimentConfig, sigma_grid) -> list[tuple[float, float, float]]:
    """Rows (sigma, phi, dphi) over the grid via the exact pipeline.

    Grid points outside the regularizer or family domain yield NaN sentinel
    values and the scan continues.
    """
    grid = np.asarray(sigma_grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ConfigError("scan grid must be sorted")
    _, b = generate_problem(cfg)
    prob = make_problem(cfg, b)
    reg = build_regularizer(cfg)
    rows = []
    for sigma in grid:
        try:
            ev = evaluate_reduced(prob, reg, [float(sigma)])
            rows.append((float(sigma), ev.phi, float(ev.grad[0])))
        except (DomainError, ValueError):
            rows.append((float(sigma), math.nan, math.nan))
    return rows


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def scan_csv(rows) -> str:
    out = ["sigma,phi,dphi"]
    out.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


# -- solver runs ---------------------------------------------------------------

TRACE_COLUMNS = (
    "k", "y", "phi", "grad_norm", "step_norm", "eps_k",
    "inner_iters", "cum_inner_iters", "wall_ms", "rre_x", "rre_y",
)


def trace_csv(trace: SolverTrace, with_truth: bool) -> str:
    cols = TRACE_COLUMNS if with_truth else TRACE_COLUMNS[:-2]
    lines = [",".join(cols)]
    for r in trace.records:
        y_txt = ";".join(_fmt(v) for v in np.atleast_1d(r.y))
        row = [
            str(r.k), y_txt, _fmt(r.phi), _fmt(r.grad_norm), _fmt(r.step_norm),
            _fmt(r.eps), str(r.inner_iterations), str(r.cum_inner_iterations),
            _fmt(r.wall_ms),
        ]
        if with_truth:
            row.extend([_fmt(r.rre_x), _fmt(r.rre_y)])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def run_solver(cfg: ExperimentConfig, prob: TikhonovProblem, reg: Regularizer, truth) -> SolverTrace:
    scfg = SolverConfig(
        max_outer_iterations=cfg.max_iterations,
        step_tolerance=cfg.step_tol,
        gradient_tolerance=cfg.grad_tol,
    )
    if cfg.solver == "exact":
        return solve_exact(prob, reg, [cfg.y_init], scfg, truth=truth)
    sched = ToleranceSchedule(cfg.schedule, cfg.eps0)
    return solve_inexact(prob, reg, [cfg.y_init], sched, scfg, lsqr_cap=cfg.lsqr_cap, truth=truth)


@dataclass
class RunResult:
    trace: SolverTrace
    metrics: Metrics | None
    outdir: Path
    failure: str | None = None


def _check_writable(outdir: Path) -> None:
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise IOError(f"output directory {outdir} is not writable: {exc}") from exc


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run the configured solver and write trace.csv, the reconstruction,
    and summary.txt (plus figures unless disabled) into the output directory.

    A solver failure still writes the partial trace and summary; the failure
    is reported in the result.
    """
    validate(cfg)
    outdir = Path(cfg.outdir)
    _check_writable(outdir)

    x_true, b = generate_problem(cfg)
    prob = make_problem(cfg, b)
    reg = build_regularizer(cfg)
    truth = (x_true, np.array([cfg.y_true]))

    failure = None
    try:
        trace = run_solver(cfg, prob, reg, truth)
    except SolverError as exc:
        if exc.trace is None:
            raise
        trace = exc.trace
        failure = str(exc)

    metrics = None
    if trace.x.size == x_true.size:
        side = cfg.n if cfg.dimension == 2 else None
        metrics = compute_metrics(trace.x, trace.y, x_true, cfg.y_true, image_side=side)

    atomic_write_text(outdir / "trace.csv", trace_csv(trace, with_truth=True))
    if cfg.dimension == 2 and trace.x.size == x_true.size:
        write_pgm(outdir / "recon.pgm", trace.x.reshape(cfg.n, cfg.n, order="F"))
    elif trace.x.size == x_true.size:
        lines = ["i,x_true,recon"]
        lines.extend(
            f"{i},{_fmt(x_true[i])},{_fmt(trace.x[i])}" for i in range(cfg.n)
        )
        atomic_write_text(outdir / "recon.csv", "\n".join(lines) + "\n")
    atomic_write_text(outdir / "summary.txt", _summary_text(cfg, trace, metrics, failure))

    if cfg.figures:
        from . import figures

        figures.render_convergence(outdir / "convergence.png", trace)

    return RunResult(trace=trace, metrics=metrics, outdir=outdir, failure=failure)


def _summary_text(cfg, trace, metrics, failure) -> str:
    lines = ["# configuration", config_text(cfg).rstrip(), "", "# result"]
    lines.append(f"stop_reason = {trace.stop_reason if failure is None else 'error'}")
    if failure is not None:
        lines.append(f"failure = {failure}")
    if trace.records:
        lines.append(f"iterations = {trace.records[-1].k}")
    y_txt = ";".join(_fmt(v) for v in np.atleast_1d(trace.y))
    lines.append(f"final_y = {y_txt}")
    lines.append(f"cumulative_inner_iterations = {trace.cumulative_inner_iterations}")
    if metrics is not None:
        lines.append(f"rre_x = {_fmt(metrics.rre_x)}")
        lines.append(f"rre_y = {_fmt(metrics.rre_y)}")
        if not math.isnan(metrics.ssim):
            lines.append(f"ssim = {_fmt(metrics.ssim)}")
    for warning in trace.warnings:
        lines.append(f"warning = {warning}")
    return "\n".join(lines) + "\n"


# -- finite-difference check suites -------------------------------------------

@dataclass
class CheckResult:
    name: str
    max_rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def _fd_phi(prob, reg, y, h):
    lo = evaluate_reduced(prob, reg, [y - h]).phi
    hi = evaluate_reduced(prob, reg, [y + h]).phi
    return (hi - lo) / (2 * h)


def _fd_f(prob, y, h):
    from .exact import residual_f, solve_x

    lo = residual_f(prob, [y - h], solve_x(prob, [y - h]))
    hi = residual_f(prob, [y + h], solve_x(prob, [y + h]))
    return (hi - lo) / (2 * h)


def _check_problem(dimension: int, n: int = 16, seed: int = 3):
    cfg = ExperimentConfig(
        dimension=dimension, n=n, image="shapes" if dimension == 2 else "step",
        y_true=3.0 if dimension == 2 else 1.5, noise_level=0.05, seed=seed,
        lam=1.5 if dimension == 2 else 0.8,
    )
    _, b = generate_problem(cfg)
    return make_problem(cfg, b)


def gradcheck_suites(tolerance: float = 1e-6, points: int = 10, seed: int = 11) -> list[CheckResult]:
    """Analytic gradient and Jacobian versus central finite differences.

    Covers both dimensions and all three regularizers at seeded parameter
    points; returns one result per suite.
    """
    from .exact import jacobian_f, solve_x

    rng = np.random.default_rng(seed)
    regs = {
        "none": NoRegularizer(),
        "quadratic": QuadraticRegularizer(3.8, [5.0]),
        "log": LogBarrierRegularizer([3.8]),
    }
    results = []
    for dimension in (1, 2):
        prob = _check_problem(dimension)
        ys = rng.uniform(0.8, 4.5, size=points)
        for reg_name, reg in regs.items():
            worst = 0.0
            for y in ys:
                h = 1e-5 * max(1.0, abs(y))
                ev = evaluate_reduced(prob, reg, [y])
                fd = _fd_phi(prob, reg, y, h)
                worst = max(worst, abs(ev.grad[0] - fd) / max(abs(fd), 1e-10))
            results.append(CheckResult(f"grad-{dimension}d-{reg_name}", worst, tolerance))
        worst_jac = 0.0
        for y in ys:
            h = 1e-5 * max(1.0, abs(y))
            col = jacobian_f(prob, [y], solve_x(prob, [y]))[:, 0]
            fd = _fd_f(prob, y, h)
            denom = max(float(np.linalg.norm(fd)), 1e-10)
            worst_jac = max(worst_jac, float(np.linalg.norm(col - fd)) / denom)
        results.append(CheckResult(f"jacobian-{dimension}d", worst_jac, tolerance))
    return results

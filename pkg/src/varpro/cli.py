"""Command line interface for the deblurring experiments.

Subcommands: gen-data, scan-phi, run, gradcheck, conditions.  Flags mirror
the configuration keys; --config loads a key = value file first and flags
then override it.  Exit codes: 0 success, 2 configuration error, 3 solver or
numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, apply_pairs, load_config, validate
from .exact import SolverError
from .experiment import (
    generate_problem,
    gradcheck_suites,
    make_problem,
    run_experiment,
    scan_csv,
    scan_phi,
)
from .fileio import atomic_write_text
from .pgm import PgmError, write_pgm
from .problem import ModelError
from .spectral import check_noblur_conditions, gaussian_spectral_kernel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

_FLAGS = [
    ("--dimension", "dimension", int, "problem dimension, 1 or 2"),
    ("--n", "n", int, "signal length / image side"),
    ("--image", "image", str, "builtin name (shapes, step, bump) or PGM path"),
    ("--y-true", "y_true", float, "true blur width"),
    ("--noise-level", "noise_level", float, "noise norm as a fraction of the data norm"),
    ("--seed", "seed", int, "random seed"),
    ("--lambda", "lam", float, "Tikhonov parameter"),
    ("--l", "l_operator", str, "regularization operator: auto, identity, laplacian"),
    ("--reg", "reg", str, "parameter regularizer: none, quadratic, log"),
    ("--mu", "mu", float, "parameter regularization strength"),
    ("--anchor", "anchor", float, "quadratic regularizer anchor"),
    ("--solver", "solver", str, "exact or inexact"),
    ("--schedule", "schedule", str, "inexact tolerance schedule: s, ab, lb, b"),
    ("--eps0", "eps0", float, "initial inner tolerance"),
    ("--lsqr-cap", "lsqr_cap", int, "inner iteration cap"),
    ("--y-init", "y_init", float, "initial blur width"),
    ("--max-iterations", "max_iterations", int, "outer iteration cap"),
    ("--step-tol", "step_tol", float, "outer step tolerance"),
    ("--grad-tol", "grad_tol", float, "outer gradient tolerance"),
    ("--outdir", "outdir", str, "output directory"),
]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="key = value config file")
    for flag, attr, typ, help_text in _FLAGS:
        parser.add_argument(flag, dest=attr, type=typ, default=None, help=help_text)
    parser.add_argument(
        "--no-figures", dest="figures", action="store_false", default=None,
        help="skip figure rendering",
    )


def _build_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    for _, attr, _, _ in _FLAGS:
        value = getattr(args, attr, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "figures", None) is not None:
        cfg.figures = args.figures
    return validate(cfg)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varpro",
        description="Semi-blind Gaussian deblurring via regularized variable projection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize the true and blurred data")
    _add_config_flags(p)

    p = sub.add_parser("scan-phi", help="scan the reduced functional over widths")
    _add_config_flags(p)
    p.add_argument("--grid-min", type=float, default=0.05)
    p.add_argument("--grid-max", type=float, default=6.0)
    p.add_argument("--grid-count", type=int, default=120)

    p = sub.add_parser("run", help="run the configured solver")
    _add_config_flags(p)

    p = sub.add_parser("gradcheck", help="finite-difference gradient/Jacobian suites")
    p.add_argument("--tolerance", type=float, default=1e-6)

    p = sub.add_parser("conditions", help="check the no-blur degeneracy conditions")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--grid-min", type=float, default=1e-3)
    p.add_argument("--grid-max", type=float, default=10.0)
    p.add_argument("--grid-count", type=int, default=50)
    return parser


def _cmd_gen_data(args) -> int:
    cfg = _build_config(args)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    x_true, b = generate_problem(cfg)
    if cfg.dimension == 2:
        write_pgm(outdir / "true.pgm", x_true.reshape(cfg.n, cfg.n, order="F"))
        write_pgm(outdir / "blurred.pgm", b.reshape(cfg.n, cfg.n, order="F"))
    else:
        lines = ["i,x_true,b"]
        lines.extend(f"{i},{x_true[i]:.17g},{b[i]:.17g}" for i in range(cfg.n))
        atomic_write_text(outdir / "data.csv", "\n".join(lines) + "\n")
    if cfg.figures:
        from . import figures

        figures.render_problem(outdir / "problem.png", x_true, b, cfg.dimension, cfg.n)
    print(f"wrote data for seed {cfg.seed} to {outdir}")
    return EXIT_OK


def _cmd_scan_phi(args) -> int:
    cfg = _build_config(args)
    grid = np.linspace(args.grid_min, args.grid_max, args.grid_count)
    rows = scan_phi(cfg, grid)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(outdir / "phi_scan.csv", scan_csv(rows))
    if cfg.figures:
        from . import figures

        figures.render_scan(outdir / "phi_scan.png", rows)
    finite = [r for r in rows if np.isfinite(r[1])]
    if finite:
        best = min(finite, key=lambda r: r[1])
        print(f"grid argmin at sigma = {best[0]:.4g} (phi = {best[1]:.6g})")
    print(f"wrote scan to {outdir / 'phi_scan.csv'}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    result = run_experiment(cfg)
    last = result.trace.records[-1] if result.trace.records else None
    if last is not None:
        y = float(np.atleast_1d(result.trace.y)[0])
        print(f"stopped after {last.k} iterations at width {y:.6g} ({result.trace.stop_reason})")
    if result.metrics is not None:
        print(f"rre_x = {result.metrics.rre_x:.4g}, rre_y = {result.metrics.rre_y:.4g}")
    print(f"wrote artifacts to {result.outdir}")
    if result.failure is not None:
        print(f"solver failure: {result.failure}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    results = gradcheck_suites(tolerance=args.tolerance)
    ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        ok &= res.passed
        print(f"{status} {res.name}: max rel error {res.max_rel_error:.3e} (tol {res.tolerance:g})")
    return EXIT_OK if ok else EXIT_SOLVER


def _cmd_conditions(args) -> int:
    kernel = gaussian_spectral_kernel(args.n)
    grid = np.geomspace(args.grid_min, args.grid_max, args.grid_count)
    report = check_noblur_conditions(kernel, grid)
    print(f"identity limit : {'PASS' if report.identity_limit_ok else 'FAIL'} (gap {report.identity_gap:.3e})")
    print(f"evenness       : {'PASS' if report.evenness_ok else 'FAIL'} (gap {report.evenness_gap:.3e})")
    print(f"modal decay    : {'PASS' if report.modal_decay_ok else 'FAIL'} (max {report.modal_max:.3e})")
    if report.verdict:
        print("verdict: zero width is the unique global minimizer of the "
              "unregularized reduced functional for data with energy at a "
              "nonzero frequency")
        return EXIT_OK
    print("verdict: conditions not satisfied")
    return EXIT_SOLVER


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "gen-data": _cmd_gen_data,
        "scan-phi": _cmd_scan_phi,
        "run": _cmd_run,
        "gradcheck": _cmd_gradcheck,
        "conditions": _cmd_conditions,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PgmError, IOError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverError, ModelError, FloatingPointError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Session-scoped fixtures for the desk-scale 64 x 64 experiment used across
the solver and acceptance tests."""

from __future__ import annotations

import numpy as np
import pytest

import varpro as vp
from varpro.config import ExperimentConfig
from varpro.experiment import generate_problem, make_problem


@pytest.fixture(scope="session")
def desk2d():
    """Standard desk-scale problem: 64 x 64 shapes phantom, true width 3,
    5% noise, seed 7, Laplacian L, lambda 1.5."""
    cfg = ExperimentConfig()
    x_true, b = generate_problem(cfg)
    prob = make_problem(cfg, b)
    return cfg, prob, x_true


@pytest.fixture(scope="session")
def desk2d_noiseless():
    cfg = ExperimentConfig(noise_level=0.0)
    x_true, b = generate_problem(cfg)
    prob = make_problem(cfg, b)
    return cfg, prob, x_true


@pytest.fixture(scope="session")
def desk2d_logbarrier():
    """Log-barrier variant: lambda 0.425 per the experimental protocol."""
    cfg = ExperimentConfig(lam=0.425, reg="log")
    x_true, b = generate_problem(cfg)
    prob = make_problem(cfg, b)
    return cfg, prob, x_true


@pytest.fixture(scope="session")
def quad_reg():
    return vp.QuadraticRegularizer(3.8, [5.0])


@pytest.fixture(scope="session")
def exact_trace(desk2d, quad_reg):
    """Exact-solver run on the standard problem (quadratic regularizer)."""
    _, prob, x_true = desk2d
    return vp.solve_exact(prob, quad_reg, [5.0], truth=(x_true, np.array([3.0])))

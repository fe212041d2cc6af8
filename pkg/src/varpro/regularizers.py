"""Regularization terms R(y) on the blur parameters.

Each regularizer exposes the scalar value, analytic gradient and Hessian, and
the stacked residual/Jacobian blocks of the equivalent Gauss-Newton
formulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """The regularizer is undefined at the requested point (not a numeric
    failure)."""


@dataclass
class RegStack:
    """Extra residual/Jacobian rows appended by the regularizer.

    ``jacobian.T @ jacobian`` equals the regularizer Hessian, and the stacked
    Gauss-Newton normal equations reproduce the quasi-Newton step.
    """

    residual: np.ndarray
    jacobian: np.ndarray


class Regularizer:
    positive_domain = False

    def check_domain(self, y) -> None:
        return None

    def value(self, y) -> float:
        raise NotImplementedError

    def gradient(self, y) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, y) -> np.ndarray:
        raise NotImplementedError

    def stack(self, y) -> RegStack:
        raise NotImplementedError


class NoRegularizer(Regularizer):
    """R(y) = 0; keeps the unregularized degenerate behavior on the same
    solver path."""

    def value(self, y):
        return 0.0

    def gradient(self, y):
        return np.zeros(np.asarray(y, dtype=float).size)

    def hessian(self, y):
        r = np.asarray(y, dtype=float).size
        return np.zeros((r, r))

    def stack(self, y):
        r = np.asarray(y, dtype=float).size
        return RegStack(np.zeros(0), np.zeros((0, r)))


class QuadraticRegularizer(Regularizer):
    """R(y) = (mu^2 / 2) ||y - anchor||^2."""

    def __init__(self, mu: float, anchor):
        if mu < 0.0:
            raise ValueError("mu must be nonnegative")
        self.mu = float(mu)
        self.anchor = np.atleast_1d(np.asarray(anchor, dtype=float))

    def value(self, y):
        dy = np.asarray(y, dtype=float) - self.anchor
        return 0.5 * self.mu**2 * float(dy @ dy)

    def gradient(self, y):
        return self.mu**2 * (np.asarray(y, dtype=float) - self.anchor)

    def hessian(self, y):
        return self.mu**2 * np.eye(self.anchor.size)

    def stack(self, y):
        dy = np.asarray(y, dtype=float) - self.anchor
        return RegStack(self.mu * dy, self.mu * np.eye(self.anchor.size))


class LogBarrierRegularizer(Regularizer):
    """R(y) = -sum_j mu_j^2 log(y_j), defined on the positive orthant."""

    positive_domain = True

    def __init__(self, mu):
        self.mu = np.atleast_1d(np.asarray(mu, dtype=float))
        if np.any(self.mu <= 0.0):
            raise ValueError("all barrier weights must be positive")

    def check_domain(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0.0):
            raise DomainError(f"log barrier undefined at y = {y}")

    def value(self, y):
        self.check_domain(y)
        return -float(self.mu**2 @ np.log(np.asarray(y, dtype=float)))

    def gradient(self, y):
        self.check_domain(y)
        return -(self.mu**2) / np.asarray(y, dtype=float)

    def hessian(self, y):
        self.check_domain(y)
        return np.diag(self.mu**2 / np.asarray(y, dtype=float) ** 2)

    def stack(self, y):
        self.check_domain(y)
        return RegStack(self.mu.copy(), np.diag(-self.mu / np.asarray(y, dtype=float)))

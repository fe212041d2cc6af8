"""Built-in test signals and images.

The 2-D phantom is piecewise constant (rectangle, disk, and a small square on
an empty background); the 1-D signals are a step pattern and a smooth pair of
bumps.  Amplitudes are part of each phantom's definition: the 2-D phantom
spans [0, 4.5], which at the 64 x 64 experiment scale balances the data term
against the documented parameter-regularization strengths.
"""

from __future__ import annotations

import numpy as np

SHAPES_AMPLITUDE = 4.5


def step_signal(n: int) -> np.ndarray:
    """Piecewise-constant signal with three plateaus of different heights."""
    x = np.zeros(n)
    x[int(0.12 * n) : int(0.30 * n)] = 0.8
    x[int(0.42 * n) : int(0.50 * n)] = 1.0
    x[int(0.62 * n) : int(0.85 * n)] = 0.5
    return x


def bump_signal(n: int) -> np.ndarray:
    """Smooth signal: two Gaussian bumps of different widths."""
    t = np.linspace(0.0, 1.0, n)
    return 0.9 * np.exp(-((t - 0.32) ** 2) / (2 * 0.06**2)) + 0.6 * np.exp(
        -((t - 0.7) ** 2) / (2 * 0.11**2)
    )


def shapes_image(n: int) -> np.ndarray:
    """Piecewise-constant n x n phantom: rectangle, disk, and a small square."""
    img = np.zeros((n, n))
    img[int(0.15 * n) : int(0.45 * n), int(0.12 * n) : int(0.40 * n)] = 0.9
    i = np.arange(n)
    d2 = (i[:, None] - 0.62 * n) ** 2 + (i[None, :] - 0.6 * n) ** 2
    img[d2 <= (0.18 * n) ** 2] = 0.6
    img[int(0.70 * n) : int(0.88 * n), int(0.15 * n) : int(0.33 * n)] = 1.0
    return SHAPES_AMPLITUDE * img

"""Reconstruction quality metrics: relative errors and a pinned SSIM variant.

The SSIM here is single scale with constants K1 = 0.01 and K2 = 0.03, dynamic
range max(ref) - min(ref), and 8 x 8 non-overlapping windows with unbiased
variance estimates; values are reproducible within this repository but will
not match sliding-window implementations digit for digit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SSIM_WINDOW = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03


class MetricError(ValueError):
    """Metric undefined for the given reference (zero norm truth)."""


@dataclass
class Metrics:
    rre_x: float
    rre_y: float
    ssim: float


def relative_error(v, v_true) -> float:
    v = np.asarray(v, dtype=float)
    v_true = np.asarray(v_true, dtype=float)
    denom = float(np.linalg.norm(v_true))
    if denom == 0.0:
        raise MetricError("reference has zero norm")
    return float(np.linalg.norm(v - v_true) / denom)


def ssim(img, ref, window: int = SSIM_WINDOW) -> float:
    """Mean SSIM over non-overlapping square windows."""
    img = np.asarray(img, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if img.shape != ref.shape or img.ndim != 2:
        raise ValueError("ssim expects two equal-shape 2-D arrays")
    n0, n1 = img.shape
    if n0 % window or n1 % window:
        raise ValueError(f"image sides must be multiples of the {window}-pixel window")
    rng = float(ref.max() - ref.min())
    if rng == 0.0:
        raise MetricError("reference image has zero dynamic range")
    c1 = (SSIM_K1 * rng) ** 2
    c2 = (SSIM_K2 * rng) ** 2

    def blocks(a):
        return a.reshape(n0 // window, window, n1 // window, window).transpose(0, 2, 1, 3).reshape(-1, window * window)

    bi, br = blocks(img), blocks(ref)
    mi, mr = bi.mean(axis=1), br.mean(axis=1)
    vi = bi.var(axis=1, ddof=1)
    vr = br.var(axis=1, ddof=1)
    cov = ((bi - mi[:, None]) * (br - mr[:, None])).sum(axis=1) / (window * window - 1)
    score = ((2 * mi * mr + c1) * (2 * cov + c2)) / ((mi**2 + mr**2 + c1) * (vi + vr + c2))
    return float(score.mean())


def compute_metrics(x, y, x_true, y_true, image_side: int | None = None) -> Metrics:
    """RRE for x and y plus SSIM when an image side is given (2-D data).

    Vectors are column-major images when ``image_side`` is set.
    """
    y_arr = np.atleast_1d(np.asarray(y_true, dtype=float))
    if float(np.linalg.norm(y_arr)) == 0.0:
        raise MetricError("true parameter is zero; relative error undefined")
    rre_x = relative_error(x, x_true)
    rre_y = relative_error(np.atleast_1d(np.asarray(y, dtype=float)), y_arr)
    s = float("nan")
    if image_side is not None:
        img = np.asarray(x, dtype=float).reshape(image_side, image_side, order="F")
        ref = np.asarray(x_true, dtype=float).reshape(image_side, image_side, order="F")
        s = ssim(img, ref)
    return Metrics(rre_x=rre_x, rre_y=rre_y, ssim=s)

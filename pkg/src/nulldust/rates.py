"""Log-log rate fitting for convergence tables."""

from dataclasses import dataclass

import numpy as np


@dataclass
class RateFit:
    xs: np.ndarray
    ys: np.ndarray
    slope: float
    intercept: float
    residual: float  # RMS of log-residuals about the fitted line


def fit_rate(xs, ys) -> RateFit:
    """Least-squares line through (log x, log y); slope is the observed rate.

    Requires at least 4 strictly positive points.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 4:
        raise ValueError(f"rate fit needs >= 4 points, got {len(xs)}")
    if np.any(xs <= 0) or np.any(ys < 0):
        raise ValueError("rate fit needs positive abscissae and nonnegative ordinates")
    ys = np.maximum(ys, np.finfo(float).tiny)  # zeros sit at the float floor
    lx, ly = np.log(xs), np.log(ys)
    a = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(a, ly, rcond=None)
    resid = float(np.sqrt(np.mean((ly - a @ coef) ** 2)))
    if not np.isfinite(coef[0]):
        raise ValueError("rate fit produced a non-finite slope")
    return RateFit(xs, ys, float(coef[0]), float(coef[1]), resid)


def observed_order(hs, errs) -> float:
    """Convenience: slope of err vs h (positive for a convergent method)."""
    return fit_rate(hs, errs).slope

"""Least-squares line fits used for exponent and decay-rate extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import FitUnstable


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    slope_stderr: float
    r_squared: float
    n: int


def linear_fit(x, y) -> LineFit:
    """Ordinary least squares ``y = slope * x + intercept``.

    Raises FitUnstable when the data cannot support a slope (fewer than three
    points, non-finite values, or zero variance in either coordinate).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3 or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitUnstable(f"need >= 3 finite points, got {x.size}")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise FitUnstable("degenerate data: zero variance, no trend to fit")
    res = stats.linregress(x, y)
    return LineFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        slope_stderr=float(res.stderr),
        r_squared=float(res.rvalue**2),
        n=int(x.size),
    )

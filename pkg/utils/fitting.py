"""
Ordinary least squares fits used by the scaling analyses (C6 versus nu,
tunneling suppression versus depth, Trotter error versus step).
"""
import logging

import numpy as np
import statsmodels.api as sm

from utils.errors import DomainError

logger = logging.getLogger(__name__)


def linear_fit(x, y):
    """
    Fit y = intercept + slope * x

    Non-finite samples are dropped before fitting.

    Args:
        x (array): Regressor
        y (array): Response

    Returns:
        dict: slope, intercept, r_squared, slope_stderr and the point count
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.isfinite(x) & np.isfinite(y)
    if mask.sum() < 3:
        raise DomainError("a fit needs at least three finite points", points=int(mask.sum()))

    model = sm.OLS(y[mask], sm.add_constant(x[mask], has_constant="add")).fit()
    intercept, slope = model.params
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "r_squared": float(model.rsquared),
        "slope_stderr": float(model.bse[1]),
        "points": int(mask.sum()),
    }


def loglog_fit(x, y):
    """
    Power-law fit |y| = A x^p on logarithmic axes

    Returns:
        dict: linear_fit result of log|y| against log x, slope = p
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = (x > 0) & (y > 0)
    return linear_fit(np.log(x[keep]), np.log(y[keep]))


def semilog_fit(x, y):
    """Exponential fit |y| = A exp(k x); slope = k"""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    keep = y > 0
    return linear_fit(x[keep], np.log(y[keep]))

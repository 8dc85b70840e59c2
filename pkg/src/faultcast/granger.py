"""Bivariate Granger causality via nested ordinary least squares.

Does the past of x help predict y beyond y's own past?  Fit y_t on an
intercept plus p lags of y (restricted), then add p lags of x (unrestricted),
and compare residual sums of squares with an F-test:

    F = ((RSS_r - RSS_u) / p) / (RSS_u / (W - 3p - 1))

where W is the series length; W - p usable rows minus 2p + 1 unrestricted
parameters leaves W - 3p - 1 denominator degrees of freedom.  The p-value is
the upper tail of the F distribution, evaluated through the regularized
incomplete beta function.

Rank-deficient regressions (constant series, collinear lags) are reported as
non-significant with the ``degenerate`` flag set rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special


@dataclass(frozen=True)
class GrangerConfig:
    """Lag order, significance level, and analysis window length."""

    lag: int = 3
    alpha: float = 0.05
    window: int = 40

    def __post_init__(self) -> None:
        if self.lag < 1:
            raise ValueError("lag must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.window < 2 * self.lag + 2:
            raise ValueError(f"window must be >= 2*lag + 2 = {2 * self.lag + 2}")


@dataclass(frozen=True)
class GrangerResult:
    f_stat: float
    p_value: float
    significant: bool
    degenerate: bool = False


_DEGENERATE = GrangerResult(f_stat=float("nan"), p_value=1.0, significant=False, degenerate=True)


def _lag_matrix(series: np.ndarray, lag: int) -> np.ndarray:
    """Columns [x_{t-1}, ..., x_{t-lag}] for t = lag..end."""
    return np.column_stack([series[lag - k : len(series) - k] for k in range(1, lag + 1)])


def _fit_rss(design: np.ndarray, target: np.ndarray) -> tuple[float, bool]:
    """Least-squares residual sum of squares and a full-rank flag."""
    beta, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    residual = target - design @ beta
    return float(residual @ residual), rank == design.shape[1]


def f_test_p_value(f_stat: float, df1: int, df2: int) -> float:
    """Upper-tail F probability via the regularized incomplete beta function."""
    if math.isinf(f_stat):
        return 0.0
    x = df2 / (df2 + df1 * f_stat)
    return float(special.betainc(df2 / 2.0, df1 / 2.0, x))


def granger_test(x: np.ndarray, y: np.ndarray, lag: int = 3, alpha: float = 0.05) -> GrangerResult:
    """Test whether x Granger-causes y at the given lag order."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise ValueError("x and y must be 1-D series of equal length")
    length = len(x)
    if length < 2 * lag + 2:
        raise ValueError(f"series too short: need at least {2 * lag + 2} samples, got {length}")
    df2 = length - 3 * lag - 1
    if df2 <= 0:
        # Too few rows to estimate the unrestricted model with positive
        # denominator degrees of freedom.
        return _DEGENERATE

    target = y[lag:]
    rows = len(target)
    intercept = np.ones((rows, 1))
    restricted = np.hstack([intercept, _lag_matrix(y, lag)])
    unrestricted = np.hstack([restricted, _lag_matrix(x, lag)])

    rss_r, full_rank_r = _fit_rss(restricted, target)
    rss_u, full_rank_u = _fit_rss(unrestricted, target)
    if not (full_rank_r and full_rank_u):
        return _DEGENERATE

    if rss_u <= 0.0:
        if rss_r <= 0.0:
            return _DEGENERATE
        f_stat = float("inf")
    else:
        f_stat = max(rss_r - rss_u, 0.0) / lag / (rss_u / df2)
    p_value = f_test_p_value(f_stat, lag, df2)
    return GrangerResult(f_stat=f_stat, p_value=p_value, significant=p_value <= alpha)

"""Scaling fits used to read growth laws off ``P2(N)`` series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize


@dataclass(frozen=True)
class PowerLawFit:
    a: float
    b: float
    r2: float
    b_err: float


def power_law_fit(n, p) -> PowerLawFit:
    """Least-squares fit of ``p = a n^b`` in linear space.

    Linear-space residuals weight the large-N points, where the growth law is
    decided; the log-log line only seeds the iteration.
    """
    n = np.asarray(n, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("power-law fit needs positive data")
    b0, la0 = np.polyfit(np.log(n), np.log(p), 1)
    scale = p.max()
    popt, pcov = optimize.curve_fit(lambda x, a, b: a * x**b, n, p / scale, p0=(np.exp(la0) / scale, b0),
                                    maxfev=10000)
    a, b = popt
    pred = a * n**b * scale
    ss_res = float(np.sum((p - pred) ** 2))
    ss_tot = float(np.sum((p - p.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(a * scale), float(b), r2, float(np.sqrt(pcov[1, 1])))


@dataclass(frozen=True)
class QuadraticTermTest:
    coefficients: np.ndarray  # per-series quadratic coefficient
    mean: float
    stderr: float

    @property
    def z(self) -> float:
        return self.mean / self.stderr if self.stderr > 0 else np.inf

    def consistent_with_zero(self, sigmas: float = 2.0) -> bool:
        return abs(self.mean) <= sigmas * self.stderr


def quadratic_coefficients(n, series) -> np.ndarray:
    """Coefficient ``c`` of ``p = a + b n + c n^2`` for each row of ``series``."""
    n = np.asarray(n, dtype=float)
    series = np.atleast_2d(np.asarray(series, dtype=float))
    return np.array([np.polyfit(n, row, 2)[0] for row in series])


def quadratic_term_test(n, series) -> QuadraticTermTest:
    """Is the ensemble quadratic term of ``P2(N)`` distinguishable from zero?

    Each seed's series is fitted separately; the spread of the per-seed
    coefficients gives the standard error of their mean.
    """
    c = quadratic_coefficients(n, series)
    se = float(c.std(ddof=1) / np.sqrt(c.size)) if c.size > 1 else np.inf
    return QuadraticTermTest(c, float(c.mean()), se)


def linear_vs_quadratic(n, mean_p) -> tuple[float, float]:
    """Residual sums of squares of ``a n`` and ``a n^2`` fits through the origin."""
    n = np.asarray(n, dtype=float)
    p = np.asarray(mean_p, dtype=float)
    out = []
    for x in (n, n * n):
        a = float(x @ p / (x @ x))
        out.append(float(np.sum((p - a * x) ** 2)))
    return out[0], out[1]

"""Scaling-function machinery: theoretical exponents, log-log fits, verdicts.

The scaling function tau(q) is the asymptotic exponent of E|Y(t)|^q in log t;
sigma(m) is the cumulant analogue. For long-range mixing with tail index
alpha and a centered non-Gaussian marginal, tau(q) = q - alpha for
q >= q_star(alpha), which makes tau(q)/q strictly increasing: intermittency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import CumulantTable
from .errors import ConfigurationError, DomainError

SLOPE_TOL = 0.05   # default slope tolerance, calibrated to quadrature accuracy
RATIO_TOL = 0.02   # default tolerance on tau(q)/q comparisons

MIN_FIT_POINTS = 5
MIN_FIT_DECADES = 2.0


def q_star(alpha: float) -> int:
    """Smallest even integer strictly greater than 2*alpha."""
    if alpha <= 0:
        raise ConfigurationError("alpha must be positive")
    return 2 * (math.floor(alpha) + 1)


def theoretical_tau(q: float, alpha: float) -> float | None:
    """q - alpha for q >= q_star(alpha); None below (outside theoretical guarantee)."""
    if q <= 0:
        raise ConfigurationError("q must be positive")
    if q < q_star(alpha):
        return None
    return q - alpha


@dataclass
class FitRow:
    exponent: float          # q or m
    estimate: float          # tau_hat or sigma_hat
    stderr: float
    r2: float
    t_min: float
    t_max: float
    n_points: int
    guaranteed: bool = True  # False when q < q_star: outside theoretical guarantee


@dataclass
class ScalingFit:
    kind: str                # "sigma" or "tau"
    rows: list[FitRow]

    @property
    def exponents(self):
        return [r.exponent for r in self.rows]

    @property
    def estimates(self):
        return [r.estimate for r in self.rows]


def _ols_loglog(ts: np.ndarray, values: np.ndarray) -> tuple[float, float, float]:
    """Slope, stderr and R^2 of log(values) against log(ts)."""
    x = np.log(ts)
    y = np.log(values)
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    stderr = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else 0.0
    return slope, stderr, r2


def _window_points(times: Sequence[float], values: Sequence[float],
                   window: tuple[float, float]):
    t_min, t_max = window
    if t_min <= 0 or t_max <= t_min:
        raise ConfigurationError("fit window must satisfy 0 < t_min < t_max")
    ts, vs = [], []
    for t, v in zip(times, values):
        if t_min <= t <= t_max:
            ts.append(t)
            vs.append(v)
    if len(ts) < MIN_FIT_POINTS:
        raise ConfigurationError(
            f"fit window holds {len(ts)} points; need at least {MIN_FIT_POINTS}")
    if math.log10(ts[-1] / ts[0]) < MIN_FIT_DECADES:
        raise ConfigurationError(
            f"fit window spans {math.log10(ts[-1] / ts[0]):.2f} decades; "
            f"need at least {MIN_FIT_DECADES}")
    return np.asarray(ts), np.asarray(vs)


def fit_sigma(table: CumulantTable, m: int, window: tuple[float, float]) -> FitRow:
    """OLS slope of log|kappa^(m)(t)| against log t."""
    if m not in table.values:
        raise ConfigurationError(f"table has no order m={m}")
    for t, v in zip(table.times, table.values[m]):
        if window[0] <= t <= window[1] and v == 0.0:
            raise DomainError(f"kappa^({m})({t}) is zero; sigma undefined in window")
    ts, vs = _window_points(table.times, table.values[m], window)
    slope, stderr, r2 = _ols_loglog(ts, np.abs(vs))
    return FitRow(exponent=float(m), estimate=slope, stderr=stderr, r2=r2,
                  t_min=float(ts[0]), t_max=float(ts[-1]), n_points=len(ts))


def fit_tau(times: Sequence[float], abs_moments: Sequence[float], q: float,
            window: tuple[float, float], guaranteed: bool = True) -> FitRow:
    """OLS slope of log E|Y(t)|^q against log t."""
    for t, v in zip(times, abs_moments):
        if window[0] <= t <= window[1] and v <= 0.0:
            raise DomainError(f"moment at t={t} is nonpositive; tau undefined")
    ts, vs = _window_points(times, abs_moments, window)
    slope, stderr, r2 = _ols_loglog(ts, np.asarray(vs))
    return FitRow(exponent=float(q), estimate=slope, stderr=stderr, r2=r2,
                  t_min=float(ts[0]), t_max=float(ts[-1]), n_points=len(ts),
                  guaranteed=guaranteed)


def intermittency_test(fit: ScalingFit, tol: float = RATIO_TOL) -> str:
    """Verdict from pairwise comparison of tau_hat(q)/q.

    "intermittent" when some pair p < r has tau(p)/p + tol < tau(r)/r,
    "not-intermittent" when all ratios agree within tol, else "inconclusive".
    """
    rows = sorted(fit.rows, key=lambda r: r.exponent)
    if len(rows) < 2:
        return "inconclusive"
    ratios = [r.estimate / r.exponent for r in rows]
    for i in range(len(ratios)):
        for j in range(i + 1, len(ratios)):
            if ratios[i] + tol < ratios[j]:
                return "intermittent"
    if max(ratios) - min(ratios) <= tol:
        return "not-intermittent"
    return "inconclusive"


def convexity_check(fit: ScalingFit, tol: float = RATIO_TOL) -> bool:
    """Second differences of tau_hat nonnegative and tau_hat(q)/q nondecreasing,
    both within tol."""
    rows = sorted(fit.rows, key=lambda r: r.exponent)
    if len(rows) < 3:
        raise ConfigurationError("convexity check needs at least 3 exponents")
    qs = [r.exponent for r in rows]
    taus = [r.estimate for r in rows]
    for i in range(1, len(rows) - 1):
        left = (taus[i] - taus[i - 1]) / (qs[i] - qs[i - 1])
        right = (taus[i + 1] - taus[i]) / (qs[i + 1] - qs[i])
        if right - left < -tol:
            return False
    ratios = [tau / q for q, tau in zip(qs, taus)]
    for a, b in zip(ratios[:-1], ratios[1:]):
        if b < a - tol:
            return False
    return True


def default_t_grid(t_min: float = 1e3, t_max: float = 1e6, count: int = 25) -> list[float]:
    """Log-spaced fit grid; transients below t ~ 100 contaminate small-alpha slopes."""
    if count < MIN_FIT_POINTS or t_min <= 0 or t_max <= t_min:
        raise ConfigurationError("invalid t grid")
    return list(np.logspace(math.log10(t_min), math.log10(t_max), count))

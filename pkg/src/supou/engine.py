"""Time-indexed cumulants of the integrated and partial-sum aggregates.

The m-th cumulant of the integrated process is kappa_m * m * I_{m-1}(t) and
of the partial-sum process kappa_m * J_{m-1}(t), where I and J are integrals
against the mixing measure. Each factor has two independently evaluated
forms (direct/kernel for I, expanded/summed for J) used to cross-validate
the numerics.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .errors import ConfigurationError
from .marginal import MarginalLaw
from .mixing import MixingMeasure


class AggregateKind(enum.Enum):
    INTEGRATED = "integrated"
    PARTIAL_SUM = "partial_sum"


# -- stable scalar primitives -------------------------------------------------

def eps_ab(a: float, b: float) -> float:
    """(1 - exp(-a*b)) / b, continuous at b = 0."""
    if b == 0.0:
        return float(a)
    return -math.expm1(-a * b) / b


def eta_ab(a: float, b: float) -> float:
    """exp(-b) * (1 - exp(-a*b)) / (1 - exp(-b)), continuous at b = 0."""
    if b == 0.0:
        return float(a)
    return math.exp(-b) * math.expm1(-a * b) / math.expm1(-b)


def a_coeff(m: int) -> Fraction:
    """a_{m-1} = sum_{k=1}^{m-1} (-1)^k C(m-1, k) / k (empty sum for m = 1)."""
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    return sum((Fraction((-1) ** k * math.comb(m - 1, k), k)
                for k in range(1, m)), Fraction(0))


# -- integrated-process factor I_{m-1} ----------------------------------------
#
# Both forms reduce to evaluating B(y) = g(y) / y^m with y = xi*t, where
# g(y) = int_0^y (1 - e^-w)^(m-1) dw equals the bracket of the direct formula.
# Working with B instead of g keeps xi^-m from overflowing near zero.

_TAYLOR_SWITCH = 2.0  # below this the direct bracket cancels catastrophically
_TAYLOR_TERMS = 120


@lru_cache(maxsize=None)
def _taylor_coeffs(m: int) -> tuple[float, ...]:
    """Coefficients c_j of B(y) = sum_j c_j y^j from the exact expansion
    g(y) = sum_n (-1)^n S(n) / (n! (n+1)) y^(n+1), S(n) = sum_k (-1)^k C(m-1,k) k^n.
    """
    coeffs = []
    fact = math.factorial(m - 1)
    for n in range(m - 1, m - 1 + _TAYLOR_TERMS):
        s = sum((-1) ** k * math.comb(m - 1, k) * k ** n for k in range(m))
        c = Fraction((-1) ** n * s, math.factorial(n) * (n + 1))
        coeffs.append(float(c))
    return tuple(coeffs)


def _bracket_direct(y: float, m: int) -> float:
    """B(y) for the direct formula: (a_{m-1} + y + sum_k +-e^{-ky}/k) / y^m,
    switching to the exact Taylor expansion where the sum cancels badly.
    """
    if y < _TAYLOR_SWITCH:
        total = 0.0
        yp = 1.0
        for j, c in enumerate(_taylor_coeffs(m)):
            term = c * yp
            total += term
            yp *= y
            if j > 2 * m and abs(term) < 1e-18 * abs(total):
                break
        return total
    acc = float(a_coeff(m)) + y
    for k in range(1, m):
        acc += (-1) ** (k - 1) * math.comb(m - 1, k) * math.exp(-k * y) / k
    return acc / y ** m


@lru_cache(maxsize=None)
def _gl_nodes(n: int = 96):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0  # mapped to [0, 1]


_KERNEL_SPLIT = 40.0  # beyond this (1 - e^-w)^(m-1) is 1 up to ~1e-18 terms


def _bracket_kernel(y: float, m: int) -> float:
    """B(y) by Gauss-Legendre quadrature of the positive inner kernel,
    independent of the series/closed-form route.
    """
    nodes, weights = _gl_nodes()
    if y <= _KERNEL_SPLIT:
        # int_0^y (1-e^-w)^(m-1) dw / y^m = int_0^1 ((1-e^(-y v))/y)^(m-1) dv
        vals = (-np.expm1(-y * nodes) / y) ** (m - 1)
        return float(np.dot(weights, vals))
    g = float(np.dot(weights, (-np.expm1(-_KERNEL_SPLIT * nodes)) ** (m - 1)) * _KERNEL_SPLIT)
    g += y - _KERNEL_SPLIT
    for k in range(1, m):
        g += math.comb(m - 1, k) * (-1) ** k * (
            math.exp(-_KERNEL_SPLIT * k) - math.exp(-k * y)) / k
    return g / y ** m


def integrated_factor(mix: MixingMeasure, m: int, t: float,
                      form: str = "direct") -> float:
    """I_{m-1}(t); I_0(t) = t exactly."""
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    if t <= 0:
        raise ConfigurationError("t must be positive")
    if m == 1:
        return float(t)
    if form == "direct":
        bracket = _bracket_direct
    elif form == "kernel":
        bracket = _bracket_kernel
    else:
        raise ConfigurationError(f"unknown integrated form {form!r}")
    tm = float(t) ** m
    return mix.expect(lambda xi: tm * bracket(xi * t, m),
                      breakpoints=(1.0 / t,))


# -- partial-sum factor J_{m-1} ------------------------------------------------

_MP_SWITCH = 2.0       # below n*xi = 2 the expanded bracket needs high precision
_SUMMED_MAX_N = 100_000


def _j_integrand_expanded(xi: float, m: int, n: int) -> float:
    if n * xi < _MP_SWITCH:
        digits = 28 + int(m * max(0.0, -math.log10(max(n * xi, 1e-300))))
        with mpmath.workdps(min(digits, 160)):
            x = mpmath.mpf(xi)
            one_minus = -mpmath.expm1(-x)
            acc = mpmath.mpf(n - 1)
            for j in range(1, m + 1):
                acc += (math.comb(m, j) * (-1) ** j * mpmath.exp(-j * x)
                        * mpmath.expm1(-j * (n - 1) * x) / mpmath.expm1(-j * x))
            bracket = -mpmath.expm1(-m * x) * acc + (-mpmath.expm1(-n * x)) ** m
            return float(bracket / one_minus ** m)
    one_minus = -math.expm1(-xi)
    acc = float(n - 1)
    for j in range(1, m + 1):
        num = math.expm1(-j * (n - 1) * xi)
        den = math.expm1(-j * xi)
        acc += math.comb(m, j) * (-1) ** j * math.exp(-j * xi) * (num / den)
    bracket = -math.expm1(-m * xi) * acc + (-math.expm1(-n * xi)) ** m
    return bracket / one_minus ** m


def _j_integrand_summed(xi: float, m: int, n: int) -> float:
    k = np.arange(1, n, dtype=float)
    body = float(np.sum((-np.expm1(-k * xi)) ** m))
    one_minus = -math.expm1(-xi)
    return (-math.expm1(-m * xi) * body + (-math.expm1(-n * xi)) ** m) / one_minus ** m


def partial_sum_factor(mix: MixingMeasure, m: int, t: float,
                       form: str = "expanded") -> float:
    """J_{m-1}(t); depends on t only through floor(t), J_0(t) = floor(t)."""
    if m < 1:
        raise ConfigurationError("m must be >= 1")
    n = math.floor(t)
    if n < 1:
        raise ConfigurationError("partial-sum factor needs floor(t) >= 1")
    if m == 1:
        return float(n)
    if form == "expanded":
        fn = lambda xi: _j_integrand_expanded(xi, m, n)
    elif form == "summed":
        if n > _SUMMED_MAX_N:
            raise ConfigurationError(
                f"summed form costs O(floor(t)) per quadrature node; "
                f"floor(t)={n} exceeds {_SUMMED_MAX_N}")
        fn = lambda xi: _j_integrand_summed(xi, m, n)
    else:
        raise ConfigurationError(f"unknown partial-sum form {form!r}")
    return mix.expect(fn, breakpoints=(1.0 / n, 1.0))


# -- aggregate cumulants --------------------------------------------------------

_DEFAULT_FORMS = {AggregateKind.INTEGRATED: "direct",
                  AggregateKind.PARTIAL_SUM: "expanded"}


def aggregate_factor(mix: MixingMeasure, kind: AggregateKind, m: int, t: float,
                     form: str | None = None) -> float:
    form = form or _DEFAULT_FORMS[kind]
    if kind is AggregateKind.INTEGRATED:
        return integrated_factor(mix, m, t, form=form)
    return partial_sum_factor(mix, m, t, form=form)


def aggregate_cumulant(mix: MixingMeasure, law: MarginalLaw, kind: AggregateKind,
                       m: int, t: float, form: str | None = None) -> float:
    """kappa_m * m * I_{m-1}(t) (integrated) or kappa_m * J_{m-1}(t) (partial sum)."""
    kap = law.cumulant(m)
    if kap == 0.0:
        return 0.0
    factor = aggregate_factor(mix, kind, m, t, form=form)
    if kind is AggregateKind.INTEGRATED:
        return kap * m * factor
    return kap * factor


@dataclass
class CumulantTable:
    """kappa^(m)(t) and its mixing factor on an (order, time) grid."""

    kind: AggregateKind
    orders: list[int]
    times: list[float]
    factors: dict[int, list[float]]
    values: dict[int, list[float]]
    method: str = "analytic"
    errors: dict[int, list[float]] | None = None  # only for empirical tables

    def value(self, m: int, t: float) -> float:
        return self.values[m][self.times.index(t)]

    def cumulant_series(self, t_index: int, max_order: int) -> list[float]:
        """kappa_1..kappa_max_order at one time; orders must be contiguous from 1."""
        need = list(range(1, max_order + 1))
        if any(m not in self.values for m in need):
            raise ConfigurationError(
                f"table lacks contiguous orders 1..{max_order} required for moment conversion")
        return [self.values[m][t_index] for m in need]

    def rows(self):
        for m in self.orders:
            for i, t in enumerate(self.times):
                yield {"kind": self.kind.value, "m": m, "t": t,
                       "factor": self.factors[m][i],
                       "cumulant": self.values[m][i],
                       "method": self.method}


def cumulant_table(mix: MixingMeasure, law: MarginalLaw, kind: AggregateKind,
                   orders: list[int], t_grid: list[float],
                   form: str | None = None, threads: int = 1) -> CumulantTable:
    if not orders or not t_grid:
        raise ConfigurationError("orders and t_grid must be nonempty")
    if sorted(orders) != list(orders) or sorted(t_grid) != list(t_grid):
        raise ConfigurationError("orders and t_grid must be sorted ascending")

    cells = [(m, t) for m in orders for t in t_grid]

    def one(cell):
        m, t = cell
        factor = aggregate_factor(mix, kind, m, t, form=form)
        kap = law.cumulant(m)
        value = kap * m * factor if kind is AggregateKind.INTEGRATED else kap * factor
        return factor, value

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, cells))
    else:
        results = [one(c) for c in cells]

    factors = {m: [] for m in orders}
    values = {m: [] for m in orders}
    for (m, _), (factor, value) in zip(cells, results):
        factors[m].append(factor)
        values[m].append(value)
    return CumulantTable(kind=kind, orders=list(orders), times=[float(t) for t in t_grid],
                         factors=factors, values=values, method="analytic")

"""Partial Bell polynomials and the cumulant/moment conversion.

The moment of order m of a random variable is the sum over k of the partial
Bell polynomials B_{m,k} evaluated at the cumulant sequence. The inverse map
is the standard triangular recursion. Integer inputs stay exact (Python ints).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .errors import ConfigurationError


class _ExactFloat(float):
    """A float that remembers the exact rational it was rounded from.

    Conversion outputs are of this type, so chained conversions (roundtrips
    in particular) run in exact arithmetic throughout instead of compounding
    a rounding at each interface; high-order moments easily reach 1e7 and a
    single double rounding there already costs ~1e-9 absolute in the
    recovered cumulants.
    """

    __slots__ = ("exact",)

    def __new__(cls, fr: Fraction):
        obj = super().__new__(cls, float(fr))
        obj.exact = fr
        return obj


def _exact(x):
    # floats are exact binary rationals, so the conversions below can run in
    # exact arithmetic and only round once, on output
    if isinstance(x, _ExactFloat):
        return x.exact
    return Fraction(x) if isinstance(x, float) else x


def _out(v):
    return _ExactFloat(v) if isinstance(v, Fraction) else v


def partial_bell(m: int, k: int, x: Sequence[float]) -> float:
    """B_{m,k}(x_1, ..., x_{m-k+1}) via the recurrence
    B_{m,k} = sum_j C(m-1, j-1) x_j B_{m-j, k-1}.
    """
    if not 1 <= k <= m:
        raise ConfigurationError(f"need 1 <= k <= m, got m={m}, k={k}")
    if len(x) != m - k + 1:
        raise ConfigurationError(
            f"expected {m - k + 1} arguments for B_{{{m},{k}}}, got {len(x)}")
    return _bell_full(m, k, list(x) + [0] * (k - 1))


def _bell_full(m: int, k: int, x: Sequence[float]) -> float:
    # x has length >= m - k + 1; cache over (m, k) for the triangular recursion
    table = {(0, 0): 1}

    def rec(mm, kk):
        if (mm, kk) in table:
            return table[(mm, kk)]
        if kk == 0 or kk > mm:
            val = 0
        else:
            val = sum(math.comb(mm - 1, j - 1) * x[j - 1] * rec(mm - j, kk - 1)
                      for j in range(1, mm - kk + 2))
        table[(mm, kk)] = val
        return val

    return rec(m, k)


def moments_from_cumulants(kappa: Sequence[float]) -> list[float]:
    """Raw moments mu'_1..mu'_m from cumulants kappa_1..kappa_m,
    mu'_n = sum_k B_{n,k}(kappa_1, ..., kappa_{n-k+1}).
    """
    m = len(kappa)
    if m < 1:
        raise ConfigurationError("need at least one cumulant")
    x = [_exact(v) for v in kappa]
    out = []
    for n in range(1, m + 1):
        out.append(_out(sum(_bell_full(n, k, x) for k in range(1, n + 1))))
    return out


def cumulants_from_moments(mu: Sequence[float]) -> list[float]:
    """Inverse of moments_from_cumulants:
    kappa_n = mu'_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k mu'_{n-k}.
    """
    m = len(mu)
    if m < 1:
        raise ConfigurationError("need at least one moment")
    x = [_exact(v) for v in mu]
    kappa = []
    for n in range(1, m + 1):
        val = x[n - 1]
        for k in range(1, n):
            val -= math.comb(n - 1, k - 1) * kappa[k - 1] * x[n - k - 1]
        kappa.append(val)
    return [_out(v) for v in kappa]

"""Mixing measures on (0, infinity) driving the dependence structure.

A mixing measure pi is a probability measure on the positive half line.
Its Laplace transform is the correlation function of the stationary
superposition, and the amount of mass near zero (the tail index alpha)
controls how fast cumulants of the aggregated process grow.

All measures are immutable; every operation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import ConfigurationError, QuadratureError, UnsupportedOperationError

# Quadrature defaults: integrals of the form int f(xi) pi(dxi) dominate every
# long-range computation, so the tolerances here are the tightest in the package.
QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-8
QUAD_LIMIT = 200

# Truncation rule for countable discrete measures.
DISCRETE_TAIL_MASS = 1e-10


def _integrate_segments(fn: Callable[[float], float],
                        breakpoints: Sequence[float] = (),
                        abs_tol: float = QUAD_ABS_TOL,
                        rel_tol: float = QUAD_REL_TOL) -> float:
    """Adaptive quadrature of fn over (0, inf), split at interior breakpoints.

    Splitting at known feature scales (e.g. 1/t for the cumulant factors)
    keeps the adaptive subdivision from missing narrow features near zero.
    """
    pts = sorted({float(b) for b in breakpoints if b and 0.0 < b < math.inf})
    edges = [0.0, *pts, math.inf]
    total = 0.0
    worst = None
    worst_err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        # full_output suppresses IntegrationWarning (which would be emitted
        # via thread-unsafe global filter state); the error estimate is
        # checked explicitly below instead
        out = integrate.quad(fn, a, b, epsabs=abs_tol, epsrel=rel_tol,
                             limit=QUAD_LIMIT, full_output=1)
        val, err = out[0], out[1]
        total += val
        if err > worst_err:
            worst_err, worst = err, (a, b)
    if worst_err > max(abs_tol, abs(total)) * 1e3:
        raise QuadratureError(
            f"quadrature error estimate {worst_err:.3e} too large on {worst}",
            worst_interval=worst)
    return total


def mittag_leffler(alpha: float, z: float) -> float:
    """One-parameter Mittag-Leffler function E_alpha(z) for real z <= 0.

    Power series in high precision for moderate |z| (the series alternates
    badly for negative arguments), asymptotic expansion for large -z.
    """
    if not 0.0 < alpha < 2.0:
        raise ConfigurationError("mittag_leffler requires alpha in (0, 2)")
    if z == 0.0:
        return 1.0
    if z > 0.0:
        raise ConfigurationError("mittag_leffler implemented for z <= 0 only")
    x = -z
    if x ** (1.0 / alpha) < 30.0:
        # Series with precision scaled to the worst-case cancellation.
        extra = int(0.5 * x ** (1.0 / alpha)) + 10
        with mpmath.workdps(15 + extra):
            val = mpmath.nsum(lambda k: mpmath.mpf(z) ** k / mpmath.gamma(alpha * k + 1),
                              [0, mpmath.inf])
            return float(val)
    # Asymptotic expansion E_alpha(z) ~ -sum_{j>=1} z^{-j} / Gamma(1 - alpha j),
    # truncated at the smallest term. Terms vanish exactly at the poles of
    # Gamma(1 - alpha j); those do not count towards the smallest-term rule.
    total = 0.0
    prev = math.inf
    for j in range(1, 200):
        g = special.rgamma(1.0 - alpha * j)
        term = -((-1.0 / x) ** j) * g
        if term == 0.0:
            continue
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
    return total


def mittag_leffler_correlation(alpha: float, gamma: float, tau: float) -> float:
    """Reference correlation curve r(tau) = E_alpha(-tau^gamma).

    The measure realizing this correlation is not constructed here; the curve
    is exposed for validating long-range behaviour (r ~ tau^-gamma / Gamma(1-alpha)).
    """
    if tau < 0:
        raise ConfigurationError("tau must be nonnegative")
    if not 0.0 < gamma < 1.0 or not 0.0 < alpha < 1.0:
        raise ConfigurationError("reference curve needs alpha, gamma in (0, 1)")
    if tau == 0.0:
        return 1.0
    return mittag_leffler(alpha, -(tau ** gamma))


class MixingMeasure:
    """Base class: probability measure on (0, inf).

    tail_index is alpha in pi((0, x]) ~ tail_scale * x^alpha as x -> 0
    (math.inf when the mass stays away from zero).
    """

    tail_index: float = math.inf
    tail_scale: float | None = None

    # -- integration ---------------------------------------------------------

    def expect(self, fn: Callable[[float], float], breakpoints: Sequence[float] = ()) -> float:
        """Integral of fn against the measure."""
        raise NotImplementedError

    # -- operations ----------------------------------------------------------

    def correlation(self, tau: float, method: str = "auto") -> float:
        """Laplace transform r(tau) = int exp(-tau xi) pi(dxi)."""
        if tau < 0:
            raise ConfigurationError("tau must be nonnegative")
        if method == "closed":
            raise UnsupportedOperationError(f"{type(self).__name__} has no closed-form correlation")
        return self.expect(lambda xi: math.exp(-tau * xi), breakpoints=(1.0 / tau if tau > 0 else None,))

    def cdf_near_zero(self, x: float) -> float:
        """pi((0, x])."""
        raise NotImplementedError

    def inverse_moment_integral(self, power: int, lower: float = 0.0) -> float:
        """int_lower^inf xi^-power pi(dxi); math.inf when divergent at zero."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int | None = None):
        raise NotImplementedError

    def _validate_common(self):
        if not self.tail_index > 0:
            raise ConfigurationError("tail index must be positive")


@dataclass(frozen=True)
class Degenerate(MixingMeasure):
    """Point mass at a single rate: the plain OU case."""

    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ConfigurationError("Degenerate rate must be positive")

    def expect(self, fn, breakpoints=()):
        return fn(self.rate)

    def correlation(self, tau, method="auto"):
        if tau < 0:
            raise ConfigurationError("tau must be nonnegative")
        return math.exp(-self.rate * tau)

    def cdf_near_zero(self, x):
        if x <= 0:
            raise ConfigurationError("x must be positive")
        return 1.0 if x >= self.rate else 0.0

    def inverse_moment_integral(self, power, lower=0.0):
        if lower < 0:
            raise ConfigurationError("lower must be nonnegative")
        return self.rate ** (-power) if self.rate >= lower else 0.0

    def sample(self, rng, size=None):
        if size is None:
            return self.rate
        return np.full(size, self.rate)


@dataclass(frozen=True)
class Discrete(MixingMeasure):
    """Finitely many atoms (possibly a truncated countable family).

    Weights are renormalized after truncation; the discarded mass must be
    below DISCRETE_TAIL_MASS (enforced by from_rule).
    """

    rates: tuple[float, ...]
    weights: tuple[float, ...]
    tail_index: float = math.inf
    tail_scale: float | None = None

    def __post_init__(self):
        if len(self.rates) != len(self.weights) or not self.rates:
            raise ConfigurationError("rates and weights must be nonempty and equal length")
        if any(r <= 0 for r in self.rates):
            raise ConfigurationError("all rates must be positive")
        if any(w < 0 for w in self.weights):
            raise ConfigurationError("weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ConfigurationError("weights must sum to 1 within 1e-12")
        self._validate_common()

    @classmethod
    def from_rule(cls, rate_fn: Callable[[int], float], weight_fn: Callable[[int], float],
                  max_atoms: int = 10_000, tail_index: float = math.inf,
                  tail_scale: float | None = None) -> "Discrete":
        """Truncate a countable atom family when the remaining mass is negligible.

        weight_fn(k) for k = 1, 2, ... must sum to at most 1; truncation stops
        once the residual 1 - sum(weights) drops below DISCRETE_TAIL_MASS.
        """
        rates, weights = [], []
        acc = 0.0
        for k in range(1, max_atoms + 1):
            w = weight_fn(k)
            rates.append(rate_fn(k))
            weights.append(w)
            acc += w
            if 1.0 - acc < DISCRETE_TAIL_MASS:
                break
        else:
            raise ConfigurationError(
                f"tail mass {1.0 - acc:.3e} still above {DISCRETE_TAIL_MASS} "
                f"after {max_atoms} atoms")
        total = sum(weights)
        return cls(tuple(rates), tuple(w / total for w in weights),
                   tail_index=tail_index, tail_scale=tail_scale)

    def expect(self, fn, breakpoints=()):
        return math.fsum(w * fn(r) for r, w in zip(self.rates, self.weights))

    def correlation(self, tau, method="auto"):
        if tau < 0:
            raise ConfigurationError("tau must be nonnegative")
        return math.fsum(w * math.exp(-r * tau) for r, w in zip(self.rates, self.weights))

    def cdf_near_zero(self, x):
        if x <= 0:
            raise ConfigurationError("x must be positive")
        return math.fsum(w for r, w in zip(self.rates, self.weights) if r <= x)

    def inverse_moment_integral(self, power, lower=0.0):
        if lower < 0:
            raise ConfigurationError("lower must be nonnegative")
        return math.fsum(w * r ** (-power)
                         for r, w in zip(self.rates, self.weights) if r >= lower)

    def sample(self, rng, size=None):
        idx = rng.choice(len(self.rates), size=size, p=np.asarray(self.weights))
        return np.asarray(self.rates)[idx]


def discrete_power_law(lam: float, alpha: float, n_atoms: int | None = None) -> Discrete:
    """Superposition atoms lambda_k = lam / k with p_k proportional to k^-(1+alpha).

    This is the discrete long-range-dependent family; pi((0,x]) varies
    regularly at zero with index alpha. The countable family is truncated at
    n_atoms and renormalized: its tail mass decays only like n^-alpha, so the
    generic negligible-tail truncation rule is out of reach for alpha <= 1.
    """
    if lam <= 0 or alpha <= 0:
        raise ConfigurationError("lam and alpha must be positive")
    if n_atoms is None:
        n_atoms = 10_000
    if n_atoms < 1:
        raise ConfigurationError("n_atoms must be >= 1")
    ks = np.arange(1, n_atoms + 1, dtype=float)
    p = ks ** (-(1.0 + alpha))
    p /= p.sum()
    return Discrete(tuple(lam / ks), tuple(p), tail_index=alpha)


@dataclass(frozen=True)
class GammaMixing(MixingMeasure):
    """Gamma(alpha, 1) mixing: r(tau) = (1 + tau)^-alpha exactly."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigurationError("GammaMixing alpha must be positive")

    @property
    def tail_index(self):  # type: ignore[override]
        return self.alpha

    @property
    def tail_scale(self):  # type: ignore[override]
        return 1.0 / special.gamma(self.alpha + 1.0)

    def density(self, xi: float) -> float:
        if xi <= 0:
            return 0.0
        return xi ** (self.alpha - 1.0) * math.exp(-xi) / special.gamma(self.alpha)

    def expect(self, fn, breakpoints=()):
        return _integrate_segments(lambda xi: fn(xi) * self.density(xi),
                                   breakpoints=(*breakpoints, 1.0))

    def correlation(self, tau, method="auto"):
        if tau < 0:
            raise ConfigurationError("tau must be nonnegative")
        if method == "quadrature":
            return MixingMeasure.correlation(self, tau)
        return (1.0 + tau) ** (-self.alpha)

    def cdf_near_zero(self, x):
        if x <= 0:
            raise ConfigurationError("x must be positive")
        return float(special.gammainc(self.alpha, x))

    def inverse_moment_integral(self, power, lower=0.0):
        if lower < 0:
            raise ConfigurationError("lower must be nonnegative")
        a = self.alpha - power
        if lower == 0.0:
            if a <= 0:
                return math.inf
            return float(special.gamma(a) / special.gamma(self.alpha))
        # Upper incomplete gamma with possibly nonpositive parameter.
        val = mpmath.gammainc(a, lower, mpmath.inf)
        return float(val / mpmath.gamma(self.alpha))

    def sample(self, rng, size=None):
        return rng.gamma(self.alpha, 1.0, size=size)


@dataclass(frozen=True)
class MittagLefflerMixing(MixingMeasure):
    """Mittag-Leffler distribution: Laplace transform (1 + tau^alpha)^-1.

    CDF is 1 - E_alpha(-x^alpha); the tail at infinity is heavy, so only
    correlation, CDF and the inverse-moment style integrals used by the
    cumulant factors are supported. Sampling is rejected.
    """

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ConfigurationError("MittagLefflerMixing alpha must be in (0, 2)")

    @property
    def tail_index(self):  # type: ignore[override]
        return self.alpha

    @property
    def tail_scale(self):  # type: ignore[override]
        return 1.0 / special.gamma(self.alpha + 1.0)

    def density(self, xi: float) -> float:
        # d/dx [1 - E_a(-x^a)] = a x^(a-1) E_a'(-x^a)
        if xi <= 0:
            return 0.0
        a = self.alpha
        x = xi ** a
        if x ** (1.0 / a) < 30.0:
            extra = int(0.5 * x ** (1.0 / a)) + 10
            with mpmath.workdps(15 + extra):
                d = mpmath.nsum(
                    lambda k: k * mpmath.mpf(-x) ** (k - 1) / mpmath.gamma(a * k + 1),
                    [1, mpmath.inf])
                return float(a * xi ** (a - 1.0) * d)
        # derivative of the asymptotic expansion of E_a at -inf
        total = 0.0
        prev = math.inf
        for j in range(1, 60):
            term = -j * ((-1.0) ** j) * x ** (-j - 1) * special.rgamma(1.0 - a * j)
            if abs(term) > prev:
                break
            total += term
            prev = abs(term)
        return a * xi ** (a - 1.0) * total

    def expect(self, fn, breakpoints=()):
        return _integrate_segments(lambda xi: fn(xi) * self.density(xi),
                                   breakpoints=(*breakpoints, 1.0))

    def correlation(self, tau, method="auto"):
        if tau < 0:
            raise ConfigurationError("tau must be nonnegative")
        if method == "quadrature":
            return MixingMeasure.correlation(self, tau)
        return 1.0 / (1.0 + tau ** self.alpha)

    def cdf_near_zero(self, x):
        if x <= 0:
            raise ConfigurationError("x must be positive")
        return 1.0 - mittag_leffler(self.alpha, -(x ** self.alpha))

    def inverse_moment_integral(self, power, lower=0.0):
        if lower < 0:
            raise ConfigurationError("lower must be nonnegative")
        if lower == 0.0 and power >= self.alpha:
            return math.inf
        return _integrate_segments(lambda xi: xi ** (-power) * self.density(xi),
                                   breakpoints=(max(lower, 1e-300), 1.0)) if lower == 0.0 else \
            _integrate_segments(lambda xi: (xi ** (-power) * self.density(xi)) if xi >= lower else 0.0,
                                breakpoints=(lower, max(1.0, lower)))

    def sample(self, rng, size=None):
        raise UnsupportedOperationError(
            "sampling from the Mittag-Leffler mixing distribution is not supported; "
            "use it for correlation and cumulant-factor computations only")


@dataclass(frozen=True)
class DensityMixing(MixingMeasure):
    """User-supplied density on (0, inf) with declared regular variation at 0."""

    density: Callable[[float], float] = field(compare=False)
    tail_index: float = 1.0
    tail_scale: float | None = None

    def __post_init__(self):
        self._validate_common()
        mass = _integrate_segments(self.density, breakpoints=(1.0,))
        if abs(mass - 1.0) > 1e-8:
            raise ConfigurationError(f"density mass {mass!r} differs from 1 beyond 1e-8")

    def expect(self, fn, breakpoints=()):
        return _integrate_segments(lambda xi: fn(xi) * self.density(xi),
                                   breakpoints=(*breakpoints, 1.0))

    def cdf_near_zero(self, x):
        if x <= 0:
            raise ConfigurationError("x must be positive")
        val, _ = integrate.quad(self.density, 0.0, x, epsabs=QUAD_ABS_TOL,
                                epsrel=QUAD_REL_TOL, limit=QUAD_LIMIT)
        return val

    def inverse_moment_integral(self, power, lower=0.0):
        if lower < 0:
            raise ConfigurationError("lower must be nonnegative")
        if lower == 0.0 and power >= self.tail_index:
            return math.inf
        fn = lambda xi: xi ** (-power) * self.density(xi) if xi >= lower else 0.0
        return _integrate_segments(fn, breakpoints=(lower, max(1.0, lower)))

    def sample(self, rng, size=None):
        raise UnsupportedOperationError("sampling from a generic density mixing is not supported")

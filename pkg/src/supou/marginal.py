"""Selfdecomposable marginal laws: CGFs, exact cumulants, BDLP correspondence.

Every law exposes the real-argument cumulant generating function
K(u) = log E exp(uX), its derivative, exact cumulants of any order, and the
background-driving-process CGF u * K'(u). The K values are only defined for
|u| inside the radius of analyticity.

A `centered` flag shifts the law so that the first cumulant vanishes, which
is the normalization the intermittency results assume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError

_BDLP_CUTOFF = 60.0  # exp(-60) ~ 9e-27: integrand tail negligible at any tol


class MarginalLaw:
    """Base class for stationary marginal laws with analytic CGF."""

    centered: bool = False

    @property
    def radius_of_analyticity(self) -> float:
        raise NotImplementedError

    def _mean(self) -> float:
        """Uncentered first cumulant."""
        raise NotImplementedError

    def _cgf_raw(self, u: float) -> float:
        raise NotImplementedError

    def _cgf_prime_raw(self, u: float) -> float:
        raise NotImplementedError

    def _cumulant_raw(self, m: int) -> float:
        raise NotImplementedError

    def _check_u(self, u: float):
        if abs(u) >= self.radius_of_analyticity:
            raise DomainError(
                f"u={u} outside the analyticity radius {self.radius_of_analyticity}")

    def cgf(self, u: float) -> float:
        """K(u) = log E exp(uX)."""
        self._check_u(u)
        val = self._cgf_raw(u)
        if self.centered:
            val -= self._mean() * u
        return val

    def cgf_prime(self, u: float) -> float:
        self._check_u(u)
        val = self._cgf_prime_raw(u)
        if self.centered:
            val -= self._mean()
        return val

    def cumulant(self, m: int) -> float:
        """m-th cumulant; exact closed forms, no finite differencing."""
        if m < 1:
            raise ConfigurationError("cumulant order must be >= 1")
        if m == 1:
            return 0.0 if self.centered else self._mean()
        return self._cumulant_raw(m)

    def bdlp_cgf(self, u: float) -> float:
        """CGF of the driving process at unit time: u * K'(u)."""
        return u * self.cgf_prime(u)

    def verify_bdlp_integral(self, u: float, tol: float = 1e-8) -> bool:
        """Check K(u) = int_0^inf bdlp_cgf(exp(-s) u) ds numerically within tol."""
        self._check_u(u)
        if u == 0.0:
            return True
        val, err = integrate.quad(lambda s: self.bdlp_cgf(math.exp(-s) * u),
                                  0.0, _BDLP_CUTOFF, epsabs=tol / 4.0,
                                  epsrel=1e-12, limit=200)
        if err > tol / 2.0:
            raise ConfigurationError(f"quadrature did not converge (err={err:.2e})")
        return abs(val - self.cgf(u)) <= tol


@dataclass(frozen=True)
class Gaussian(MarginalLaw):
    """Zero-mean Gaussian; the non-intermittent reference marginal."""

    variance: float
    centered: bool = False

    def __post_init__(self):
        if self.variance <= 0:
            raise ConfigurationError("variance must be positive")

    @property
    def radius_of_analyticity(self):
        return math.inf

    def _mean(self):
        return 0.0

    def _cgf_raw(self, u):
        return 0.5 * self.variance * u * u

    def _cgf_prime_raw(self, u):
        return self.variance * u

    def _cumulant_raw(self, m):
        return self.variance if m == 2 else 0.0


@dataclass(frozen=True)
class GammaLaw(MarginalLaw):
    """Gamma(shape, rate): K(u) = -shape*log(1 - u/rate), kappa_m = (m-1)! shape / rate^m."""

    shape: float
    rate: float
    centered: bool = False

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ConfigurationError("shape and rate must be positive")

    @property
    def radius_of_analyticity(self):
        return self.rate

    def _mean(self):
        return self.shape / self.rate

    def _cgf_raw(self, u):
        return -self.shape * math.log1p(-u / self.rate)

    def _cgf_prime_raw(self, u):
        return self.shape / (self.rate - u)

    def _cumulant_raw(self, m):
        return math.factorial(m - 1) * self.shape / self.rate ** m


@dataclass(frozen=True)
class InverseGaussian(MarginalLaw):
    """IG(delta, gamma): K(u) = delta*(gamma - sqrt(gamma^2 - 2u)).

    kappa_m = delta * (2m-3)!! / gamma^(2m-1), exact.
    """

    delta: float
    gamma: float
    centered: bool = False

    def __post_init__(self):
        if self.delta <= 0 or self.gamma <= 0:
            raise ConfigurationError("delta and gamma must be positive")

    @property
    def radius_of_analyticity(self):
        return 0.5 * self.gamma ** 2

    def _mean(self):
        return self.delta / self.gamma

    def _cgf_raw(self, u):
        return self.delta * (self.gamma - math.sqrt(self.gamma ** 2 - 2.0 * u))

    def _cgf_prime_raw(self, u):
        return self.delta / math.sqrt(self.gamma ** 2 - 2.0 * u)

    def _cumulant_raw(self, m):
        dfac = 1
        for j in range(1, 2 * m - 2, 2):  # (2m-3)!! with (-1)!! = 1
            dfac *= j
        return self.delta * dfac / self.gamma ** (2 * m - 1)


def _sqrt_derivative_polys(m: int) -> list[list[Fraction]]:
    """Polynomials p_k with d^k/du^k sqrt(A - x^2) = p_k(x) / sqrt(A - x^2)^(2k-1),
    x = beta + u. Coefficients of p_k are exact in A via the recurrence
    p_{k+1} = p_k'(x) (A - x^2) + (2k-1) x p_k.

    Coefficients are returned per power of x as polynomials in A, represented
    as {power_of_A: Fraction}; evaluation substitutes numeric A later.
    """
    # represent p as list over power of x of dict {power_of_A: Fraction}
    p = [{0: Fraction(0)}, {0: Fraction(-1)}]  # p_1(x) = -x
    polys = [None, p]
    for k in range(1, m):
        cur = polys[k]
        deg = len(cur) - 1
        nxt = [dict() for _ in range(deg + 2)]

        def add(poly, xpow, apow, coef):
            if coef:
                poly[xpow][apow] = poly[xpow].get(apow, Fraction(0)) + coef

        for xpow, acoefs in enumerate(cur):
            for apow, c in acoefs.items():
                # p'(x) * A term
                if xpow >= 1:
                    add(nxt, xpow - 1, apow + 1, c * xpow)
                    # p'(x) * (-x^2) term
                    add(nxt, xpow + 1, apow, -c * xpow)
                # (2k-1) x p term
                add(nxt, xpow + 1, apow, c * (2 * k - 1))
        polys.append(nxt)
    return polys


@dataclass(frozen=True)
class NIG(MarginalLaw):
    """Normal inverse Gaussian NIG(alpha, beta, delta, mu).

    K(u) = mu*u + delta*(sqrt(alpha^2-beta^2) - sqrt(alpha^2-(beta+u)^2)).
    Cumulants come from an exact chain-rule polynomial recurrence for the
    derivatives of sqrt(alpha^2 - (beta+u)^2) at u = 0.
    """

    alpha: float
    beta: float
    delta: float
    mu: float = 0.0
    centered: bool = False

    def __post_init__(self):
        if self.alpha <= 0 or self.delta <= 0:
            raise ConfigurationError("alpha and delta must be positive")
        if abs(self.beta) >= self.alpha:
            raise ConfigurationError("need |beta| < alpha")

    @property
    def radius_of_analyticity(self):
        # K is real-analytic on (-(alpha+beta), alpha-beta); the symmetric
        # radius is alpha - |beta|.
        return self.alpha - abs(self.beta)

    @property
    def _gbar(self):
        return math.sqrt(self.alpha ** 2 - self.beta ** 2)

    def _mean(self):
        return self.mu + self.delta * self.beta / self._gbar

    def _cgf_raw(self, u):
        return self.mu * u + self.delta * (
            self._gbar - math.sqrt(self.alpha ** 2 - (self.beta + u) ** 2))

    def _cgf_prime_raw(self, u):
        return self.mu + self.delta * (self.beta + u) / math.sqrt(
            self.alpha ** 2 - (self.beta + u) ** 2)

    def _cumulant_raw(self, m):
        polys = _sqrt_derivative_polys(m)
        # evaluate p_m at x = beta with numeric A = alpha^2
        A = self.alpha ** 2
        x = self.beta
        val = 0.0
        for xpow, acoefs in enumerate(polys[m]):
            for apow, c in acoefs.items():
                val += float(c) * (A ** apow) * (x ** xpow)
        return -self.delta * val / self._gbar ** (2 * m - 1)


@dataclass(frozen=True)
class ExponentialJumps:
    rate: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ConfigurationError("jump rate must be positive")

    def moment(self, m: int) -> float:
        return math.factorial(m) / self.rate ** m

    def mgf(self, u: float) -> float:
        return self.rate / (self.rate - u)

    def mgf_prime(self, u: float) -> float:
        return self.rate / (self.rate - u) ** 2

    @property
    def mgf_radius(self) -> float:
        return self.rate

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.rate, size=size)


@dataclass(frozen=True)
class DeterministicJumps:
    size: float

    def __post_init__(self):
        if self.size <= 0:
            raise ConfigurationError("jump size must be positive")

    def moment(self, m: int) -> float:
        return self.size ** m

    def mgf(self, u: float) -> float:
        return math.exp(self.size * u)

    def mgf_prime(self, u: float) -> float:
        return self.size * math.exp(self.size * u)

    @property
    def mgf_radius(self) -> float:
        return math.inf

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.size
        return np.full(size, self.size)


@dataclass(frozen=True)
class CompoundPoissonDriven(MarginalLaw):
    """Compound Poisson marginal with positive jumps: kappa_m = intensity * E[J^m].

    Jump laws are limited to exponential and deterministic so the simulation
    engine can generate component paths jump by jump.
    """

    jump: ExponentialJumps | DeterministicJumps
    intensity: float
    centered: bool = False

    def __post_init__(self):
        if self.intensity <= 0:
            raise ConfigurationError("intensity must be positive")

    @property
    def radius_of_analyticity(self):
        return self.jump.mgf_radius

    def _mean(self):
        return self.intensity * self.jump.moment(1)

    def _cgf_raw(self, u):
        return self.intensity * (self.jump.mgf(u) - 1.0)

    def _cgf_prime_raw(self, u):
        return self.intensity * self.jump.mgf_prime(u)

    def _cumulant_raw(self, m):
        return self.intensity * self.jump.moment(m)

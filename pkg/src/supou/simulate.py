"""Monte Carlo engine for discrete superpositions of OU components.

Components are Ornstein-Uhlenbeck processes driven by compound Poisson
processes, which admit an exact discrete skeleton: between jumps the path
decays deterministically, and each jump on a step contributes its size
damped by the remaining decay. There is no discretization bias in the
skeleton itself; only the trapezoidal time integral carries O(step^2) bias.

A Gamma(shape, rate) marginal decomposes across components: the component
with weight p is a Gamma-OU process with shape p*shape and the same rate,
driven by compound Poisson jumps Exp(rate) at intensity p*shape per unit of
the driving clock. A CompoundPoissonDriven spec is interpreted as the
driving specification itself: components are OU processes whose driving
process is compound Poisson with the given jump law and intensity. The
resulting stationary marginal is selfdecomposable (for exponential jumps it
is again a Gamma law).

Replica r draws from a dedicated counter-based stream keyed by
(base_seed, r), so ensembles are bit-for-bit reproducible regardless of
evaluation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .engine import AggregateKind
from .errors import ConfigurationError
from .marginal import (CompoundPoissonDriven, DeterministicJumps,
                       ExponentialJumps, GammaLaw, MarginalLaw)
from .mixing import Degenerate, Discrete, MixingMeasure

_STATIONARY_CUTOFF = 60.0    # exp(-60) ~ 9e-27 of a jump survives past this age
_TRUNCATION_VAR_SHARE = 1e-3  # neglected variance mass allowed by truncation
MIN_REPLICAS_HIGH_ORDER = 30


@dataclass(frozen=True)
class CompoundPoissonBDLP:
    """Driving spec: jumps from `jump` at `intensity` per unit driving-clock time.

    The OU component with rate lam sees jumps at real-time rate lam*intensity.
    """

    jump: ExponentialJumps | DeterministicJumps
    intensity: float

    def __post_init__(self):
        if self.intensity <= 0:
            raise ConfigurationError("BDLP intensity must be positive")


@dataclass(frozen=True)
class SimConfig:
    mixing: MixingMeasure
    marginal: MarginalLaw
    horizon: float
    step: float
    replicas: int
    seed: int = 0
    truncation: int | None = None

    def __post_init__(self):
        if not isinstance(self.mixing, (Degenerate, Discrete)):
            raise ConfigurationError(
                "simulation supports Degenerate and Discrete mixing only")
        if not isinstance(self.marginal, (GammaLaw, CompoundPoissonDriven)):
            raise ConfigurationError(
                "simulation supports GammaLaw and CompoundPoissonDriven marginals only")
        if self.step <= 0:
            raise ConfigurationError("step must be positive")
        if self.horizon < self.step:
            raise ConfigurationError("horizon must be at least one step")
        if self.replicas < 1:
            raise ConfigurationError("need at least one replica")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")
        if self.truncation is not None and self.truncation < 1:
            raise ConfigurationError("truncation must be >= 1")


@dataclass
class PathEnsemble:
    times: np.ndarray              # (n_steps + 1,)
    paths: np.ndarray              # (replicas, n_steps + 1)
    rates: tuple[float, ...]       # component mean-reversion rates
    weights: tuple[float, ...]
    step: float
    base_seed: int

    @property
    def replicas(self) -> int:
        return self.paths.shape[0]

    def seed_ledger(self) -> dict:
        return {"stream": "philox", "base_seed": self.base_seed,
                "replicas": self.replicas, "key": "[base_seed, replica_index]"}


def replica_rng(base_seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[base_seed, replica]))


def _stationary_cp_draw(bdlp: CompoundPoissonBDLP, rng: np.random.Generator) -> float:
    # Stationary X(0) = sum of past jumps damped by their age on the driving
    # clock, a Poisson process of rate `intensity` on (0, cutoff].
    n = rng.poisson(bdlp.intensity * _STATIONARY_CUTOFF)
    ages = rng.uniform(0.0, _STATIONARY_CUTOFF, n)
    sizes = bdlp.jump.sample(rng, n)
    return float(np.sum(sizes * np.exp(-ages)))


def ou_component_path(lam: float, bdlp: CompoundPoissonBDLP | None, delta: float,
                      n_steps: int, rng: np.random.Generator,
                      x0: float | None = None) -> np.ndarray:
    """Exact skeleton X(0), X(delta), ..., X(n_steps*delta) of one OU component.

    With bdlp=None the path is the deterministic decay from x0. Otherwise
    X(0) is a stationary draw unless x0 is given, and each step adds the
    damped jumps that fell on it.
    """
    if lam <= 0:
        raise ConfigurationError("component rate must be positive")
    if n_steps < 1:
        raise ConfigurationError("need at least one step")
    if bdlp is None:
        if x0 is None:
            raise ConfigurationError("zero BDLP needs an explicit x0")
        return x0 * np.exp(-lam * delta * np.arange(n_steps + 1))
    if x0 is None:
        x0 = _stationary_cp_draw(bdlp, rng)

    horizon = n_steps * delta
    n_jumps = rng.poisson(lam * bdlp.intensity * horizon)
    jump_times = rng.uniform(0.0, horizon, n_jumps)
    jump_sizes = bdlp.jump.sample(rng, n_jumps)
    buckets = np.minimum((jump_times / delta).astype(np.int64), n_steps - 1)
    # jump at time s contributes size * exp(-lam * (step_end - s))
    damped = jump_sizes * np.exp(-lam * ((buckets + 1) * delta - jump_times))
    increments = np.bincount(buckets, weights=damped, minlength=n_steps)

    phi = math.exp(-lam * delta)
    body, _ = lfilter([1.0], [1.0, -phi], increments, zi=np.array([phi * x0]))
    return np.concatenate(([x0], body))


def _components(cfg: SimConfig) -> list[tuple[float, float]]:
    """(rate, weight) pairs after optional truncation to the first K atoms."""
    if isinstance(cfg.mixing, Degenerate):
        atoms = [(cfg.mixing.rate, 1.0)]
    else:
        atoms = list(zip(cfg.mixing.rates, cfg.mixing.weights))
    if cfg.truncation is not None and cfg.truncation < len(atoms):
        kept = atoms[:cfg.truncation]
        dropped = sum(w for _, w in atoms[cfg.truncation:])
        # each component's variance is proportional to its weight, so the
        # dropped weight share is exactly the neglected variance share
        if dropped > _TRUNCATION_VAR_SHARE:
            raise ConfigurationError(
                f"truncation to {cfg.truncation} components drops variance share "
                f"{dropped:.2e} > {_TRUNCATION_VAR_SHARE}")
        if dropped > 1e-10:
            warnings.warn(f"truncation drops mass {dropped:.3e}; weights renormalized")
        total = sum(w for _, w in kept)
        atoms = [(r, w / total) for r, w in kept]
    return atoms


def _component_bdlp(marginal: MarginalLaw, weight: float) -> CompoundPoissonBDLP:
    if isinstance(marginal, GammaLaw):
        return CompoundPoissonBDLP(jump=ExponentialJumps(marginal.rate),
                                   intensity=weight * marginal.shape)
    return CompoundPoissonBDLP(jump=marginal.jump,
                               intensity=weight * marginal.intensity)


def superposition_path(cfg: SimConfig) -> PathEnsemble:
    """Ensemble of superposition skeletons, one stream per replica."""
    atoms = _components(cfg)
    n_steps = int(math.floor(cfg.horizon / cfg.step + 1e-9))
    shift = cfg.marginal._mean() if cfg.marginal.centered else 0.0

    paths = np.empty((cfg.replicas, n_steps + 1))
    for r in range(cfg.replicas):
        rng = replica_rng(cfg.seed, r)
        total = np.zeros(n_steps + 1)
        for lam, weight in atoms:
            bdlp = _component_bdlp(cfg.marginal, weight)
            if isinstance(cfg.marginal, GammaLaw):
                # stationary component marginal is Gamma(weight*shape, rate)
                x0 = float(rng.gamma(weight * cfg.marginal.shape,
                                     1.0 / cfg.marginal.rate))
            else:
                x0 = _stationary_cp_draw(bdlp, rng)
            total += ou_component_path(lam, bdlp, cfg.step, n_steps, rng, x0=x0)
        paths[r] = total - shift

    times = cfg.step * np.arange(n_steps + 1)
    return PathEnsemble(times=times, paths=paths,
                        rates=tuple(a for a, _ in atoms),
                        weights=tuple(w for _, w in atoms),
                        step=cfg.step, base_seed=cfg.seed)


def aggregate_path(ens: PathEnsemble, kind: AggregateKind) -> tuple[np.ndarray, np.ndarray]:
    """(times, per-replica aggregate arrays Y(t_j)).

    Integrated: trapezoid on the skeleton, Y(0) = 0. Partial sum: skeleton
    sampled exactly at integer times, which requires 1/step to be an integer.
    """
    if kind is AggregateKind.INTEGRATED:
        mid = 0.5 * (ens.paths[:, :-1] + ens.paths[:, 1:])
        cum = np.concatenate([np.zeros((ens.replicas, 1)),
                              ens.step * np.cumsum(mid, axis=1)], axis=1)
        return ens.times, cum
    per_unit = 1.0 / ens.step
    m = round(per_unit)
    if abs(per_unit - m) > 1e-9:
        raise ConfigurationError(
            f"partial sums need 1/step integer; step={ens.step} gives {per_unit}")
    n_units = (ens.paths.shape[1] - 1) // m
    if n_units < 1:
        raise ConfigurationError("horizon too short for one partial-sum term")
    idx = m * np.arange(1, n_units + 1)
    return np.arange(1, n_units + 1, dtype=float), np.cumsum(ens.paths[:, idx], axis=1)


def _time_index(times: np.ndarray, t: float) -> int:
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > 1e-9 * max(1.0, abs(t)):
        raise ConfigurationError(f"t={t} is not on the simulated grid")
    return i


def _jackknife_se(loo: np.ndarray) -> float:
    n = len(loo)
    return math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))


def empirical_moments(times: np.ndarray, ys: np.ndarray, qs: list[float],
                      t_points: list[float]) -> list[dict]:
    """Ensemble estimates of E|Y(t)|^q with jackknife standard errors.

    Estimates at q > 4 are tagged mc_unreliable: heavy-tailed growth means
    rare paths dominate those moments and the ensemble average is biased low
    at any affordable replica count.
    """
    rows = []
    n = ys.shape[0]
    for q in qs:
        if q <= 0:
            raise ConfigurationError("moment exponents must be positive")
        for t in t_points:
            x = np.abs(ys[:, _time_index(times, t)]) ** q
            total = float(x.sum())
            loo = (total - x) / (n - 1)
            rows.append({"q": q, "t": float(t), "value": total / n,
                         "se": _jackknife_se(loo), "replicas": n,
                         "mc_unreliable": q > 4})
    return rows


def _kstats(n, s1, s2, s3, s4, order: int):
    if order == 1:
        return s1 / n
    if order == 2:
        return (n * s2 - s1 ** 2) / (n * (n - 1))
    if order == 3:
        return (n ** 2 * s3 - 3 * n * s2 * s1 + 2 * s1 ** 3) / (n * (n - 1) * (n - 2))
    return ((n ** 2 * (n + 1) * s4 - 4 * n * (n + 1) * s3 * s1
             - 3 * n * (n - 1) * s2 ** 2 + 12 * n * s2 * s1 ** 2 - 6 * s1 ** 4)
            / (n * (n - 1) * (n - 2) * (n - 3)))


def empirical_cumulants(times: np.ndarray, ys: np.ndarray, orders: list[int],
                        t_points: list[float]) -> list[dict]:
    """Unbiased k-statistics k_1..k_4 with jackknife standard errors."""
    if any(m < 1 or m > 4 for m in orders):
        raise ConfigurationError("empirical cumulants support orders 1..4")
    n = ys.shape[0]
    if any(m >= 3 for m in orders) and n < MIN_REPLICAS_HIGH_ORDER:
        raise ConfigurationError(
            f"orders 3-4 need at least {MIN_REPLICAS_HIGH_ORDER} replicas, got {n}")
    rows = []
    for t in t_points:
        x = ys[:, _time_index(times, t)]
        powers = [x ** p for p in range(1, 5)]
        sums = [float(p.sum()) for p in powers]
        # leave-one-out power sums give the jackknife in one vectorized pass
        loo_sums = [s - p for s, p in zip(sums, powers)]
        for m in orders:
            value = _kstats(n, *sums, m)
            loo = _kstats(n - 1, *loo_sums, m)
            rows.append({"m": m, "t": float(t), "value": float(value),
                         "se": _jackknife_se(np.asarray(loo)), "replicas": n})
    return rows


def empirical_autocorrelation(ens: PathEnsemble, lag: float) -> tuple[float, float]:
    """Ensemble lag autocorrelation of the skeleton with jackknife SE.

    The jackknife deletes whole replicas (the independent blocks); per-replica
    sufficient statistics make the leave-one-out pass a vectorized subtraction.
    """
    k = round(lag / ens.step)
    if k < 1 or abs(k * ens.step - lag) > 1e-9:
        raise ConfigurationError(f"lag {lag} is not a positive multiple of the step")
    x = ens.paths[:, :-k]
    y = ens.paths[:, k:]
    per = np.stack([x.sum(axis=1), y.sum(axis=1), (x * x).sum(axis=1),
                    (y * y).sum(axis=1), (x * y).sum(axis=1),
                    np.full(ens.replicas, x.shape[1], dtype=float)])

    def corr(sx, sy, sxx, syy, sxy, n):
        cov = sxy - sx * sy / n
        vx = sxx - sx * sx / n
        vy = syy - sy * sy / n
        return cov / np.sqrt(vx * vy)

    totals = per.sum(axis=1)
    estimate = float(corr(*totals))
    loo = corr(*(totals[:, None] - per))
    return estimate, _jackknife_se(np.asarray(loo))

"""Request/config schemas shared by the HTTP service and the CLI.

Everything user-facing is validated here: unknown keys are rejected
(extra="forbid"), and the kind/parameters pairs are turned into the
library's measure and law objects by the build_* functions.
"""

from __future__ import annotations

from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import ConfigurationError
from .marginal import (CompoundPoissonDriven, DeterministicJumps,
                       ExponentialJumps, GammaLaw, Gaussian, InverseGaussian,
                       MarginalLaw, NIG)
from .mixing import (Degenerate, DensityMixing, Discrete, GammaMixing,
                     MittagLefflerMixing, MixingMeasure, discrete_power_law)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _take(params: dict[str, Any], kind: str, required: list[str],
          optional: dict[str, Any] | None = None) -> dict[str, Any]:
    """Extract named parameters, rejecting extras and missing required keys."""
    params = dict(params)
    out = {}
    for key in required:
        if key not in params:
            raise ConfigurationError(f"{kind!r} requires parameter {key!r}")
        out[key] = params.pop(key)
    for key, default in (optional or {}).items():
        out[key] = params.pop(key, default)
    if params:
        raise ConfigurationError(
            f"unknown parameters for {kind!r}: {sorted(params)}")
    return out


class MixingSpec(StrictModel):
    kind: Literal["degenerate", "discrete", "power_law", "gamma", "mittag_leffler"]
    parameters: dict[str, Any] = Field(default_factory=dict)

    def build(self) -> MixingMeasure:
        k, p = self.kind, self.parameters
        if k == "degenerate":
            return Degenerate(**_take(p, k, ["rate"]))
        if k == "discrete":
            got = _take(p, k, ["rates", "weights"],
                        {"tail_index": float("inf"), "tail_scale": None})
            return Discrete(tuple(got["rates"]), tuple(got["weights"]),
                            tail_index=got["tail_index"], tail_scale=got["tail_scale"])
        if k == "power_law":
            return discrete_power_law(**_take(p, k, ["lam", "alpha"], {"n_atoms": None}))
        if k == "gamma":
            return GammaMixing(**_take(p, k, ["alpha"]))
        return MittagLefflerMixing(**_take(p, k, ["alpha"]))


class MarginalSpec(StrictModel):
    kind: Literal["gaussian", "gamma", "inverse_gaussian", "nig",
                  "compound_poisson", "student"]
    parameters: dict[str, Any] = Field(default_factory=dict)
    centered: bool = False

    def build(self) -> MarginalLaw:
        k, p = self.kind, self.parameters
        if k == "student":
            raise ConfigurationError(
                "student marginals are not supported: a stationary supOU marginal "
                "must have a cumulant generating function analytic at the origin, "
                "and the Student law's moment generating function diverges")
        if k == "gaussian":
            return Gaussian(**_take(p, k, ["variance"]), centered=self.centered)
        if k == "gamma":
            return GammaLaw(**_take(p, k, ["shape", "rate"]), centered=self.centered)
        if k == "inverse_gaussian":
            return InverseGaussian(**_take(p, k, ["delta", "gamma"]),
                                   centered=self.centered)
        if k == "nig":
            return NIG(**_take(p, k, ["alpha", "beta", "delta"], {"mu": 0.0}),
                       centered=self.centered)
        got = _take(p, k, ["intensity", "jump"])
        jump = got["jump"]
        if not isinstance(jump, dict) or "kind" not in jump:
            raise ConfigurationError("compound_poisson jump must be {kind, ...}")
        jk = dict(jump)
        kind = jk.pop("kind")
        if kind == "exponential":
            law = ExponentialJumps(**_take(jk, "exponential jump", ["rate"]))
        elif kind == "deterministic":
            law = DeterministicJumps(**_take(jk, "deterministic jump", ["size"]))
        else:
            raise ConfigurationError(f"unknown jump kind {kind!r}")
        return CompoundPoissonDriven(jump=law, intensity=got["intensity"],
                                     centered=self.centered)


class GridSpec(StrictModel):
    """Log-spaced grid from min to max with count points."""

    min: float
    max: float
    count: int

    def points(self) -> list[float]:
        if self.min <= 0 or self.max <= self.min or self.count < 2:
            raise ConfigurationError("grid needs 0 < min < max and count >= 2")
        return [float(v) for v in np.logspace(np.log10(self.min),
                                              np.log10(self.max), self.count)]


AggregateKindName = Literal["integrated", "partial_sum"]


class CorrelationRequest(StrictModel):
    mixing: MixingSpec
    tau_grid: GridSpec = GridSpec(min=1e-2, max=1e3, count=50)
    include_zero: bool = True


class CumulantsRequest(StrictModel):
    mixing: MixingSpec
    marginal: MarginalSpec
    kind: AggregateKindName = "integrated"
    orders: list[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    t_grid: GridSpec = GridSpec(min=1e3, max=1e6, count=25)
    form: str | None = None
    cross_check: bool = False
    threads: int = 1


class ScalingRequest(StrictModel):
    mixing: MixingSpec
    marginal: MarginalSpec
    kind: AggregateKindName = "integrated"
    mode: Literal["sigma", "tau"] = "sigma"
    orders: list[int] = Field(default_factory=lambda: [2, 3, 4])
    exponents: list[int] = Field(default_factory=lambda: [2, 4])
    t_grid: GridSpec = GridSpec(min=1e3, max=1e6, count=25)
    window: tuple[float, float] | None = None
    ratio_tol: float = 0.02
    threads: int = 1


class SimulateRequest(StrictModel):
    mixing: MixingSpec
    marginal: MarginalSpec
    kind: AggregateKindName = "partial_sum"
    horizon: float = 50.0
    step: float = 0.1
    replicas: int = 1000
    seed: int = 0
    truncation: int | None = None
    orders: list[int] = Field(default_factory=lambda: [1, 2])
    exponents: list[float] = Field(default_factory=list)
    t_points: list[float] = Field(default_factory=lambda: [10.0, 50.0])
    autocorrelation_lags: list[float] = Field(default_factory=lambda: [1.0])


class VerifyRequest(StrictModel):
    alpha: float = 0.6
    expected_alpha: float | None = None  # override for negative-control runs
    seed: int = 0
    threads: int = 1
    slope_tol: float = 0.05
    grid_count: int = 9


def default_config() -> dict[str, Any]:
    """Defaults for every subcommand, keyed by subcommand name."""
    gamma_mix = MixingSpec(kind="gamma", parameters={"alpha": 0.6})
    ig = MarginalSpec(kind="inverse_gaussian",
                      parameters={"delta": 1.0, "gamma": 1.0}, centered=True)
    gamma_law = MarginalSpec(kind="gamma",
                             parameters={"shape": 1.0, "rate": 1.0}, centered=True)
    return {
        "correlation": CorrelationRequest(mixing=gamma_mix).model_dump(),
        "cumulants": CumulantsRequest(mixing=gamma_mix, marginal=ig).model_dump(),
        "scaling": ScalingRequest(mixing=gamma_mix, marginal=ig).model_dump(),
        "simulate": SimulateRequest(
            mixing=MixingSpec(kind="degenerate", parameters={"rate": 1.0}),
            marginal=gamma_law).model_dump(),
        "verify": VerifyRequest().model_dump(),
    }

"""Point evaluation of every estimator of the population proportion.

Each ``estimate_*`` function maps the sufficient statistics of one SRSWOR
sample, the known auxiliary population parameters, and a configuration to a
single number. Constants left as ``None`` in a configuration are resolved to
their population-optimal values and the resolved configuration is returned
with the estimate. All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import theory
from .config import T1Config, T2Config, T3Config, TbConfig, TcConfig
from .errors import (
    InvalidConfig,
    NonpositiveBase,
    NonpositiveTransform,
    SchemaError,
    ZeroSampleMean,
)
from .population import PopulationParams, SampleStats, sampling_fraction

Kind = str
_KINDS = ("usual", "ta", "tb", "tc", "t1", "t2", "t3")
_SUBCONFIG = {"tb": "tb", "tc": "tc", "t1": "t1", "t2": "t2", "t3": "t3"}


@dataclass(frozen=True)
class EstimatorConfig:
    """Tagged per-family configuration.

    Exactly the sub-configuration matching ``kind`` may be present; it is
    created with defaults when omitted. ``label`` overrides the report name,
    which is useful when several variants of one family run side by side.
    """

    kind: Kind
    tb: TbConfig | None = None
    tc: TcConfig | None = None
    t1: T1Config | None = None
    t2: T2Config | None = None
    t3: T3Config | None = None
    label: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidConfig(f"unknown estimator kind {self.kind!r}")
        own = _SUBCONFIG.get(self.kind)
        for slot in ("tb", "tc", "t1", "t2", "t3"):
            value = getattr(self, slot)
            if slot == own:
                if value is None:
                    default = {"tb": TbConfig, "tc": TcConfig, "t1": T1Config,
                               "t2": T2Config, "t3": T3Config}[slot]()
                    object.__setattr__(self, slot, default)
            elif value is not None:
                raise InvalidConfig(
                    f"estimator kind {self.kind!r} does not take a {slot!r} configuration"
                )

    @property
    def name(self) -> str:
        return self.label or self.kind


@dataclass(frozen=True)
class Estimate:
    """A point estimate together with the fully resolved configuration."""

    value: float
    config_used: EstimatorConfig

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise SchemaError(f"estimate is not finite: {self.value}")


def resolve_config(cfg: EstimatorConfig, pop: PopulationParams, f: float) -> EstimatorConfig:
    """Replace every ``None`` constant with its population-optimal value.

    Under a census design (f = 0) the weight systems of the ``tc`` and ``t3``
    families are singular (there is no auxiliary contrast to weigh), so their
    census limits are used: (q1, q2) = (1, 0) and (m1, m2) = (1/2, 1/2), both
    of which reproduce the sample proportion exactly.
    """
    if f == 0.0:
        if cfg.kind == "tc" and (cfg.tc.q1 is None or cfg.tc.q2 is None):
            return replace(cfg, tc=replace(
                cfg.tc,
                q1=cfg.tc.q1 if cfg.tc.q1 is not None else 1.0,
                q2=cfg.tc.q2 if cfg.tc.q2 is not None else 0.0,
            ))
        if cfg.kind == "t3" and (cfg.t3.m1 is None or cfg.t3.m2 is None):
            return replace(cfg, t3=replace(
                cfg.t3,
                m1=cfg.t3.m1 if cfg.t3.m1 is not None else 0.5,
                m2=cfg.t3.m2 if cfg.t3.m2 is not None else 0.5,
            ))
    if cfg.kind == "tb":
        if cfg.tb.h1 is None:
            return replace(cfg, tb=replace(cfg.tb, h1=theory.tb_optimal_h1(pop)))
    elif cfg.kind == "tc":
        if cfg.tc.q1 is None or cfg.tc.q2 is None:
            constants = theory.tc_constants(pop, f, cfg.tc.a, cfg.tc.b,
                                            cfg.tc.alpha, cfg.tc.beta)
            q1, q2 = theory.tc_optimal_q(constants)
            return replace(cfg, tc=replace(
                cfg.tc,
                q1=cfg.tc.q1 if cfg.tc.q1 is not None else q1,
                q2=cfg.tc.q2 if cfg.tc.q2 is not None else q2,
            ))
    elif cfg.kind == "t1":
        if cfg.t1.alpha is None or cfg.t1.beta is None:
            alpha, beta = theory.t1_optimal(pop)
            return replace(cfg, t1=replace(
                cfg.t1,
                alpha=cfg.t1.alpha if cfg.t1.alpha is not None else alpha,
                beta=cfg.t1.beta if cfg.t1.beta is not None else beta,
            ))
    elif cfg.kind == "t2":
        if cfg.t2.h1 is None or cfg.t2.h2 is None:
            h1, h2 = theory.t2_optimal(pop)
            return replace(cfg, t2=replace(
                cfg.t2,
                h1=cfg.t2.h1 if cfg.t2.h1 is not None else h1,
                h2=cfg.t2.h2 if cfg.t2.h2 is not None else h2,
            ))
    elif cfg.kind == "t3":
        if cfg.t3.m1 is None or cfg.t3.m2 is None:
            constants = theory.t3_constants(pop, f, cfg.t3.gamma, cfg.t3.g, cfg.t3.delta)
            m1, m2 = theory.t3_optimal_m(constants)
            return replace(cfg, t3=replace(
                cfg.t3,
                m1=cfg.t3.m1 if cfg.t3.m1 is not None else m1,
                m2=cfg.t3.m2 if cfg.t3.m2 is not None else m2,
            ))
    return cfg


def estimate_usual(s: SampleStats) -> Estimate:
    """The sample proportion itself."""
    return Estimate(value=s.p, config_used=EstimatorConfig(kind="usual"))


def estimate_ratio_ta(s: SampleStats, pop: PopulationParams) -> Estimate:
    """Plain ratio estimate p * xbar / xbar_s."""
    if s.xbar_s == 0.0:
        raise ZeroSampleMean("sample auxiliary mean is zero")
    # grouping p * (xbar/xbar_s) keeps the power-transform reduction bit-exact
    return Estimate(value=s.p * (pop.xbar / s.xbar_s),
                    config_used=EstimatorConfig(kind="ta"))


def estimate_regression_tb(s: SampleStats, pop: PopulationParams,
                           cfg: EstimatorConfig | None = None) -> Estimate:
    """Minimum-MSE linear member p + h1*(xbar_s/xbar - 1)."""
    cfg = cfg or EstimatorConfig(kind="tb")
    cfg = resolve_config(cfg, pop, 0.0)
    value = s.p + cfg.tb.h1 * (s.xbar_s / pop.xbar - 1.0)
    return Estimate(value=value, config_used=cfg)


def estimate_tc(s: SampleStats, pop: PopulationParams, cfg: EstimatorConfig) -> Estimate:
    """Weighted ratio/exponential transform family.

    value = (q1*p + q2*(xbar - xbar_s))
            * ((a*xbar + b)/(a*xbar_s + b))**alpha
            * exp(beta * ((a*xbar+b) - (a*xbar_s+b)) / ((a*xbar+b) + (a*xbar_s+b)))
    """
    if cfg.kind != "tc":
        raise InvalidConfig(f"expected a tc configuration, got kind {cfg.kind!r}")
    f = sampling_fraction(s.n, pop.N)
    cfg = resolve_config(cfg, pop, f)
    tc = cfg.tc
    pop_t = tc.a * pop.xbar + tc.b
    smp_t = tc.a * s.xbar_s + tc.b
    if pop_t <= 0.0 or smp_t <= 0.0:
        raise NonpositiveTransform(
            f"a*mean + b must stay positive (population {pop_t}, sample {smp_t})"
        )
    value = (
        (tc.q1 * s.p + tc.q2 * (pop.xbar - s.xbar_s))
        * (pop_t / smp_t) ** tc.alpha
        * math.exp(tc.beta * (pop_t - smp_t) / (pop_t + smp_t))
    )
    return Estimate(value=value, config_used=cfg)


def estimate_t1(s: SampleStats, pop: PopulationParams, cfg: EstimatorConfig) -> Estimate:
    """Power-transform estimate p * (xbar/xbar_s)**alpha * (sx2/sx2_s)**beta."""
    if cfg.kind != "t1":
        raise InvalidConfig(f"expected a t1 configuration, got kind {cfg.kind!r}")
    cfg = resolve_config(cfg, pop, sampling_fraction(s.n, pop.N))
    if s.xbar_s <= 0.0 or pop.xbar / s.xbar_s <= 0.0:
        raise NonpositiveBase(f"mean ratio must be positive, sample mean {s.xbar_s}")
    if s.sx2_s <= 0.0:
        raise NonpositiveBase(f"sample auxiliary variance must be positive, got {s.sx2_s}")
    value = (s.p
             * (pop.xbar / s.xbar_s) ** cfg.t1.alpha
             * (pop.sx2 / s.sx2_s) ** cfg.t1.beta)
    return Estimate(value=value, config_used=cfg)


def estimate_t2(s: SampleStats, pop: PopulationParams, cfg: EstimatorConfig) -> Estimate:
    """Two-channel linear member p + h1*(u - 1) + h2*(v - 1).

    ``u`` and ``v`` are the sample/population ratios of the auxiliary mean and
    variance.
    """
    if cfg.kind != "t2":
        raise InvalidConfig(f"expected a t2 configuration, got kind {cfg.kind!r}")
    cfg = resolve_config(cfg, pop, sampling_fraction(s.n, pop.N))
    u = s.xbar_s / pop.xbar
    v = s.sx2_s / pop.sx2
    value = s.p + cfg.t2.h1 * (u - 1.0) + cfg.t2.h2 * (v - 1.0)
    return Estimate(value=value, config_used=cfg)


def estimate_t3(s: SampleStats, pop: PopulationParams, cfg: EstimatorConfig) -> Estimate:
    """Two-term weighted estimate.

    value = m1 * p * (xbar / (gamma*xbar_s + (1-gamma)*xbar))**g
            + m2 * p * exp(delta * (sx2 - sx2_s) / (sx2 + sx2_s))
    """
    if cfg.kind != "t3":
        raise InvalidConfig(f"expected a t3 configuration, got kind {cfg.kind!r}")
    cfg = resolve_config(cfg, pop, sampling_fraction(s.n, pop.N))
    t3 = cfg.t3
    shifted = t3.gamma * s.xbar_s + (1.0 - t3.gamma) * pop.xbar
    if shifted <= 0.0 or pop.xbar / shifted <= 0.0:
        raise NonpositiveBase(f"shifted mean must stay positive, got {shifted}")
    if pop.sx2 + s.sx2_s <= 0.0:
        raise NonpositiveBase("sum of auxiliary variances must be positive")
    value = (t3.m1 * s.p * (pop.xbar / shifted) ** t3.g
             + t3.m2 * s.p * math.exp(
                 t3.delta * (pop.sx2 - s.sx2_s) / (pop.sx2 + s.sx2_s)))
    return Estimate(value=value, config_used=cfg)


def evaluate(s: SampleStats, pop: PopulationParams, cfg: EstimatorConfig) -> Estimate:
    """Dispatch on the configured estimator kind."""
    if cfg.kind == "usual":
        return estimate_usual(s)
    if cfg.kind == "ta":
        return estimate_ratio_ta(s, pop)
    if cfg.kind == "tb":
        return estimate_regression_tb(s, pop, cfg)
    if cfg.kind == "tc":
        return estimate_tc(s, pop, cfg)
    if cfg.kind == "t1":
        return estimate_t1(s, pop, cfg)
    if cfg.kind == "t2":
        return estimate_t2(s, pop, cfg)
    if cfg.kind == "t3":
        return estimate_t3(s, pop, cfg)
    raise InvalidConfig(f"unknown estimator kind {cfg.kind!r}")

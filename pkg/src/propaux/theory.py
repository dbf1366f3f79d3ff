"""First-order bias/MSE theory, optimal constants, efficiency, and conditioning.

Every expression here is a first-order Taylor approximation in the relative
deviations of (p, xbar_s, sx2_s) around their population values, with second
moments

    E[((p-P)/P)^2]            = f*cp^2
    E[((xbar_s-X)/X)^2]       = f*cx^2
    E[((sx2_s-S)/S)^2]        = f*(lambda04 - 1)
    E[cross terms]            = f*rho_pb*cp*cx, f*cp*lambda12, f*cx*lambda03

where ``f = 1/n - 1/N``. A negative computed MSE is always reported as an
error, never as a value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable

from .config import T3Config, TableConfig
from .errors import (
    DataError,
    DegenerateAuxiliary,
    DegenerateMoments,
    InvalidConfig,
    NegativeMse,
    NonpositiveMse,
    NonpositiveTransform,
    NumericalError,
    SingularSystem,
    ToolkitError,
)
from .population import Design, PopulationParams

_SINGULAR_RTOL = 1e-12
_MSE_NEG_RTOL = 1e-12


def _check_mse(value: float, scale: float, what: str) -> float:
    """Clamp roundoff-negative MSE to zero; reject materially negative ones."""
    if value < -_MSE_NEG_RTOL * max(scale, 1e-300):
        raise NegativeMse(f"{what} evaluated negative ({value}); the first-order "
                          "expansion is invalid for these parameters")
    return max(value, 0.0)


# --- usual estimator ------------------------------------------------------------


def var_usual(pop: PopulationParams, f: float) -> float:
    """First-order (here: exact) variance of the sample proportion, f*P^2*cp^2."""
    return f * pop.P**2 * pop.cp**2


# --- ratio estimator ------------------------------------------------------------


def bias_ta(pop: PopulationParams, f: float) -> float:
    """First-order bias of the plain ratio estimate, f*P*(cx^2 - rho_pb*cp*cx)."""
    return f * pop.P * (pop.cx**2 - pop.rho_pb * pop.cp * pop.cx)


def mse_ta(pop: PopulationParams, f: float) -> float:
    """First-order MSE of the plain ratio estimate, f*P^2*(cp^2+cx^2-2*rho*cp*cx)."""
    value = f * pop.P**2 * (pop.cp**2 + pop.cx**2 - 2.0 * pop.rho_pb * pop.cp * pop.cx)
    return _check_mse(value, var_usual(pop, f), "ratio-estimator MSE")


# --- regression-type class ------------------------------------------------------


def tb_optimal_h1(pop: PopulationParams) -> float:
    """Optimal slope of the linear regression-type member, -P*rho_pb*cp/cx."""
    if pop.cx == 0.0:
        raise DegenerateAuxiliary("cx must be nonzero to regress on the auxiliary mean")
    return -pop.P * pop.rho_pb * pop.cp / pop.cx


def min_mse_tb(pop: PopulationParams, f: float) -> float:
    """Class minimum MSE over mean-only transforms, f*P^2*cp^2*(1 - rho_pb^2)."""
    if pop.cx == 0.0:
        raise DegenerateAuxiliary("cx must be nonzero to regress on the auxiliary mean")
    value = f * pop.P**2 * pop.cp**2 * (1.0 - pop.rho_pb**2)
    return _check_mse(value, var_usual(pop, f), "regression-class minimum MSE")


def class_bias_tb(pop: PopulationParams, f: float, h2: float, h3: float, h4: float) -> float:
    """First-order class bias as a linear form in the second-derivative values.

    ``h2``, ``h3``, ``h4`` are half second derivatives of the class function at
    the population point (pure auxiliary, mixed, pure proportion).
    """
    return f * (pop.P * pop.rho_pb * pop.cp * pop.cx * h3
                + pop.cx**2 * h2
                + pop.P**2 * pop.cp**2 * h4)


# --- weighted transform family (q1, q2) -----------------------------------------


@dataclass(frozen=True)
class TcConstants:
    """Expansion constants of the weighted ratio/exponential transform family.

    ``theta`` locates the transform, ``bc``/``ac`` are its first/second-order
    expansion coefficients, ``m1..m5`` the building blocks, and
    ``delta1..delta5`` the coefficients of the MSE quadratic form

        mse(q1, q2) = P^2 + q1^2*d1 + q2^2*d3 + 2*q1*q2*d2 - 2*q1*d4 - 2*q2*d5.
    """

    theta: float
    bc: float
    ac: float
    m1: float
    m2: float
    m3: float
    m4: float
    m5: float
    delta1: float
    delta2: float
    delta3: float
    delta4: float
    delta5: float


def tc_constants(pop: PopulationParams, f: float, a: float, b: float,
                 alpha: float, beta: float) -> TcConstants:
    """Expansion constants for the transform ((a*X+b)/(a*x+b))^alpha * exp-tilt^beta."""
    base = a * pop.xbar + b
    if base <= 0.0:
        raise NonpositiveTransform(f"a*xbar + b must be positive, got {base}")
    theta = a * pop.xbar / base
    bc = theta * (alpha + beta / 2.0)
    ac = theta**2 * (alpha * (alpha + 1.0) / 2.0 + alpha * beta / 2.0
                     + beta**2 / 8.0 + beta / 4.0)
    P, X = pop.P, pop.xbar
    cp2, cx2 = pop.cp**2, pop.cx**2
    rcx = pop.rho_pb * pop.cp * pop.cx
    m1 = P**2 * f * (cp2 + bc**2 * cx2 - 2.0 * bc * rcx)
    m2 = X**2 * f * cx2
    m3 = P**2 * f * (ac * cx2 - 2.0 * bc * rcx)
    m4 = P * X * f * (-bc * cx2 + rcx)
    m5 = X * P * f * (-bc * cx2)
    return TcConstants(
        theta=theta, bc=bc, ac=ac,
        m1=m1, m2=m2, m3=m3, m4=m4, m5=m5,
        delta1=P**2 + m1 + 2.0 * m3,
        delta2=-m4 - m5,
        delta3=m2,
        delta4=P**2 + m3,
        delta5=-m5,
    )


def _tc_det(tc: TcConstants) -> float:
    det = tc.delta1 * tc.delta3 - tc.delta2**2
    scale = max(abs(tc.delta1 * tc.delta3), tc.delta2**2)
    if abs(det) <= _SINGULAR_RTOL * max(scale, 1e-300):
        raise SingularSystem("the (q1, q2) optimality system is singular")
    return det


def tc_mse(tc: TcConstants, pop: PopulationParams, q1: float, q2: float) -> float:
    """MSE quadratic form of the family at an arbitrary weight pair."""
    return (pop.P**2
            + q1**2 * tc.delta1 + q2**2 * tc.delta3 + 2.0 * q1 * q2 * tc.delta2
            - 2.0 * q1 * tc.delta4 - 2.0 * q2 * tc.delta5)


def tc_optimal_q(tc: TcConstants) -> tuple[float, float]:
    """Stationary weight pair of the MSE quadratic form."""
    det = _tc_det(tc)
    q1 = (tc.delta3 * tc.delta4 - tc.delta2 * tc.delta5) / det
    q2 = (tc.delta1 * tc.delta5 - tc.delta2 * tc.delta4) / det
    return q1, q2


def tc_min_mse(tc: TcConstants, pop: PopulationParams) -> float:
    """Minimum MSE of the family, P^2 - (d1*d5^2 + d3*d4^2 - 2*d2*d4*d5)/det."""
    det = _tc_det(tc)
    value = pop.P**2 - (tc.delta1 * tc.delta5**2 + tc.delta3 * tc.delta4**2
                        - 2.0 * tc.delta2 * tc.delta4 * tc.delta5) / det
    if value < 0.0:
        raise NegativeMse(f"family minimum MSE evaluated negative ({value})")
    return value


def tc_bias(pop: PopulationParams, f: float, tc: TcConstants, q1: float, q2: float) -> float:
    """First-order bias of the family at a weight pair."""
    P, X = pop.P, pop.xbar
    return (P * (q1 - 1.0)
            + f * ((q2 * X * tc.bc + q1 * P * tc.ac) * pop.cx**2
                   - q1 * P * tc.bc * pop.rho_pb * pop.cp * pop.cx))


# --- power-transform estimator (alpha, beta) -------------------------------------


def _lambda_gap(pop: PopulationParams) -> float:
    gap = (pop.lambda04 - 1.0) - pop.lambda03**2
    if gap <= 0.0:
        raise DegenerateMoments(
            f"(lambda04 - 1) - lambda03^2 must be positive, got {gap}"
        )
    return gap


def t1_optimal(pop: PopulationParams) -> tuple[float, float]:
    """Optimal exponent pair of the power-transform estimator.

    alpha* = cp*(rho*(lambda04-1) - lambda03*lambda12) / (cx*gap) and
    beta*  = cp*(lambda12 - rho*lambda03) / gap, with
    gap = (lambda04-1) - lambda03^2.
    """
    gap = _lambda_gap(pop)
    if pop.cx == 0.0:
        raise DegenerateAuxiliary("cx must be nonzero")
    l3, l4, l12, rho = pop.lambda03, pop.lambda04, pop.lambda12, pop.rho_pb
    alpha = pop.cp * (rho * (l4 - 1.0) - l3 * l12) / (pop.cx * gap)
    beta = pop.cp * (l12 - rho * l3) / gap
    return alpha, beta


def t1_mse(pop: PopulationParams, f: float, alpha: float, beta: float) -> float:
    """First-order MSE of the power-transform estimator at given exponents."""
    value = f * pop.P**2 * (
        pop.cp**2
        + alpha**2 * pop.cx**2
        + beta**2 * (pop.lambda04 - 1.0)
        - 2.0 * alpha * pop.rho_pb * pop.cp * pop.cx
        - 2.0 * beta * pop.cp * pop.lambda12
        + 2.0 * alpha * beta * pop.cx * pop.lambda03
    )
    return _check_mse(value, var_usual(pop, f), "power-transform MSE")


def t1_min_mse(pop: PopulationParams, f: float) -> float:
    """Minimum MSE, f*P^2*cp^2*(1 - rho^2 - (lambda03*rho - lambda12)^2/gap)."""
    gap = _lambda_gap(pop)
    bracket = (1.0 - pop.rho_pb**2
               - (pop.lambda03 * pop.rho_pb - pop.lambda12)**2 / gap)
    return _check_mse(f * pop.P**2 * pop.cp**2 * bracket, var_usual(pop, f),
                      "power-transform minimum MSE")


def t1_bias(pop: PopulationParams, f: float, alpha: float, beta: float) -> float:
    """First-order bias of the power-transform estimator at given exponents."""
    return f * pop.P * (
        alpha * (alpha + 1.0) / 2.0 * pop.cx**2
        + beta * (beta + 1.0) / 2.0 * (pop.lambda04 - 1.0)
        + alpha * beta * pop.cx * pop.lambda03
        - alpha * pop.rho_pb * pop.cp * pop.cx
        - beta * pop.cp * pop.lambda12
    )


# --- two-channel linear class (h1, h2) -------------------------------------------


def t2_optimal(pop: PopulationParams) -> tuple[float, float]:
    """Optimal absolute offsets of the linear two-channel member.

    Equal to ``-P`` times the optimal power-transform exponents, so the two
    families share one minimum.
    """
    alpha, beta = t1_optimal(pop)
    return -pop.P * alpha, -pop.P * beta


def t2_mse(pop: PopulationParams, f: float, h1: float, h2: float) -> float:
    """MSE quadratic form of the two-channel linear member at given offsets."""
    value = f * (
        pop.P**2 * pop.cp**2
        + h1**2 * pop.cx**2
        + h2**2 * (pop.lambda04 - 1.0)
        + 2.0 * pop.P * h1 * pop.rho_pb * pop.cp * pop.cx
        + 2.0 * pop.P * h2 * pop.cp * pop.lambda12
        + 2.0 * h1 * h2 * pop.cx * pop.lambda03
    )
    return _check_mse(value, var_usual(pop, f), "two-channel linear MSE")


def t2_min_mse(pop: PopulationParams, f: float) -> float:
    """Class minimum MSE; identical to the power-transform minimum."""
    return t1_min_mse(pop, f)


def class_bias_t2(pop: PopulationParams, f: float, h3: float, h4: float, h5: float,
                  h6: float, h7: float, h8: float) -> float:
    """First-order class bias as a linear form in six second-derivative values."""
    return f * (
        pop.P * pop.cp**2 * h3
        + pop.cx**2 * h4
        + (pop.lambda04 - 1.0) * h5
        + pop.P * pop.rho_pb * pop.cp * pop.cx * h6
        + pop.cx * pop.lambda03 * h7
        + pop.P * pop.cp * pop.lambda12 * h8
    )


# --- two-term weighted family (m1, m2) --------------------------------------------


@dataclass(frozen=True)
class T3Constants:
    """Quadratic-form coefficients of the two-term weighted family.

    ``a`` and ``c`` are the second moments of the ratio and exponential
    channels, ``d`` their cross moment, ``b`` and ``e`` the channel means:

        mse(m1, m2) = P^2 * (1 + m1^2*a + m2^2*c + 2*m1*m2*d - 2*m1*b - 2*m2*e).
    """

    a: float
    b: float
    c: float
    d: float
    e: float


def t3_constants(pop: PopulationParams, f: float, gamma: float, g: float,
                 delta: float) -> T3Constants:
    """Expansion constants of the two-term family at switches (gamma, g, delta).

    Each channel mean pairs with the moments of its own deviation channel:
    ``b`` with the mean channel (rho_pb*cp*cx, cx^2), ``e`` with the variance
    channel (cp*lambda12, lambda04 - 1).
    """
    cp2, cx2 = pop.cp**2, pop.cx**2
    rcx = pop.rho_pb * pop.cp * pop.cx
    l4m1 = pop.lambda04 - 1.0
    cl12 = pop.cp * pop.lambda12
    cl03 = pop.cx * pop.lambda03
    a = 1.0 + f * (cp2 - 4.0 * gamma * g * rcx + gamma**2 * g * (2.0 * g + 1.0) * cx2)
    b = 1.0 - gamma * g * f * rcx + g * (g + 1.0) / 2.0 * gamma**2 * f * cx2
    c = 1.0 + f * (cp2 - 2.0 * delta * cl12
                   + (delta**2 + delta * (delta + 2.0)) * l4m1 / 4.0)
    d = 1.0 + f * (cp2 - delta * cl12 + delta * (delta + 2.0) / 8.0 * l4m1
                   - 2.0 * gamma * g * rcx + gamma * delta * g / 2.0 * cl03
                   + g * (g + 1.0) / 2.0 * gamma**2 * cx2)
    e = 1.0 - delta / 2.0 * f * cl12 + delta * (delta + 2.0) / 8.0 * f * l4m1
    return T3Constants(a=a, b=b, c=c, d=d, e=e)


def _t3_det(t3c: T3Constants) -> float:
    det = t3c.a * t3c.c - t3c.d**2
    scale = max(abs(t3c.a * t3c.c), t3c.d**2)
    if abs(det) <= _SINGULAR_RTOL * max(scale, 1e-300):
        raise SingularSystem("the (m1, m2) optimality system is singular "
                             "(the two channels are indistinguishable)")
    return det


def t3_mse(t3c: T3Constants, pop: PopulationParams, m1: float, m2: float) -> float:
    """MSE quadratic form of the two-term family at an arbitrary weight pair."""
    value = pop.P**2 * (1.0 + m1**2 * t3c.a + m2**2 * t3c.c + 2.0 * m1 * m2 * t3c.d
                        - 2.0 * m1 * t3c.b - 2.0 * m2 * t3c.e)
    return _check_mse(value, pop.P**2, "two-term family MSE")


def t3_bias(t3c: T3Constants, pop: PopulationParams, m1: float, m2: float) -> float:
    """First-order bias of the two-term family, -P*(1 - m1*b - m2*e)."""
    return -pop.P * (1.0 - m1 * t3c.b - m2 * t3c.e)


def t3_optimal_m(t3c: T3Constants) -> tuple[float, float]:
    """Stationary weight pair, ((bc - de)/det, (ae - bd)/det)."""
    det = _t3_det(t3c)
    m1 = (t3c.b * t3c.c - t3c.d * t3c.e) / det
    m2 = (t3c.a * t3c.e - t3c.b * t3c.d) / det
    return m1, m2


def _t3_reduction(t3c: T3Constants) -> float:
    det = _t3_det(t3c)
    if det < 0.0:
        raise SingularSystem("the (m1, m2) quadratic form is indefinite")
    return (t3c.b**2 * t3c.c - 2.0 * t3c.b * t3c.d * t3c.e + t3c.a * t3c.e**2) / det


def t3_min_mse(t3c: T3Constants, pop: PopulationParams) -> float:
    """Minimum MSE of the family, P^2*(1 - (b^2*c - 2*b*d*e + a*e^2)/det)."""
    value = pop.P**2 * (1.0 - _t3_reduction(t3c))
    if value < 0.0:
        raise NegativeMse(f"two-term family minimum MSE evaluated negative ({value})")
    return value


def t3_bias_min(t3c: T3Constants, pop: PopulationParams) -> float:
    """Bias at the optimal weights, -P*(1 - (b^2*c - 2*b*d*e + a*e^2)/det).

    This equals ``-min_mse/P``: at the stationary pair the quadratic form
    collapses so that the first-order bias and MSE share one bracket.
    """
    return -pop.P * (1.0 - _t3_reduction(t3c))


# --- efficiency ------------------------------------------------------------------


def pre(mse_baseline: float, mse: float) -> float:
    """Percent relative efficiency, 100 * mse_baseline / mse."""
    if mse <= 0.0:
        raise NonpositiveMse(f"efficiency needs a positive MSE, got {mse}")
    return 100.0 * (mse_baseline / mse)


# --- report ----------------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorTheory:
    """One report row: first-order bias, MSE, efficiency, resolved constants."""

    name: str
    bias: float
    mse: float
    pre: float | None
    constants: dict[str, float]
    formulas: dict[str, str]


@dataclass(frozen=True)
class TheoryReport:
    design: Design
    entries: tuple[EstimatorTheory, ...]

    def entry(self, name: str) -> EstimatorTheory:
        for row in self.entries:
            if row.name == name:
                return row
        raise KeyError(name)


def _t3_label(cfg: T3Config) -> str:
    def fmt(v: float) -> str:
        return str(int(v)) if float(v).is_integer() else f"{v:g}"

    return f"t3(g={fmt(cfg.g)},d={fmt(cfg.delta)})"


def theory_report(pop: PopulationParams, design: Design,
                  config: TableConfig | None = None) -> TheoryReport:
    """Bias, MSE, optimal constants and efficiency for the whole estimator set.

    Under a census design (f = 0) every first-order MSE collapses to zero and
    efficiencies are undefined (reported as None).
    """
    config = config or TableConfig()
    f = design.f
    census = f == 0.0
    baseline = var_usual(pop, f)
    entries: list[EstimatorTheory] = []

    def add(name: str, bias: float, mse: float, constants: dict[str, float],
            formulas: dict[str, str]) -> None:
        entries.append(EstimatorTheory(
            name=name, bias=bias, mse=mse,
            pre=None if census else pre(baseline, mse),
            constants=constants,
            formulas={**formulas, "pre": "100*mse(p)/mse"},
        ))

    add("p", 0.0, baseline, {},
        {"mse": "var_usual: f*P^2*cp^2", "bias": "0 (exactly unbiased)"})
    add("ta", bias_ta(pop, f), mse_ta(pop, f), {},
        {"mse": "mse_ta: f*P^2*(cp^2+cx^2-2*rho_pb*cp*cx)",
         "bias": "bias_ta: f*P*(cx^2-rho_pb*cp*cx)"})
    h1_star = tb_optimal_h1(pop)
    add("tb", 0.0, min_mse_tb(pop, f), {"h1": h1_star},
        {"mse": "min_mse_tb: f*P^2*cp^2*(1-rho_pb^2)",
         "bias": "0 (linear member is first-order unbiased)"})

    if census:
        add("tc", 0.0, 0.0, {}, {"mse": "census: f=0 collapses every first-order MSE",
                                 "bias": "census"})
    else:
        tcc = tc_constants(pop, f, config.tc.a, config.tc.b, config.tc.alpha, config.tc.beta)
        q1, q2 = tc_optimal_q(tcc)
        if config.tc.q1 is not None:
            q1 = config.tc.q1
        if config.tc.q2 is not None:
            q2 = config.tc.q2
        optimal = config.tc.q1 is None and config.tc.q2 is None
        mse_c = tc_min_mse(tcc, pop) if optimal else tc_mse(tcc, pop, q1, q2)
        add("tc", tc_bias(pop, f, tcc, q1, q2), mse_c,
            {"q1": q1, "q2": q2, "theta": tcc.theta, "bc": tcc.bc, "ac": tcc.ac},
            {"mse": "tc_min_mse: P^2-(d1*d5^2+d3*d4^2-2*d2*d4*d5)/(d1*d3-d2^2)",
             "bias": "tc_bias: P*(q1-1)+f*((q2*X*bc+q1*P*ac)*cx^2-q1*P*bc*rho_pb*cp*cx)"})

    alpha, beta = t1_optimal(pop)
    add("t1", t1_bias(pop, f, alpha, beta), t1_min_mse(pop, f),
        {"alpha": alpha, "beta": beta},
        {"mse": "t1_min_mse: f*P^2*cp^2*(1-rho^2-(lambda03*rho-lambda12)^2/gap)",
         "bias": "t1_bias at the optimal exponents"})
    h1, h2 = t2_optimal(pop)
    add("t2", 0.0, t2_min_mse(pop, f), {"h1": h1, "h2": h2},
        {"mse": "t2_min_mse == t1_min_mse (identical closed forms)",
         "bias": "0 (linear member is first-order unbiased)"})

    for cfg in config.t3_configs():
        name = _t3_label(cfg)
        if census:
            add(name, 0.0, 0.0, {}, {"mse": "census", "bias": "census"})
            continue
        t3c = t3_constants(pop, f, cfg.gamma, cfg.g, cfg.delta)
        m1, m2 = t3_optimal_m(t3c)
        if cfg.m1 is not None:
            m1 = cfg.m1
        if cfg.m2 is not None:
            m2 = cfg.m2
        optimal = cfg.m1 is None and cfg.m2 is None
        mse_3 = t3_min_mse(t3c, pop) if optimal else t3_mse(t3c, pop, m1, m2)
        bias_3 = t3_bias_min(t3c, pop) if optimal else t3_bias(t3c, pop, m1, m2)
        add(name, bias_3, mse_3,
            {"gamma": cfg.gamma, "g": cfg.g, "delta": cfg.delta, "m1": m1, "m2": m2,
             "a": t3c.a, "b": t3c.b, "c": t3c.c, "d": t3c.d, "e": t3c.e},
            {"mse": "t3_min_mse: P^2*(1-(b^2*c-2*b*d*e+a*e^2)/(a*c-d^2))",
             "bias": "t3_bias_min: -P*(1-(b^2*c-2*b*d*e+a*e^2)/(a*c-d^2))"})
    return TheoryReport(design=design, entries=tuple(entries))


# --- efficiency comparison predicates ---------------------------------------------


@dataclass(frozen=True)
class ConditionResult:
    """One dominance predicate ``mse_candidate <= mse_reference`` with slack.

    ``holds`` is None when one side could not be evaluated (for example an
    indefinite quadratic form at a large design factor); ``error`` then says
    why.
    """

    name: str
    candidate_mse: float
    reference_mse: float
    holds: bool | None
    slack: float
    guaranteed: bool | None = None
    error: str | None = None


def comparison_conditions(pop: PopulationParams, f: float,
                          config: TableConfig | None = None) -> tuple[ConditionResult, ...]:
    """Numeric evaluation of the pairwise dominance conditions.

    The first condition (power-transform/two-channel class against the usual
    estimator) carries an analytic guarantee: its slack equals
    ``f*P^2*cp^2*(rho^2 + (lambda03*rho - lambda12)^2/gap)``, a sum of squares
    whenever the moment gap is positive. The ``guaranteed`` flag reports that
    the subtracted term is indeed nonnegative. Conditions never raise: an
    unevaluable side is recorded on the result instead.
    """
    config = config or TableConfig()
    v = var_usual(pop, f)
    tol = 1e-12 * max(v, 1.0)

    def build(name: str, candidate: Callable[[], float],
              reference: Callable[[], float],
              guaranteed: bool | None = None) -> ConditionResult:
        try:
            cand = candidate()
            ref = reference()
        except (NumericalError, DataError) as exc:
            return ConditionResult(name=name, candidate_mse=math.nan,
                                   reference_mse=math.nan, holds=None,
                                   slack=math.nan, guaranteed=guaranteed,
                                   error=str(exc))
        return ConditionResult(name=name, candidate_mse=cand, reference_mse=ref,
                               holds=cand <= ref + tol, slack=ref - cand,
                               guaranteed=guaranteed)

    def first_guarantee() -> bool | None:
        try:
            gap = _lambda_gap(pop)
        except DegenerateMoments:
            return None
        subtracted = f * pop.P**2 * pop.cp**2 * (
            pop.rho_pb**2 + (pop.lambda03 * pop.rho_pb - pop.lambda12)**2 / gap
        )
        return subtracted >= -tol

    def t3_min() -> float:
        t3c = t3_constants(pop, f, config.t3_gamma, *config.t3_variants[0])
        return t3_min_mse(t3c, pop)

    def tc_min() -> float:
        tcc = tc_constants(pop, f, config.tc.a, config.tc.b,
                           config.tc.alpha, config.tc.beta)
        return tc_min_mse(tcc, pop)

    return (
        build("t1_t2_vs_usual", lambda: t1_min_mse(pop, f), lambda: v,
              guaranteed=first_guarantee()),
        build("t3_vs_usual", t3_min, lambda: v),
        build("t3_vs_t2", t3_min, lambda: t1_min_mse(pop, f)),
        build("t3_vs_tc", t3_min, tc_min),
    )


# --- rounding-sensitivity scan ------------------------------------------------------


@dataclass(frozen=True)
class PreInterval:
    """Efficiency range of one estimator over the perturbation scan."""

    name: str
    point: float | None
    low: float | None
    high: float | None
    unstable: int
    points: int


@dataclass(frozen=True)
class SensitivityReport:
    digits: int
    step: float
    intervals: tuple[PreInterval, ...]

    def interval(self, name: str) -> PreInterval:
        for row in self.intervals:
            if row.name == name:
                return row
        raise KeyError(name)


_SCAN_FIELDS = ("cp", "cx", "rho_pb", "lambda03", "lambda04", "lambda12")


def _scan_points(digits: int) -> list[tuple[float, ...]]:
    """Deterministic scan offsets: center, axis points, then all corners."""
    h = 0.5 * 10.0**-digits
    points: list[tuple[float, ...]] = [(0.0,) * 6]
    for i in range(6):
        for sign in (-1.0, 1.0):
            offsets = [0.0] * 6
            offsets[i] = sign * h
            points.append(tuple(offsets))
    points.extend(
        tuple(s * h for s in corner)
        for corner in itertools.product((-1.0, 1.0), repeat=6)
    )
    return points


def _perturbed(pop: PopulationParams, offsets: tuple[float, ...]) -> PopulationParams:
    values = dict(zip(_SCAN_FIELDS, offsets))
    cp = pop.cp + values["cp"]
    cx = pop.cx + values["cx"]
    return replace(
        pop,
        cp=cp,
        cx=cx,
        rho_pb=pop.rho_pb + values["rho_pb"],
        lambda03=pop.lambda03 + values["lambda03"],
        lambda04=pop.lambda04 + values["lambda04"],
        lambda12=pop.lambda12 + values["lambda12"],
        sp2=(cp * pop.P) ** 2,
        sx2=(cx * pop.xbar) ** 2,
    )


def sensitivity(pop: PopulationParams, f: float, config: TableConfig | None = None,
                digits: int = 3) -> SensitivityReport:
    """Efficiency intervals under last-digit rounding of the moment inputs.

    Each of (cp, cx, rho_pb, lambda03, lambda04, lambda12) is perturbed within
    plus/minus half a unit of its last reported digit (``0.5 * 10**-digits``),
    independently (axis points) and jointly (corners). Points where a theory
    expression fails (negative MSE, singular system, invalid moments) are
    counted as unstable rather than aborting the scan.
    """
    if not isinstance(digits, int) or digits < 1:
        raise InvalidConfig(f"digits must be an integer >= 1, got {digits!r}")
    config = config or TableConfig()

    def mse_tc(q: PopulationParams) -> float:
        tcc = tc_constants(q, f, config.tc.a, config.tc.b, config.tc.alpha, config.tc.beta)
        return tc_min_mse(tcc, q)

    def mse_t3(cfg: T3Config):
        def inner(q: PopulationParams) -> float:
            return t3_min_mse(t3_constants(q, f, cfg.gamma, cfg.g, cfg.delta), q)
        return inner

    targets = [
        ("ta", lambda q: mse_ta(q, f)),
        ("tb", lambda q: min_mse_tb(q, f)),
        ("tc", mse_tc),
        ("t1", lambda q: t1_min_mse(q, f)),
        ("t2", lambda q: t2_min_mse(q, f)),
    ]
    targets.extend((_t3_label(cfg), mse_t3(cfg)) for cfg in config.t3_configs())

    points = _scan_points(digits)
    intervals = []
    for name, mse_fn in targets:
        point_value: float | None = None
        low = math.inf
        high = -math.inf
        unstable = 0
        for k, offsets in enumerate(points):
            try:
                q = _perturbed(pop, offsets)
                value = pre(var_usual(q, f), mse_fn(q))
            except ToolkitError:
                unstable += 1
                continue
            if k == 0:
                point_value = value
            low = min(low, value)
            high = max(high, value)
        intervals.append(PreInterval(
            name=name,
            point=point_value,
            low=None if math.isinf(low) else low,
            high=None if math.isinf(high) else high,
            unstable=unstable,
            points=len(points),
        ))
    return SensitivityReport(digits=digits, step=0.5 * 10.0**-digits,
                             intervals=tuple(intervals))

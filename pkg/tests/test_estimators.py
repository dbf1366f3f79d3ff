import numpy as np
import pytest

from propaux import (
    EstimatorConfig,
    PopulationFrame,
    SampleStats,
    compute_population_params,
    estimate_ratio_ta,
    estimate_regression_tb,
    estimate_t1,
    estimate_t2,
    estimate_t3,
    estimate_tc,
    estimate_usual,
    evaluate,
    resolve_config,
    sample_stats,
    sampling_fraction,
    theory,
)
from propaux.config import T1Config, T2Config, T3Config, TcConfig
from propaux.errors import (
    InvalidConfig,
    NonpositiveBase,
    NonpositiveTransform,
    ZeroSampleMean,
)


@pytest.fixture(scope="module")
def pop():
    rng = np.random.default_rng(7)
    x = rng.lognormal(mean=1.0, sigma=0.4, size=60)
    prob = 1.0 / (1.0 + np.exp(-(3.0 * x - 8.0)))
    phi = (rng.uniform(size=60) < prob).astype(np.int64)
    frame = PopulationFrame(phi, x)
    return compute_population_params(frame)


def balanced_sample(pop, n=10, p=0.5):
    """A sample whose auxiliary statistics equal the population values."""
    return SampleStats(n=n, p=p, xbar_s=pop.xbar, sx2_s=pop.sx2)


class TestUsual:
    def test_identity(self):
        stats = SampleStats(n=8, p=0.625, xbar_s=3.0, sx2_s=1.0)
        assert estimate_usual(stats).value == 0.625

    def test_census_returns_population_proportion(self, rng):
        x = rng.lognormal(size=25)
        phi = (rng.uniform(size=25) < 0.5).astype(np.int64)
        if not 0 < phi.sum() < 25:
            phi[0] = 1 - phi[0]
        frame = PopulationFrame(phi, x)
        params = compute_population_params(frame)
        stats = sample_stats(frame, np.arange(25))
        assert estimate_usual(stats).value == params.P


class TestRatio:
    def test_balanced_sample_returns_p(self, pop):
        stats = balanced_sample(pop)
        assert estimate_ratio_ta(stats, pop).value == stats.p

    def test_direct_arithmetic(self, pop):
        import dataclasses
        pop10 = dataclasses.replace(pop, xbar=10.0, sx2=(pop.cx * 10.0) ** 2)
        stats = SampleStats(n=4, p=0.5, xbar_s=8.0, sx2_s=2.0)
        assert estimate_ratio_ta(stats, pop10).value == pytest.approx(0.625, rel=1e-15)

    def test_zero_sample_mean(self, pop):
        stats = SampleStats(n=4, p=0.5, xbar_s=0.0, sx2_s=2.0)
        with pytest.raises(ZeroSampleMean):
            estimate_ratio_ta(stats, pop)


class TestRegression:
    def test_balanced_sample_returns_p(self, pop):
        stats = balanced_sample(pop)
        assert estimate_regression_tb(stats, pop).value == stats.p

    def test_zero_correlation_is_inert(self, pop):
        import dataclasses
        pop0 = dataclasses.replace(pop, rho_pb=0.0)
        stats = SampleStats(n=10, p=0.3, xbar_s=pop0.xbar * 1.3, sx2_s=pop0.sx2)
        assert estimate_regression_tb(stats, pop0).value == stats.p

    def test_records_resolved_slope(self, pop):
        stats = balanced_sample(pop)
        estimate = estimate_regression_tb(stats, pop)
        assert estimate.config_used.tb.h1 == pytest.approx(
            theory.tb_optimal_h1(pop), rel=1e-15)


class TestTcFamily:
    def test_reduces_to_ratio_estimator(self, pop):
        cfg = EstimatorConfig(kind="tc", tc=TcConfig(a=1.0, b=0.0, alpha=1.0,
                                                     beta=0.0, q1=1.0, q2=0.0))
        stats = SampleStats(n=10, p=0.4, xbar_s=0.8 * pop.xbar, sx2_s=pop.sx2)
        assert estimate_tc(stats, pop, cfg).value == estimate_ratio_ta(stats, pop).value

    def test_fully_inert_transform_returns_p(self, pop):
        cfg = EstimatorConfig(kind="tc", tc=TcConfig(a=1.0, b=0.0, alpha=0.0,
                                                     beta=0.0, q1=1.0, q2=0.0))
        stats = SampleStats(n=10, p=0.4, xbar_s=0.8 * pop.xbar, sx2_s=pop.sx2)
        assert estimate_tc(stats, pop, cfg).value == 0.4

    def test_balanced_sample_gives_q1_p(self, pop):
        cfg = EstimatorConfig(kind="tc", tc=TcConfig(q1=0.9, q2=4.2))
        stats = balanced_sample(pop, p=0.4)
        assert estimate_tc(stats, pop, cfg).value == pytest.approx(0.9 * 0.4, rel=1e-15)

    def test_nonpositive_transform(self, pop):
        cfg = EstimatorConfig(kind="tc", tc=TcConfig(q1=1.0, q2=0.0))
        stats = SampleStats(n=4, p=0.5, xbar_s=-1.0, sx2_s=1.0)
        with pytest.raises(NonpositiveTransform):
            estimate_tc(stats, pop, cfg)

    def test_optimal_weights_resolved_and_recorded(self, pop):
        cfg = EstimatorConfig(kind="tc")
        stats = balanced_sample(pop)
        estimate = estimate_tc(stats, pop, cfg)
        f = sampling_fraction(stats.n, pop.N)
        constants = theory.tc_constants(pop, f, 1.0, 0.0, 1.0, 0.0)
        q1, q2 = theory.tc_optimal_q(constants)
        assert estimate.config_used.tc.q1 == pytest.approx(q1, rel=1e-15)
        assert estimate.config_used.tc.q2 == pytest.approx(q2, rel=1e-15)


class TestT1:
    def test_zero_exponents_return_p(self, pop):
        cfg = EstimatorConfig(kind="t1", t1=T1Config(alpha=0.0, beta=0.0))
        stats = SampleStats(n=10, p=0.7, xbar_s=0.5 * pop.xbar, sx2_s=2.0 * pop.sx2)
        assert estimate_t1(stats, pop, cfg).value == 0.7

    def test_balanced_sample_returns_p_for_any_exponents(self, pop):
        cfg = EstimatorConfig(kind="t1", t1=T1Config(alpha=2.7, beta=-1.3))
        stats = balanced_sample(pop, p=0.3)
        assert estimate_t1(stats, pop, cfg).value == 0.3

    def test_reduces_to_ratio_estimator(self, pop):
        cfg = EstimatorConfig(kind="t1", t1=T1Config(alpha=1.0, beta=0.0))
        stats = SampleStats(n=10, p=0.4, xbar_s=0.8 * pop.xbar, sx2_s=0.5 * pop.sx2)
        assert estimate_t1(stats, pop, cfg).value == estimate_ratio_ta(stats, pop).value

    def test_nonpositive_bases(self, pop):
        cfg = EstimatorConfig(kind="t1", t1=T1Config(alpha=0.5, beta=0.5))
        with pytest.raises(NonpositiveBase):
            estimate_t1(SampleStats(n=4, p=0.5, xbar_s=-2.0, sx2_s=1.0), pop, cfg)
        with pytest.raises(NonpositiveBase):
            estimate_t1(SampleStats(n=4, p=0.5, xbar_s=2.0, sx2_s=0.0), pop, cfg)


class TestT2:
    def test_balanced_sample_returns_p(self, pop):
        cfg = EstimatorConfig(kind="t2")
        stats = balanced_sample(pop, p=0.4)
        assert estimate_t2(stats, pop, cfg).value == 0.4

    def test_nests_the_regression_member(self, pop):
        h1 = theory.tb_optimal_h1(pop)
        cfg = EstimatorConfig(kind="t2", t2=T2Config(h1=h1, h2=0.0))
        stats = SampleStats(n=10, p=0.4, xbar_s=1.2 * pop.xbar, sx2_s=0.7 * pop.sx2)
        assert estimate_t2(stats, pop, cfg).value == estimate_regression_tb(
            stats, pop).value

    def test_optimal_offsets_recorded(self, pop):
        stats = balanced_sample(pop)
        estimate = estimate_t2(stats, pop, EstimatorConfig(kind="t2"))
        h1, h2 = theory.t2_optimal(pop)
        assert estimate.config_used.t2.h1 == pytest.approx(h1, rel=1e-15)
        assert estimate.config_used.t2.h2 == pytest.approx(h2, rel=1e-15)


class TestT3:
    def test_inert_switches_with_half_weights(self, pop):
        cfg = EstimatorConfig(kind="t3", t3=T3Config(gamma=1.0, g=0.0, delta=0.0,
                                                     m1=0.5, m2=0.5))
        stats = SampleStats(n=10, p=0.6, xbar_s=0.4 * pop.xbar, sx2_s=3.0 * pop.sx2)
        assert estimate_t3(stats, pop, cfg).value == 0.6

    def test_balanced_sample_gives_weight_sum_times_p(self, pop):
        cfg = EstimatorConfig(kind="t3", t3=T3Config(m1=0.7, m2=0.4))
        stats = balanced_sample(pop, p=0.5)
        assert estimate_t3(stats, pop, cfg).value == pytest.approx(
            (0.7 + 0.4) * 0.5, rel=1e-15)

    def test_nonpositive_shifted_mean(self, pop):
        cfg = EstimatorConfig(kind="t3", t3=T3Config(gamma=2.0, m1=0.5, m2=0.5))
        stats = SampleStats(n=4, p=0.5, xbar_s=-pop.xbar, sx2_s=pop.sx2)
        with pytest.raises(NonpositiveBase):
            estimate_t3(stats, pop, cfg)

    def test_optimal_weights_recorded(self, pop):
        stats = balanced_sample(pop)
        estimate = estimate_t3(stats, pop, EstimatorConfig(kind="t3"))
        f = sampling_fraction(stats.n, pop.N)
        constants = theory.t3_constants(pop, f, 1.0, 1.0, 1.0)
        m1, m2 = theory.t3_optimal_m(constants)
        assert estimate.config_used.t3.m1 == pytest.approx(m1, rel=1e-15)
        assert estimate.config_used.t3.m2 == pytest.approx(m2, rel=1e-15)


class TestConfigValidation:
    def test_unknown_kind(self):
        with pytest.raises(InvalidConfig):
            EstimatorConfig(kind="bogus")

    def test_mismatched_subconfig(self):
        with pytest.raises(InvalidConfig):
            EstimatorConfig(kind="t1", t3=T3Config())

    def test_plain_kinds_take_no_subconfig(self):
        with pytest.raises(InvalidConfig):
            EstimatorConfig(kind="usual", tc=TcConfig())

    def test_dispatcher_and_kind_guards(self, pop):
        stats = balanced_sample(pop)
        cfg = EstimatorConfig(kind="t1")
        assert evaluate(stats, pop, cfg).value == stats.p
        with pytest.raises(InvalidConfig):
            estimate_tc(stats, pop, cfg)

    def test_resolution_is_idempotent(self, pop):
        f = sampling_fraction(10, pop.N)
        for kind in ("usual", "ta", "tb", "tc", "t1", "t2", "t3"):
            cfg = resolve_config(EstimatorConfig(kind=kind), pop, f)
            assert resolve_config(cfg, pop, f) == cfg

    def test_kv_parsing_round_trip(self):
        cfg = TcConfig.from_kv("a=1,b=0.5,alpha=2,beta=0,q1=optimal,q2=3.5")
        assert cfg == TcConfig(a=1.0, b=0.5, alpha=2.0, beta=0.0, q1=None, q2=3.5)
        with pytest.raises(ValueError):
            TcConfig.from_kv("bogus=1")
        with pytest.raises(ValueError):
            T3Config.from_kv("gamma=x")


class TestCensusInertness:
    def test_every_estimator_returns_p_on_census_with_inert_config(self):
        rng = np.random.default_rng(12)
        x = rng.lognormal(mean=0.5, sigma=0.5, size=30)
        phi = (rng.uniform(size=30) < 0.4).astype(np.int64)
        if not 0 < phi.sum() < 30:
            phi[0] = 1 - phi[0]
        frame = PopulationFrame(phi, x)
        params = compute_population_params(frame)
        stats = sample_stats(frame, np.arange(30))
        p = params.P
        assert estimate_usual(stats).value == p
        assert estimate_ratio_ta(stats, params).value == p
        assert estimate_regression_tb(stats, params).value == p
        inert_tc = EstimatorConfig(kind="tc", tc=TcConfig(q1=1.0, q2=0.0))
        assert estimate_tc(stats, params, inert_tc).value == p
        cfg1 = EstimatorConfig(kind="t1", t1=T1Config(alpha=1.4, beta=-0.2))
        assert estimate_t1(stats, params, cfg1).value == p
        assert estimate_t2(stats, params, EstimatorConfig(kind="t2")).value == p
        cfg3 = EstimatorConfig(kind="t3", t3=T3Config(g=0.0, delta=0.0, m1=0.5, m2=0.5))
        assert estimate_t3(stats, params, cfg3).value == p

import itertools
import math

import numpy as np
import pytest

from propaux import (
    EstimatorConfig,
    PopulationFrame,
    SyntheticSpec,
    compute_population_params,
    draw_srswor,
    enumerate_exact,
    generate_population,
    replicate_rng,
    run_experiment,
)
from propaux.errors import DegenerateGeneration, InvalidConfig, InvalidDesign, TooLarge

from _oracles import binomial_se


TINY = PopulationFrame(np.array([1, 0, 0, 1, 0, 1]),
                       np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]))


class TestDraw:
    def test_census_draw_is_full_index_set(self):
        rng = replicate_rng(0, 0)
        assert draw_srswor(TINY, 6, rng).tolist() == [0, 1, 2, 3, 4, 5]

    def test_indices_are_distinct_and_sorted(self):
        rng = replicate_rng(5, 1)
        for _ in range(50):
            idx = draw_srswor(TINY, 3, rng)
            assert len(set(idx.tolist())) == 3
            assert idx.tolist() == sorted(idx.tolist())

    def test_invalid_sizes(self):
        rng = replicate_rng(0, 0)
        with pytest.raises(InvalidDesign):
            draw_srswor(TINY, 1, rng)
        with pytest.raises(InvalidDesign):
            draw_srswor(TINY, 7, rng)

    def test_subset_frequencies_are_uniform(self):
        # all 6 pairs from a population of 4; each replicate uses its own stream
        frame = PopulationFrame(np.array([1, 0, 1, 0]), np.array([1.0, 2.0, 3.0, 4.0]))
        draws = 60_000
        counts: dict[tuple[int, int], int] = {}
        for i in range(draws):
            idx = tuple(draw_srswor(frame, 2, replicate_rng(123, i)).tolist())
            counts[idx] = counts.get(idx, 0) + 1
        assert len(counts) == 6
        expect = draws / 6
        allow = 3.0 * binomial_se(None, draws, 1.0 / 6.0)
        for subset, count in counts.items():
            assert abs(count - expect) <= allow, (subset, count)

    def test_fixed_seed_reproduces_subset_sequence(self):
        first = [draw_srswor(TINY, 3, replicate_rng(9, i)).tolist() for i in range(40)]
        second = [draw_srswor(TINY, 3, replicate_rng(9, i)).tolist() for i in range(40)]
        assert first == second


class TestEnumeration:
    def test_mean_of_p_is_exactly_the_proportion(self, rng):
        from conftest import random_frame
        frame = random_frame(rng, size=9)
        report = enumerate_exact(frame, 3, (EstimatorConfig(kind="usual", label="p"),))
        params = compute_population_params(frame)
        assert report.row("p").mean == pytest.approx(params.P, rel=1e-12)

    def test_variance_identity_on_hand_frame(self):
        report = enumerate_exact(TINY, 2, (EstimatorConfig(kind="usual", label="p"),))
        assert report.replicates == 15
        f = 1 / 2 - 1 / 6
        expect = f * 6 * 0.5 * 0.5 / 5
        assert report.row("p").mse == pytest.approx(expect, rel=1e-12)
        assert report.row("p").bias == pytest.approx(0.0, abs=1e-15)

    def test_rejects_oversized_enumerations(self):
        rng = np.random.default_rng(0)
        x = rng.lognormal(size=40)
        phi = (rng.uniform(size=40) < 0.5).astype(np.int64)
        frame = PopulationFrame(phi, x)
        with pytest.raises(TooLarge):
            enumerate_exact(frame, 20)

    def test_monte_carlo_agrees_with_enumeration(self):
        configs = (EstimatorConfig(kind="usual", label="p"), EstimatorConfig(kind="ta"))
        exact = enumerate_exact(TINY, 2, configs)
        mc = run_experiment(TINY, 2, configs, reps=100_000, seed=31)
        for name in ("p", "ta"):
            se = mc.row(name).mse_se
            assert abs(mc.row(name).mse - exact.row(name).mse) <= 3.0 * se
        # the sample proportion stays unbiased within Monte Carlo noise
        p_row = mc.row("p")
        se_mean = math.sqrt(p_row.mse / p_row.replicates)
        assert abs(p_row.mean - exact.true_p) <= 3.0 * se_mean

    def test_exact_moments_track_first_order_theory(self):
        # moderate frame, every subset enumerated: the linear estimators hit
        # their closed forms exactly, the nonlinear ones stay inside the band
        frame = generate_population(
            SyntheticSpec(size=16, link_intercept=-3.0, link_slope=3.0), seed=8)
        report = enumerate_exact(frame, 8)
        assert report.row("p").ratio == pytest.approx(1.0, rel=1e-9)
        assert report.row("tb").ratio == pytest.approx(1.0, rel=1e-9)
        for row in report.rows:
            assert 0.85 <= row.ratio <= 1.15, (row.name, row.ratio)

    def test_failure_tallies_match_hand_count(self):
        # mixed-sign auxiliary: some pairs have zero or negative means
        frame = PopulationFrame(
            np.array([1, 0, 1, 0, 1, 0, 1, 0]),
            np.array([-5.0, -4.0, -3.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
        )
        configs = (EstimatorConfig(kind="ta"),
                   EstimatorConfig(kind="t1"))
        report = enumerate_exact(frame, 2, configs)
        zero_mean = sum(1 for a, b in itertools.combinations(frame.x.tolist(), 2)
                        if a + b == 0)
        nonpositive = sum(1 for a, b in itertools.combinations(frame.x.tolist(), 2)
                          if a + b <= 0)
        assert report.row("ta").failures == zero_mean
        assert report.row("t1").failures == nonpositive
        assert report.row("ta").replicates == 28 - zero_mean


class TestRunExperiment:
    def test_census_replicates_are_constant(self):
        report = run_experiment(TINY, 6, reps=150, seed=4)
        assert report.row("p").mse == 0.0
        for row in report.rows:
            assert row.mse == pytest.approx(0.0, abs=1e-28)
            assert row.failures == 0

    def test_rejects_tiny_replicate_counts(self):
        with pytest.raises(InvalidConfig):
            run_experiment(TINY, 2, reps=10, seed=0)

    def test_same_seed_is_bit_identical(self, rng):
        from conftest import random_frame
        frame = random_frame(rng, size=80)
        a = run_experiment(frame, 12, reps=300, seed=99)
        b = run_experiment(frame, 12, reps=300, seed=99)
        assert a == b

    def test_worker_count_does_not_change_the_report(self, rng):
        from conftest import random_frame
        frame = random_frame(rng, size=80)
        serial = run_experiment(frame, 12, reps=400, seed=5, workers=1)
        threaded = run_experiment(frame, 12, reps=400, seed=5, workers=4)
        assert serial == threaded

    def test_report_carries_rng_provenance(self):
        report = run_experiment(TINY, 3, reps=120, seed=8)
        assert report.seed == 8
        assert "pcg64" in report.rng.lower()
        assert not report.exact

    def test_duplicate_labels_rejected(self):
        configs = (EstimatorConfig(kind="usual"), EstimatorConfig(kind="usual"))
        with pytest.raises(InvalidConfig):
            run_experiment(TINY, 2, configs, reps=100, seed=0)

    def test_regression_band_small_population(self):
        frame = generate_population(SyntheticSpec(size=600), seed=17)
        report = run_experiment(frame, 40, reps=4000, seed=11)
        row = report.row("tb")
        assert row.failures == 0
        assert 0.85 <= row.ratio <= 1.15

    def test_regression_theory_within_ten_percent_at_scale(self, experiment):
        # the first-order regression-class MSE tracks 20000 replicates closely
        _, report = experiment
        assert abs(report.row("tb").ratio - 1.0) <= 0.10


class TestGeneratePopulation:
    def test_determinism(self):
        spec = SyntheticSpec(size=200)
        assert generate_population(spec, seed=3) == generate_population(spec, seed=3)

    def test_flat_link_gives_near_zero_correlation(self):
        spec = SyntheticSpec(size=2000, link_intercept=0.0, link_slope=0.0)
        params = compute_population_params(generate_population(spec, seed=21))
        assert abs(params.rho_pb) < 0.05

    def test_steep_link_gives_strong_correlation(self):
        spec = SyntheticSpec(size=2000)
        params = compute_population_params(generate_population(spec, seed=21))
        assert params.rho_pb > 0.5

    def test_symmetric_shape_has_small_skewness(self):
        spec = SyntheticSpec(size=4000, aux_shape="symmetric", aux_location=10.0,
                             aux_scale=1.0, link_intercept=-20.0, link_slope=2.0)
        params = compute_population_params(generate_population(spec, seed=2))
        assert abs(params.lambda03) < 0.2

    def test_retry_budget_exhaustion(self):
        spec = SyntheticSpec(size=10, link_intercept=-1000.0, link_slope=0.0,
                             max_retries=3)
        with pytest.raises(DegenerateGeneration):
            generate_population(spec, seed=0)

    def test_invalid_specs(self):
        with pytest.raises(InvalidConfig):
            SyntheticSpec(size=5)
        with pytest.raises(InvalidConfig):
            SyntheticSpec(size=100, aux_shape="uniform")

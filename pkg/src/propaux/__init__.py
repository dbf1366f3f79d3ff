"""Finite-population proportion estimation with auxiliary information.

The package evaluates a family of proportion estimators for simple random
sampling without replacement, their first-order bias/MSE theory with
population-optimal constants, percent-relative-efficiency reporting, a
rounding-sensitivity scan, and two independent verification oracles (exact
subset enumeration and seeded Monte Carlo).
"""

__version__ = "0.1.0"

from .config import T1Config, T2Config, T3Config, TableConfig, TbConfig, TcConfig
from .errors import DataError, NumericalError, ToolkitError
from .estimators import (
    Estimate,
    EstimatorConfig,
    estimate_ratio_ta,
    estimate_regression_tb,
    estimate_t1,
    estimate_t2,
    estimate_t3,
    estimate_tc,
    estimate_usual,
    evaluate,
    resolve_config,
)
from .montecarlo import (
    DEFAULT_CONFIGS,
    SimulationReport,
    SyntheticSpec,
    draw_srswor,
    enumerate_exact,
    generate_population,
    replicate_rng,
    run_experiment,
)
from .population import (
    Design,
    PopulationFrame,
    PopulationParams,
    SampleStats,
    central_moment,
    compute_population_params,
    sample_stats,
    sampling_fraction,
)
from .theory import (
    SensitivityReport,
    T3Constants,
    TcConstants,
    TheoryReport,
    bias_ta,
    class_bias_t2,
    class_bias_tb,
    comparison_conditions,
    min_mse_tb,
    mse_ta,
    pre,
    sensitivity,
    t1_bias,
    t1_min_mse,
    t1_mse,
    t1_optimal,
    t2_min_mse,
    t2_mse,
    t2_optimal,
    t3_bias,
    t3_bias_min,
    t3_constants,
    t3_min_mse,
    t3_mse,
    t3_optimal_m,
    tb_optimal_h1,
    tc_bias,
    tc_constants,
    tc_min_mse,
    tc_mse,
    tc_optimal_q,
    theory_report,
    var_usual,
)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Ground-truth oracles: exact SRSWOR enumeration and seeded Monte Carlo.

Determinism contract
--------------------
Every replicate draws from its own random stream, derived only from the
experiment seed and the replicate index (``SeedSequence(seed, spawn_key=(0, i))``
feeding a PCG64 generator). Aggregation runs over replicates in index order
after all replicates finish, so a report is a pure function of
``(population, n, configs, reps, seed)`` regardless of how many workers
computed it. Synthetic-population generation uses the disjoint spawn keys
``(1, attempt)`` so a shared seed never aliases replicate streams.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import theory
from .errors import (
    DataError,
    DegenerateGeneration,
    InvalidConfig,
    InvalidDesign,
    TooLarge,
)
from .estimators import EstimatorConfig, evaluate, resolve_config
from .population import (
    PopulationFrame,
    PopulationParams,
    compute_population_params,
    sample_stats,
    sampling_fraction,
)

_LOGGER = logging.getLogger(__name__)

RNG_SCHEME = "pcg64:SeedSequence(seed, spawn_key=(0, replicate))"

ENUMERATION_LIMIT = 10**7

#: Estimator set used when a caller does not pass explicit configurations.
DEFAULT_CONFIGS: tuple[EstimatorConfig, ...] = (
    EstimatorConfig(kind="usual", label="p"),
    EstimatorConfig(kind="ta"),
    EstimatorConfig(kind="tb"),
    EstimatorConfig(kind="tc"),
    EstimatorConfig(kind="t1"),
    EstimatorConfig(kind="t2"),
    EstimatorConfig(kind="t3"),
)


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """The deterministic random stream of one replicate."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(0, replicate)))
    )


def _generation_rng(seed: int, attempt: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(1, attempt)))
    )


def draw_srswor(frame: PopulationFrame, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a uniformly distributed n-subset of unit indices (sorted)."""
    if not 2 <= n <= frame.size:
        raise InvalidDesign(f"need 2 <= n <= N, got n={n}, N={frame.size}")
    return np.sort(rng.choice(frame.size, size=n, replace=False))


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic population with controllable moments.

    ``aux_shape`` selects the auxiliary distribution: ``skewed-positive`` is
    lognormal with log-scale ``aux_scale`` (nonzero skewness, positive values),
    ``symmetric`` is normal with mean ``aux_location`` and standard deviation
    ``aux_scale``. The attribute is 1 with probability
    ``logistic(link_intercept + link_slope * x)``, drawn by thresholding one
    uniform variate per unit. ``target_rho`` is a recorded hint only.
    """

    size: int
    aux_shape: str = "skewed-positive"
    aux_scale: float = 0.4
    aux_location: float = 0.0
    link_intercept: float = -8.0
    link_slope: float = 8.0
    target_rho: float | None = None
    max_retries: int = 100

    def __post_init__(self):
        if self.size < 10:
            raise InvalidConfig("synthetic population size must be at least 10")
        if self.aux_shape not in ("skewed-positive", "symmetric"):
            raise InvalidConfig(f"unknown aux_shape {self.aux_shape!r}")
        if self.aux_scale <= 0.0:
            raise InvalidConfig("aux_scale must be positive")


def generate_population(spec: SyntheticSpec, seed: int) -> PopulationFrame:
    """Deterministically generate a frame satisfying 0 < P < 1.

    Draws are retried with fresh attempt streams when the attribute comes out
    constant; the retry count and the achieved moment ratios are logged.
    """
    for attempt in range(spec.max_retries):
        rng = _generation_rng(seed, attempt)
        if spec.aux_shape == "skewed-positive":
            x = rng.lognormal(mean=spec.aux_location, sigma=spec.aux_scale, size=spec.size)
        else:
            x = rng.normal(loc=spec.aux_location, scale=spec.aux_scale, size=spec.size)
        logits = np.clip(spec.link_intercept + spec.link_slope * x, -700.0, 700.0)
        prob = 1.0 / (1.0 + np.exp(-logits))
        phi = (rng.uniform(size=spec.size) < prob).astype(np.int64)
        total = int(phi.sum())
        if 0 < total < spec.size and np.unique(x).size > 1:
            frame = PopulationFrame(phi, x)
            achieved = compute_population_params(frame)
            _LOGGER.info(
                "generated population: size=%d attempt=%d P=%.4f rho_pb=%.4f "
                "lambda03=%.4f lambda04=%.4f lambda12=%.4f (target rho %s)",
                spec.size, attempt, achieved.P, achieved.rho_pb,
                achieved.lambda03, achieved.lambda04, achieved.lambda12,
                spec.target_rho,
            )
            return frame
    raise DegenerateGeneration(
        f"no usable population after {spec.max_retries} attempts; the link "
        "saturates the attribute"
    )


@dataclass(frozen=True)
class EstimatorRun:
    """Aggregated result of one estimator across replicates or subsets."""

    name: str
    replicates: int
    failures: int
    mean: float
    bias: float
    mse: float
    mse_se: float
    theory_mse: float
    ratio: float


@dataclass(frozen=True)
class SimulationReport:
    n: int
    population_size: int
    sampling_fraction: float
    true_p: float
    replicates: int
    exact: bool
    seed: int | None
    rng: str | None
    rows: tuple[EstimatorRun, ...]

    def row(self, name: str) -> EstimatorRun:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)


def _theory_mse(cfg: EstimatorConfig, pop: PopulationParams, f: float) -> float:
    """First-order MSE at exactly the constants the simulation uses."""
    if cfg.kind == "usual":
        return theory.var_usual(pop, f)
    if cfg.kind == "ta":
        return theory.mse_ta(pop, f)
    if cfg.kind == "tb":
        return theory.t2_mse(pop, f, cfg.tb.h1, 0.0)
    if cfg.kind == "tc":
        constants = theory.tc_constants(pop, f, cfg.tc.a, cfg.tc.b, cfg.tc.alpha, cfg.tc.beta)
        return theory.tc_mse(constants, pop, cfg.tc.q1, cfg.tc.q2)
    if cfg.kind == "t1":
        return theory.t1_mse(pop, f, cfg.t1.alpha, cfg.t1.beta)
    if cfg.kind == "t2":
        return theory.t2_mse(pop, f, cfg.t2.h1, cfg.t2.h2)
    if cfg.kind == "t3":
        constants = theory.t3_constants(pop, f, cfg.t3.gamma, cfg.t3.g, cfg.t3.delta)
        return theory.t3_mse(constants, pop, cfg.t3.m1, cfg.t3.m2)
    raise InvalidConfig(f"unknown estimator kind {cfg.kind!r}")


def _unique_names(configs: Sequence[EstimatorConfig]) -> list[str]:
    names = [cfg.name for cfg in configs]
    if len(set(names)) != len(names):
        raise InvalidConfig(f"estimator labels must be unique, got {names}")
    return names


def _aggregate(names: list[str], resolved: Sequence[EstimatorConfig],
               values: np.ndarray, failed: np.ndarray, pop: PopulationParams,
               f: float, true_p: float,
               weights: np.ndarray | None = None,
               exact: bool = False) -> list[EstimatorRun]:
    rows = []
    for j, (name, cfg) in enumerate(zip(names, resolved)):
        ok = ~failed[j]
        v = values[j, ok]
        count = int(ok.sum())
        if count == 0:
            raise DataError(f"estimator {name} failed on every replicate")
        err = v - true_p
        if exact:
            w = weights[ok] / weights[ok].sum()
            mean = float(np.dot(w, v))
            mse = float(np.dot(w, err**2))
            se = 0.0
        else:
            mean = float(v.mean())
            mse = float(np.mean(err**2))
            se = float(np.std(err**2, ddof=1) / math.sqrt(count)) if count > 1 else 0.0
        tmse = _theory_mse(cfg, pop, f)
        rows.append(EstimatorRun(
            name=name,
            replicates=count,
            failures=int(failed[j].sum()),
            mean=mean,
            bias=mean - true_p,
            mse=mse,
            mse_se=se,
            theory_mse=tmse,
            ratio=mse / tmse if tmse > 0 else math.nan,
        ))
    return rows


def enumerate_exact(frame: PopulationFrame, n: int,
                    configs: Sequence[EstimatorConfig] | None = None) -> SimulationReport:
    """Exact expectation and MSE of each estimator over every n-subset.

    Refuses populations with more than ``ENUMERATION_LIMIT`` subsets. Subsets
    where an estimator's precondition fails are tallied per estimator and the
    moments are taken over the remaining subsets.
    """
    if not 2 <= n <= frame.size:
        raise InvalidDesign(f"need 2 <= n <= N, got n={n}, N={frame.size}")
    total = math.comb(frame.size, n)
    if total > ENUMERATION_LIMIT:
        raise TooLarge(f"{total} subsets exceed the enumeration limit {ENUMERATION_LIMIT}")
    configs = tuple(configs) if configs is not None else DEFAULT_CONFIGS
    names = _unique_names(configs)
    pop = compute_population_params(frame)
    f = sampling_fraction(n, frame.size)
    resolved = [resolve_config(cfg, pop, f) for cfg in configs]

    values = np.zeros((len(resolved), total))
    failed = np.zeros((len(resolved), total), dtype=bool)
    for k, subset in enumerate(itertools.combinations(range(frame.size), n)):
        stats = sample_stats(frame, np.array(subset, dtype=np.int64))
        for j, cfg in enumerate(resolved):
            try:
                values[j, k] = evaluate(stats, pop, cfg).value
            except DataError:
                failed[j, k] = True
    weights = np.ones(total)
    rows = _aggregate(names, resolved, values, failed, pop, f, pop.P,
                      weights=weights, exact=True)
    return SimulationReport(
        n=n, population_size=frame.size, sampling_fraction=f, true_p=pop.P,
        replicates=total, exact=True, seed=None, rng=None, rows=tuple(rows),
    )


def run_experiment(frame: PopulationFrame, n: int,
                   configs: Sequence[EstimatorConfig] | None = None,
                   reps: int = 1000, seed: int = 0,
                   workers: int = 1) -> SimulationReport:
    """Seeded Monte Carlo over independent SRSWOR replicates.

    The report is bit-identical for a given seed whatever ``workers`` is:
    replicate ``i`` always consumes the stream derived from ``(seed, i)`` and
    the final reduction runs in replicate order.
    """
    if reps < 100:
        raise InvalidConfig(f"need at least 100 replicates, got {reps}")
    if not 2 <= n <= frame.size:
        raise InvalidDesign(f"need 2 <= n <= N, got n={n}, N={frame.size}")
    configs = tuple(configs) if configs is not None else DEFAULT_CONFIGS
    names = _unique_names(configs)
    pop = compute_population_params(frame)
    f = sampling_fraction(n, frame.size)
    resolved = [resolve_config(cfg, pop, f) for cfg in configs]

    values = np.zeros((len(resolved), reps))
    failed = np.zeros((len(resolved), reps), dtype=bool)

    def run_chunk(start: int, stop: int) -> None:
        for i in range(start, stop):
            rng = replicate_rng(seed, i)
            stats = sample_stats(frame, draw_srswor(frame, n, rng))
            for j, cfg in enumerate(resolved):
                try:
                    values[j, i] = evaluate(stats, pop, cfg).value
                except DataError:
                    failed[j, i] = True

    if workers <= 1:
        run_chunk(0, reps)
    else:
        chunk = -(-reps // workers)
        bounds = [(k * chunk, min((k + 1) * chunk, reps)) for k in range(workers)]
        bounds = [(a, b) for a, b in bounds if a < b]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for future in [pool.submit(run_chunk, a, b) for a, b in bounds]:
                future.result()

    rows = _aggregate(names, resolved, values, failed, pop, f, pop.P)
    return SimulationReport(
        n=n, population_size=frame.size, sampling_fraction=f, true_p=pop.P,
        replicates=reps, exact=False, seed=seed, rng=RNG_SCHEME, rows=tuple(rows),
    )

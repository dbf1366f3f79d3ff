"""Finite-population data model and the moments the estimator theory consumes.

A population is a list of records ``(phi, x)`` where ``phi`` is a binary
attribute (the study variable) and ``x`` a quantitative auxiliary variable.
Conventions used throughout:

- ``P = A/N`` is the population proportion with the attribute and
  ``p = a/n`` its sample counterpart.
- Variances ``sp2``, ``sx2`` (population) and ``sx2_s`` (sample) use the
  survey-sampling divisor ``N-1`` (resp. ``n-1``), under which the usual
  estimator's variance identity ``Var(p) = (1/n - 1/N) * sp2`` is exact.
- The standardized moment ratios use divisor-``N`` central moments
  ``mu_rs = mean((phi-P)^r * (x-xbar)^s)``:
  ``rho_pb = mu_11 / sqrt(mu_20*mu_02)`` (point-biserial correlation),
  ``lambda03 = mu_03 / mu_02^1.5`` (auxiliary skewness),
  ``lambda04 = mu_04 / mu_02^2`` (auxiliary kurtosis), and
  ``lambda12 = mu_12 / (sqrt(mu_20) * mu_02)``.

All values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateAttribute,
    DegenerateAuxiliary,
    DuplicateIndex,
    IndexOutOfRange,
    InvalidDesign,
    SchemaError,
    ZeroMean,
)

_REL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PopulationFrame:
    """The full finite population: parallel arrays of ``phi`` and ``x``."""

    phi: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.int64)
        x = np.asarray(self.x, dtype=np.float64)
        if phi.ndim != 1 or x.ndim != 1 or phi.shape != x.shape:
            raise SchemaError("phi and x must be one-dimensional and equally long")
        if phi.size < 2:
            raise SchemaError("a population needs at least 2 units")
        if not np.all((phi == 0) | (phi == 1)):
            raise SchemaError("every attribute value must be exactly 0 or 1")
        if not np.all(np.isfinite(x)):
            raise SchemaError("every auxiliary value must be finite")
        phi.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "x", x)

    @property
    def size(self) -> int:
        return int(self.phi.size)

    @classmethod
    def from_records(cls, records: Iterable[tuple[int, float]]) -> "PopulationFrame":
        rows = list(records)
        if not rows:
            raise SchemaError("a population needs at least 2 units")
        phi, x = zip(*rows)
        return cls(np.array(phi), np.array(x))

    def records(self) -> list[tuple[int, float]]:
        return [(int(a), float(b)) for a, b in zip(self.phi, self.x)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PopulationFrame):
            return NotImplemented
        return np.array_equal(self.phi, other.phi) and np.array_equal(self.x, other.x)


@dataclass(frozen=True)
class PopulationParams:
    """Summary-statistic vector consumed by every closed-form expression."""

    N: int
    P: float
    xbar: float
    sx2: float
    sp2: float
    cp: float
    cx: float
    rho_pb: float
    lambda03: float
    lambda04: float
    lambda12: float

    def __post_init__(self):
        for name in ("P", "xbar", "sx2", "sp2", "cp", "cx", "rho_pb",
                     "lambda03", "lambda04", "lambda12"):
            if not math.isfinite(getattr(self, name)):
                raise SchemaError(f"population parameter {name} must be finite")
        if self.N < 2:
            raise SchemaError("population size must be at least 2")
        if not 0.0 < self.P < 1.0:
            raise DegenerateAttribute(f"proportion must lie strictly in (0, 1), got {self.P}")
        # cx = sqrt(sx2)/xbar carries the sign of the auxiliary mean; the
        # cross-moment identities need the signed value
        if self.sx2 <= 0.0 or self.cx == 0.0:
            raise DegenerateAuxiliary("auxiliary variance must be strictly positive")
        if self.xbar == 0.0:
            raise ZeroMean("auxiliary population mean must be nonzero")
        if self.sp2 <= 0.0 or self.cp <= 0.0:
            raise DegenerateAttribute("attribute variance must be strictly positive")
        if abs(self.rho_pb) > 1.0 + 1e-12:
            raise SchemaError(f"|rho_pb| must not exceed 1, got {self.rho_pb}")
        if self.lambda04 - 1.0 - self.lambda03**2 < -_REL_TOL:
            raise SchemaError(
                "lambda04 >= 1 + lambda03^2 must hold for any real distribution "
                f"(got lambda04={self.lambda04}, lambda03={self.lambda03})"
            )


@dataclass(frozen=True)
class Design:
    """SRSWOR design: sample size, population size, and the factor f."""

    n: int
    N: int
    f: float = None  # type: ignore[assignment]  # derived in __post_init__

    def __post_init__(self):
        f = sampling_fraction(self.n, self.N)
        if self.f is not None and not math.isclose(self.f, f, rel_tol=0, abs_tol=1e-15):
            raise InvalidDesign(f"inconsistent design factor: got {self.f}, expected {f}")
        object.__setattr__(self, "f", f)


@dataclass(frozen=True)
class SampleStats:
    """Sufficient statistics of one SRSWOR draw."""

    n: int
    p: float
    xbar_s: float
    sx2_s: float

    def __post_init__(self):
        if self.n < 2:
            raise InvalidDesign("a sample needs at least 2 units")
        if not 0.0 <= self.p <= 1.0:
            raise SchemaError(f"sample proportion must lie in [0, 1], got {self.p}")
        a = self.p * self.n
        if abs(a - round(a)) > 1e-9:
            raise SchemaError(f"p*n = {a} is not an integer attribute count")
        if self.sx2_s < 0.0 or not math.isfinite(self.sx2_s):
            raise SchemaError("sample auxiliary variance must be finite and nonnegative")


def central_moment(frame: PopulationFrame, r: int, s: int) -> float:
    """Divisor-N bivariate central moment ``mean((phi-P)^r * (x-xbar)^s)``.

    Only orders with ``r + s <= 4`` are meaningful here; higher orders are a
    contract violation.
    """
    if r < 0 or s < 0 or r + s > 4:
        raise ValueError(f"moment order ({r}, {s}) outside the supported range")
    dphi = frame.phi - frame.phi.mean()
    dx = frame.x - frame.x.mean()
    return float(np.mean(dphi**r * dx**s))


def compute_population_params(frame: PopulationFrame) -> PopulationParams:
    """Compute the full summary-statistic vector of a population.

    Raises
    ------
    DegenerateAttribute
        If every unit has (or lacks) the attribute.
    DegenerateAuxiliary
        If the auxiliary variable is constant.
    ZeroMean
        If the auxiliary mean is zero.
    """
    N = frame.size
    A = int(frame.phi.sum())
    if A == 0 or A == N:
        raise DegenerateAttribute(f"attribute count {A} of {N} leaves no variation")
    P = A / N
    xbar = float(frame.x.mean())
    mu02 = central_moment(frame, 0, 2)
    if mu02 == 0.0:
        raise DegenerateAuxiliary("auxiliary variable is constant")
    if xbar == 0.0:
        raise ZeroMean("auxiliary mean is zero")
    mu20 = central_moment(frame, 2, 0)
    mu11 = central_moment(frame, 1, 1)
    mu03 = central_moment(frame, 0, 3)
    mu04 = central_moment(frame, 0, 4)
    mu12 = central_moment(frame, 1, 2)
    sx2 = mu02 * N / (N - 1)
    sp2 = mu20 * N / (N - 1)
    return PopulationParams(
        N=N,
        P=P,
        xbar=xbar,
        sx2=sx2,
        sp2=sp2,
        cp=math.sqrt(sp2) / P,
        cx=math.sqrt(sx2) / xbar,
        rho_pb=mu11 / math.sqrt(mu20 * mu02),
        lambda03=mu03 / mu02**1.5,
        lambda04=mu04 / mu02**2,
        lambda12=mu12 / (math.sqrt(mu20) * mu02),
    )


def sampling_fraction(n: int, N: int) -> float:
    """Design factor ``f = 1/n - 1/N`` for an SRSWOR sample of n from N."""
    if not (isinstance(n, (int, np.integer)) and isinstance(N, (int, np.integer))):
        raise InvalidDesign(f"sample and population sizes must be integers, got {n!r}, {N!r}")
    if not 2 <= n <= N:
        raise InvalidDesign(f"need 2 <= n <= N, got n={n}, N={N}")
    return 1.0 / n - 1.0 / N


def sample_stats(frame: PopulationFrame, indices: Sequence[int]) -> SampleStats:
    """Sufficient statistics of the sample addressed by ``indices``.

    Indices must be distinct and in range; order is irrelevant.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1 or idx.size < 2:
        raise InvalidDesign("a sample needs at least 2 distinct indices")
    if idx.size != np.unique(idx).size:
        raise DuplicateIndex("sample indices must be distinct")
    if idx.min() < 0 or idx.max() >= frame.size:
        raise IndexOutOfRange(
            f"indices must lie in [0, {frame.size - 1}], got range "
            f"[{idx.min()}, {idx.max()}]"
        )
    n = int(idx.size)
    xs = frame.x[idx]
    return SampleStats(
        n=n,
        p=float(frame.phi[idx].mean()),
        xbar_s=float(xs.mean()),
        sx2_s=float(xs.var(ddof=1)),
    )

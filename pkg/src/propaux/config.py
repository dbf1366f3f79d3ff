"""Per-family estimator configurations.

Constants that admit a population-optimal value are declared as
``float | None`` and default to ``None``, which means "resolve to the
population-optimal value when the population parameters are known".
"""

from __future__ import annotations

from dataclasses import dataclass, fields


def _parse_value(raw: str) -> float | None:
    if raw.strip().lower() == "optimal":
        return None
    return float(raw)


def _from_kv(cls, text: str):
    """Build a config from ``key=value,key=value`` text (CLI syntax)."""
    kwargs = {}
    allowed = {f.name for f in fields(cls)}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, raw = part.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ValueError(f"unknown or malformed option {part!r} for {cls.__name__}")
        try:
            kwargs[key] = _parse_value(raw)
        except ValueError:
            raise ValueError(f"cannot parse value in {part!r}") from None
    return cls(**kwargs)


@dataclass(frozen=True)
class TbConfig:
    """Linear regression-type member; ``h1 = None`` means the optimal slope."""

    h1: float | None = None

    @classmethod
    def from_kv(cls, text: str) -> "TbConfig":
        return _from_kv(cls, text)


@dataclass(frozen=True)
class TcConfig:
    """Ratio/exponential transform family.

    ``a``, ``b``, ``alpha``, ``beta`` pick the auxiliary transform; the
    weights ``q1``, ``q2`` default to the population-optimal pair.
    """

    a: float = 1.0
    b: float = 0.0
    alpha: float = 1.0
    beta: float = 0.0
    q1: float | None = None
    q2: float | None = None

    @classmethod
    def from_kv(cls, text: str) -> "TcConfig":
        return _from_kv(cls, text)


@dataclass(frozen=True)
class T1Config:
    """Power-transform estimator; exponents default to the optimal pair."""

    alpha: float | None = None
    beta: float | None = None

    @classmethod
    def from_kv(cls, text: str) -> "T1Config":
        return _from_kv(cls, text)


@dataclass(frozen=True)
class T2Config:
    """Linear two-channel member; offsets default to the optimal pair."""

    h1: float | None = None
    h2: float | None = None

    @classmethod
    def from_kv(cls, text: str) -> "T2Config":
        return _from_kv(cls, text)


@dataclass(frozen=True)
class T3Config:
    """Two-term weighted family.

    ``gamma`` shifts the ratio channel, ``g`` and ``delta`` switch the ratio
    and exponential channels (conventionally -1, 0, or 1, though any real
    value is accepted); the weights ``m1``, ``m2`` default to the optimal pair.
    """

    gamma: float = 1.0
    g: float = 1.0
    delta: float = 1.0
    m1: float | None = None
    m2: float | None = None

    @classmethod
    def from_kv(cls, text: str) -> "T3Config":
        return _from_kv(cls, text)


#: (g, delta) switch pairs reported in the standard efficiency table.
T3_TABLE_VARIANTS: tuple[tuple[float, float], ...] = ((1.0, 1.0), (1.0, -1.0), (0.0, 1.0))


@dataclass(frozen=True)
class TableConfig:
    """Configuration of a full theory/efficiency report."""

    tc: TcConfig = TcConfig()
    t3_gamma: float = 1.0
    t3_variants: tuple[tuple[float, float], ...] = T3_TABLE_VARIANTS

    def t3_configs(self) -> tuple[T3Config, ...]:
        return tuple(T3Config(gamma=self.t3_gamma, g=g, delta=d) for g, d in self.t3_variants)

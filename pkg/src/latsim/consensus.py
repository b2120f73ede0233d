"""Consensus primitives: 256-bit targets, compact bits, chain parameters.

Amounts are integer shors throughout (``COIN`` shors per LAT).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigError, EncodingError, TargetOverflowError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

COIN = 100_000_000
SECONDS_PER_YEAR = 31_557_600  # 365.25 days

_U256_MAX = (1 << 256) - 1
_U32_MAX = (1 << 32) - 1


@dataclass(frozen=True, order=True)
class Target256:
    """Unsigned 256-bit proof-of-work target.

    Arithmetic is exact; any result outside [0, 2**256) raises
    ``TargetOverflowError`` instead of wrapping.
    """

    value: int

    def __post_init__(self):
        if not isinstance(self.value, int):
            raise TypeError(f"Target256 needs an int, got {type(self.value).__name__}")
        if not 0 <= self.value <= _U256_MAX:
            raise TargetOverflowError(f"value {self.value:#x} outside uint256 range")

    def __add__(self, other: Target256 | int) -> Target256:
        return Target256(self.value + int(other))

    def __sub__(self, other: Target256 | int) -> Target256:
        return Target256(self.value - int(other))

    def __mul__(self, factor: int) -> Target256:
        _check_u32(factor)
        return Target256(self.value * factor)

    def __floordiv__(self, divisor: int) -> Target256:
        _check_u32(divisor)
        if divisor == 0:
            raise ZeroDivisionError("Target256 division by zero")
        return Target256(self.value // divisor)

    def __rshift__(self, n: int) -> Target256:
        return Target256(self.value >> n)

    def __lshift__(self, n: int) -> Target256:
        return Target256(self.value << n)

    def __int__(self) -> int:
        return self.value

    __index__ = __int__

    def __bool__(self) -> bool:
        return self.value != 0

    def hex(self) -> str:
        return f"{self.value:064x}"

    @classmethod
    def from_hex(cls, text: str) -> Target256:
        return cls(int(text, 16))


def _check_u32(x: int) -> None:
    if not isinstance(x, int) or not 0 <= x <= _U32_MAX:
        raise TargetOverflowError(f"operand {x!r} is not a 32-bit unsigned integer")


def expand_compact(bits: int) -> Target256:
    """Decode nBits (1 exponent byte, 23-bit mantissa, sign bit) to a target."""
    if not 0 <= bits <= _U32_MAX:
        raise EncodingError(f"compact bits {bits!r} is not a 32-bit value")
    size = bits >> 24
    word = bits & 0x007FFFFF
    if size <= 3:
        word >>= 8 * (3 - size)
    else:
        word <<= 8 * (size - 3)
    if word != 0 and bits & 0x00800000:
        raise EncodingError(f"compact bits {bits:#010x} has the sign bit set")
    if word > _U256_MAX:
        raise EncodingError(f"compact bits {bits:#010x} overflows 256 bits")
    return Target256(word)


def compress_compact(target: Target256 | int) -> int:
    """Encode a target as nBits, truncating the mantissa to its top bytes."""
    value = int(target)
    size = (value.bit_length() + 7) // 8
    if size <= 3:
        compact = value << (8 * (3 - size))
    else:
        compact = value >> (8 * (size - 3))
    # keep the mantissa non-negative
    if compact & 0x00800000:
        compact >>= 8
        size += 1
    return compact | (size << 24)


@dataclass(frozen=True)
class ChainParams:
    """Consensus constants. Defaults are the mainnet values."""

    warmup_blocks: int = 5_670
    warmup_spacing: int = 53
    spacing: int = 240
    warmup_subsidy: int = 25 * COIN
    initial_subsidy: int = 50 * COIN
    halving_interval: int = 295_000
    tail_emission: int = 15_000_000
    pow_limit: int = 0x207FFFFF
    lwma_window: int = 120
    weight_stages: tuple[tuple[int, int], ...] = (
        (0, 11_000_000),
        (50_000, 28_000_000),
        (100_000, 56_000_000),
    )
    max_money: int = 42_000_000 * COIN
    coinbase_maturity: int = 100
    pow_limit_target: Target256 = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        stages = tuple((int(h), int(w)) for h, w in self.weight_stages)
        object.__setattr__(self, "weight_stages", stages)
        # warmup_blocks == 0 disables the warm-up phase
        for name in ("warmup_spacing", "spacing", "initial_subsidy", "halving_interval",
                     "tail_emission", "pow_limit", "lwma_window", "max_money",
                     "coinbase_maturity"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.warmup_blocks < 0 or self.warmup_subsidy < 0:
            raise ConfigError("warm-up fields must be non-negative")
        if self.warmup_blocks > 0 and self.warmup_subsidy == 0:
            raise ConfigError("warmup_subsidy must be positive when warm-up is enabled")
        if self.tail_emission >= self.initial_subsidy:
            raise ConfigError("tail_emission must be below initial_subsidy")
        if self.warmup_subsidy > self.initial_subsidy:
            raise ConfigError("warmup_subsidy must not exceed initial_subsidy")
        if not stages or stages[0][0] != 0:
            raise ConfigError("weight_stages must start at height 0")
        for (h0, w0), (h1, w1) in zip(stages, stages[1:]):
            if h1 <= h0:
                raise ConfigError("weight stage heights must be strictly increasing")
            if w1 < w0:
                raise ConfigError("weight stage limits must be non-decreasing")
        if any(w <= 0 for _, w in stages):
            raise ConfigError("weight limits must be positive")
        try:
            limit = expand_compact(self.pow_limit)
        except EncodingError as exc:
            raise ConfigError(f"pow_limit: {exc}") from exc
        if not limit:
            raise ConfigError("pow_limit expands to zero")
        object.__setattr__(self, "pow_limit_target", limit)

    @property
    def blocks_per_year(self) -> float:
        return SECONDS_PER_YEAR / self.spacing

    @classmethod
    def from_mapping(cls, data: Mapping) -> ChainParams:
        known = {f.name for f in fields(cls) if f.init}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown chain parameter(s): {', '.join(sorted(unknown))}")
        kwargs = dict(data)
        if "pow_limit" in kwargs and isinstance(kwargs["pow_limit"], str):
            kwargs["pow_limit"] = int(kwargs["pow_limit"], 0)
        if "weight_stages" in kwargs:
            kwargs["weight_stages"] = tuple(tuple(s) for s in kwargs["weight_stages"])
        return cls(**kwargs)


def load_params(path: str | Path | None = None) -> ChainParams:
    """Read ChainParams from a TOML file; missing keys keep their defaults.

    Either top-level keys or a ``[chain]`` table are accepted, e.g.::

        [chain]
        warmup_blocks = 0
        spacing = 240
        pow_limit = "0x207fffff"
        weight_stages = [[0, 11000000], [50000, 28000000]]
    """
    if path is None:
        return ChainParams()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read chain parameters from {path}: {exc}") from exc
    return ChainParams.from_mapping(data.get("chain", data))


@dataclass(frozen=True)
class BlockRecord:
    height: int
    timestamp: int
    target: Target256

    def __post_init__(self):
        if self.height < 0:
            raise ValueError("height must be non-negative")


def target_spacing(params: ChainParams, height: int) -> int:
    if params.warmup_blocks > 0 and height < params.warmup_blocks:
        return params.warmup_spacing
    return params.spacing


def max_block_weight(params: ChainParams, height: int) -> int:
    weight = params.weight_stages[0][1]
    for activation, limit in params.weight_stages:
        if height < activation:
            break
        weight = limit
    return weight


def block_work(target: Target256 | int) -> int:
    value = int(target)
    if value <= 0:
        raise ZeroDivisionError("block work of a zero target is undefined")
    return (1 << 256) // value


def chain_work(targets: Iterable[Target256 | int]) -> int:
    """Cumulative work, sum of floor(2**256 / target); unbounded precision."""
    return sum(block_work(t) for t in targets)

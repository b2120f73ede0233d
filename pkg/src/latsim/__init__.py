"""Consensus-parameter engine, security models and chain simulator for a
CPU-mined, tail-emission proof-of-work chain with LWMA-1 difficulty."""

from .consensus import (
    COIN,
    SECONDS_PER_YEAR,
    BlockRecord,
    ChainParams,
    Target256,
    block_work,
    chain_work,
    compress_compact,
    expand_compact,
    load_params,
    max_block_weight,
    target_spacing,
)
from .difficulty import LwmaTracker, lwma_next_target
from .emission import block_subsidy, cumulative_supply, emission_schedule
from .errors import (
    ConfigError,
    DomainError,
    EncodingError,
    InsufficientHistoryError,
    LatsimError,
    SupplyOverflowError,
    TargetOverflowError,
)

__version__ = "0.1.0"

__all__ = [
    "COIN", "SECONDS_PER_YEAR", "BlockRecord", "ChainParams", "Target256", "block_work",
    "chain_work", "compress_compact", "expand_compact", "load_params", "max_block_weight",
    "target_spacing", "LwmaTracker", "lwma_next_target", "block_subsidy", "cumulative_supply",
    "emission_schedule", "ConfigError", "DomainError", "EncodingError",
    "InsufficientHistoryError", "LatsimError", "SupplyOverflowError", "TargetOverflowError",
]

"""Miner payoffs, defection equilibria and the energy/price model.

Monetary amounts here are floats: USD, or LAT where noted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .consensus import COIN, ChainParams
from .emission import block_subsidy
from .errors import DomainError

DEDICATED_NODE_RATE = 6_667.0  # H/s, one consumer CPU mining full time
BOT_RATE = 2_000.0  # H/s, average throttled bot


@dataclass(frozen=True)
class MinerSpec:
    id: str
    hashrate: float
    cost_per_block: float  # USD per block interval

    def __post_init__(self):
        if self.hashrate <= 0:
            raise DomainError(f"miner {self.id}: hashrate must be positive")
        if self.cost_per_block < 0:
            raise DomainError(f"miner {self.id}: cost must be non-negative")


@dataclass(frozen=True)
class MarketState:
    price: float  # USD/LAT
    fees: float = 0.0  # LAT per block
    subsidy: float = 0.15  # LAT per block
    fee_variance: float = 0.0  # LAT^2

    def __post_init__(self):
        if min(self.price, self.fees, self.subsidy, self.fee_variance) < 0:
            raise DomainError("market fields must be non-negative")

    @property
    def reward(self) -> float:
        return self.subsidy + self.fees


@dataclass(frozen=True)
class PowerModel:
    watts: float = 100.0
    usd_per_kwh: float = 0.12

    def __post_init__(self):
        if self.watts <= 0 or self.usd_per_kwh <= 0:
            raise DomainError("power and electricity price must be positive")


def miner_payoff_honest(alpha: float, market: MarketState, cost: float) -> float:
    """Expected USD per block for honest mining; defecting pays 0."""
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha={alpha} outside [0, 1]")
    return alpha * market.reward * market.price - cost


def energy_kwh(pm: PowerModel, duration: float) -> float:
    return pm.watts * duration / 3_600_000


def marginal_cost_per_block(pm: PowerModel, duration: float) -> float:
    """Electricity cost in USD of running one node for ``duration`` seconds."""
    if duration < 0:
        raise DomainError("duration must be non-negative")
    return energy_kwh(pm, duration) * pm.usd_per_kwh


def break_even_price(subsidy_lat: float, energy_cost: float) -> float:
    """USD/LAT at which a block reward of ``subsidy_lat`` covers ``energy_cost``."""
    if subsidy_lat <= 0:
        raise DomainError("subsidy must be positive")
    return energy_cost / subsidy_lat


def _negative(survivors: Sequence[MinerSpec], market: MarketState) -> list[MinerSpec]:
    total = sum(m.hashrate for m in survivors)
    return [m for m in survivors
            if miner_payoff_honest(m.hashrate / total, market, m.cost_per_block) < 0]


def equilibrium_miners(miners: Iterable[MinerSpec], market: MarketState) -> tuple[MinerSpec, ...]:
    """Survivors of iterated defection, removing every losing miner each round.

    Shares are recomputed over the survivors after each round. The result
    keeps the input order and does not depend on it.
    """
    survivors = list(miners)
    if not survivors:
        raise DomainError("need at least one miner")
    while survivors:
        losing = _negative(survivors, market)
        if not losing:
            break
        dropped = {id(m) for m in losing}
        survivors = [m for m in survivors if id(m) not in dropped]
    return tuple(survivors)


def sequential_equilibrium(miners: Sequence[MinerSpec], market: MarketState) -> tuple[MinerSpec, ...]:
    """One-at-a-time defection: the first losing miner in list order leaves."""
    survivors = list(miners)
    while survivors:
        losing = _negative(survivors, market)
        if not losing:
            break
        survivors.remove(losing[0])
    return tuple(survivors)


def population_break_even_price(miners: Sequence[MinerSpec], reward_lat: float) -> float:
    """Lowest price above which some miner can never turn unprofitable.

    The cheapest miner per unit share only gains share as others leave,
    so any price above its break-even keeps the equilibrium non-empty.
    """
    if reward_lat <= 0:
        raise DomainError("reward must be positive")
    total = sum(m.hashrate for m in miners)
    return min(m.cost_per_block * total / (m.hashrate * reward_lat) for m in miners)


def fee_sniping_probability_bound(sigma_f2: float, subsidy: float) -> float:
    """One-sided Chebyshev bound on fees exceeding the subsidy."""
    if sigma_f2 < 0 or subsidy <= 0:
        raise DomainError("need sigma_f2 >= 0 and subsidy > 0")
    return sigma_f2 / (sigma_f2 + subsidy ** 2)


def security_budget(params: ChainParams, height: int, price: float,
                    annual_fees: float = 0.0) -> float:
    """USD per year paid to miners at ``height``'s subsidy."""
    if price < 0:
        raise DomainError("price must be non-negative")
    annual_lat = params.blocks_per_year * block_subsidy(params, height) / COIN
    return annual_lat * price + annual_fees


def botnet_hashrate(n_bots: int, per_bot: float = BOT_RATE,
                    node_rate: float = DEDICATED_NODE_RATE) -> tuple[float, float]:
    """(total H/s, equivalent dedicated nodes)."""
    if per_bot <= 0 or node_rate <= 0:
        raise DomainError("rates must be positive")
    if n_bots < 0:
        raise DomainError("bot count must be non-negative")
    total = n_bots * per_bot
    return total, total / node_rate


@dataclass(frozen=True)
class SoloMiningRow:
    n_nodes: int
    expected_days: float
    energy_kwh: float
    cost_usd: float
    break_even_usd: float


def solo_mining_economics(n_nodes: int, pm: PowerModel = PowerModel(), T: float = 240,
                          reward_lat: float = 50.0) -> SoloMiningRow:
    """Per-block figures for one node in a network of ``n_nodes`` equal nodes."""
    if n_nodes < 1:
        raise DomainError("network needs at least one node")
    seconds = T * n_nodes
    cost = marginal_cost_per_block(pm, seconds)
    return SoloMiningRow(n_nodes, seconds / 86_400, energy_kwh(pm, seconds), cost,
                         break_even_price(reward_lat, cost))

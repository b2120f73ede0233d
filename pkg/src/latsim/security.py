"""Closed-form security and capacity calculators.

Probabilities are plain floats in [0, 1]; percentage rendering is left
to the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .consensus import SECONDS_PER_YEAR
from .errors import DomainError


@dataclass(frozen=True)
class AttackerProfile:
    q: float
    k: int

    def __post_init__(self):
        if not 0 <= self.q < 1:
            raise DomainError(f"attacker fraction q={self.q} outside [0, 1)")
        if self.k < 0:
            raise DomainError(f"confirmations k={self.k} must be non-negative")

    @property
    def ratio(self) -> float:
        return self.q / (1 - self.q)


@dataclass(frozen=True)
class NetworkLink:
    block_size: float  # bytes
    bandwidth: float  # bytes/s
    diameter: float  # hops
    block_time: float  # s

    def __post_init__(self):
        if self.block_size < 0:
            raise DomainError("block size must be non-negative")
        if min(self.bandwidth, self.diameter, self.block_time) <= 0:
            raise DomainError("bandwidth, diameter and block time must be positive")


@dataclass(frozen=True)
class CostModel:
    h_honest: float  # H/s
    h_core: float  # H/s per core
    c_cpu: float  # USD per core-hour
    c_ram: float  # USD per 2 GB
    hours: float

    def __post_init__(self):
        if min(self.h_honest, self.c_cpu, self.c_ram, self.hours) < 0:
            raise DomainError("cost model fields must be non-negative")
        if self.h_core <= 0:
            raise DomainError("h_core must be positive")


def _require_minority(a: AttackerProfile) -> None:
    if a.q >= 0.5:
        raise DomainError(f"q={a.q}: a majority attacker always wins, the bound is vacuous")


def double_spend_bound(a: AttackerProfile) -> float:
    """Gambler's-ruin catch-up probability (q/(1-q))^k."""
    _require_minority(a)
    return min(1.0, a.ratio ** a.k)


def _log_poisson(i: int, lam: float) -> float:
    return -lam + i * math.log(lam) - math.lgamma(i + 1)


def double_spend_poisson(a: AttackerProfile) -> float:
    """Race probability with Poisson-distributed attacker progress.

    Uses the equivalent form P(X >= k) + sum_{i<k} P(X = i) r^(k-i) with
    X ~ Poisson(k q / (1 - q)), which avoids cancelling against 1.
    """
    _require_minority(a)
    q, k = a.q, a.k
    if k == 0:
        return 1.0
    if q == 0:
        return 0.0
    r = a.ratio
    lam = k * r
    log_r = math.log(r)
    caught_up = 0.0
    for i in range(k):
        caught_up += math.exp(_log_poisson(i, lam) + (k - i) * log_r)
    # upper tail; lam < k so the terms shrink at least geometrically
    tail = 0.0
    i = k
    while True:
        term = math.exp(_log_poisson(i, lam))
        tail += term
        if term <= 1e-17 * tail or i > k + 10_000:
            break
        i += 1
    return min(1.0, tail + caught_up)


def finality_confirmations(q: float, p_target: float) -> int:
    """Smallest k with (q/(1-q))^k < p_target."""
    if not 0 < q < 0.5:
        raise DomainError(f"q={q} outside (0, 0.5)")
    if p_target <= 0:
        raise DomainError(f"p_target={p_target} must be positive")
    if p_target >= 1:
        return 0
    r = q / (1 - q)
    k = max(0, math.ceil(math.log(p_target) / math.log(r)))
    # settle floating-point edge cases against the bound itself
    while r ** k >= p_target:
        k += 1
    while k > 0 and r ** (k - 1) < p_target:
        k -= 1
    return k


def orphan_probability(link: NetworkLink) -> float:
    x = link.block_size * link.diameter / (link.bandwidth * link.block_time)
    return -math.expm1(-x)


def attack_cost_51(m: CostModel) -> float:
    """USD to out-hash the honest network for ``m.hours``."""
    return (m.h_honest / m.h_core + 1) * (m.c_cpu * m.hours + 2 * m.c_ram)


def memory_time_bound(M: float, dataset: float, t_mem: float, r: int) -> float:
    """Lower bound on hash time with M bytes of memory: 8 (dataset/M) t_mem r."""
    if M <= 0:
        raise DomainError("memory M must be positive")
    if M > dataset:
        raise DomainError("memory M cannot exceed the dataset size")
    return 8 * (dataset / M) * t_mem * r


def lattice_attack_bits(d: int) -> tuple[float, float]:
    """(classical, quantum) log2 sieving cost for dimension d, o(d) dropped."""
    if d <= 0:
        raise DomainError("lattice dimension must be positive")
    return 0.292 * d, 0.265 * d


def tps_max(max_weight: int, tx_weight: int, T: float) -> float:
    if tx_weight <= 0 or T <= 0:
        raise DomainError("tx_weight and T must be positive")
    return (max_weight // tx_weight) / T


def storage_growth(u: float, max_weight: float, T: float) -> float:
    """Bytes per year at utilization u, one byte per weight unit."""
    if not 0 <= u <= 1:
        raise DomainError(f"utilization u={u} outside [0, 1]")
    if T <= 0:
        raise DomainError("T must be positive")
    return max_weight * u / T * SECONDS_PER_YEAR


def utilization_for_block_size(block_size: float, max_weight: float) -> float:
    if max_weight <= 0 or block_size < 0:
        raise DomainError("need max_weight > 0 and block_size >= 0")
    return min(1.0, block_size / max_weight)


def ibd_verify_time(n_sigs: float, rate: float, cores: int = 1) -> float:
    if rate <= 0 or cores < 1:
        raise DomainError("rate must be positive and cores >= 1")
    return n_sigs / (rate * cores)


def degraded_block_time(loss: float, T: float = 240) -> float:
    """Expected block time right after losing a fraction of hashrate."""
    if not 0 <= loss < 1:
        raise DomainError(f"hashrate loss {loss} outside [0, 1)")
    return T / (1 - loss)

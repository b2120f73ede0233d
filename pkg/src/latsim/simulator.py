"""Seeded Monte Carlo: chains mined against live LWMA-1, and double-spend races.

Proof of work is abstracted as an exponential solve time whose mean is
``(2**256 / target) / H``; the starting target is the equilibrium target
for the base hashrate, so the mean solve time starts at exactly T.

Random numbers come from numpy's PCG64 seeded through ``SeedSequence``.
Only raw 64-bit outputs are consumed (``u = (x >> 11) * 2**-53``), so the
streams can be reproduced from the published PCG64 reference sequence.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .consensus import BlockRecord, ChainParams, Target256, target_spacing, tomllib
from .difficulty import LwmaTracker
from .errors import ConfigError, DomainError

_TWO_256 = 1 << 256
_U53 = 2.0 ** -53

# SeedSequence namespaces keep chain and race streams disjoint
_CHAIN_STREAM = 0
_RACE_STREAM = 1
RACE_CHUNK = 65_536


def rng_stream(seed: int, *path: int) -> np.random.PCG64:
    return np.random.PCG64(np.random.SeedSequence([seed, *path]))


def uniforms(bg: np.random.PCG64, n: int) -> np.ndarray:
    """n doubles in [0, 1) from the top 53 bits of each raw output."""
    raw = bg.random_raw(n)
    return (raw >> np.uint64(11)).astype(np.float64) * _U53


def exponentials(bg: np.random.PCG64, n: int) -> np.ndarray:
    return -np.log1p(-uniforms(bg, n))


@dataclass(frozen=True)
class Oscillation:
    """Square wave: ``period`` blocks, the second half at ``delta`` times base."""

    period: int
    delta: float
    start: int = 0

    def __post_init__(self):
        if self.period < 2:
            raise ConfigError("oscillation period must be at least 2 blocks")
        if self.delta <= 0:
            raise ConfigError("oscillation multiplier must be positive")

    def factor(self, n: int) -> float:
        if n < self.start:
            return 1.0
        return self.delta if (n - self.start) % self.period >= self.period // 2 else 1.0


@dataclass(frozen=True)
class ScenarioSpec:
    """Hashrate trajectory for one simulated chain.

    Event heights count blocks from the first simulated block (n = 0).
    A step ``(n, delta)`` sets hashrate to ``delta * h0`` from block n on.
    """

    h0: float = 10_000.0
    horizon: int = 1_000
    steps: tuple[tuple[int, float], ...] = ()
    oscillation: Oscillation | None = None
    params: ChainParams = field(default_factory=ChainParams)
    seed: int = 0
    start_height: int | None = None

    def __post_init__(self):
        steps = tuple((int(n), float(d)) for n, d in self.steps)
        object.__setattr__(self, "steps", steps)
        N = self.params.lwma_window
        if self.h0 <= 0:
            raise ConfigError("base hashrate must be positive")
        if self.horizon < N + 1:
            raise ConfigError(f"horizon must be at least N+1 = {N + 1} blocks")
        if any(d <= 0 for _, d in steps):
            raise ConfigError("step multipliers must be positive")
        if any(b[0] <= a[0] for a, b in zip(steps, steps[1:])):
            raise ConfigError("step events must be sorted by height")
        if any(n < 0 for n, _ in steps):
            raise ConfigError("step heights must be non-negative")
        if self.start_height is None:
            object.__setattr__(self, "start_height", self.params.warmup_blocks + N + 1)
        if self.start_height < N + 1:
            raise ConfigError(f"start_height must be at least N+1 = {N + 1}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def spacing(self) -> int:
        return target_spacing(self.params, self.start_height)

    def hashrate(self, n: int) -> float:
        h = self.h0
        for trigger, delta in self.steps:
            if n < trigger:
                break
            h = self.h0 * delta
        if self.oscillation is not None:
            h *= self.oscillation.factor(n)
        return h

    def equilibrium_target(self) -> int:
        num, den = float(self.h0).as_integer_ratio()
        target = _TWO_256 * den // (num * self.spacing)
        if target > int(self.params.pow_limit_target):
            raise ConfigError("base hashrate too low: equilibrium target exceeds powLimit")
        return target

    @classmethod
    def from_mapping(cls, data: dict) -> ScenarioSpec:
        data = dict(data)
        chain = data.pop("chain", None)
        scen = dict(data.pop("scenario", data))
        osc = scen.pop("oscillation", None)
        known = {"h0", "horizon", "steps", "seed", "start_height"}
        unknown = set(scen) - known
        if unknown:
            raise ConfigError(f"unknown scenario key(s): {', '.join(sorted(unknown))}")
        params = ChainParams.from_mapping(chain) if chain else ChainParams()
        try:
            return cls(
                h0=float(scen.get("h0", cls.h0)),
                horizon=int(scen.get("horizon", cls.horizon)),
                steps=tuple(tuple(s) for s in scen.get("steps", ())),
                oscillation=Oscillation(**osc) if osc else None,
                params=params,
                seed=int(scen.get("seed", 0)),
                start_height=scen.get("start_height"),
            )
        except TypeError as exc:
            raise ConfigError(f"bad scenario: {exc}") from exc


def load_scenario(path: str | Path) -> ScenarioSpec:
    """Read a scenario TOML file.

    Example::

        [scenario]
        h0 = 10000.0
        horizon = 1000
        seed = 7
        steps = [[200, 0.1]]        # hashrate drops to 10% at block 200

        [scenario.oscillation]      # optional
        period = 240
        delta = 2.0

        [chain]                     # optional ChainParams overrides
        lwma_window = 60
    """
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return ScenarioSpec.from_mapping(data)


@dataclass
class Trajectory:
    heights: np.ndarray
    solve_times: np.ndarray  # realized seconds
    targets: list[int]
    expected_times: np.ndarray  # mean solve time implied by target and true hashrate
    spacing: int

    @property
    def deviations(self) -> np.ndarray:
        return self.expected_times / self.spacing - 1

    def __len__(self) -> int:
        return len(self.targets)

    def half_life(self, n0: int) -> int | None:
        """Blocks after n0 until |deviation| first halves."""
        eps = np.abs(self.deviations[n0:])
        hit = np.nonzero(eps <= eps[0] / 2)[0]
        return int(hit[0]) if hit.size else None

    def recovery(self, n0: int, tolerance: float) -> int | None:
        eps = np.abs(self.deviations[n0:])
        hit = np.nonzero(eps < tolerance)[0]
        return int(hit[0]) if hit.size else None

    def mean_block_time(self) -> float:
        return math.fsum(self.solve_times) / len(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["height", "solve_time_s", "target_hex", "deviation"])
        for h, s, t, d in zip(self.heights, self.solve_times, self.targets, self.deviations):
            writer.writerow([int(h), f"{s:.6f}", f"{t:064x}", f"{d:.9f}"])
        return buf.getvalue()


def simulate_chain(spec: ScenarioSpec, run: int = 0) -> Trajectory:
    """Mine ``spec.horizon`` blocks; ``run`` selects an independent replica."""
    params = spec.params
    N = params.lwma_window
    T = spec.spacing
    start = spec.start_height
    target_eq = spec.equilibrium_target()
    seed_blocks = [
        BlockRecord(start - N - 1 + j, j * T, Target256(target_eq)) for j in range(N + 1)
    ]
    tracker = LwmaTracker(params, seed_blocks)

    draws = exponentials(rng_stream(spec.seed, _CHAIN_STREAM, run), spec.horizon)
    solve = np.empty(spec.horizon)
    expected = np.empty(spec.horizon)
    targets = []
    clock = float(N * T)
    for n in range(spec.horizon):
        target = int(tracker.next_target())
        mean = _TWO_256 / target / spec.hashrate(n)
        dt = mean * draws[n]
        clock += dt
        tracker.push(math.floor(clock), target)
        solve[n] = dt
        expected[n] = mean
        targets.append(target)
    heights = np.arange(start, start + spec.horizon)
    return Trajectory(heights, solve, targets, expected, T)


def _run_one(args):
    spec, run = args
    return simulate_chain(spec, run)


def simulate_runs(spec: ScenarioSpec, runs: int, workers: int = 1) -> list[Trajectory]:
    """Independent replicas 0..runs-1, returned in replica order."""
    jobs = [(spec, r) for r in range(runs)]
    if workers <= 1 or runs <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def runs_to_csv(trajectories: Sequence[Trajectory]) -> str:
    if len(trajectories) == 1:
        return trajectories[0].to_csv()
    parts = []
    for r, traj in enumerate(trajectories):
        body = traj.to_csv().splitlines()
        if r == 0:
            parts.append("run," + body[0])
        parts.extend(f"{r},{line}" for line in body[1:])
    return "\n".join(parts) + "\n"


def mean_deviation(trajectories: Sequence[Trajectory]) -> np.ndarray:
    """Across-run mean of the signed deviation at each block."""
    return np.mean(np.stack([t.deviations for t in trajectories]), axis=0)


def fit_decay_rate(deviation: np.ndarray, m_lo: int, m_hi: int) -> float:
    """Per-block decay factor from a log-linear fit of |deviation| over [m_lo, m_hi)."""
    m = np.arange(m_lo, m_hi)
    y = np.log(np.abs(deviation[m_lo:m_hi]))
    slope = np.polyfit(m, y, 1)[0]
    return float(np.exp(slope))


def theorem1_bound(delta: float, m: int, N: int = 120) -> float:
    if delta <= 0 or m < 0:
        raise DomainError("need delta > 0 and m >= 0")
    return abs(1 / delta - 1) * ((N - 1) / (N + 1)) ** m


def half_life_blocks(N: int = 120) -> float:
    return math.log(2) / math.log((N + 1) / (N - 1))


def recovery_blocks(delta: float, epsilon: float, N: int = 120) -> int:
    """Blocks until the Theorem 1 envelope drops below ``epsilon``."""
    if delta <= 0 or epsilon <= 0:
        raise DomainError("need delta > 0 and epsilon > 0")
    dev0 = abs(1 / delta - 1)
    if epsilon >= dev0:
        return 0
    m = math.ceil(math.log(dev0 / epsilon) / math.log((N + 1) / (N - 1)))
    while theorem1_bound(delta, m, N) >= epsilon:
        m += 1
    while m > 0 and theorem1_bound(delta, m - 1, N) < epsilon:
        m -= 1
    return m


def theorem2_avg_bound(delta: float, P: int, N: int = 120) -> float:
    if delta <= 0 or P < 1:
        raise DomainError("need delta > 0 and P >= 1")
    return abs(1 / delta - 1) / (1 + P * 2 / (N + 1))


def time_averaged_deviation(traj: Trajectory, burn_in: int, period: int) -> float:
    """|mean expected block time / T - 1| over whole periods after burn-in."""
    n = (len(traj) - burn_in) // period * period
    if n <= 0:
        raise DomainError("trajectory too short for one full period after burn-in")
    window = traj.expected_times[burn_in:burn_in + n]
    return abs(math.fsum(window) / n / traj.spacing - 1)


# -- double-spend race -------------------------------------------------------

RACE_VARIANTS = ("catch-up", "poisson")
WALK_CAP = 2_000


def _kill_depth(q: float, k: int) -> int:
    """Deficit beyond which a catch-up chance is < 1e-9 of the bound."""
    r = q / (1 - q)
    return k + math.ceil(math.log(1e-9) / math.log(r)) + 1


def _poisson_table(lam: float, k: int) -> np.ndarray:
    """CDF of Poisson(lam) at 0..k-1; values >= k are lumped together."""
    pmf = [math.exp(-lam + i * math.log(lam) - math.lgamma(i + 1)) for i in range(k)]
    return np.cumsum(pmf)


def _race_chunk(args) -> int:
    q, k, variant, seed, chunk, size = args
    bg = rng_stream(seed, _RACE_STREAM, chunk)
    deficit = np.full(size, k, dtype=np.int64)
    if variant == "poisson":
        cdf = _poisson_table(k * q / (1 - q), k)
        progress = np.searchsorted(cdf, uniforms(bg, size), side="right")
        deficit -= progress
    wins = int(np.count_nonzero(deficit <= 0))
    deficit = deficit[deficit > 0]
    kill = _kill_depth(q, k)
    for _ in range(k + WALK_CAP):
        if deficit.size == 0:
            break
        step = np.where(uniforms(bg, deficit.size) < q, -1, 1)
        deficit += step
        wins += int(np.count_nonzero(deficit <= 0))
        deficit = deficit[(deficit > 0) & (deficit < kill)]
    return wins


def simulate_double_spend_race(q: float, k: int, trials: int, seed: int = 0,
                               variant: str = "catch-up", workers: int = 1) -> float:
    """Fraction of trials in which the attacker draws level with the honest tip.

    ``catch-up`` starts the attacker exactly k blocks behind; ``poisson``
    first credits the attacker Poisson(kq/(1-q)) blocks mined while the
    merchant waited. Trials run in fixed chunks with one RNG stream each,
    so the result does not depend on ``workers``.
    """
    if not 0 < q < 0.5:
        raise DomainError(f"q={q} outside (0, 0.5)")
    if trials < 1 or k < 0:
        raise DomainError("need trials >= 1 and k >= 0")
    if variant not in RACE_VARIANTS:
        raise DomainError(f"unknown race variant {variant!r}")
    if k == 0:
        return 1.0
    jobs = []
    for chunk, lo in enumerate(range(0, trials, RACE_CHUNK)):
        jobs.append((q, k, variant, seed, chunk, min(RACE_CHUNK, trials - lo)))
    if workers <= 1 or len(jobs) == 1:
        wins = sum(map(_race_chunk, jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            wins = sum(pool.map(_race_chunk, jobs))
    return wins / trials


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(p * (1 - p) / trials)

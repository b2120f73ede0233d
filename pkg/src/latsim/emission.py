"""Block subsidy, cumulative supply and the emission timeline."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from .consensus import COIN, SECONDS_PER_YEAR, ChainParams
from .errors import SupplyOverflowError

LAUNCH_YEAR = 2026


def block_subsidy(params: ChainParams, height: int) -> int:
    """Subsidy in shors for the block at ``height``."""
    if params.warmup_subsidy > 0 and params.warmup_blocks > 0 and height < params.warmup_blocks:
        return params.warmup_subsidy
    halvings = height // params.halving_interval
    if halvings >= 64:
        return params.tail_emission
    return max(params.initial_subsidy >> halvings, params.tail_emission)


def _era_subsidy(params: ChainParams, era: int) -> int:
    if era >= 64:
        return params.tail_emission
    return max(params.initial_subsidy >> era, params.tail_emission)


def _warmup_end(params: ChainParams) -> int:
    return params.warmup_blocks if params.warmup_subsidy > 0 else 0


def _supply_through(params: ChainParams, height: int) -> int:
    """Sum of subsidies for heights 0..height, one term per phase."""
    if height < 0:
        return 0
    W = _warmup_end(params)
    total = min(height + 1, W) * params.warmup_subsidy
    if height < W:
        return total
    I = params.halving_interval
    era = W // I
    last_era = height // I
    while era <= last_era:
        lo = max(era * I, W)
        hi = min((era + 1) * I - 1, height)
        total += (hi - lo + 1) * _era_subsidy(params, era)
        if era >= 64 or (params.initial_subsidy >> era) < params.tail_emission:
            # flat from here on
            if hi < height:
                total += (height - hi) * params.tail_emission
            break
        era += 1
    return total


def cumulative_supply(params: ChainParams, height: int) -> int:
    """Total shors issued by blocks 0..height inclusive.

    Raises SupplyOverflowError naming the first height past max_money.
    """
    total = _supply_through(params, height)
    if total > params.max_money:
        lo, hi = 0, height
        while lo < hi:
            mid = (lo + hi) // 2
            if _supply_through(params, mid) > params.max_money:
                hi = mid
            else:
                lo = mid + 1
        raise SupplyOverflowError(lo, _supply_through(params, lo), params.max_money)
    return total


def tail_onset_height(params: ChainParams) -> int:
    """First height whose subsidy is pinned to the tail emission."""
    era = 0
    while era < 64 and (params.initial_subsidy >> era) >= params.tail_emission:
        era += 1
    return max(era * params.halving_interval, _warmup_end(params))


def annual_tail_emission(params: ChainParams) -> Fraction:
    """Tail shors per year at steady-state spacing."""
    return Fraction(params.tail_emission * SECONDS_PER_YEAR, params.spacing)


def tail_base_supply(params: ChainParams) -> int:
    """Supply S_0 at tail onset (inclusive of the onset block)."""
    return _supply_through(params, tail_onset_height(params))


def inflation_rate(params: ChainParams, years_after_tail: float) -> float:
    if years_after_tail < 0:
        raise ValueError("years_after_tail must be non-negative")
    annual = float(annual_tail_emission(params))
    return annual / (tail_base_supply(params) + annual * years_after_tail)


def max_money_year(params: ChainParams) -> int:
    """Whole years after tail onset until supply would pass max_money."""
    headroom = params.max_money - tail_base_supply(params)
    if headroom <= 0:
        return 0
    return int(headroom / annual_tail_emission(params))


def height_to_time(params: ChainParams, height: int) -> int:
    """Expected seconds from genesis to ``height`` at target spacing."""
    W = params.warmup_blocks
    return min(height, W) * params.warmup_spacing + max(0, height - W) * params.spacing


@dataclass(frozen=True)
class ScheduleRow:
    phase: str
    start_height: int
    end_height: int | None  # None: open-ended tail
    reward: int
    block_time: int
    approx_date: str
    cumulative_supply: int | None
    annual_emission: int

    @property
    def blocks_label(self) -> str:
        if self.end_height is None:
            return f"{self.start_height:,}+"
        return f"{self.start_height:,}-{self.end_height:,}"


def _year(params: ChainParams, height: int) -> int:
    return round(LAUNCH_YEAR + height_to_time(params, height) / SECONDS_PER_YEAR)


def emission_schedule(params: ChainParams) -> list[ScheduleRow]:
    rows = []
    W = _warmup_end(params)
    if W:
        hours = height_to_time(params, W) / 3600
        rows.append(ScheduleRow(
            "Warm-up", 0, W - 1, params.warmup_subsidy, params.warmup_spacing,
            f"{LAUNCH_YEAR} ({hours:.1f}h)", cumulative_supply(params, W - 1),
            params.warmup_subsidy * SECONDS_PER_YEAR // params.warmup_spacing,
        ))
    onset = tail_onset_height(params)
    I = params.halving_interval
    era = W // I
    while era * I < onset:
        start = max(era * I, W)
        end = min((era + 1) * I, onset) - 1
        reward = _era_subsidy(params, era)
        rows.append(ScheduleRow(
            f"Halving {era}", start, end, reward, params.spacing,
            f"{_year(params, start)}-{_year(params, end + 1)}",
            cumulative_supply(params, end),
            reward * SECONDS_PER_YEAR // params.spacing,
        ))
        era += 1
    rows.append(ScheduleRow(
        "Tail", onset, None, params.tail_emission, params.spacing,
        f"{_year(params, onset)}+", None,
        int(annual_tail_emission(params)),
    ))
    return rows


SCHEDULE_COLUMNS = ("Phase", "Blocks", "Reward", "Block Time", "Approx. Date", "Cumul. Supply")


def format_lat(shors: int, places: int = 8) -> str:
    """Exact LAT rendering of an integer shor amount (``places`` <= 8 truncates)."""
    sign = "-" if shors < 0 else ""
    whole, frac = divmod(abs(int(shors)), COIN)
    text = f"{sign}{whole}"
    if places > 0:
        text += "." + f"{frac:08d}"[:places].ljust(places, "0")
    return text


def _schedule_cells(row: ScheduleRow) -> list[str]:
    if row.cumulative_supply is None:
        cumulative = f"+{format_lat(row.annual_emission)}/yr"
    else:
        cumulative = format_lat(row.cumulative_supply)
    return [row.phase, row.blocks_label, format_lat(row.reward), f"{row.block_time}s",
            row.approx_date, cumulative]


def schedule_csv(rows: list[ScheduleRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCHEDULE_COLUMNS)
    for row in rows:
        writer.writerow(_schedule_cells(row))
    return buf.getvalue()


def schedule_markdown(rows: list[ScheduleRow]) -> str:
    lines = ["| " + " | ".join(SCHEDULE_COLUMNS) + " |",
             "|" + "|".join("---" for _ in SCHEDULE_COLUMNS) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(_schedule_cells(row)) + " |")
    return "\n".join(lines) + "\n"

import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from latsim.consensus import COIN, ChainParams
from latsim.emission import (
    block_subsidy,
    cumulative_supply,
    emission_schedule,
    format_lat,
    height_to_time,
    inflation_rate,
    max_money_year,
    schedule_csv,
    schedule_markdown,
    tail_base_supply,
    tail_onset_height,
)
from latsim.errors import SupplyOverflowError

from oracles import naive_supply

P = ChainParams()
GOLDEN = Path(__file__).parent / "golden"

# frozen from the brute-force summation oracle
S_TAIL_END = 2_930_063_281_250_000  # through height 2,654,999
S0 = 2_930_063_296_250_000  # through height 2,655,000


@pytest.mark.parametrize("height,shors", [
    (0, 25 * COIN), (5_669, 25 * COIN), (5_670, 50 * COIN), (294_999, 50 * COIN),
    (295_000, 25 * COIN), (2_360_000, 19_531_250), (2_654_999, 19_531_250),
    (2_655_000, 15_000_000), (64 * 295_000, 15_000_000), (10**12, 15_000_000),
])
def test_block_subsidy(height, shors):
    assert block_subsidy(P, height) == shors


@given(st.integers(min_value=0, max_value=10**9))
def test_subsidy_bounds(h):
    s = block_subsidy(P, h)
    assert s <= P.initial_subsidy
    if h >= P.warmup_blocks:
        assert s >= P.tail_emission
        assert block_subsidy(P, h + 1) <= s


def test_frozen_supply_values():
    assert naive_supply(2_654_999) == S_TAIL_END
    assert naive_supply(2_655_000) == S0
    assert cumulative_supply(P, 5_669) == 141_750 * COIN
    assert cumulative_supply(P, 294_999) == 14_608_250 * COIN
    assert cumulative_supply(P, 2_654_999) == S_TAIL_END
    assert tail_base_supply(P) == S0


def test_closed_form_matches_naive_sum():
    rng = random.Random(7)
    heights = [0, 5_669, 5_670, 294_999, 295_000, 2_654_999, 2_655_000, 2_999_999]
    heights += [rng.randrange(3_000_000) for _ in range(200)]
    for h in heights:
        assert cumulative_supply(P, h) == naive_supply(h), h


def test_supply_overflow_reports_first_height():
    small = ChainParams(max_money=1_000 * COIN)
    with pytest.raises(SupplyOverflowError) as err:
        cumulative_supply(small, 100)
    # 40 warm-up blocks reach exactly 1,000 LAT, the 41st passes it
    assert err.value.height == 40
    assert cumulative_supply(small, 39) == 1_000 * COIN


def test_supply_below_max_money_for_centuries():
    years = 640
    h = tail_onset_height(P) + years * 131_490
    assert cumulative_supply(P, h) < P.max_money


def test_schedule_rows():
    rows = emission_schedule(P)
    assert len(rows) == 11
    assert [r.phase for r in rows][:3] == ["Warm-up", "Halving 0", "Halving 1"]
    assert rows[6].reward == 156_250_000  # halving 5
    assert rows[-1].annual_emission == 1_972_350_000_000
    sup = [r.cumulative_supply for r in rows[:-1]]
    assert sup == sorted(set(sup))
    for r in rows[:-1]:
        assert r.cumulative_supply == cumulative_supply(P, r.end_height)
        assert r.reward == block_subsidy(P, r.start_height) == block_subsidy(P, r.end_height)


def test_schedule_golden():
    rows = emission_schedule(P)
    assert schedule_csv(rows) == (GOLDEN / "schedule.csv").read_text()
    md = schedule_markdown(rows)
    assert md.splitlines()[0] == (
        "| Phase | Blocks | Reward | Block Time | Approx. Date | Cumul. Supply |")


def test_schedule_without_warmup():
    p = ChainParams(warmup_blocks=0, warmup_subsidy=0)
    rows = emission_schedule(p)
    assert rows[0].phase == "Halving 0" and rows[0].start_height == 0
    assert len(rows) == 10


def test_format_lat():
    assert format_lat(25 * COIN) == "25.00000000"
    assert format_lat(19_531_250) == "0.19531250"
    assert format_lat(-1) == "-0.00000001"
    assert format_lat(123_456_789, 2) == "1.23"


def test_inflation():
    assert inflation_rate(P, 0) == pytest.approx(0.00067314, rel=1e-4)
    assert inflation_rate(P, 53) == pytest.approx(0.00064995, rel=1e-4)
    values = [inflation_rate(P, t) for t in range(0, 2000, 7)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert inflation_rate(P, 1e12) < 1e-12
    with pytest.raises(ValueError):
        inflation_rate(P, -1)


@pytest.mark.parametrize("t", [0, 1, 53, 153, 353, 1000])
def test_inflation_closed_form(t):
    assert inflation_rate(P, t) == pytest.approx(1 / (1486 + t), rel=1e-3)


def test_max_money_year():
    assert max_money_year(P) == 643
    assert max_money_year(ChainParams(max_money=S0)) == 0
    # the year after t_max would overflow
    onset = tail_onset_height(P)
    cumulative_supply(P, onset + 643 * 131_490)
    with pytest.raises(SupplyOverflowError):
        cumulative_supply(P, onset + 644 * 131_490)


def test_height_to_time():
    assert height_to_time(P, 0) == 0
    assert height_to_time(P, 5_670) == 300_510
    assert height_to_time(P, 295_000) / 31_557_600 == pytest.approx(2.21, abs=0.005)

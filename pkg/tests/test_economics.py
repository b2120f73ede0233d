import random

import pytest
from hypothesis import given, strategies as st

from latsim.consensus import ChainParams
from latsim.economics import (
    MarketState,
    MinerSpec,
    PowerModel,
    botnet_hashrate,
    break_even_price,
    equilibrium_miners,
    fee_sniping_probability_bound,
    marginal_cost_per_block,
    miner_payoff_honest,
    population_break_even_price,
    security_budget,
    sequential_equilibrium,
    solo_mining_economics,
)
from latsim.errors import DomainError

from oracles import reachable_fixed_points


def test_payoff():
    m = MarketState(price=0.053, subsidy=0.15)
    assert miner_payoff_honest(1, m, 0.008) == pytest.approx(-0.00005)
    assert miner_payoff_honest(0, m, 0.3) == -0.3
    with pytest.raises(DomainError):
        miner_payoff_honest(1.5, m, 0)


def test_payoff_random_recompute():
    rng = random.Random(3)
    for _ in range(20):
        a, p, f, s, c = (rng.random(), rng.uniform(0, 10), rng.uniform(0, 1),
                         rng.uniform(0, 50), rng.uniform(0, 5))
        assert miner_payoff_honest(a, MarketState(p, f, s), c) == pytest.approx(a * (s + f) * p - c)


def test_marginal_cost():
    pm = PowerModel(100, 0.12)
    assert marginal_cost_per_block(pm, 240) == pytest.approx(0.0008)
    assert marginal_cost_per_block(pm, 2_400) == pytest.approx(0.008)
    assert marginal_cost_per_block(pm, 240_000) == pytest.approx(0.80)
    assert marginal_cost_per_block(pm, 0) == 0


def test_break_even():
    assert break_even_price(50, 0.80) == pytest.approx(0.016)
    assert break_even_price(0.15, 0.008) == pytest.approx(0.0533, abs=1e-4)
    assert break_even_price(50, 0) == 0
    assert break_even_price(7, 3.5) * 7 == 3.5
    with pytest.raises(DomainError):
        break_even_price(0, 1)


def test_solo_rows():
    r = solo_mining_economics(1_000)
    assert (r.expected_days, r.energy_kwh, r.cost_usd, r.break_even_usd) == pytest.approx(
        (2.7778, 6.6667, 0.80, 0.016), rel=1e-4)


def test_equilibrium_examples():
    one = MinerSpec("a", 5000, 0.008)
    assert equilibrium_miners([one], MarketState(1.0, subsidy=0.15)) == (one,)
    pop = [MinerSpec(str(i), 1000 + i, 0.001) for i in range(5)]
    assert equilibrium_miners(pop, MarketState(5.0, fees=0.0, subsidy=0.0)) == ()
    with pytest.raises(DomainError):
        equilibrium_miners([], MarketState(1.0))


def test_cascade_when_fees_below_every_cost():
    pop = [MinerSpec(str(i), 1 + i, 0.5 + i) for i in range(6)]
    assert equilibrium_miners(pop, MarketState(1.0, fees=0.4, subsidy=0.0)) == ()


def test_equilibrium_keeps_profitable_and_recomputes_shares():
    big = MinerSpec("big", 9, 0.5)
    small = MinerSpec("small", 1, 0.2)
    # at shares 0.9/0.1 small loses; big alone still profits
    got = equilibrium_miners([big, small], MarketState(1.0, subsidy=1.0))
    assert got == (big,)


def test_synchronous_and_sequential_can_differ():
    a, b = MinerSpec("a", 1, 0.6), MinerSpec("b", 1, 0.6)
    market = MarketState(1.0, subsidy=1.0)
    assert equilibrium_miners([a, b], market) == ()
    assert sequential_equilibrium([a, b], market) == (b,)
    assert sequential_equilibrium([b, a], market) == (a,)
    assert reachable_fixed_points([0.6, 0.6], [1, 1], 1.0) == {frozenset({0}), frozenset({1})}


def random_population(rng, n):
    return [MinerSpec(f"m{i}", rng.uniform(1, 100), rng.uniform(0, 1)) for i in range(n)]


def test_synchronous_result_is_order_independent_and_inside_every_sequential_one():
    rng = random.Random(11)
    for _ in range(200):
        pop = random_population(rng, rng.randint(1, 6))
        market = MarketState(rng.uniform(0, 10), subsidy=0.15)
        sync = {m.id for m in equilibrium_miners(pop, market)}
        shuffled = pop[:]
        rng.shuffle(shuffled)
        assert {m.id for m in equilibrium_miners(shuffled, market)} == sync
        ids = [m.id for m in pop]
        for fp in reachable_fixed_points([m.cost_per_block for m in pop],
                                         [m.hashrate for m in pop],
                                         market.reward * market.price):
            assert sync <= {ids[i] for i in fp}


def test_population_break_even_guarantees_survivor():
    rng = random.Random(12)
    for _ in range(200):
        pop = random_population(rng, rng.randint(1, 30))
        p_min = population_break_even_price(pop, 0.15)
        market = MarketState(p_min * rng.uniform(1.0001, 3), subsidy=0.15)
        assert equilibrium_miners(pop, market)
        assert sequential_equilibrium(pop, market)


def test_fee_sniping():
    assert fee_sniping_probability_bound(0, 0.15) == 0
    assert fee_sniping_probability_bound(0.0025, 0.15) == pytest.approx(0.10)
    with pytest.raises(DomainError):
        fee_sniping_probability_bound(0.1, 0)


@given(st.floats(0, 100), st.floats(0.01, 10))
def test_fee_sniping_monotone(v, r):
    p = fee_sniping_probability_bound(v, r)
    assert 0 <= p < 1
    assert fee_sniping_probability_bound(v + 1, r) >= p
    assert fee_sniping_probability_bound(v, r * 2) <= p


def test_security_budget():
    P = ChainParams()
    assert security_budget(P, 5_670, 1) == pytest.approx(6_574_500)
    assert security_budget(P, 2_655_000, 10) == pytest.approx(197_235)
    assert security_budget(P, 2_655_000, 0, 1234.0) == 1234.0
    assert security_budget(P, 0, 3) == pytest.approx(3 * security_budget(P, 0, 1))


def test_botnet():
    assert botnet_hashrate(10_000) == (20e6, pytest.approx(3000, rel=1e-3))
    assert botnet_hashrate(1_000_000)[0] == 2e9
    assert botnet_hashrate(0) == (0, 0)
    assert botnet_hashrate(3, 1000, 1000) == (3000, 3)

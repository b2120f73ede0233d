import pytest
from hypothesis import given, strategies as st

from latsim.consensus import (
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
from latsim.errors import ConfigError, EncodingError, TargetOverflowError

from oracles import POW_LIMIT, compact_to_int, int_to_compact

u256 = st.integers(min_value=0, max_value=(1 << 256) - 1)


def test_pow_limit_expansion():
    assert int(expand_compact(0x207FFFFF)) == POW_LIMIT
    assert compress_compact(POW_LIMIT) == 0x207FFFFF
    assert ChainParams().pow_limit_target == Target256(POW_LIMIT)


def test_known_bitcoin_values():
    assert int(expand_compact(0x1D00FFFF)) == 0xFFFF << 208
    assert compress_compact(0xFFFF << 208) == 0x1D00FFFF
    assert int(expand_compact(0x01003456)) == 0
    assert int(expand_compact(0x02123456)) == 0x1234
    assert compress_compact(0x80) == 0x02008000


def test_sign_bit_rejected():
    with pytest.raises(EncodingError):
        expand_compact(0x04923456)
    # a zero mantissa with the sign bit decodes to zero, as in the reference
    assert int(expand_compact(0x01800000)) == 0


def test_overflow_rejected():
    with pytest.raises(EncodingError):
        expand_compact(0x21010000)
    with pytest.raises(EncodingError):
        expand_compact(0xFF123456)


@given(u256)
def test_compress_matches_byte_oracle(value):
    assert compress_compact(value) == int_to_compact(value)


@given(u256)
def test_round_trip_truncates_below_2_pow_minus_15(value):
    # the mantissa keeps 15 to 23 significant bits, so the top 15 bits survive
    back = int(expand_compact(compress_compact(value)))
    assert back <= value
    assert value - back < (value >> 15) + 1
    assert compress_compact(back) == compress_compact(value)


@given(st.integers(min_value=0, max_value=0x20FFFFFF))
def test_expand_matches_byte_oracle(bits):
    ref = compact_to_int(bits)
    # the sign test applies to the mantissa after shifting, as in the reference
    if bits & 0x00800000 and ref:
        with pytest.raises(EncodingError):
            expand_compact(bits)
        return
    if ref >= 1 << 256:
        with pytest.raises(EncodingError):
            expand_compact(bits)
    else:
        assert int(expand_compact(bits)) == ref


def test_target_arithmetic_checks_range():
    t = Target256((1 << 256) - 1)
    with pytest.raises(TargetOverflowError):
        t + 1
    with pytest.raises(TargetOverflowError):
        Target256(0) - 1
    with pytest.raises(TargetOverflowError):
        t * 2
    with pytest.raises(TargetOverflowError):
        Target256(5) * (1 << 32)
    with pytest.raises(ZeroDivisionError):
        t // 0
    assert (t // 2) * 2 == Target256((1 << 256) - 2)
    assert Target256.from_hex(t.hex()) == t
    assert len(Target256(1).hex()) == 64


def test_chain_params_defaults():
    p = ChainParams()
    assert p.blocks_per_year == 131_490
    assert target_spacing(p, 0) == 53
    assert target_spacing(p, 5_669) == 53
    assert target_spacing(p, 5_670) == 240


@pytest.mark.parametrize("height,weight", [
    (0, 11_000_000), (49_999, 11_000_000), (50_000, 28_000_000),
    (99_999, 28_000_000), (100_000, 56_000_000), (10**7, 56_000_000),
])
def test_weight_stages(height, weight):
    assert max_block_weight(ChainParams(), height) == weight


@pytest.mark.parametrize("kwargs", [
    {"spacing": 0}, {"tail_emission": 50 * 10**8}, {"pow_limit": 0x04923456},
    {"weight_stages": ((10, 1),)}, {"weight_stages": ((0, 5), (0, 6))},
    {"warmup_blocks": -1}, {"warmup_subsidy": 0},
])
def test_invalid_params(kwargs):
    with pytest.raises(ConfigError):
        ChainParams(**kwargs)


def test_warmup_can_be_disabled():
    p = ChainParams(warmup_blocks=0, warmup_subsidy=0)
    assert target_spacing(p, 0) == 240


def test_load_params(tmp_path):
    f = tmp_path / "chain.toml"
    f.write_text('[chain]\nspacing = 120\npow_limit = "0x1f7fffff"\n'
                 'weight_stages = [[0, 1000], [10, 2000]]\n')
    p = load_params(f)
    assert p.spacing == 120 and p.pow_limit == 0x1F7FFFFF
    assert max_block_weight(p, 10) == 2000
    assert load_params(None) == ChainParams()
    (tmp_path / "bad.toml").write_text("bogus = 1\n")
    with pytest.raises(ConfigError):
        load_params(tmp_path / "bad.toml")
    with pytest.raises(ConfigError):
        load_params(tmp_path / "missing.toml")


def test_chain_work():
    assert block_work(POW_LIMIT) == 2
    assert chain_work([1 << 255, 1 << 254]) == 2 + 4
    with pytest.raises(ZeroDivisionError):
        block_work(0)
    with pytest.raises(ValueError):
        BlockRecord(-1, 0, Target256(1))

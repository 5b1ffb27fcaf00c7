"""The drip PRNG is a cross-implementation contract: same seed, same u64
sequence, in any language. These tests pin the production generator against
an independently written reference plus hard-coded golden values."""

import pytest
from hypothesis import given, strategies as st

from gesto.prng import Xorshift64Star, splitmix64

from oracles import RefRng, ref_u64_stream

# first four outputs per seed, computed by the reference implementation
GOLDEN = {
    0: [0x7BBCB40D550682D0, 0xDE7FE413D00CC9FD, 0xB3C638353C668C91, 0xE073AFC0949195FC],
    1: [0x4B46A55DF3611B9B, 0xD7E1F1410E763EF4, 0x5F14EC66975F9B06, 0x3B2C74FAD44D6CDB],
    42: [0x31B0ECE7C4F697A2, 0x9008A3B1CB686F03, 0x7C7173ABD97BE16F, 0x45672C8C8D6B8C4F],
    (1 << 64) - 1: [0x079CE65D09240E13, 0x1587F139EB004B7F, 0x3190CF0B897A2433, 0xDEFAE28A45017DC9],
}


@pytest.mark.parametrize("seed", sorted(GOLDEN))
def test_golden_sequences(seed):
    rng = Xorshift64Star(seed)
    assert [rng.next_u64() for _ in range(4)] == GOLDEN[seed]


@given(st.integers(min_value=0, max_value=(1 << 64) - 1))
def test_matches_reference_stream(seed):
    rng = Xorshift64Star(seed)
    ref = ref_u64_stream(seed)
    assert [rng.next_u64() for _ in range(8)] == [next(ref) for _ in range(8)]


@given(st.integers(min_value=0, max_value=(1 << 64) - 1))
def test_floats_match_reference_and_stay_in_unit_interval(seed):
    rng = Xorshift64Star(seed)
    ref = RefRng(seed)
    for _ in range(8):
        f = rng.next_float()
        assert f == ref.next_float()
        assert 0.0 <= f < 1.0


def test_same_seed_same_stream():
    a, b = Xorshift64Star(7), Xorshift64Star(7)
    assert [a.next_u64() for _ in range(100)] == [b.next_u64() for _ in range(100)]


def test_zero_seed_is_not_degenerate():
    rng = Xorshift64Star(0)
    values = {rng.next_u64() for _ in range(50)}
    assert 0 not in values or len(values) == 50
    assert len(values) == 50


def test_uniform_spans_the_requested_band():
    rng = Xorshift64Star(3)
    values = [rng.uniform(2.0, 5.0) for _ in range(1000)]
    assert all(2.0 <= v < 5.0 for v in values)
    assert min(values) < 2.2 and max(values) > 4.8


def test_splitmix_is_deterministic_and_mixing():
    assert splitmix64(0) == splitmix64(0)
    outs = {splitmix64(i) for i in range(1000)}
    assert len(outs) == 1000

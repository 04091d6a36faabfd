import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nmcode.circuits import DTClass, LocalFunction
from nmcode.errors import InfeasibleParams
from nmcode.params import star_fallback_bound
from nmcode.reductions import leaky
from nmcode.reductions.star import (
    StarParams, decode_batch, encode_batch, restriction_batch, star_decode, star_encode, star_simulator,
)
from nmcode.restrictions import ext_indices


@pytest.fixture(scope="module")
def tiny():
    return StarParams.build(2, 16, 1, 1, enforce=False)


def all_rows(width):
    idx = np.arange(1 << width)
    return ((idx[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


def test_tiny_sizes(tiny):
    assert (tiny.m, tiny.gen.seed_len, tiny.randomness_len) == (9, 8, 16)


def test_infeasible_inputs():
    with pytest.raises(InfeasibleParams) as exc:
        StarParams.build(2, 16, 1, 1)
    assert exc.value.inequality == "4*sigma/log(1/p) <= k"
    with pytest.raises(InfeasibleParams) as exc:
        StarParams.build(8, 16, 1, 1, enforce=False)
    assert exc.value.inequality == "k <= n - m"


@given(st.integers(0, 2 ** 16 - 1), st.integers(0, 3))
def test_roundtrip(tiny_bits, x):
    pp = StarParams.build(2, 16, 1, 1, enforce=False)
    rand = pp.split_randomness(format(tiny_bits, "016b"))
    msg = np.array([x >> 1, x & 1], dtype=np.uint8)
    assert (star_decode(pp, star_encode(pp, msg, rand=rand)) == msg).all()


def test_prefix_is_seed_encoding(tiny):
    rows = all_rows(tiny.randomness_len)[::97]
    R = [tiny.split_randomness(r) for r in rows]
    Z, Rr, U = (np.stack(a) for a in zip(*R))
    rho1, rho2, fallback = restriction_batch(tiny, Z, Rr, U)
    C, _ = encode_batch(tiny, np.zeros((len(R), 2), dtype=np.uint8), Z, Rr, U)
    seeds = np.where(fallback[:, None], tiny.zeta_star, Z)
    assert (C[:, : tiny.m] == tiny.rpe.encode_batch(seeds, Rr)).all()
    # the message slots are the last k survivors, all past the prefix
    for row in rho1:
        assert all(i >= tiny.m for i in ext_indices(row, 2))


def test_fallback_rate_below_bound(tiny):
    seeds = tiny.gen.all_seeds()
    rate = (tiny.region_count(tiny.survivors(seeds)) < tiny.k).mean()
    assert rate == 1 / 16  # frozen from full enumeration of the 256 seeds
    assert rate <= star_fallback_bound(tiny.sigma, tiny.p_log_inv)


def test_constant_overwrite(tiny, rng):
    value = rng.integers(0, 2, tiny.n, dtype=np.uint8)
    adv = leaky.LeakyAdversary(LocalFunction.constant(tiny.n, value))
    real = {None if (d := star_decode(tiny, leaky.eval_leaky(adv, star_encode(tiny, x, rng)))) is None
            else tuple(d) for x in ([0, 0], [1, 1]) for _ in range(20)}
    assert len(real) == 1
    sim = star_simulator(tiny, adv, rng, target=DTClass(1))
    assert sim.good
    out = {leaky.eval_leaky(sim.adversary, np.array(x, dtype=np.uint8)) is None for x in ([0, 0], [1, 1])}
    sims = {None if (o := leaky.eval_leaky(sim.adversary, np.array(x, dtype=np.uint8))) is None else tuple(o)
            for x in ([0, 0], [1, 1])}
    assert sims == real and len(out) == 1


def test_bottom_witness(tiny):
    """A prefix encoding a seed with too few survivors in the message region decodes to rejection."""
    seeds = tiny.gen.all_seeds()
    sparse = seeds[tiny.region_count(tiny.survivors(seeds)) < tiny.k][0]
    c = np.concatenate([tiny.rpe.encode(sparse, np.zeros(tiny.rpe.rand_len, dtype=np.uint8)),
                        np.ones(tiny.n - tiny.m, dtype=np.uint8)])
    assert star_decode(tiny, c) is None
    ok, _ = decode_batch(tiny, c[None, :])
    assert not ok[0]


def test_simulator_matches_on_sample(tiny, rng):
    fam = LocalFunction.from_outputs(tiny.n, [([i], [1, 0]) if i % 3 == 0 else ([i], [0, 1])
                                              for i in range(tiny.n)])
    adv = leaky.LeakyAdversary(fam)
    for _ in range(50):
        rand = tiny.sample_randomness(rng)
        sim = star_simulator(tiny, adv, target=DTClass(1), rand=rand)
        assert sim.good
        for x in itertools.product((0, 1), repeat=2):
            x = np.array(x, dtype=np.uint8)
            real = star_decode(tiny, leaky.eval_leaky(adv, star_encode(tiny, x, rand=rand)))
            simulated = leaky.eval_leaky(sim.adversary, x)
            assert (real is None and simulated is None) or (real == simulated).all()


def test_simulator_outside_class_is_constant(tiny, rng):
    # xor of two adjacent positions needs depth 2 once both carry message bits
    fam = LocalFunction.from_outputs(tiny.n, [([i, (i + 1) % tiny.n], [0, 1, 1, 0]) for i in range(tiny.n)])
    bad = 0
    for _ in range(40):
        sim = star_simulator(tiny, leaky.LeakyAdversary(fam), rng, target=DTClass(1))
        if not sim.good:
            bad += 1
            assert isinstance(sim.adversary, leaky.ConstantFunction)
    assert bad > 0


def test_strict_decode_checks_first_slot():
    pp = StarParams.build(2, 16, 1, 1, enforce=False, strict_decode=True)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.integers(0, 2, 2, dtype=np.uint8)
        assert (star_decode(pp, star_encode(pp, x, rng)) == x).all()


def test_simulating_a_rejecting_adversary(tiny, rng):
    # an adversary whose final choice rejects, as produced by an inner level's simulator
    fam = LocalFunction.identity(tiny.n)
    rejecting = leaky.LeakyAdversary(fam, (), (), lambda transcript: None, tiny.n)
    for _ in range(20):
        sim = star_simulator(tiny, rejecting, rng, target=DTClass(1))
        for x in ([0, 0], [1, 0]):
            assert leaky.eval_leaky(sim.adversary, np.array(x, dtype=np.uint8)) is None

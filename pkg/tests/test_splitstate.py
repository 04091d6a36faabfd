import itertools

import numpy as np
import pytest

from nmcode.circuits import LocalFunction, random_local
from nmcode.codes import RpeScheme, identity_code
from nmcode.errors import DimensionMismatch, InfeasibleParams
from nmcode.reductions import leaky
from nmcode.reductions import splitstate as ss


@pytest.fixture(scope="module")
def tiny():
    rep = ss.repetition_scheme(1, 2)
    return ss.SplitStateParams.build(1, 1, 1, 1, 2, 4, rep, rep, RpeScheme.from_code(identity_code(6)),
                                     enforce=False, precision_bits=3)


@pytest.fixture(scope="module")
def minimal():
    return ss.SplitStateParams.minimal(1, 4, 1, 1, 2)


def test_tiny_layout(tiny):
    assert tiny.randomness_lens == (6, 4, 1, 0, 1)
    assert (tiny.n_Z, tiny.tau, tiny.n_R, tiny.n) == (6, 4, 2, 12)
    assert tiny.p == 0.75


def test_minimal_instance(minimal):
    assert (minimal.n_Z, minimal.n_L, minimal.tau, minimal.n_R, minimal.n) == (56, 15, 974, 145, 1175)
    assert all(minimal.checks["per_encoding"].values())
    assert minimal.gen.bias * 1024 == 24  # 3/128 of a 2^10 field


def test_exhaustive_roundtrip(tiny):
    idx = np.arange(1 << tiny.randomness_len)
    bits = ((idx[:, None] >> np.arange(tiny.randomness_len - 1, -1, -1)) & 1).astype(np.uint8)
    rand = ss.SsRandomness(*np.split(bits, np.cumsum(tiny.randomness_lens)[:-1], axis=1))
    for xl, xr in itertools.product((0, 1), repeat=2):
        XL = np.full((len(idx), 1), xl, dtype=np.uint8)
        XR = np.full((len(idx), 1), xr, dtype=np.uint8)
        C, _ = ss.encode_batch(tiny, XL, XR, rand)
        ok, L, R = ss.decode_batch(tiny, C)
        assert ok.all() and (L == xl).all() and (R == xr).all()


def test_right_only_tampering_keeps_left(minimal, rng):
    xl, xr = np.array([1], dtype=np.uint8), np.array([0], dtype=np.uint8)
    for _ in range(20):
        Z, X, S = ss.ss_encode(minimal, xl, xr, rng)
        S2 = rng.integers(0, 2, S.shape[0], dtype=np.uint8)
        out = ss.ss_decode(minimal, Z, X, S2)
        assert out is not None and (out[0] == xl).all()
        assert (out[1] == minimal.rpe_R.decode(S2)).all()


def test_region_length_errors(minimal):
    with pytest.raises(DimensionMismatch):
        ss.ss_decode(minimal, np.zeros(3, dtype=np.uint8), np.zeros(minimal.tau, dtype=np.uint8),
                     np.zeros(minimal.n_R, dtype=np.uint8))


def test_enforced_build_rejects_small_right_block():
    rep = ss.repetition_scheme(1, 16)
    with pytest.raises(InfeasibleParams):
        ss.SplitStateParams.build(1, 4, 1, 1, 2, 974, rep, ss.repetition_scheme(1, 2))


def test_simulator_is_split(minimal, rng):
    """Each side of the simulated function reads only its own half."""
    fam = random_local(minimal.n, minimal.n, 2, rng)
    adv = leaky.LeakyAdversary(fam)
    for _ in range(10):
        streams = ss.SsTrialRng.from_generator(rng)
        sim = ss.ss_simulator(minimal, adv, streams=streams)
        if sim.kind != "split":
            continue
        seed = int(rng.integers(1 << 30))
        outs_l = {tuple(sim.f_L(np.array([b], dtype=np.uint8), np.random.default_rng(seed))) for b in (0, 1)}
        # the left output cannot depend on the right message: same left input, any right input
        for b in (0, 1):
            left = sim.f_L(np.array([b], dtype=np.uint8), np.random.default_rng(seed))
            for c in (0, 1):
                full = sim(np.array([b], dtype=np.uint8), np.array([c], dtype=np.uint8),
                           rng=np.random.default_rng(seed))
                assert full[: minimal.k].tolist() == left.tolist()
        assert outs_l


def test_identity_adversary_hybrids_agree(minimal, rng):
    adv = leaky.LeakyAdversary(LocalFunction.identity(minimal.n))
    for _ in range(30):
        out = ss.run_hybrids(minimal, adv, [1], [0], rng, rng)
        if out["outcome"] == "bad":
            continue
        assert out["H0"].tolist() == [1, 0]
        for h in ("H1", "H2", "H3", "H4"):
            assert out[h].tolist() == [1, 0], h


def test_constant_adversary_simulates_to_constant(minimal, rng):
    value = np.concatenate(ss.ss_encode(minimal, [0], [1], rng))
    sim = ss.ss_simulator(minimal, leaky.ConstantFunction(value, minimal.n))
    assert sim.kind == "constant" and sim.value.tolist() == [0, 1]
    assert sim([1], [0]).tolist() == [0, 1]

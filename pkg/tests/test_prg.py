import itertools
from fractions import Fraction

import numpy as np
import pytest

from nmcode import codes, prg
from nmcode.errors import DimensionMismatch, RegimeTooLarge, ThresholdViolation


def joint_law_oracle(g, T):
    """Pattern counts over every seed, by direct evaluation."""
    counts = {}
    for seed in itertools.product((0, 1), repeat=g.seed_len):
        out = g.eval(np.array(seed, dtype=np.uint8))
        key = tuple(int(out[i]) for i in T)
        counts[key] = counts.get(key, 0) + 1
    return counts


@pytest.mark.parametrize("sigma,out_len", [(0, 4), (1, 8), (2, 8)])
def test_unbiased_is_sigma_wise_uniform(sigma, out_len):
    g = prg.CwGenerator.unbiased(sigma, out_len)
    total = 1 << g.seed_len
    for size in range(1, sigma + 1):
        for T in itertools.combinations(range(out_len), size):
            counts = joint_law_oracle(g, T)
            assert all(counts.get(p, 0) * (1 << size) == total for p in itertools.product((0, 1), repeat=size))


def test_verify_independence_agrees_with_oracle():
    g = prg.CwGenerator.unbiased(1, 8)
    assert prg.verify_independence(g, 2).ok
    assert prg.verify_independence(g, 3, exact_order=True).ok
    assert not prg.verify_independence(g, 4, exact_order=True).ok


def test_biased_marginal_is_exact():
    g = prg.CwGenerator.biased(1, 8, 0.25, precision_bits=4)
    assert g.bias == Fraction(1, 4)
    counts = joint_law_oracle(g, (0, 5))
    total = 1 << g.seed_len
    assert counts[(1, 1)] * 16 == total
    assert counts[(0, 0)] * 16 == total * 9


def test_seed_and_field_sizes():
    g = prg.CwGenerator.unbiased(3, 100)
    assert g.field_log == 7 and g.seed_len == 28
    with pytest.raises(RegimeTooLarge):
        g.all_seeds()
    with pytest.raises(DimensionMismatch):
        g.eval(np.zeros(5, dtype=np.uint8))


def test_coefficients_roundtrip():
    g = prg.CwGenerator.unbiased(2, 16)
    seed = g.seed_from_coefficients([3, 0, 15])
    assert g.coefficients(seed[None, :]).tolist() == [[3, 0, 15]]


def test_concat_requires_threshold_and_length():
    g = prg.CwGenerator.unbiased(2, 8)
    with pytest.raises(ThresholdViolation):
        prg.concat_independent(g, codes.scheme_for(g.seed_len, 1), 3)
    with pytest.raises(DimensionMismatch):
        prg.concat_independent(g, codes.scheme_for(g.seed_len + 1, 2), 3)
    src = prg.concat_independent(g, codes.scheme_for(g.seed_len, 2), 3)
    assert src.length == 8 + src.rpe.n + 3
    assert src.sample(np.random.default_rng(0)).shape == (src.length,)


def test_concat_stream_is_pairwise_uniform():
    g = prg.CwGenerator.unbiased(1, 4)
    src = prg.concat_independent(g, codes.scheme_for(g.seed_len, 1), 1)
    rows = []
    for bits in itertools.product((0, 1), repeat=src.randomness_len):
        bits = np.array(bits, dtype=np.uint8)
        a, b = g.seed_len, g.seed_len + src.rpe.rand_len
        rows.append(src.draw(bits[:a], bits[a:b], bits[b:]))
    rows = np.array(rows)
    for i, j in itertools.combinations(range(src.length), 2):
        pat = rows[:, i] * 2 + rows[:, j]
        assert (np.bincount(pat, minlength=4) * 4 == rows.shape[0]).all()

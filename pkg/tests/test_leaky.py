import numpy as np
import pytest

from nmcode.circuits import LocalFunction
from nmcode.errors import FormatError, SelectorViolation
from nmcode.reductions import leaky


def family():
    # outputs: copy x0..x3, then their negations
    return LocalFunction.from_outputs(4, [([i], [0, 1]) for i in range(4)] + [([i], [1, 0]) for i in range(4)])


def test_plain_adversary_is_its_family():
    adv = leaky.LeakyAdversary(LocalFunction.identity(4))
    assert leaky.eval_leaky(adv, [1, 0, 1, 1]).tolist() == [1, 0, 1, 1]


def test_branching_on_leak():
    sel = leaky.BitBranchSelector(0, 0, np.arange(4), np.arange(4, 8))
    adv = leaky.LeakyAdversary(family(), (leaky.FixedSelector(np.array([2])),), (1,), sel, 4)
    assert leaky.eval_leaky(adv, [1, 0, 0, 1]).tolist() == [1, 0, 0, 1]
    assert leaky.eval_leaky(adv, [1, 0, 1, 1]).tolist() == [0, 1, 0, 0]
    word, transcript = leaky.play(adv, family().eval([1, 0, 1, 1]))
    assert [t.tolist() for t in transcript] == [[1]]


def test_table_selector_longest_prefix():
    sel = leaky.TableSelector({"": np.array([0, 1]), "1": np.array([4, 5])})
    assert sel(()).tolist() == [0, 1]
    assert sel((np.array([1, 0]),)).tolist() == [4, 5]
    assert sel((np.array([0, 0]),)).tolist() == [0, 1]


def test_selector_violations():
    adv = leaky.LeakyAdversary(family(), (leaky.FixedSelector(np.array([0, 1])),), (1,))
    with pytest.raises(SelectorViolation, match="leak round 1"):
        leaky.eval_leaky(adv, [0, 0, 0, 0])
    adv = leaky.LeakyAdversary(family(), final_selector=leaky.FixedSelector(np.array([3, 1, 2, 0])), out_len=4)
    with pytest.raises(SelectorViolation, match="increasing"):
        leaky.eval_leaky(adv, [0, 0, 0, 0])


def test_rejecting_final_selector():
    adv = leaky.LeakyAdversary(family(), final_selector=lambda t: None, out_len=4)
    assert leaky.eval_leaky(adv, [0, 1, 0, 1]) is None
    ok, _ = leaky.tamper_batch(adv, np.zeros((3, 4), dtype=np.uint8))
    assert not ok.any()


def test_tamper_batch_matches_single_runs(rng):
    sel = leaky.BitBranchSelector(0, 0, np.arange(4), np.arange(4, 8))
    adv = leaky.LeakyAdversary(family(), (leaky.FixedSelector(np.array([3])),), (1,), sel, 4)
    X = rng.integers(0, 2, (20, 4), dtype=np.uint8)
    ok, out = leaky.tamper_batch(adv, X)
    assert ok.all()
    assert all((out[i] == leaky.eval_leaky(adv, X[i])).all() for i in range(20))
    const = leaky.ConstantFunction(np.array([1, 1], dtype=np.uint8), 4)
    ok, out = leaky.tamper_batch(const, X)
    assert ok.all() and (out == 1).all()


def test_selector_json():
    sel = leaky.selector_from_json({"table": {"": [0, 1], "01": [2, 3]}, "default": [0, 1]}, "s")
    leaky.validate_table_selector(sel, 2, 8, True, "s")
    with pytest.raises(FormatError, match=r"s\.table"):
        leaky.selector_from_json({"table": {"2": [0]}}, "s")
    bad = leaky.selector_from_json({"table": {"": [1, 0]}}, "s")
    with pytest.raises(FormatError, match="increasing"):
        leaky.validate_table_selector(bad, 2, 8, True, "s")

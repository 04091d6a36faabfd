import itertools
import json
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nmcode import circuits as cc
from nmcode.errors import DimensionMismatch, FormatError
from nmcode.restrictions import Restriction


def all_inputs(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.uint8)


def dnf_oracle(terms, x):
    return int(any(all((x[abs(l) - 1] == 1) == (l > 0) for l in t) for t in terms))


def depth_oracle(values, n):
    """Optimal tree depth of the function with the given truth table (rows of all_inputs(n))."""
    table = {tuple(x): int(v) for x, v in zip(all_inputs(n), values)}

    @lru_cache(maxsize=None)
    def depth(fixed):
        pts = [x for x in table if all(x[i] == b for i, b in fixed)]
        if len({table[x] for x in pts}) <= 1:
            return 0
        free = [i for i in range(n) if i not in dict(fixed)]
        return min(1 + max(depth(tuple(sorted(fixed + ((i, b),)))) for b in (0, 1)) for i in free)

    return depth(())


terms_st = st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), st.lists(
    st.lists(st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v])), min_size=1, max_size=3),
    min_size=0, max_size=4)))


@given(terms_st)
def test_dnf_eval_matches_oracle(nt):
    n, terms = nt
    f = cc.dnf(n, terms)
    X = all_inputs(n)
    assert f.eval_batch(X).tolist() == [dnf_oracle(terms, x) for x in X]


@given(terms_st)
def test_dt_depth_matches_oracle(nt):
    n, terms = nt
    f = cc.dnf(n, terms)
    values = f.eval_batch(all_inputs(n))
    want = depth_oracle(tuple(values), n)
    assert cc.dt_depth(f) == want
    assert cc.dt_depth(f, limit=1) == min(want, 2)
    tree = cc.optimal_dt(f)
    assert tree.depth == want
    assert (tree.eval_batch(all_inputs(n)) == values).all()


@given(terms_st, st.data())
def test_restriction_fixes_non_survivors(nt, data):
    n, terms = nt
    rho1 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    rho2 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    f = cc.dnf(n, terms)
    g = f.restrict(Restriction(rho1, rho2))
    for x in all_inputs(n):
        merged = np.where(rho1 == 1, x, rho2)
        assert g.eval(x) == f.eval(merged)
    assert set(g.support) <= set(np.flatnonzero(rho1).tolist())


def test_cnf_and_constants():
    f = cc.cnf(2, [[1, 2], [-1]])
    assert f.eval_batch(all_inputs(2)).tolist() == [0, 1, 0, 0]
    assert cc.dnf(3, []).eval([1, 1, 1]) == 0
    assert cc.dnf(3, [[]]).eval([0, 0, 0]) == 1


def test_layers_roundtrip(tmp_path):
    fs = [cc.dnf(4, [[1, -2], [3, 4]]), cc.dnf(4, [[-1, 3]])]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cc.circuit_to_layers(fs)))
    back = cc.load_circuits(path)
    X = all_inputs(4)
    for a, b in zip(fs, back):
        assert (a.eval_batch(X) == b.eval_batch(X)).all()


@pytest.mark.parametrize("layers,msg", [
    ([], "no layers"),
    ([{"op": "XOR", "gates": []}], r"layers\[0\].op"),
    ([{"op": "AND", "gates": [[1, 9]]}], r"gates\[0\]\[1\]: input 9"),
    ([{"op": "AND", "gates": [[1]]}, {"op": "AND", "gates": [[1]]}], "alternate"),
    ([{"op": "AND", "gates": [[1]]}, {"op": "OR", "gates": [[2]]}], r"layers\[1\].gates\[0\]\[0\]"),
])
def test_layers_errors_name_position(layers, msg):
    with pytest.raises(FormatError, match=msg):
        cc.circuit_from_layers(3, layers)


def test_local_function_eval_and_substitute(rng):
    f = cc.random_local(6, 10, 3, rng)
    X = all_inputs(6)
    Y = f.eval_batch(X)
    for j in range(10):
        deps = f.deps[j]
        idx = sum(X[:, d].astype(int) << s for s, d in enumerate(deps))
        assert (Y[:, j] == f.tables[j][idx]).all()
    rho1 = np.array([1, 0, 1, 0, 0, 1], dtype=np.uint8)
    rho2 = np.array([0, 1, 0, 1, 1, 0], dtype=np.uint8)
    g = f.restrict(Restriction(rho1, rho2))
    assert (g.eval_batch(X) == f.eval_batch(np.where(rho1 == 1, X, rho2))).all()


def test_influence_is_semantic():
    # output 0 reads inputs 0 and 1 but ignores input 1
    f = cc.LocalFunction.from_outputs(3, [([0, 1], [0, 1, 0, 1]), ([2], [1, 0])])
    assert f.influence() == {0, 2}
    assert f.influence([0]) == {0}
    fam = cc.FunctionFamily([cc.dnf(3, [[1, 2], [1, -2]])])
    assert fam.influence() == {0, 1}


def test_local_dt_depths_match_oracle(rng):
    f = cc.random_local(4, 12, 3, rng)
    X = all_inputs(4)
    Y = f.eval_batch(X)
    assert f.dt_depths().tolist() == [depth_oracle(tuple(Y[:, j]), 4) for j in range(12)]


def test_class_membership():
    f = cc.LocalFunction.from_outputs(3, [([0, 1], [0, 0, 0, 1]), ([0], [0, 1]), ([], [1])])
    assert cc.DTClass(1).contains(f).tolist() == [False, True, True]
    assert cc.LocalClass(1).contains(f).tolist() == [False, True, True]
    assert cc.WidthClass(2).contains(f).all()
    fam = cc.FunctionFamily([cc.dnf(4, [[1, 2, 3]]), cc.dnf(4, [[1], [2]])])
    assert cc.WidthClass(2).contains(fam).tolist() == [False, True]
    assert cc.AnyClass().contains(fam).all()


def test_decision_tree_json_and_conversions(rng):
    t = cc.random_dt(5, 3, rng)
    X = all_inputs(5)
    assert (cc.dt_to_dnf(t).eval_batch(X) == t.eval_batch(X)).all()
    assert (cc.dt_to_local(t).eval_batch(X)[:, 0] == t.eval_batch(X)).all()
    tree = cc.dt_from_json({"var": 1, "lo": 0, "hi": {"var": 2, "lo": 1, "hi": 0}}, 3)
    assert tree.eval_batch(all_inputs(3)).tolist() == [0, 0, 0, 0, 1, 1, 0, 0]


def test_family_size_mismatch():
    with pytest.raises(DimensionMismatch):
        cc.FunctionFamily([cc.dnf(2, [[1]]), cc.dnf(3, [[1]])])

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nmcode.gf2m import PRIMITIVE_POLY, clmul_mod, field


@pytest.mark.parametrize("m", range(1, 9))
def test_table_product_matches_shift_and_add(m):
    F = field(m)
    a, b = np.meshgrid(np.arange(F.size), np.arange(F.size))
    ref = np.vectorize(lambda x, y: clmul_mod(int(x), int(y), m))(a, b)
    assert (F.mul(a, b) == ref).all()


@pytest.mark.parametrize("m", sorted(PRIMITIVE_POLY))
def test_generator_has_full_order(m):
    F = field(m)
    assert sorted(F.exp[: F.order].tolist()) == list(range(1, F.size))


@given(st.integers(2, 10), st.data())
def test_field_axioms(m, data):
    F = field(m)
    a, b, c = (data.draw(st.integers(0, F.size - 1)) for _ in range(3))
    assert F.mul(a, F.mul(b, c)) == F.mul(F.mul(a, b), c)
    assert F.mul(a, b ^ c) == F.mul(a, b) ^ F.mul(a, c)
    if a:
        assert F.mul(a, F.inv(a)) == 1


@given(st.integers(2, 8), st.data())
def test_interpolation_roundtrip(m, data):
    F = field(m)
    deg = data.draw(st.integers(0, min(4, F.size - 1)))
    coeffs = [data.draw(st.integers(0, F.size - 1)) for _ in range(deg + 1)]
    xs = list(range(deg + 1))
    ys = F.poly_eval(np.array(coeffs), np.array(xs))[0]
    assert F.interpolate(xs, ys) == coeffs


def test_poly_eval_horner_by_hand():
    F = field(3)
    # 1 + 2x + 3x^2 at x = 5
    x = 5
    expected = 1 ^ F.mul(2, x) ^ F.mul(3, F.mul(x, x))
    assert F.poly_eval(np.array([1, 2, 3]), np.array([x]))[0, 0] == expected


def test_zero_has_no_inverse():
    with pytest.raises(ZeroDivisionError):
        field(4).inv(0)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stratexp.model import (CallableWeight, Constant, DomainError, Interval, NoisePair,
                            Polynomial, eval_weight, format_weight, kernel_K, kernel_Kstar,
                            parse_weight)

from conftest import IDENT, ONE, UNIT


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    assert Interval(2, 5).length == 3.0


def test_eval_weight_examples():
    assert eval_weight(Constant(1), 0.3, UNIT) == 1.0
    assert eval_weight(Polynomial((0, 1)), 0.25, UNIT) == 0.25
    # direct arithmetic: 1 + 2*0.5 + 3*0.25
    assert eval_weight(Polynomial((1, 2, 3)), 0.5, UNIT) == pytest.approx(1 + 2 * 0.5 + 3 * 0.25, abs=1e-15)


def test_eval_weight_uses_powers_of_shifted_argument():
    iv = Interval(2.0, 4.0)
    assert eval_weight(Polynomial((1, 2, 3)), 2.5, iv) == pytest.approx(1 + 2 * 0.5 + 3 * 0.25)


def test_eval_weight_domain():
    with pytest.raises(DomainError):
        eval_weight(ONE, 1.1, UNIT)
    with pytest.raises(DomainError):
        eval_weight(ONE, -1e-9, UNIT)
    # within the 1e-12 slack
    assert eval_weight(ONE, 1.0 + 5e-13, UNIT) == 1.0


def test_callable_weight():
    w = CallableWeight(np.exp, derivative_bound=math.e, name="exp")
    assert eval_weight(w, 0.5, UNIT) == pytest.approx(math.exp(0.5))
    assert not w.is_polynomial
    assert w.descriptor() == "callable:exp"


def test_kernel_K_examples():
    assert kernel_K(ONE, ONE, 0.2, 0.8, UNIT) == 1.0
    assert kernel_K(ONE, ONE, 0.8, 0.2, UNIT) == 0.0
    assert kernel_K(IDENT, ONE, 0.5, 0.9, UNIT) == 0.5


def test_kernel_Kstar_examples():
    assert kernel_Kstar(ONE, ONE, 0.5, 0.5, UNIT) == 0.5
    assert kernel_Kstar(ONE, ONE, 0.2, 0.8, UNIT) == 1.0
    assert kernel_Kstar(IDENT, IDENT, 0.4, 0.4, UNIT) == pytest.approx(0.5 * 0.4 * 0.4, abs=1e-16)


def test_kernels_domain():
    with pytest.raises(DomainError):
        kernel_K(ONE, ONE, 0.5, 1.5, UNIT)
    with pytest.raises(DomainError):
        kernel_Kstar(ONE, ONE, -0.5, 0.5, UNIT)


coeff = st.floats(-3, 3, allow_nan=False)
point = st.floats(0, 1)


@given(st.lists(coeff, min_size=1, max_size=4), st.lists(coeff, min_size=1, max_size=4), point, point)
def test_kernel_invariants(c1, c2, x1, x2):
    p1, p2 = Polynomial(tuple(c1)), Polynomial(tuple(c2))
    k = kernel_K(p1, p2, x1, x2, UNIT)
    ks = kernel_Kstar(p1, p2, x1, x2, UNIT)
    if x1 >= x2:
        assert k == 0.0
    if x1 != x2:
        assert ks == k
    else:
        expected = 0.5 * p1.evaluate(np.array(x1), 0.0) * p2.evaluate(np.array(x1), 0.0)
        assert ks == pytest.approx(float(expected), abs=1e-14)


def test_kernels_vectorised():
    x = np.array([0.1, 0.5, 0.9])
    out = kernel_Kstar(ONE, ONE, x[:, None], x[None, :], UNIT)
    assert out.shape == (3, 3)
    np.testing.assert_array_equal(np.diag(out), 0.5)
    np.testing.assert_array_equal(out[np.triu_indices(3, 1)], 1.0)
    np.testing.assert_array_equal(out[np.tril_indices(3, -1)], 0.0)


def test_noise_pair_validation():
    assert NoisePair(1, 1, 1).same_noise
    assert not NoisePair(0, 0, 1).same_noise
    assert not NoisePair(1, 2, 2).same_noise
    with pytest.raises(ValueError):
        NoisePair(2, 1, 1)
    with pytest.raises(ValueError):
        NoisePair(0, 0, 0)
    with pytest.raises(ValueError):
        NoisePair(-1, 0, 1)


@pytest.mark.parametrize("text, canonical", [
    ("const:1", "const:1.0"),
    ("const: 2.5", "const:2.5"),
    ("poly:0,1", "poly:0.0,1.0"),
    ("POLY:1,2,3", "poly:1.0,2.0,3.0"),
    ("poly:1e-3", "poly:0.001"),
])
def test_weight_parser(text, canonical):
    assert format_weight(parse_weight(text)) == canonical


@pytest.mark.parametrize("bad", ["", "const", "const:", "const:1,2", "poly:a", "exp:1", "poly:nan"])
def test_weight_parser_rejects(bad):
    with pytest.raises(ValueError):
        parse_weight(bad)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.one_of(
    finite.map(Constant),
    st.lists(finite, min_size=1, max_size=6).map(lambda c: Polynomial(tuple(c))),
))
def test_weight_format_roundtrip(w):
    text = format_weight(w)
    assert parse_weight(text) == w
    assert format_weight(parse_weight(text)) == text

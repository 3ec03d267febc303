"""Complex log-gamma and the beta helpers built on it."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cesradon.errors import PoleError
from cesradon.special import beta2, beta_multivariate, log_gamma

SQRT_PI = math.sqrt(math.pi)


def test_halfinteger_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(2.0) == pytest.approx(0.0, abs=1e-14)
    assert log_gamma(0.5) == pytest.approx(math.log(SQRT_PI), rel=1e-14)
    # Gamma(5) = 24
    assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)


def test_known_complex_value():
    # |Gamma(i)|^2 = pi / sinh(pi), a classical identity
    lg = log_gamma(1j)
    assert 2 * lg.real == pytest.approx(math.log(math.pi / math.sinh(math.pi)), rel=1e-12)


def test_negative_axis_continuation():
    # Gamma(-1.5) = 4*sqrt(pi)/3, reached through the reflection branch
    val = np.exp(log_gamma(-1.5 + 0j))
    assert val.real == pytest.approx(4 * SQRT_PI / 3, rel=1e-12)
    assert abs(val.imag) < 1e-12 * abs(val.real)


def test_poles_raise():
    for z in (0.0, -1.0, -2.0, -7.0):
        with pytest.raises(PoleError):
            log_gamma(z)


def test_array_input_matches_scalar():
    zs = np.array([0.3 + 0.7j, 2.0 - 1.0j, -0.25 + 3.0j])
    arr = log_gamma(zs)
    for z, v in zip(zs, arr):
        assert v == pytest.approx(log_gamma(complex(z)), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(
    re=st.floats(-20, 30),
    im=st.floats(-40, 40),
)
def test_recurrence(re, im):
    z = complex(re, im)
    # stay away from the poles and the cut where the recurrence needs care
    if abs(im) < 1e-3 and re < 0.5:
        return
    lhs = log_gamma(z + 1)
    rhs = log_gamma(z) + np.log(z)
    # agreement mod 2*pi*i (branches of log may differ by a winding)
    diff = lhs - rhs
    assert abs(diff.real) < 1e-9 * (1 + abs(lhs.real))
    assert abs(np.remainder(diff.imag + math.pi, 2 * math.pi) - math.pi) < 1e-9


@settings(max_examples=100, deadline=None)
@given(re=st.floats(0.5, 40), im=st.floats(0.0, 60))
def test_conjugation_symmetry(re, im):
    z = complex(re, im)
    assert log_gamma(np.conj(z)) == pytest.approx(np.conj(log_gamma(z)), rel=1e-13, abs=1e-13)


def test_beta_multivariate_scalar_cases():
    # single component: B(z) = Gamma(z)/Gamma(z) = 1 for any z
    assert beta_multivariate([0.5]) == pytest.approx(1.0, rel=1e-14)
    assert beta_multivariate([0.3 - 2.0j]) == pytest.approx(1.0, rel=1e-13)
    # B(1,1) = 1, B(0.5,0.5) = pi
    assert beta_multivariate([1.0, 1.0]) == pytest.approx(1.0, rel=1e-13)
    assert beta_multivariate([0.5, 0.5]) == pytest.approx(math.pi, rel=1e-13)
    # B(2,3) = 1/12
    assert beta_multivariate([2.0, 3.0]) == pytest.approx(1.0 / 12.0, rel=1e-13)


def test_beta_multivariate_broadcast():
    z = np.array([[0.5, 0.5], [2.0, 3.0]])
    out = beta_multivariate(z)
    assert out.shape == (2,)
    assert out[0] == pytest.approx(math.pi, rel=1e-13)
    assert out[1] == pytest.approx(1.0 / 12.0, rel=1e-13)


def test_beta2():
    assert beta2(1.0) == pytest.approx(0.5, rel=1e-14)  # 1/(1*2)
    assert beta2(0.5) == pytest.approx(4.0 / 3.0, rel=1e-14)
    w = 0.3 + 1.2j
    assert beta2(w) == pytest.approx(1.0 / (w * (w + 1.0)), rel=1e-14)
    for bad in (0.0, -1.0):
        with pytest.raises(PoleError):
            beta2(bad)

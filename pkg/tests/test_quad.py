import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from flatasep import DomainError
from flatasep.quad import (airy, airy_vec, circle_rule, gamma_c, gamma_ln, gamma_ln_vec, gamma_ratio_sgn,
                           graded_rule, halfline_rule, integrate_circle, pv_circle_oracle, vline_rule)


def test_residue_at_origin():
    r = circle_rule(16)
    val = integrate_circle(lambda y: 1 / (2j * math.pi * y), r)
    assert abs(val - 1) < 1e-14


@pytest.mark.parametrize("k", [-5, -4, -3, -2, 0, 1, 2, 3, 4, 5])
def test_monomials_vanish(k):
    r = circle_rule(16)
    assert abs(integrate_circle(lambda y: y ** k / (2j * math.pi), r)) < 1e-14


def test_circle_nodes_avoid_poles_and_are_symmetric():
    y = circle_rule(64).nodes
    assert np.min(np.abs(y * y - 1)) > 1e-3
    for img in (-y, 1 / y):
        assert np.max(np.min(np.abs(img[:, None] - y[None, :]), axis=1)) < 1e-12


def test_principal_value_against_cauchy_decomposition():
    def g(y):
        return np.exp(0.3 * y) / (2 + y)

    def coef(y):
        return (1 + y * y) / (2j * math.pi)

    r = circle_rule(256)
    pv = integrate_circle(lambda y: coef(y) * g(y) / (y * y - 1), r)
    assert abs(pv - pv_circle_oracle(g, coef)) < 1e-8


def test_halfline_rule_examples():
    r = halfline_rule(40, 40.0)
    assert r.integrate(lambda x: np.exp(-x)) == pytest.approx(1 - math.exp(-40), abs=1e-12)
    assert halfline_rule(4, 7.0).integrate(lambda x: x) == pytest.approx(24.5, rel=1e-15)


def test_integral_of_airy():
    r = halfline_rule(60, 12.0)
    assert abs(r.integrate(lambda x: airy_vec(x)[0]) - 1 / 3) < 1e-8


def test_graded_rule_exactness():
    r = graded_rule(6, edges=(0, 1, 3, 10))
    assert r.integrate(lambda x: x ** 5) == pytest.approx(10 ** 6 / 6, rel=1e-13)
    assert np.all(r.weights > 0)


def test_vline_gaussian():
    r = vline_rule(0.0, 6.0, 200, b=1.0)
    val = np.sum(r.weights * np.exp(r.nodes ** 2)) / (2j * math.pi)
    assert abs(val - math.sqrt(math.pi) / (2 * math.pi)) < 1e-12
    assert r.meta["tail"] < 1e-15


def test_vline_doubling_s_is_harmless():
    f = lambda s: np.exp(2.0 * s * s + 0.7 * s)  # noqa: E731
    a = vline_rule(0.2, 5.0, 400, b=2.0)
    b = vline_rule(0.2, 10.0, 800, b=2.0)
    assert abs(np.sum(a.weights * f(a.nodes)) - np.sum(b.weights * f(b.nodes))) < 1e-12


def test_vline_midpoint_nodes_avoid_axis():
    r = vline_rule(0.5, 3.0, 10, midpoint=True)
    assert np.min(np.abs(r.nodes.imag)) > 0


def test_gamma_values():
    assert abs(gamma_ln(1.0)) < 1e-14
    assert gamma_ln(0.5).real == pytest.approx(math.log(math.sqrt(math.pi)), abs=1e-14)
    z = 0.3 + 0.7j
    refl = gamma_c(z) * gamma_c(1 - z) * cmath.sin(math.pi * z) / math.pi
    assert abs(refl - 1) < 1e-11


@given(st.floats(-6.5, 12.0).filter(lambda v: abs(v - round(v)) > 1e-3))
def test_gamma_matches_scipy(x):
    assert abs(gamma_c(x) - special.gamma(x)) <= 1e-11 * abs(special.gamma(x))


def test_gamma_vectorized_matches_scalar():
    z = np.array([0.3 + 2j, -2.5 + 0.1j, 7.0, 0.01 - 3j])
    assert np.allclose(gamma_ln_vec(z), [gamma_ln(v) for v in z], atol=1e-11)


def test_gamma_ratio_limit():
    for m1 in range(1, 7):
        for m2 in range(1, 7):
            if m1 != m2:
                expect = (-1) ** min(m1, m2) * np.sign(m2 - m1)
                assert abs(gamma_ratio_sgn(m1, m2) - expect) < 1e-4


def test_airy_at_zero():
    ai, aip = airy(0.0)
    assert ai == pytest.approx(3 ** (-2 / 3) / math.exp(gamma_ln(2 / 3).real), rel=1e-13)
    assert aip == pytest.approx(-3 ** (-1 / 3) / math.exp(gamma_ln(1 / 3).real), rel=1e-13)


def test_airy_far_right():
    ai, _ = airy(30.0)
    assert 0 < ai < 1e-30


@given(st.floats(-30.0, 30.0))
def test_airy_matches_scipy(x):
    ai, aip = airy(x)
    ref = special.airy(x)
    assert abs(ai - ref[0]) < 1e-10 * max(1.0, abs(x)) ** 0.25 + 1e-12 * abs(ref[0])
    assert abs(aip - ref[1]) < 1e-9 * max(1.0, abs(x))


@given(st.floats(-25.0, 25.0))
def test_airy_derivative_consistency(x):
    h = 1e-4
    fd = (airy(x + h)[0] - airy(x - h)[0]) / (2 * h)
    assert abs(fd - airy(x)[1]) < 1e-6 * max(1.0, abs(x))


def test_errors():
    with pytest.raises(DomainError):
        airy(31.0)
    with pytest.raises(DomainError):
        circle_rule(7)
    with pytest.raises(DomainError):
        halfline_rule(2)

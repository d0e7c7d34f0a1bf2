import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc, ndtr

from flatasep import DomainError
from flatasep.bosegas import (BarKernel, SheParams, barK_block, heat_oracle_halfflat, nubar_moment,
                              she_moment_flat, she_moment_halfflat, volterra_oracle)


def second_moment(t):
    return math.exp(t / 4) * erfc(-math.sqrt(t) / 2)


@pytest.mark.parametrize("t", [0.3, 0.5, 1.0])
def test_volterra_matches_closed_form(t):
    assert abs(volterra_oracle(t) - second_moment(t)) < 1e-6


def test_heat_oracle_limits():
    assert heat_oracle_halfflat(1.0, 0.0, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert heat_oracle_halfflat(1.0, 50.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert heat_oracle_halfflat(1.0, -50.0, 0.0) < 1e-100
    t, th, x = 0.7, 0.9, 1.3
    closed = math.exp(-th * x + th * th * t / 2) * ndtr((x - th * t) / math.sqrt(t))
    assert heat_oracle_halfflat(t, x, th) == pytest.approx(closed, abs=1e-12)


@given(st.floats(0.2, 2.0), st.floats(0.05, 1.5), st.floats(-1.0, 2.0))
@settings(max_examples=15)
def test_halfflat_first_moment_is_heat_flow(t, theta, x):
    val = she_moment_halfflat(1, SheParams(t, theta=theta, x=x))
    assert abs(val - heat_oracle_halfflat(t, x, theta)) < 1e-8


def test_halfflat_values():
    assert she_moment_halfflat(1, SheParams(1.0, theta=0.5)) == pytest.approx(0.34961883472, abs=1e-10)
    assert she_moment_halfflat(1, SheParams(1.0, theta=0.5, x=1.0)) == pytest.approx(0.47523473632, abs=1e-10)
    assert she_moment_halfflat(1, SheParams(1.0)) == pytest.approx(0.5, abs=1e-10)


def test_halfflat_second_moment():
    v = she_moment_halfflat(2, SheParams(1.0))
    assert v == pytest.approx(0.5419651357, abs=1e-8)
    # independent of the contour abscissa
    assert she_moment_halfflat(2, SheParams(1.0, alpha=0.8)) == pytest.approx(v, abs=1e-8)
    # deep inside the occupied half-line the flat value is recovered
    assert she_moment_halfflat(2, SheParams(1.0, x=8.0)) == pytest.approx(second_moment(1.0), abs=1e-9)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0, 2.0])
def test_flat_first_moment(t):
    assert abs(she_moment_flat(1, t) - 1) < 1e-6


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_flat_second_moment(t):
    v = she_moment_flat(2, t)
    assert abs(v - volterra_oracle(t)) < 1e-4
    assert abs(v - second_moment(t)) < 1e-10


@pytest.mark.parametrize("t,ref", [(0.5, 3.98151267865), (1.0, 8.0655996723)])
def test_flat_third_moment(t, ref):
    assert she_moment_flat(3, t) == pytest.approx(ref, rel=1e-9)
    assert nubar_moment(3, t) == pytest.approx(ref, rel=1e-9)


def test_nubar_low_moments():
    assert nubar_moment(1, 1.0) == pytest.approx(1.0, abs=1e-10)
    assert nubar_moment(2, 1.0) == pytest.approx(second_moment(1.0), abs=1e-10)


def test_printed_kernel_fails_first_moment():
    assert she_moment_flat(1, 1.0, variant="printed") == pytest.approx(math.exp(1 / 192) / 2, abs=1e-6)


def test_kernel_block():
    b = barK_block(0.4, 0.4, 2, 2, 1.0)
    assert b[1, 1] == 0 and abs(b[0, 0]) < 1e-15
    assert np.allclose(barK_block(0.3, 1.2, 1, 2, 1.0), -barK_block(1.2, 0.3, 2, 1, 1.0).T, atol=1e-15)


def test_principal_value_nodes():
    a = BarKernel(1.0, 3, n_y=600).block(0.3, 0.9, 3, 3)[0, 0]
    b = BarKernel(1.0, 3, n_y=1200).block(0.3, 0.9, 3, 3)[0, 0]
    assert abs(a - b) < 1e-7


def test_domain():
    with pytest.raises(DomainError):
        she_moment_flat(4, 1.0)
    with pytest.raises(DomainError):
        she_moment_flat(2, 3.0)
    with pytest.raises(DomainError):
        she_moment_halfflat(3, SheParams(1.0))
    with pytest.raises(DomainError):
        SheParams(1.0, alpha=0.0)
    with pytest.raises(DomainError):
        barK_block(-0.1, 0.0, 1, 1, 1.0)

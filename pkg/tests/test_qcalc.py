import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatasep import DomainError, TruncationError
from flatasep.qcalc import (QContext, exp_sym_via_factorial, exp_tau_sym, qexp, qfactorial,
                            qfactorial_poch, qpoch, sym_factorial)

qs = st.floats(min_value=0.05, max_value=0.9)


def test_qpoch_small_cases():
    assert qpoch(0.7, 0.5, 0) == 1
    assert qpoch(0.7, 0.5, 1) == pytest.approx(0.3, abs=1e-15)


def test_qpoch_infinite_matches_long_product():
    direct = 1.0
    for k in range(200):
        direct *= 1 - 0.5 * 0.5 ** k
    assert qpoch(0.5, 0.5, math.inf) == pytest.approx(direct, rel=1e-14)


@given(st.complex_numbers(max_magnitude=3), qs, st.integers(0, 30))
def test_qpoch_recurrence(a, q, n):
    lhs = qpoch(a, q, n + 1)
    rhs = qpoch(a, q, n) * (1 - a * q ** n)
    assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(lhs))


def test_qfactorial_values():
    assert qfactorial(0, 0.5) == 1
    assert qfactorial(1, 0.3) == 1
    assert qfactorial(3, 0.5) == pytest.approx(2.625, rel=1e-15)


@given(st.integers(0, 25), qs)
def test_qfactorial_two_definitions(n, q):
    assert qfactorial(n, q) == pytest.approx(qfactorial_poch(n, q), rel=1e-13)


def test_qexp_at_zero():
    for xi in (1.0, 0.5 ** 0.5, 0.5 ** 0.25, 0.3):
        assert qexp(0, 0.5, xi) == 1


def test_e_q_product_formula():
    q, x = 0.5, 0.3
    assert abs(qexp(x, q, 1.0) - 1 / qpoch((1 - q) * x, q, math.inf)) < 1e-10


def test_qexp_returns_tail_bound():
    val, tail = qexp(-2.0, 0.5, 0.5 ** 0.25, with_error=True)
    assert 0 <= tail < 1e-15
    assert val == pytest.approx(exp_sym_via_factorial(-2.0, 0.5))


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_symmetric_exp_invariant_under_q_inverse(q):
    for x in np.linspace(-5, 2, 29):
        a = exp_tau_sym(x, q)
        b = exp_sym_via_factorial(x, 1 / q)
        assert abs(a - b) <= 1e-10 * abs(a)


@given(st.integers(0, 20), qs)
def test_sym_factorial_is_q_symmetric(n, q):
    # q^{-n(n-1)/4} n_q! with q -> 1/q, the factorial continued to q > 1
    assert sym_factorial(n, q) == pytest.approx(q ** (n * (n - 1) / 4) * _qfact_generic(n, 1 / q), rel=1e-11)


def _qfact_generic(n, q):
    out = 1.0
    for j in range(1, n + 1):
        out *= (q ** j - 1) / (q - 1)
    return out


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=2.5), st.floats(0.2, 0.9))
def test_q_difference_equation(z, q):
    s = math.sqrt(q)
    lhs = (exp_tau_sym(s * z, q) - exp_tau_sym(z / s, q)) / (s * z - z / s)
    f = exp_tau_sym(z, q)
    assert abs(lhs - f) <= 1e-9 * abs(f)


def test_e_q_tends_to_exp():
    xs = np.linspace(-1, 1, 41)
    errs = [max(abs(qexp(x, q, 1.0) - math.exp(x)) for x in xs * 0.999) for q in (0.9, 0.99, 0.999)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_domain_and_truncation_errors():
    with pytest.raises(DomainError):
        qexp(1.5, 0.5, 1.0)
    with pytest.raises(DomainError):
        qexp(0.1, 1.2, 1.0)
    with pytest.raises(DomainError):
        qexp(0.1, 0.5, 1.1)
    with pytest.raises(TruncationError):
        qexp(0.99, 0.5, 1.0, ctx=QContext(0.5, m_cap=5))

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatasep import DomainError
from flatasep.fredholm import (Kernel2x2, assemble, nystrom_det, nystrom_pf, pf_expansion_terms, pf_series,
                               pf_sgn_rank2)
from flatasep.quad import graded_rule, halfline_rule
from flatasep.skewlin import pfaffian, standard_j


def block_eval(grid):
    def ev(a, b):
        K = grid(np.array([a, b]))
        return np.array([[K[0][0, 1], K[1][0, 1]], [K[2][0, 1], K[3][0, 1]]])
    return ev


def damped(c=1.0):
    def grid(x):
        a, b = x[:, None], x[None, :]
        return (c * 0.3 * (np.exp(-a - 2 * b) - np.exp(-2 * a - b)), c * 0.2 * np.exp(-a - b),
                -c * 0.2 * np.exp(-a - b), c * 0.1 * (np.exp(-a - 3 * b) - np.exp(-3 * a - b)))
    return Kernel2x2(eval=block_eval(grid), grid=grid)


def test_zero_kernels():
    r = halfline_rule(12, 10.0)
    assert nystrom_det(lambda x, y: 0 * x * y, r) == 1
    zero = Kernel2x2(eval=lambda a, b: np.zeros((2, 2)))
    assert nystrom_pf(zero, r) == pytest.approx(1.0)


def test_rank_one_determinant():
    r = halfline_rule(40, 40.0)
    val = nystrom_det(lambda x, y: np.exp(-x) * 0.5 * np.exp(-2 * y), r)
    assert abs(val - (1 - 0.5 / 3)) < 1e-10


def test_rank_one_off_diagonal_pfaffian():
    def grid(x):
        n = len(x)
        K12 = np.outer(np.exp(-x), 0.5 * np.exp(-2 * x))
        return np.zeros((n, n)), K12, -K12.T, np.zeros((n, n))

    k = Kernel2x2(eval=block_eval(grid), grid=grid)
    assert abs(nystrom_pf(k, halfline_rule(40, 40.0), debug=True) - (1 - 0.5 / 3)) < 1e-9


def test_block_eval_and_grid_agree():
    k = damped()
    slow = Kernel2x2(eval=k.eval)
    r = halfline_rule(6, 5.0)
    assert np.allclose(assemble(k, r), assemble(slow, r))
    assert k.skew_residual([(0.1, 0.7), (2.0, 0.3)]) < 1e-15


def test_series_matches_nystrom():
    k = damped()
    r = halfline_rule(8, 20.0)
    assert abs(pf_series(k, r, 4) - nystrom_pf(k, r)) < 1e-5


@given(st.floats(0.1, 3.0))
def test_expansion_terms_sum_to_pfaffian(c):
    k = damped(c)
    r = halfline_rule(10, 20.0)
    terms = pf_expansion_terms(k, r, 10)
    assert abs(terms[0] - 1) < 1e-12
    assert abs(np.sum(terms) - nystrom_pf(k, r)) < 1e-12


@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_discrete_pf_squared_is_det(n, seed):
    rng = np.random.default_rng(seed)
    K = rng.normal(size=(2 * n, 2 * n))
    M = K - K.T
    J = standard_j(n)
    pf = pfaffian(J - M)
    assert abs(pf * pf - np.linalg.det(np.eye(2 * n) + J @ M)) < 1e-9 * max(1, abs(pf) ** 2)


def test_analytic_kernel_node_doubling():
    k = damped(2.0)
    v16, v32, v64 = [nystrom_pf(k, halfline_rule(n, 30.0)) for n in (16, 32, 64)]
    # at least four digits gained per doubling
    assert abs(v32 - v64) < max(1e-4 * abs(v16 - v64), 1e-13)


def test_rank_two_sign_route():
    # K11 smooth, K12(l1, l2) = g(l1), K22 = sgn / 2
    r = graded_rule(10, edges=(0, 2, 6, 15, 35))
    x, w = r.nodes.real, r.weights.real
    a, b = x[:, None], x[None, :]
    K11 = 0.4 * (np.exp(-a - 2 * b) - np.exp(-2 * a - b))
    g = 0.3 * np.exp(-x)

    def grid(xx):
        n = len(xx)
        aa, bb = xx[:, None], xx[None, :]
        gg = 0.3 * np.exp(-xx)
        return (0.4 * (np.exp(-aa - 2 * bb) - np.exp(-2 * aa - bb)), np.repeat(gg[:, None], n, 1),
                -np.repeat(gg[None, :], n, 0), 0.5 * np.sign(bb - aa))

    direct = nystrom_pf(Kernel2x2(eval=block_eval(grid), tag="sgn_block", grid=grid), r)
    K11S = (K11 * w[None, :]) @ (0.5 * np.sign(b - a))
    sq = pf_sgn_rank2(K11S, g, w)
    assert abs(sq - direct ** 2) < 1e-10


def test_tensor_series_guard():
    with pytest.raises(DomainError):
        pf_series(damped(), halfline_rule(60, 10.0), 4)

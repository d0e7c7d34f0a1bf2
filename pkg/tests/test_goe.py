import numpy as np
import pytest

from flatasep import DomainError
from flatasep.fredholm import assemble
from flatasep.goe import GOEKernelParams, fgoe_det, fgoe_pf, k11_alt, kr_block, kr_kernel
from flatasep.quad import halfline_rule
from flatasep.skewlin import standard_j

F_GOE_0 = 0.831908066207  # det(I - B_0), 96 nodes


def test_block_structure():
    p = GOEKernelParams(0.0)
    b = kr_block(0.7, 0.7, p)
    assert b[0, 0] == 0 and b[1, 1] == 0
    assert kr_block(0.2, 1.0, p)[1, 1] == 0.5
    assert kr_block(1.0, 0.2, p)[1, 1] == -0.5
    assert np.allclose(kr_block(0.3, 1.1, p), -kr_block(1.1, 0.3, p).T)


def test_k11_integration_by_parts():
    p = GOEKernelParams(0.0)
    assert abs(kr_block(0.3, 1.1, p)[0, 0] - k11_alt(0.3, 1.1, p)) < 1e-12


def test_det_value_and_doubling():
    assert fgoe_det(0.0) == pytest.approx(F_GOE_0, abs=1e-10)
    assert abs(fgoe_det(0.0, 48) - fgoe_det(0.0, 96)) < 1e-8


@pytest.mark.parametrize("r", [-4, 0])
def test_pf_matches_det(r):
    assert abs(fgoe_pf(r) - fgoe_det(r)) < 5e-4


def test_far_right_tail():
    # F_GOE(6) = 1 - 1.94e-6: the upper tail is heavier than e^{-r^3}
    d = fgoe_det(6.0)
    assert 0 < 1 - d < 1e-5
    assert abs(fgoe_pf(6.0) - 1) < 1e-4
    assert abs(fgoe_pf(6.0) - d) < 1e-8


def test_det_is_a_cdf():
    vals = [fgoe_det(r) for r in range(-5, 6)]
    assert all(0 <= v <= 1 for v in vals)
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[0] < 1e-3


def test_sgn_kernel_converges_quadratically():
    d = fgoe_det(0.0)
    errs = [abs(fgoe_pf(0.0, n_nodes=n) - d) for n in (40, 80, 160)]
    for a, b in zip(errs, errs[1:]):
        assert 3.5 < a / b < 4.5


def test_rank_one_term_does_not_change_determinant():
    p = GOEKernelParams(0.5)
    r = halfline_rule(60, 16.0)
    dets = []
    for drop in (False, True):
        M = assemble(kr_kernel(p, drop_rank_one=drop), r)
        n = M.shape[0] // 2
        dets.append(np.linalg.det(np.eye(2 * n) + standard_j(n) @ M))
    assert abs(dets[0] - dets[1]) < 1e-8


def test_printed_sign_overshoots():
    assert fgoe_pf(0.0, n_nodes=60, variant="printed") > 1


def test_domain():
    with pytest.raises(DomainError):
        fgoe_det(7.0)
    with pytest.raises(DomainError):
        GOEKernelParams(0.0, variant="other")
    with pytest.raises(DomainError):
        GOEKernelParams(0.0, xi_cut=5.0)
    with pytest.raises(DomainError):
        kr_block(-1.0, 0.0, GOEKernelParams(0.0))

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatasep import DomainError
from flatasep.skewlin import (IDENTITY_TAGS, SkewMatrix, _check_sign_pf_all, fredholm_pf_series,
                              identity_check, pfaffian, pfaffian_bruteforce, sign_pf_sides, standard_j)


def rand_skew(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.random((n, n)) + 1j * rng.random((n, n))
    return a - a.T


def test_two_by_two():
    assert pfaffian([[0, 3.5], [-3.5, 0]]) == 3.5


def test_four_by_four_formula():
    a, b, c, d, e, f = 1.3, -0.7, 2.1, 0.4, 5.0, -1.9
    A = np.array([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]])
    assert pfaffian(A) == pytest.approx(a * f - b * e + c * d, abs=1e-14)


def test_empty_and_odd():
    assert pfaffian(np.zeros((0, 0))) == 1
    assert pfaffian(rand_skew(0, 5)) == 0


@pytest.mark.parametrize("seed", range(5))
def test_eight_by_eight_against_matchings(seed):
    A = rand_skew(seed, 8)
    assert abs(pfaffian(A) - pfaffian_bruteforce(A)) < 1e-12 * abs(pfaffian_bruteforce(A))


@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_pf_squared_is_det(n, seed):
    A = rand_skew(seed, 2 * n)
    pf = pfaffian(A)
    det = np.linalg.det(A)
    assert abs(pf * pf - det) <= 1e-9 * max(1.0, abs(det))


@given(st.integers(2, 8), st.data())
def test_swap_flips_sign(n, data):
    A = rand_skew(data.draw(st.integers(0, 1000)), 2 * n)
    i = data.draw(st.integers(0, 2 * n - 1))
    j = data.draw(st.integers(0, 2 * n - 1).filter(lambda v: v != i))
    perm = list(range(2 * n))
    perm[i], perm[j] = perm[j], perm[i]
    B = A[np.ix_(perm, perm)]
    assert abs(pfaffian(B) + pfaffian(A)) < 1e-10 * max(1.0, abs(pfaffian(A)))


def test_skew_matrix_validation():
    with pytest.raises(DomainError):
        SkewMatrix([[0, 1], [1, 0]])
    m = SkewMatrix([[1e-14, 2], [-2, 0]])
    assert m.order == 2 and pfaffian(m) == 2


def test_standard_j_pfaffian_is_one():
    assert pfaffian(standard_j(5)) == pytest.approx(1.0)


def test_subset_expansion():
    A = 0.3 * rand_skew(3, 8)
    J = standard_j(4)
    assert abs(fredholm_pf_series(A, 0.7) - pfaffian(J + 0.7 * A)) < 1e-12


def test_catalog_examples():
    assert identity_check("schur", 6, trials=50, seed=7).residual < 1e-10
    assert identity_check("rank2_det", 6, trials=50, seed=1).residual < 1e-9
    rep = identity_check("sign_pf", 4)
    assert rep.residual == 0.0 and rep.trials == 4 ** 4 * 2 ** 4


@pytest.mark.parametrize("name", [n for n in IDENTITY_TAGS if n != "sign_pf"])
def test_every_identity(name):
    sizes = {"resum": 4, "andreief_pf": 4, "schur": 6, "schur_nl": 6}
    rep = identity_check(name, sizes.get(name, 8), trials=20, seed=3)
    assert rep.residual < 1e-9


@pytest.mark.parametrize("size", [6, 7])
def test_congruence_any_order(size):
    assert identity_check("congruence", size, seed=2).residual < 1e-9


def test_block_both_parities():
    # order 2k with k = 3 and k = 4
    for size in (6, 8):
        assert identity_check("block", size, seed=5).residual < 1e-9


def test_sign_identity_exact_up_to_six_points():
    assert _check_sign_pf_all(2)[0] == 0.0
    assert _check_sign_pf_all(6, mmax=3)[0] == 0.0


def test_sign_identity_printed_orientation_fails():
    # two points with opposite signs already break the literal form
    lhs, rhs = sign_pf_sides((1, 1), (1, -1), variant="printed")
    assert lhs == -rhs
    lhs, rhs = sign_pf_sides((1, 1), (1, -1))
    assert lhs == rhs


@given(st.lists(st.integers(1, 6), min_size=4, max_size=4), st.lists(st.sampled_from([-1, 1]), min_size=4, max_size=4))
def test_sign_identity_random(ms, sg):
    lhs, rhs = sign_pf_sides(ms, sg)
    assert lhs == rhs


def test_identity_errors():
    with pytest.raises(DomainError):
        identity_check("nope", 4)
    with pytest.raises(DomainError):
        identity_check("schur", 10)
    with pytest.raises(DomainError):
        identity_check("block", 41)
    with pytest.raises(DomainError):
        identity_check("sign_pf", 3)


def test_reports_are_reproducible():
    a = identity_check("pf_sympl", 8, trials=5, seed=11)
    b = identity_check("pf_sympl", 8, trials=5, seed=11)
    assert a == b

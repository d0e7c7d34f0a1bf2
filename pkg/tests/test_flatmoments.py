import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatasep import DomainError
from flatasep.flatmoments import (GermArgs, Germs, KflatParams, compositions, germ, kflat_block, moment_flat,
                                  moment_halfflat, moment_nu, nu_flat, nu_halfflat, t_effective)
from flatasep.qcalc import qfactorial, qpoch
from flatasep.quad import graded_rule

TAU = 0.5

# nu-form moments at tau = 1/2, t = 1 (128 circle nodes)
NU_T1 = {1: 1.1103296147303512, 2: 1.3544992968950758, 3: 1.8546816545505407}


def unit(seed, k=1):
    return np.exp(2j * np.pi * np.random.default_rng(seed).random(k))


def test_t_effective():
    assert t_effective(1.0, 0.5) == pytest.approx(1 / 3)
    assert t_effective(2.0, 0.0) == 2.0


def test_compositions():
    assert sorted(compositions(4, 2)) == [(1, 3), (2, 2), (3, 1)]
    assert len(list(compositions(6, 3))) == math.comb(5, 2)


def test_h2_vanishes_on_diagonal():
    g = Germs(TAU, 0.4, 2)
    w = complex(unit(1)[0])
    assert g.h2(w, w, 3, 3) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("sigma", [1, -1])
def test_gp_residue(n, sigma):
    g = Germs(TAU, 0.4)
    pole = sigma * TAU ** (-n / 2)
    w = pole * (1 + 1e-7)
    lhs = (w - pole) * g.gp(w, n)
    rhs = -0.5 * pole * g.gu(pole, n)
    assert abs(lhs - rhs) < 1e-4 * max(1.0, abs(rhs))


@given(st.integers(1, 6), st.sampled_from([1, -1]), st.integers(-3, 10))
def test_f2_at_unpaired_points(n, sigma, x):
    g = Germs(TAU, 0.3, x)
    assert abs(g.f2(sigma * TAU ** (-n / 2), n) - sigma) < 1e-12


@given(st.floats(0.0, 6.28), st.floats(0.5, 2.0), st.integers(1, 6), st.integers(-5, 10))
def test_f2_inversion(theta, r, n, x):
    g = Germs(TAU, 0.3, x)
    w = r * complex(math.cos(theta), math.sin(theta))
    val = g.f2(TAU ** (-n) / w, n) * g.f2(w, n)
    assert abs(val - 1) < 1e-10


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10 ** 6))
def test_h_product_identity(n1, n2, seed):
    g = Germs(TAU, 0.3)
    w1, w2 = 1.1 * unit(seed, 2)
    lhs = (g.h1(w1, w2, n1, n2) * g.h1(TAU ** -n1 / w1, TAU ** -n2 / w2, n1, n2)
           * g.h2(TAU ** -n1 / w1, w2, n1, n2) * g.h2(w1, TAU ** -n2 / w2, n1, n2))
    rhs = TAU ** (-n1 * n2) * g.e(w1, w2, n1, n2)
    assert abs(lhs - rhs) < 1e-9 * abs(rhs)


def test_unpaired_limit():
    g = Germs(TAU, 0.3)
    for na in range(1, 6):
        for nb in range(1, 6):
            for sa in (1, -1):
                for sb in (1, -1):
                    wa = sa * TAU ** (-na / 2) * (1 + 1e-6)
                    wb = sb * TAU ** (-nb / 2)
                    val = g.h1(wa, wb, na, nb) * g.h2(wa, wb, na, nb)
                    ref = g.hlim(sa, sb, na, nb)
                    # the limit can vanish; compare on the scale of its tau^{-na nb/2} prefactor
                    assert abs(val - ref) < 1e-4 * max(abs(ref), TAU ** (-na * nb / 2))


@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_cauchy_determinant(k, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=k) + 1j * rng.normal(size=k)
    y = rng.normal(size=k) + 1j * rng.normal(size=k) + 3
    C = 1 / (x[:, None] - y[None, :])
    det = np.linalg.det(C)
    num = 1 + 0j
    for a in range(k):
        for b in range(a + 1, k):
            num *= (x[a] - x[b]) * (y[b] - y[a])
    # relative to the Hadamard bound, since the determinant itself can be tiny
    scale = np.prod(np.linalg.norm(C, axis=1))
    assert abs(det - num / np.prod(x[:, None] - y[None, :])) < 1e-10 * scale


@pytest.mark.parametrize("pa,pb", [(0.7, 1.3), (0.5 + 0.4j, 1.2 - 0.3j), (2.0, 0.6 + 1j)])
def test_sign_integral(pa, pb):
    r = graded_rule(20, edges=(0, 1, 3, 8, 20, 45, 90))
    lam, w = r.nodes.real, r.weights.real
    # the lambda_b > lambda_a half minus the mirror half, written as lambda_b = lambda_a + u
    inner_b = np.sum(w * np.exp(-lam * pb))
    inner_a = np.sum(w * np.exp(-lam * pa))
    val = np.sum(w * np.exp(-lam * (pa + pb))) * (inner_b - inner_a)
    assert abs(val - (pa - pb) / (pa * pb * (pa + pb))) < 1e-6


def test_pochhammer_ratio_bound():
    zs = np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False))
    vals = []
    for n in range(1, 21):
        r = (qpoch(-TAU ** (-n / 2) * zs, TAU, math.inf) / qpoch(-TAU ** (n / 2) * zs, TAU, math.inf)
             * qpoch(TAU ** (1 + n) * zs ** 2, TAU, math.inf) / qpoch(TAU * zs ** 2, TAU, math.inf))
        vals.append(TAU ** (0.15 * n * n) * np.max(np.abs(r)))
    assert max(vals) < 100
    assert vals[-1] < vals[9] < max(vals)


def test_germ_dispatch_and_poles():
    a = GermArgs(w=0.3 + 0.2j, n=2, t_eff=0.4, tau=TAU, w2=1.1j, n2=1)
    g = Germs(TAU, 0.4)
    assert germ("h1", a) == pytest.approx(g.h1(0.3 + 0.2j, 1.1j, 2, 1))
    assert germ("f1", a, tilde=True) == pytest.approx(g.f1(TAU ** -1 * (0.3 + 0.2j), 2))
    with pytest.raises(DomainError):
        germ("gp", GermArgs(w=TAU ** -1.0, n=2, t_eff=0.4, tau=TAU))
    with pytest.raises(DomainError):
        germ("h1", GermArgs(w=0.3, n=2, t_eff=0.4, tau=TAU))
    with pytest.raises(DomainError):
        germ("zz", a)


def test_kernel_block_antisymmetry():
    p = KflatParams.build(TAU, 1.0)
    b = kflat_block(0.7, 0.7, 2, 2, p)
    assert abs(b[0, 0]) < 1e-14 and b[1, 1] == 0
    b12 = kflat_block(0.3, 1.4, 1, 3, p)
    b21 = kflat_block(1.4, 0.3, 3, 1, p)
    assert np.allclose(b12, -b21.T, atol=1e-14)


def test_nu_flat_pieces():
    assert nu_flat(0, 0, 1.0, TAU) == 1
    # m = 1: a finite sum over sigma
    assert abs(nu_flat(1, 1, 1.0, TAU) - NU_T1[1]) < 1e-12
    v = nu_flat(2, 2, 1.0, TAU)
    assert math.isfinite(v.real) and abs(v.imag) < 1e-12


@pytest.mark.parametrize("m", [1, 2, 3])
def test_nu_form_values(m):
    assert moment_nu(m, 1.0, TAU) == pytest.approx(NU_T1[m], rel=1e-9)


def test_moments_at_time_zero():
    for m in range(4):
        assert moment_flat(m, 0.0, TAU) == pytest.approx(1.0, abs=1e-5)
        assert moment_nu(m, 0.0, TAU) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("m", [1, 2])
def test_pfaffian_equals_nu_form(m):
    assert moment_flat(m, 1.0, TAU) == pytest.approx(NU_T1[m], rel=1e-6)


def test_error_estimate():
    val, err = moment_flat(2, 0.5, TAU, with_error=True)
    assert err < 1e-4 * val
    assert abs(val - moment_nu(2, 0.5, TAU)) < 10 * err + 1e-9


def test_moment_growth_bound():
    for m in range(1, 5):
        assert moment_nu(m, 1.0, TAU, allow_large=True) <= 10 * qfactorial(m, TAU) * TAU ** (-m * m / 4)


def test_halfflat_values():
    assert nu_halfflat(0, 0, 1.0, 0, TAU) == 1
    assert moment_halfflat(1, 1.0, 0, TAU) == pytest.approx(0.943679318895444, rel=1e-9)
    assert moment_halfflat(2, 1.0, 2, TAU) == pytest.approx(0.3352473948771145, rel=1e-9)
    a = nu_halfflat(1, 1, 1.0, 0, TAU, N=256)
    b = nu_halfflat(1, 1, 1.0, 0, TAU, N=512)
    assert abs(a - b) < 1e-9


def test_halfflat_time_zero():
    # N_x(0) counts even sites in (0, x]
    for x, n in ((0, 0), (2, 1), (4, 2)):
        assert moment_halfflat(1, 0.0, x, TAU) == pytest.approx(TAU ** n, abs=1e-5)


def test_domain():
    with pytest.raises(DomainError):
        moment_flat(5, 1.0, TAU)
    with pytest.raises(DomainError):
        Germs(1.0, 0.3)
    with pytest.raises(DomainError):
        nu_halfflat(2, 1, 1.0, 0, TAU)

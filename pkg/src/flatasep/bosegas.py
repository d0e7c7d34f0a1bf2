"""Moments of the stochastic heat equation dZ = (1/2) Z'' dt + Z dW.

Half-flat data Z(0, x) = 1{x >= 0} (optionally tilted by e^{-theta x}) go
through vertical-line integrals of Gamma ratios; flat data Z(0, x) = 1 go
through a Fredholm-Pfaffian sum with the 2x2 kernel K-bar. Two heat-equation
oracles are provided for checking: the tilted heat kernel integral (k = 1)
and the two-particle Volterra equation (flat m = 2).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad as _scipy_quad

from . import DomainError
from .flatmoments import _ordered_pf_integral, compositions
from .quad import gamma_ln_vec as gamma_ln, graded_rule, vline_rule

FLAT_EDGES = (0, 2, 6, 15, 35, 80, 200)


@dataclass(frozen=True)
class SheParams:
    """SHE time t, half-flat tilt theta, position x and line abscissa alpha > 0."""
    t: float
    theta: float = 0.0
    x: float = 0.0
    alpha: float = 0.5
    U: float = 12.0
    n_u: int = 481
    variant: str = "corrected"

    def __post_init__(self):
        if self.t <= 0:
            raise DomainError("t must be positive")
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")
        if self.theta < 0:
            raise DomainError("theta must be nonnegative")
        if self.variant not in ("corrected", "printed"):
            raise DomainError("variant must be 'corrected' or 'printed'")


# ---------------------------------------------------------------- half-flat

def _single(w, n, p: SheParams):
    # Gamma(2w) / (n Gamma(2w + n)) times the time and space exponentials
    lg = gamma_ln(2 * w) - gamma_ln(2 * w + n)
    d = w - p.theta
    return np.exp(lg + 0.5 * p.t * ((n ** 3 - n) / 12 + n * d * d) + p.x * n * d) / n


def _cross(wa, wb, na, nb):
    s = wa + wb
    d = wa - wb
    if na == nb:
        # Gamma(s)^2 / (Gamma(s - n) Gamma(s + n)) and d^2 / (d (d + n)), both rational;
        # this form has no removable 0/0 on the diagonal or at s = 1, ..., n
        n = na
        r = d / (d + n)
        for j in range(n):
            r = r * (s - n + j) / (s + j)
        return r
    g = (gamma_ln(s + 0.5 * (na - nb)) + gamma_ln(s - 0.5 * (na - nb))
         - gamma_ln(s - 0.5 * (na + nb)) - gamma_ln(s + 0.5 * (na + nb)))
    return np.exp(g) * (d + 0.5 * (na - nb)) * (d - 0.5 * (na - nb)) / (d * (d + 0.5 * (na + nb)))


def she_moment_halfflat(k: int, params: SheParams) -> float:
    """E[Z(t, x)^k] for the tilted half-flat start e^{-theta x} 1{x >= 0}, k in {1, 2}.

    Each factor is 2^k k! sum_l 1/l! sum_n int prod_a Gamma(2w_a)/(n_a Gamma(2w_a + n_a))
    e^{(t/2)[(n^3 - n)/12 + n (w - theta)^2] + x n (w - theta)} times the pair factors,
    with w on alpha + iR.
    """
    if k not in (1, 2):
        raise DomainError("she_moment_halfflat supports k in {1, 2}")
    p = params
    rule = vline_rule(p.alpha, p.U, p.n_u)
    w = rule.nodes
    dw = rule.weights / (2j * np.pi)
    total = 0j
    for l in range(1, k + 1):
        for ns in compositions(k, l):
            if l == 1:
                total += np.sum(dw * _single(w, ns[0], p))
            else:
                wa, wb = np.meshgrid(w, w, indexing="ij")
                f = _single(wa, ns[0], p) * _single(wb, ns[1], p) * _cross(wa, wb, ns[0], ns[1])
                total += np.sum(dw[:, None] * dw[None, :] * f) / math.factorial(l)
    return float((2 ** k * math.factorial(k) * total).real)


def heat_oracle_halfflat(t: float, x: float, theta: float) -> float:
    """int_0^inf (2 pi t)^{-1/2} e^{-(x - y)^2 / 2t} e^{-theta y} dy."""
    f = lambda y: math.exp(-(x - y) ** 2 / (2 * t) - theta * y) / math.sqrt(2 * math.pi * t)
    # split at the Gaussian peak so the adaptive rule cannot miss it
    c = max(0.0, x)
    head = _scipy_quad(f, 0, c, epsabs=1e-13, epsrel=1e-12)[0] if c > 0 else 0.0
    return head + _scipy_quad(f, c, math.inf, epsabs=1e-13, epsrel=1e-12)[0]


def volterra_oracle(t: float, n: int = 4000) -> float:
    """Solve f(t) = 1 + int_0^t (4 pi (t - s))^{-1/2} f(s) ds (flat second moment).

    Product integration: f is piecewise linear on a uniform grid and the
    weakly singular kernel is integrated exactly against each hat function.
    """
    h = t / n
    c = 1.0 / math.sqrt(4 * math.pi)
    # with r = t_i - s on [(d-1)h, dh], f(s) = f_j (r - (d-1)h)/h + f_{j+1} (dh - r)/h
    d = np.arange(1, n + 1, dtype=float)
    a, b = (d - 1) * h, d * h
    m0 = 2 * (np.sqrt(b) - np.sqrt(a))
    m1 = (2.0 / 3.0) * (b ** 1.5 - a ** 1.5)
    wl = (m1 - a * m0) / h     # weight of the left node f_j
    wr = (b * m0 - m1) / h     # weight of the right node f_{j+1}
    f = np.ones(n + 1)
    for i in range(1, n + 1):
        # interval j = i - d for d = 1..i
        j = i - np.arange(1, i + 1)
        acc = np.dot(f[j], wl[:i]) + np.dot(f[j[1:] + 1], wr[1:i])
        f[i] = (1.0 + c * acc) / (1.0 - c * wr[0])
    return float(f[n])


# ---------------------------------------------------------------- flat


class BarKernel:
    """Exponential tables for K-bar, in the layout used by the ordered-lambda integrator.

    K11 PV part = sum_j A[m, j] exp(-l1 P1[m, j] - l2 P2[m, j]) on symmetric
    nodes y = iu avoiding 0; the unpaired part and K12 decay like exp(-m l / 4).
    """

    def __init__(self, t: float, mmax: int, variant: str = "corrected", U: float = 12.0, n_y: int = 600):
        if variant not in ("corrected", "printed"):
            raise DomainError("variant must be 'corrected' or 'printed'")
        self.t, self.mmax, self.variant = t, mmax, variant
        h = 2 * U / n_y
        u = (np.arange(n_y) + 0.5) * h - U
        y = 1j * u
        self.A = np.zeros((mmax + 1, n_y), complex)
        self.P1 = np.zeros((mmax + 1, n_y), complex)
        self.P2 = np.zeros((mmax + 1, n_y), complex)
        self.pu = np.zeros((mmax + 1, 2))
        self.E = np.zeros((mmax + 1, 2))
        self.D = np.zeros((mmax + 1, mmax + 1, 2, 2))
        for m in range(1, mmax + 1):
            if variant == "corrected":
                W = (-1) ** m / (32j * np.pi * y) * np.exp(t * ((m ** 3 - m) / 12 + m * y * y))
                for j in range(1, m):
                    W = W / (j * j - 4 * y * y)
            else:
                lg = gamma_ln(2 * y) + gamma_ln(-2 * y) - gamma_ln(m + 2 * y) - gamma_ln(m - 2 * y)
                W = (-1) ** (m + 1) / (8j * np.pi * y) * np.exp(lg + t * (m ** 3 / 96 + m * y * y / 8))
            # dy = i du
            self.A[m] = W * 1j * h
            self.P1[m] = 0.25 * (m - 2 * y)
            self.P2[m] = 0.25 * (m + 2 * y)
            self.pu[m] = 0.25 * m
            self.E[m, 0] = -0.125 * self.e(m)
        s = -1.0 if variant == "corrected" else 1.0
        for ma in range(1, mmax + 1):
            for mb in range(1, mmax + 1):
                self.D[ma, mb, 0, 0] = s / 32 * (-1) ** min(ma, mb) * np.sign(ma - mb) * self.e(ma) * self.e(mb)

    def e(self, m: int) -> float:
        if self.variant == "corrected":
            return math.exp((m ** 3 - m) * self.t / 24) / math.factorial(m - 1)
        return math.exp(m ** 3 * self.t / 192) / math.factorial(m - 1)

    def block(self, l1, l2, m1, m2) -> np.ndarray:
        k11 = self.D[m1, m2, 0, 0] * math.exp(-0.25 * (m1 * l1 + m2 * l2))
        if m1 == m2:
            k11 += np.sum(self.A[m1] * np.exp(-l1 * self.P1[m1] - l2 * self.P2[m1]))
        return np.array([[k11, self.E[m1, 0] * math.exp(-0.25 * m1 * l1)],
                         [-self.E[m2, 0] * math.exp(-0.25 * m2 * l2), 0.5 * np.sign(l2 - l1)]], dtype=complex)


def barK_block(l1: float, l2: float, m1: int, m2: int, t: float, variant: str = "corrected") -> np.ndarray:
    """The 2x2 block K-bar(l1, l2; m1, m2) at SHE time t."""
    if l1 < 0 or l2 < 0 or m1 < 1 or m2 < 1:
        raise DomainError("need lambda >= 0 and m >= 1")
    return BarKernel(t, max(m1, m2), variant).block(l1, l2, m1, m2)


def she_moment_flat(m: int, t: float, variant: str = "corrected", per_panel: int = 10, n_y: int = 600) -> float:
    """E[Z(t, 0)^m] for flat data from the K-bar Fredholm-Pfaffian sum, m <= 3.

    The ordered-lambda integral (gap variables) absorbs the 1/k! of the
    expansion. The corrected normalization carries the prefactor 2^m m!.
    """
    if not 0 <= m <= 3:
        raise DomainError("she_moment_flat supports m <= 3")
    if t <= 0 or t > 2:
        raise DomainError("t must lie in (0, 2]")
    if m == 0:
        return 1.0
    K = BarKernel(t, m, variant, n_y=n_y)
    rule = graded_rule(per_panel, edges=FLAT_EDGES)
    s, ws = rule.nodes.real.copy(), rule.weights.real.copy()
    G1 = np.exp(-s[None, :, None] * K.P1[:, None, :])
    G2 = np.exp(-s[None, :, None] * K.P2[:, None, :])
    total = 0j
    for k in range(1, m + 1):
        acc = 0j
        for comp in compositions(m, k):
            acc += _ordered_pf_integral(np.array(comp, np.int64), s, ws, K.A, G1, G2, K.pu, K.D, K.E)
        total += (-1) ** k * acc
    pref = (2 ** m if variant == "corrected" else 1) * math.factorial(m)
    return float((pref * total).real)


def nubar_moment(m: int, t: float, U: float = 40.0, n: int = 4001) -> float:
    """E[Z(t, 0)^m] from the nu-bar form (unpaired and paired poles), m <= 3.

    Internal consistency check for ``she_moment_flat``.
    """
    if not 0 <= m <= 3:
        raise DomainError("nubar_moment supports m <= 3")
    u = np.linspace(-U, U, n)
    du = u[1] - u[0]
    z = 1j * u
    tot = 0.0
    for k in range(0, m + 1):
        for kp in range(0, k // 2 + 1):
            ku = k - 2 * kp
            pref = 1 / (math.factorial(ku) * 2 ** kp * math.factorial(kp))
            for rest in range(m % 2, m + 1, 2):
                snp = (m - rest) // 2
                for nus in compositions(rest, ku):
                    for nps in compositions(snp, kp):
                        cu = 1.0
                        for a in range(ku):
                            cu *= 0.5 / math.factorial(nus[a]) * math.exp((nus[a] ** 3 - nus[a]) * t / 24)
                        for a, b in itertools.combinations(range(ku), 2):
                            cu *= (-1) ** min(nus[a], nus[b]) * abs(nus[a] - nus[b]) / (nus[a] + nus[b])
                        if kp == 0:
                            tot += pref * cu
                            continue
                        nn = nps[0]
                        f = np.exp(t * ((nn ** 3 - nn) / 12 + nn * z * z)) / nn
                        for j in range(1, nn + 1):
                            f = f / (4 * z * z - j * j)
                        for b in range(ku):
                            f = f * ((nn - nus[b]) ** 2 - 4 * z * z) / ((nn + nus[b]) ** 2 - 4 * z * z)
                        tot += pref * cu * (np.sum(f) * du / (2 * np.pi)).real
    return 2 ** m * math.factorial(m) * tot

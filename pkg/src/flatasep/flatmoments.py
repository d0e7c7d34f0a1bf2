"""Moment formulas for ASEP with flat and half-flat initial data.

Three evaluators live here:

* ``nu_halfflat``: k-fold circle integrals giving E[tau^{m N_x(t)}] for
  half-flat data;
* ``nu_flat``: the flat nu-form, a finite sum over unpaired points plus circle
  integrals over paired ones;
* ``moment_flat``: the flat Fredholm-Pfaffian form with the 2x2 kernel
  K^flat, integrated over ordered lambda variables.

Times passed to public functions are physical; the germs use
t_eff = (q - p) t = t (1 - tau) / (1 + tau).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from . import DomainError
from .qcalc import qfactorial, qpoch
from .quad import QuadratureRule, circle_rule, graded_rule
from .skewlin import _pf_parlett_reid

POLE_TOL = 1e-8


def t_effective(t: float, tau: float) -> float:
    """(q - p) t with p = tau/(1+tau), q = 1/(1+tau)."""
    return t * (1.0 - tau) / (1.0 + tau)


def compositions(m: int, k: int):
    """Ordered k-tuples of positive integers summing to m."""
    if k == 0:
        if m == 0:
            yield ()
        return
    for first in range(1, m - k + 2):
        for rest in compositions(m - first, k - 1):
            yield (first,) + rest


class Germs:
    """The germ functions at fixed (tau, t_eff, x), vectorized in w."""

    def __init__(self, tau: float, t_eff: float, x: int = 0):
        if not 0.0 < tau < 1.0:
            raise DomainError("tau must lie in (0,1)")
        self.tau = tau
        self.t_eff = t_eff
        self.x = x

    def _qp(self, a, n):
        return qpoch(a, self.tau, n)

    def f1(self, w, n):
        t = self.tau
        return (1 - t) ** n / (w * (1 - t ** n)) * np.exp(self.t_eff * (1 / (1 + w) - 1 / (1 + t ** n * w)))

    def f2(self, w, n):
        t = self.tau
        return ((1 + t ** n * w) / (1 + w) * t ** (-n / 2)) ** (2 * self.x - 1)

    def f(self, w, n):
        # half-flat weight; the exponent x makes the result a moment of N_x
        t = self.tau
        return ((1 - t) ** n * np.exp(self.t_eff * (1 / (1 + w) - 1 / (1 + t ** n * w)))
                * ((1 + t ** n * w) / (1 + w)) ** self.x)

    def gp(self, w, n):
        return self._qp(-w, n) / self._qp(self.tau ** n * w * w, n)

    def gu(self, w, n):
        return self._qp(-w, n) / self._qp(self.tau ** (1 + n) * w * w, n - 1)

    def h1(self, w1, w2, n1, n2):
        W = w1 * w2
        return self._qp(W, n1) / self._qp(self.tau ** n2 * W, n1)

    def h2(self, wa, wb, na, nb):
        t = self.tau
        return (wa * t ** na - wb * t ** nb) * (wb - wa) / ((wa * t ** na - wb) * (wb * t ** nb - wa))

    def e(self, w1, w2, n1, n2):
        t = self.tau
        W = w1 * w2
        return (1 - t ** n1 * W) * (1 - t ** n2 * W) / ((1 - W) * (1 - t ** (n1 + n2) * W))

    def hlim(self, sa, sb, na, nb):
        """Closed form of h1 h2 at unpaired points (the removable 0/0 resolved)."""
        t = self.tau
        return ((-sa * sb) ** min(na, nb) * t ** (-na * nb / 2)
                * abs(sb * t ** (nb / 2) - sa * t ** (na / 2)) / (1 - sa * sb * t ** ((na + nb) / 2)))

    def h2pp(self, z, n):
        """h2-tilde at the paired point (z, 1/z), with its double zeros at z = +-1 explicit."""
        t = self.tau
        return (1 - z * z) ** 2 / ((t ** n - z * z) * (t ** (-n) - z * z))

    def p(self, y, m):
        c = self.tau ** (m / 2) * y
        return (1 - c) / (1 + c)

    def u(self, y, m):
        t = self.tau
        w = t ** (-m / 2) * y
        return (1 - t ** m) * self.f1(w, m) * self._qp(-w, m) / self._qp(t * y * y, m)

    def uu(self, z, n):
        t = self.tau
        return t ** (-n / 2) * z * (1 - t ** n * z * z) / (1 - t ** n)

    def up(self, z, n):
        return (-1) ** n * self.tau ** (-n / 2) / (z * z - 1)

    def uap(self, y, m):
        return (-1) ** m * self.tau ** (-m) / (y * y - 1)

    def v(self, lam, y, m):
        p = self.p(y, m)
        return p * np.exp(-lam * p) * self.u(y, m)


# ---------------------------------------------------------------- germ()

@dataclass(frozen=True)
class GermArgs:
    w: complex
    n: int
    t_eff: float
    tau: float
    x: int = 0
    w2: complex | None = None
    n2: int | None = None


_ONE_VAR = {"f1", "f2", "gp", "gu", "u", "uu", "uap"}
_TWO_VAR = {"h1", "h2", "e"}


def germ(name: str, args: GermArgs, tilde: bool = False) -> complex:
    """Evaluate one germ function at a point.

    ``tilde`` substitutes w -> tau^{-n/2} w (and likewise for the second
    variable). For ``v`` the field ``w2`` carries lambda. Points within
    1e-8 of a pole raise DomainError.
    """
    if args.n < 1:
        raise DomainError("n must be at least 1")
    g = Germs(args.tau, args.t_eff, args.x)
    t = args.tau
    w = complex(args.w)
    if tilde:
        w = t ** (-args.n / 2) * w
    if name in ("gp", "gu"):
        # zeros of (tau^n w^2; tau)_n, resp. (tau^{1+n} w^2; tau)_{n-1}
        for l in range(0 if name == "gp" else 1, args.n):
            if abs(t ** (args.n + l) * w * w - 1.0) < POLE_TOL:
                raise DomainError(f"{name} evaluated at a pole")
    if name in ("f1", "f2") and (abs(1 + w) < POLE_TOL or abs(1 + t ** args.n * w) < POLE_TOL or abs(w) < POLE_TOL):
        raise DomainError(f"{name} evaluated at a singular point")
    if name in _ONE_VAR:
        return complex(getattr(g, name)(w, args.n))
    if name == "v":
        lam = float(args.w2.real) if args.w2 is not None else 0.0
        return complex(g.v(lam, complex(args.w), args.n))
    if name in _TWO_VAR:
        if args.w2 is None or args.n2 is None:
            raise DomainError(f"{name} needs a second point")
        w2 = complex(args.w2)
        if tilde:
            w2 = t ** (-args.n2 / 2) * w2
        return complex(getattr(g, name)(w, w2, args.n, args.n2))
    raise DomainError(f"unknown germ {name!r}")


# ---------------------------------------------------------------- half-flat

def nu_halfflat(k: int, m: int, t: float, x: int, tau: float, eta: float = 0.125, N: int = 256) -> complex:
    """k-th term of the half-flat moment formula for E[tau^{m N_x(t)}]."""
    if k == 0:
        return 1.0 + 0j if m == 0 else 0j
    if k > 4 or k > m:
        raise DomainError("nu_halfflat supports 1 <= k <= min(m, 4)")
    if not 0.0 < eta < 0.25:
        raise DomainError("eta must lie in (0, 1/4)")
    g = Germs(tau, t_effective(t, tau), x)
    ws = circle_rule(N, tau ** (-eta)).nodes
    grids = np.meshgrid(*([ws] * k), indexing="ij")
    total = 0j
    for ns in compositions(m, k):
        integ = np.ones_like(grids[0])
        D = np.empty(grids[0].shape + (k, k), complex)
        for a in range(k):
            w, n = grids[a], ns[a]
            # dw/(2 pi i) = w dtheta / 2 pi, so the mean over nodes of f*w is the integral
            integ = integ * g.f(w, n) * g.gp(w, n) * w
            for b in range(k):
                D[..., a, b] = -1.0 / (w * tau ** n - grids[b])
        for a in range(k):
            for b in range(a + 1, k):
                integ = integ * g.h1(grids[a], grids[b], ns[a], ns[b])
        total += np.mean(integ * np.linalg.det(D))
    return total / math.factorial(k)


def moment_halfflat(m: int, t: float, x: int, tau: float, N: int = 256) -> float:
    """E[tau^{m N_x(t)}] for half-flat initial data."""
    if m == 0:
        return 1.0
    val = qfactorial(m, tau) * sum(nu_halfflat(k, m, t, x, tau, N=N) for k in range(1, m + 1))
    return float(val.real)


# ---------------------------------------------------------------- flat nu-form

def _nu_flat(g: Germs, k: int, m: int, N: int) -> complex:
    tau = g.tau
    zs = circle_rule(N).nodes
    total = 0j
    for kp in range(0, k // 2 + 1):
        ku = k - 2 * kp
        pref = 1.0 / (math.factorial(ku) * 2 ** kp * math.factorial(kp))
        Z = 0j
        grids = np.meshgrid(*([zs] * kp), indexing="ij") if kp else []
        for sig in itertools.product((-1, 1), repeat=ku):
            for rest in range(m % 2, m + 1, 2):
                snp = (m - rest) // 2
                for nus in compositions(rest, ku):
                    if len({s * v for s, v in zip(sig, nus)}) < ku:
                        continue
                    cu = 1.0 + 0j
                    for a in range(ku):
                        wu = tau ** (-nus[a] / 2) * sig[a]
                        cu *= g.f1(wu, nus[a]) * g.gu(wu, nus[a]) * 0.5 * tau ** (-nus[a] / 2) * sig[a]
                    for a in range(ku):
                        for b in range(a + 1, ku):
                            cu *= g.hlim(sig[a], sig[b], nus[a], nus[b])
                    if cu == 0:
                        continue
                    for nps in compositions(snp, kp):
                        if kp == 0:
                            Z += cu
                            continue
                        integ = np.full(grids[0].shape, cu, dtype=complex)
                        for a in range(kp):
                            z, n = grids[a], nps[a]
                            wp, wm = tau ** (-n / 2) * z, tau ** (-n / 2) / z
                            integ = integ * g.f1(wp, n) * g.f1(wm, n) * g.gp(wp, n) * g.gp(wm, n)
                            integ = integ * ((-1) ** n * tau ** (-n * (n + 1) / 2) * (tau ** (-n) - 1)) * g.h2pp(z, n)
                            for c in range(ku):
                                integ = integ * tau ** (-nus[c] * n) * g.e(tau ** (-nus[c] / 2) * sig[c], wp, nus[c], n)
                        for a in range(kp):
                            for b in range(a + 1, kp):
                                za, zb, na, nb_ = grids[a], grids[b], nps[a], nps[b]
                                integ = integ * (tau ** (-2 * na * nb_)
                                                 * g.e(tau ** (-na / 2) * za, tau ** (-nb_ / 2) * zb, na, nb_)
                                                 * g.e(tau ** (-na / 2) / za, tau ** (-nb_ / 2) * zb, na, nb_))
                        # dz/(2 pi i z) on the unit circle is dtheta/2pi
                        Z += integ.mean()
        total += pref * Z
    return total


def nu_flat(k: int, m: int, t: float, tau: float, N: int = 128) -> complex:
    """k-th term of the flat nu-form, so that E[tau^{mh/2}] = m_tau! sum_k nu_flat(k, m)."""
    if m > 4:
        raise DomainError("nu_flat is exposed for m <= 4")
    if k > m:
        raise DomainError("need k <= m")
    if m == 0:
        return 1.0 + 0j if k == 0 else 0j
    if k == 0:
        return 0j
    return _nu_flat(Germs(tau, t_effective(t, tau)), k, m, N)


def moment_nu(m: int, t: float, tau: float, N: int = 128, allow_large: bool = False) -> float:
    """E^flat[tau^{mh(t,0)/2}] from the nu-form.

    ``allow_large`` lifts the m <= 4 guard; the paired integrals are then
    up to (m//2)-dimensional, so keep N small.
    """
    if m == 0:
        return 1.0
    if m > 4 and not allow_large:
        raise DomainError("moment_nu is exposed for m <= 4")
    g = Germs(tau, t_effective(t, tau))
    val = qfactorial(m, tau) * sum(_nu_flat(g, k, m, N) for k in range(1, m + 1))
    return float(val.real)


# ---------------------------------------------------------------- Pfaffian form

def _c_min(tau: float) -> float:
    return (1.0 - tau) / 4.0


@dataclass(frozen=True)
class KflatParams:
    """Quadrature budgets for the K^flat Pfaffian moment.

    ``lambda_rule`` discretizes one gap variable on [0, cutoff]; the ordered
    lambdas are partial sums of gaps.
    """
    tau: float
    t_eff: float
    lambda_rule: QuadratureRule = None
    circle: QuadratureRule = field(default_factory=lambda: circle_rule(128))
    m_cap: int = 4

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError("tau must lie in (0,1)")
        if self.lambda_rule is None:
            object.__setattr__(self, "lambda_rule", default_lambda_rule(self.tau))
        cut = self.lambda_rule.meta.get("cutoff", 0.0)
        if cut < 40.0 / _c_min(self.tau) - 1e-9:
            raise DomainError(f"lambda cutoff {cut} below 40/c_min")

    @classmethod
    def build(cls, tau: float, t: float, per_panel: int = 8, N: int = 128) -> "KflatParams":
        return cls(tau, t_effective(t, tau), default_lambda_rule(tau, per_panel), circle_rule(N))


def default_lambda_rule(tau: float, per_panel: int = 8) -> QuadratureRule:
    # panels reach 400 at tau = 1/2, where 40/c_min = 320
    return graded_rule(per_panel, scale=0.125 / _c_min(tau))


class KflatData:
    """Per-m tables from which K^flat entries are sums of exponentials in lambda.

    K11(la, lb; m, m) PV part = sum_j A[j] exp(-la P1[j] - lb P2[j]);
    unpaired part = sum_{s,s'} D[s, s'] exp(-la pu_a[s] - lb pu_b[s']);
    K12(la; m) = sum_s E[s] exp(-la pu[s]).
    """

    def __init__(self, params: KflatParams, mmax: int):
        g = Germs(params.tau, params.t_eff)
        tau = params.tau
        y = params.circle.nodes
        N = len(y)
        self.N = N
        self.mmax = mmax
        self.A = np.zeros((mmax + 1, N), complex)
        self.P1 = np.zeros((mmax + 1, N), complex)
        self.P2 = np.zeros((mmax + 1, N), complex)
        self.pu = np.zeros((mmax + 1, 2))
        self.V = np.zeros((mmax + 1, 2))
        self.E = np.zeros((mmax + 1, 2))
        sig = (-1.0, 1.0)
        for m in range(1, mmax + 1):
            pa, pb = g.p(y, m), g.p(1 / y, m)
            # PV of (1/(pi i)) oint F dy on half-offset nodes is 2 * mean(F y)
            self.A[m] = 2.0 / N * y * tau ** (m * m / 2) * pa * g.u(y, m) * pb * g.u(1 / y, m) * g.uap(y, m)
            self.P1[m], self.P2[m] = pa, pb
            for i, s in enumerate(sig):
                self.pu[m, i] = g.p(s, m).real
                self.V[m, i] = (g.p(s, m) * g.u(s, m)).real
                self.E[m, i] = -0.5 * s * tau ** (m * m / 4 - m / 2) * self.V[m, i]
        self.D = np.zeros((mmax + 1, mmax + 1, 2, 2))
        for ma in range(1, mmax + 1):
            for mb in range(1, mmax + 1):
                for i, s in enumerate(sig):
                    for j, sp in enumerate(sig):
                        self.D[ma, mb, i, j] = (0.5 * (-s * sp) ** (min(ma, mb) + 1)
                                                * np.sign(sp * tau ** (mb / 2) - s * tau ** (ma / 2))
                                                * tau ** ((ma * ma + mb * mb) / 4 - (ma + mb) / 2)
                                                * self.V[ma, i] * self.V[mb, j])

    def k11(self, la, lb, ma, mb):
        out = 0j
        if ma == mb:
            out += np.sum(self.A[ma] * np.exp(-la * self.P1[ma] - lb * self.P2[ma]))
        for i in range(2):
            for j in range(2):
                out += self.D[ma, mb, i, j] * math.exp(-la * self.pu[ma, i] - lb * self.pu[mb, j])
        return out

    def k12(self, la, ma):
        return sum(self.E[ma, i] * math.exp(-la * self.pu[ma, i]) for i in range(2))


def kflat_block(la: float, lb: float, ma: int, mb: int, params: KflatParams, data: KflatData | None = None) -> np.ndarray:
    """The 2x2 block K^flat(la, lb; ma, mb)."""
    if la < 0 or lb < 0 or ma < 1 or mb < 1:
        raise DomainError("need lambda >= 0 and m >= 1")
    if data is None or data.mmax < max(ma, mb):
        data = KflatData(params, max(ma, mb))
    return np.array([[data.k11(la, lb, ma, mb), data.k12(la, ma)],
                     [-data.k12(lb, mb), 0.5 * np.sign(lb - la)]], dtype=complex)


@nb.njit(cache=True)
def _ordered_pf_integral(comp, s, ws, A, G1, G2, pu, D, E):
    # Integral over 0 < l1 < ... < lk (as gap variables) of pf[K(l_a, l_b; m_a, m_b)].
    # G1[m, i, :] = exp(-s_i P1[m, :]), so exp(-l_a P1[m]) is a running product.
    k = comp.size
    n = s.size
    N = A.shape[1]
    mmax = A.shape[0] - 1
    idx = np.zeros(k, np.int64)
    lam = np.zeros(k)
    wt = np.ones(k)
    e1 = np.ones((k, mmax + 1, N), np.complex128)
    e2 = np.ones((k, mmax + 1, N), np.complex128)
    used = np.zeros(mmax + 1, np.bool_)
    for a in range(k):
        used[comp[a]] = True
    M = np.zeros((2 * k, 2 * k), np.complex128)
    total = 0j
    level = 0
    while True:
        for a in range(level, k):
            i = idx[a]
            lam[a] = (lam[a - 1] if a > 0 else 0.0) + s[i]
            wt[a] = (wt[a - 1] if a > 0 else 1.0) * ws[i]
            for m in range(1, mmax + 1):
                if not used[m]:
                    continue
                for j in range(N):
                    if a == 0:
                        e1[a, m, j] = G1[m, i, j]
                        e2[a, m, j] = G2[m, i, j]
                    else:
                        e1[a, m, j] = e1[a - 1, m, j] * G1[m, i, j]
                        e2[a, m, j] = e2[a - 1, m, j] * G2[m, i, j]
        for a in range(k):
            ma = comp[a]
            for b in range(a + 1, k):
                mb = comp[b]
                v = 0j
                if ma == mb:
                    for j in range(N):
                        v += A[ma, j] * e1[a, ma, j] * e2[b, ma, j]
                for i in range(2):
                    for j in range(2):
                        v += D[ma, mb, i, j] * np.exp(-lam[a] * pu[ma, i] - lam[b] * pu[mb, j])
                M[2 * a, 2 * b] = v
                M[2 * b, 2 * a] = -v
                M[2 * a + 1, 2 * b + 1] = 0.5
                M[2 * b + 1, 2 * a + 1] = -0.5
            k12 = E[ma, 0] * np.exp(-lam[a] * pu[ma, 0]) + E[ma, 1] * np.exp(-lam[a] * pu[ma, 1])
            for b in range(k):
                M[2 * a, 2 * b + 1] = k12
                M[2 * b + 1, 2 * a] = -k12
        total += wt[k - 1] * _pf_parlett_reid(M.copy())
        a = k - 1
        while a >= 0:
            idx[a] += 1
            if idx[a] < n:
                break
            idx[a] = 0
            a -= 1
        if a < 0:
            break
        level = a
    return total


def _pf_moment(m: int, params: KflatParams) -> complex:
    tau = params.tau
    data = KflatData(params, m)
    s, ws = params.lambda_rule.nodes.real.copy(), params.lambda_rule.weights.real.copy()
    G1 = np.exp(-s[None, :, None] * data.P1[:, None, :])
    G2 = np.exp(-s[None, :, None] * data.P2[:, None, :])
    total = 0j
    for k in range(1, m + 1):
        acc = 0j
        for comp in compositions(m, k):
            acc += _ordered_pf_integral(np.array(comp, np.int64), s, ws, data.A, G1, G2, data.pu, data.D, data.E)
        # relabelling symmetry: the k! orderings of the lambdas contribute equally,
        # cancelling the 1/k! of the Fredholm expansion
        total += (-1) ** k * acc
    return qfactorial(m, tau) * tau ** (-m * m / 4) * total


def moment_flat(m: int, t: float, tau: float, params: KflatParams | None = None, with_error: bool = False):
    """E^flat[tau^{m h(t,0)/2}] from the Fredholm-Pfaffian form with kernel K^flat.

    The error estimate is the difference from a coarser run (two fewer Gauss
    points per panel, half the circle nodes).
    """
    if m < 0 or m > 4:
        raise DomainError("moment_flat supports 0 <= m <= 4")
    if m == 0:
        return (1.0, 0.0) if with_error else 1.0
    if params is None:
        params = KflatParams.build(tau, t)
    fine = _pf_moment(m, params)
    if not with_error:
        return float(fine.real)
    pp = params.lambda_rule.meta.get("per_panel", 8)
    coarse_params = KflatParams(params.tau, params.t_eff,
                                default_lambda_rule(params.tau, max(4, pp - 2)),
                                circle_rule(max(8, len(params.circle) // 2)))
    coarse = _pf_moment(m, coarse_params)
    return float(fine.real), float(abs(fine - coarse))

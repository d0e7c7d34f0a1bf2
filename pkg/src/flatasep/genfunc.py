"""The exp_tau generating function of flat ASEP.

E^flat[exp_tau(zeta tau^{h(t,0)/2}; xi)] is computed two ways:

* ``moment_series``: sum over k of zeta^k xi^{k(k-1)} E[tau^{kh/2}] / k_tau!;
* ``fredholm_pf`` (xi = tau^{1/4} only): the Fredholm Pfaffian pf[J - K~]
  of the kernel K~^{flat,zeta}.

The kernel itself has two independent evaluations: ``series`` sums K^flat
entries over m with weights c_m = zeta^m tau^{-m/4}, and ``laplace`` pairs
the inverse two-sided Laplace transform psi-check with the F-series.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import DomainError, TruncationError
from .flatmoments import Germs, KflatData, KflatParams, moment_nu, t_effective
from .fredholm import Kernel2x2, nystrom_pf, pf_sgn_rank2
from .qcalc import qexp, qfactorial, qpoch
from .quad import circle_rule, graded_rule, vline_rule


@dataclass(frozen=True)
class GenFuncParams:
    """Parameters of the exp_tau transform. ``t`` is physical time."""
    zeta: complex
    tau: float
    t: float
    xi: complex | None = None
    beta: float = 0.5
    m_cap: int = 64
    series_tol: float = 1e-15
    circle_N: int = 128
    c: float = 0.5
    S: float = 12.0
    n_s: int = 401
    omega_lo: float = -16.0
    omega_hi: float = 30.0
    n_omega: int = 921

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError("tau must lie in (0,1)")
        if self.beta < 0:
            raise DomainError("beta must be nonnegative")
        if self.xi is None:
            object.__setattr__(self, "xi", self.tau ** 0.25)
        q4 = self.tau ** 0.25
        axi = abs(self.xi)
        if axi > q4 + 1e-15:
            raise DomainError("|xi| must not exceed tau^(1/4)")
        if abs(axi - q4) <= 1e-15 and abs(self.zeta) >= q4:
            raise DomainError("|zeta| must be below tau^(1/4) when |xi| = tau^(1/4)")

    @property
    def t_eff(self) -> float:
        return t_effective(self.t, self.tau)

    @property
    def b(self) -> float:
        return self.beta * abs(math.log(self.tau))

    @property
    def symmetric(self) -> bool:
        return abs(self.xi - self.tau ** 0.25) < 1e-15


def _check_laplace(params: GenFuncParams):
    if params.beta <= 0:
        raise DomainError("the Laplace inversion needs beta > 0")
    _check_branch(params.zeta)


def _check_branch(zeta):
    z = complex(zeta)
    if z.imag == 0.0 and z.real > 0.0:
        raise DomainError("(-zeta)^s is ambiguous for zeta > 0")


# ---------------------------------------------------------------- psi

def _psi_parts(s, y, params: GenFuncParams):
    """p(s, y) and the lambda-free factor R with psi = exp(-lambda p) R."""
    tau = params.tau
    s = np.asarray(s, dtype=complex)
    y = np.asarray(y, dtype=complex)
    ts = tau ** (s / 2)
    p = (1 - ts * y) / (1 + ts * y)
    lz = cmath.log(-complex(params.zeta))
    num = qpoch(-y / ts, tau, math.inf)
    den = qpoch(-ts * y, tau, math.inf)
    expo = (s * lz - params.beta * s * s * math.log(tau)
            + params.t_eff * (1 / (1 + y / ts) - 1 / (1 + ts * y)))
    return p, np.exp(expo) / y * p * num / den


def psi(s, lam, y, params: GenFuncParams):
    """psi(s, lambda, y; zeta), vectorized over s (and y)."""
    _check_branch(params.zeta)
    p, R = _psi_parts(s, y, params)
    return np.exp(-lam * p) * R


class _Lines:
    """Inversion lines for psi-check on an omega grid.

    psi grows like tau^{-b' s^2} along the real axis with b' = (beta + 1/8)|log tau|,
    so psi-check(omega) is taken on Re s = max(c, -omega / 2b'), near the saddle
    of e^{s omega} psi(s). This keeps its relative accuracy where it is tiny and
    multiplied by the large F-series.
    """

    def __init__(self, omegas, params: GenFuncParams, dc: float = 0.5):
        self.n = len(omegas)
        bp = (params.beta + 0.125) * abs(math.log(params.tau))
        c = np.maximum(params.c, -np.asarray(omegas) / (2 * bp))
        c = np.round(c / dc) * dc
        self.groups = []
        for cv in np.unique(c):
            idx = np.nonzero(c == cv)[0]
            rule = vline_rule(float(cv), params.S, params.n_s, b=params.b)
            # (1/2 pi i) int e^{s w} psi ds with ds = i du
            E = np.exp(np.outer(np.asarray(omegas)[idx], rule.nodes)) * (rule.weights / (2j * np.pi))
            self.groups.append((idx, rule.nodes, E))
        self.tail = vline_rule(params.c, params.S, params.n_s, b=params.b).meta["tail"]

    def parts(self, y, params):
        return [_psi_parts(s, y, params) for _, s, _ in self.groups]

    def apply(self, lam, parts):
        out = np.zeros(self.n, complex)
        for (idx, _, E), (p, R) in zip(self.groups, parts):
            out[idx] = E @ (np.exp(-lam * p) * R)
        return out


def psicheck(omega, lam, y, params: GenFuncParams):
    """Inverse two-sided Laplace transform of psi in s (independent of the line Re s > 0)."""
    _check_laplace(params)
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    L = _Lines(om, params)
    vals = L.apply(lam, L.parts(y, params))
    return vals if np.ndim(omega) else complex(vals[0])


def psicheck_bound(omega, params: GenFuncParams, C: float) -> float:
    """C sqrt(pi/b) exp(-omega^2 / 4b)."""
    b = params.b
    return C * math.sqrt(math.pi / b) * math.exp(-omega * omega / (4 * b))


# ---------------------------------------------------------------- F-series

def _log_weights(which: str, params: GenFuncParams):
    tau, beta = params.tau, params.beta
    m = np.arange(params.m_cap + 2)
    lt = math.log(tau)
    lf = np.array([0.0] + [math.log(qfactorial(k, tau)) for k in range(1, params.m_cap + 2)])
    if which == "F1":
        lw = 2 * m * math.log(1 - tau) + ((0.5 + 2 * beta) * m * m - 0.5 * m) * lt
    else:
        lw = ((0.25 + beta) * m * m - 0.25 * m) * lt - lf
    lw[0] = -np.inf
    return lw


def _terms(which: str, z, params: GenFuncParams):
    """Rows m = 0..M of (-z)^m w_m in log space, with M fixed by the Gaussian tail."""
    z = np.asarray(z, dtype=complex)
    zero = z == 0
    # every term with m >= 1 vanishes at z = 0; evaluate there at z = 1 and mask
    lz = np.log(np.where(zero, 1.0, z))
    lw = _log_weights(which, params)
    mc = params.m_cap
    m = np.arange(mc + 2)
    logmag = lw[:, None] + np.outer(m, lz.real.ravel())
    peak = np.max(logmag, axis=0)
    # terms past the peak decay super-geometrically; require the last one below tol
    ok = logmag[-1] - peak < math.log(params.series_tol) - 2.0
    if not np.all(ok):
        raise TruncationError("F-series tail above tolerance at m_cap")
    tol_row = np.all(logmag - peak[None, :] < math.log(params.series_tol) - 2.0, axis=1)
    after = np.nonzero(tol_row & (m > 0))[0]
    M = int(after[0]) if after.size else mc
    while M < mc + 1 and not np.all(tol_row[M:]):
        M += 1
    mm = m[: M + 1]
    T = np.exp(lw[: M + 1, None] + np.outer(mm, lz.ravel())) * ((-1.0) ** mm)[:, None]
    T[:, zero.ravel()] = 0.0
    return T.reshape((M + 1,) + z.shape)


def fseries(which: str, params: GenFuncParams, z=None, y=None, z2=None, sigma1=1, sigma2=1):
    """F1(z, y), F2(z, z2; sigma1, sigma2) or F3(z), vectorized over z.

    Terms are summed in log space up to the point where the Gaussian tail
    falls below ``series_tol`` relative to the largest term; TruncationError
    if that does not happen by ``m_cap``.
    """
    tau = params.tau
    if which == "F3":
        return -np.sum(_terms("F3", z, params), axis=0)
    if which == "F1":
        y = complex(y)
        y2 = y * y
        T = _terms("F1", z, params)
        mm = np.arange(T.shape[0])
        ratio = np.array([qpoch(tau ** (1 + k) * y2, tau, math.inf) * qpoch(tau ** (1 + k) / y2, tau, math.inf)
                          for k in mm])
        base = 1.0 / (qpoch(tau * y2, tau, math.inf) * qpoch(tau / y2, tau, math.inf) * (y2 - 1))
        return base * np.tensordot(ratio, T, axes=(0, 0))
    if which == "F2":
        T1 = _terms("F2", z, params)
        T2 = _terms("F2", z2, params)
        C = _f2_coeffs(max(T1.shape[0], T2.shape[0]), tau, sigma1, sigma2)
        C = C[: T1.shape[0], : T2.shape[0]]
        return np.tensordot(T1, np.tensordot(C, T2, axes=(1, 0)), axes=(0, 0)) if np.ndim(z) == 0 \
            else np.einsum("i...,ij,j...->...", T1, C, T2)
    raise DomainError(f"unknown F-series {which!r}")


def f2_grid(z1, z2, params: GenFuncParams, sigma1=1, sigma2=1):
    """F2 on the outer grid z1 x z2 (1-d arrays), as a matrix product."""
    T1 = _terms("F2", z1, params)
    T2 = _terms("F2", z2, params)
    C = _f2_coeffs(max(T1.shape[0], T2.shape[0]), params.tau, sigma1, sigma2)
    return T1.T @ C[: T1.shape[0], : T2.shape[0]] @ T2


def _f2_coeffs(M, tau, s1, s2):
    C = np.zeros((M, M))
    for m1 in range(1, M):
        for m2 in range(1, M):
            C[m1, m2] = 0.5 * (-s1 * s2) ** (min(m1, m2) + 1) * np.sign(s2 * tau ** (m2 / 2) - s1 * tau ** (m1 / 2))
    return C


# ---------------------------------------------------------------- kernel

class _SeriesKernel:
    """K~ entries by summing K^flat over m with weights c_m = zeta^m tau^{-m/4}."""

    def __init__(self, params: GenFuncParams, mmax: int | None = None):
        tau = params.tau
        if mmax is None:
            # tau^{m^2/8} |zeta|^m decay of the summands
            mmax = 1
            while mmax < params.m_cap and tau ** (mmax * mmax / 8) * abs(params.zeta) ** mmax * tau ** (-mmax / 4) > 1e-17:
                mmax += 1
        self.mmax = mmax
        kp = KflatParams(tau, params.t_eff, circle=circle_rule(params.circle_N))
        self.data = KflatData(kp, mmax)
        self.c = np.array([0.0] + [params.zeta ** m * tau ** (-m / 4) for m in range(1, mmax + 1)], dtype=complex)

    def k11(self, l1, l2):
        d = self.data
        out = 0j
        for m in range(1, self.mmax + 1):
            out += self.c[m] ** 2 * np.sum(d.A[m] * np.exp(-l1 * d.P1[m] - l2 * d.P2[m]))
        for ma in range(1, self.mmax + 1):
            for mb in range(1, self.mmax + 1):
                for i in range(2):
                    for j in range(2):
                        out += self.c[ma] * self.c[mb] * d.D[ma, mb, i, j] * math.exp(-l1 * d.pu[ma, i] - l2 * d.pu[mb, j])
        return out

    def grid(self, x1, x2):
        """K11 on the grid x1 x x2 and K12 on x1."""
        d = self.data
        x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
        K11 = np.zeros((len(x1), len(x2)), complex)
        for m in range(1, self.mmax + 1):
            K11 += (self.c[m] ** 2 * np.exp(-np.outer(x1, d.P1[m])) * d.A[m]) @ np.exp(-np.outer(d.P2[m], x2))
        eu1 = [[self.c[m] * np.exp(-x1 * d.pu[m, i]) for i in range(2)] for m in range(self.mmax + 1)]
        eu2 = [[self.c[m] * np.exp(-x2 * d.pu[m, i]) for i in range(2)] for m in range(self.mmax + 1)]
        for ma in range(1, self.mmax + 1):
            for mb in range(1, self.mmax + 1):
                for i in range(2):
                    for j in range(2):
                        K11 += d.D[ma, mb, i, j] * np.outer(eu1[ma][i], eu2[mb][j])
        K12 = sum(eu1[m][i] * d.E[m, i] for m in range(1, self.mmax + 1) for i in range(2))
        return K11, K12

    def k12(self, l1):
        d = self.data
        return sum(self.c[m] * d.E[m, i] * math.exp(-l1 * d.pu[m, i]) for m in range(1, self.mmax + 1) for i in range(2))


class _LaplaceKernel:
    """K~ entries from psi-check paired with the F-series on a uniform omega grid."""

    def __init__(self, params: GenFuncParams):
        self.p = params
        om = np.linspace(params.omega_lo, params.omega_hi, params.n_omega)
        h = om[1] - om[0]
        self.wo = np.full(om.size, h)
        self.wo[0] = self.wo[-1] = h / 2
        self.om = om
        self.lines = _Lines(om, params)
        zo = np.exp(-om)
        self.F3 = fseries("F3", params, z=zo)
        self.F2 = {(s1, s2): f2_grid(zo, zo, params, s1, s2) for s1 in (-1, 1) for s2 in (-1, 1)}
        self.y = circle_rule(params.circle_N).nodes
        # F1 depends on omega1 + omega2 only; tabulate it on the sum grid
        zsum = np.exp(-(2 * om[0] + h * np.arange(2 * om.size - 1)))
        self.F1 = [fseries("F1", params, z=zsum, y=y) for y in self.y]
        self.parts = {s: self.lines.parts(float(s), params) for s in (-1, 1)}
        self.parts_y = [self.lines.parts(y, params) for y in self.y]
        self.parts_iy = [self.lines.parts(1 / y, params) for y in self.y]

    def pc(self, lam, sigma):
        return self.lines.apply(lam, self.parts[sigma])

    def k12(self, l1):
        return sum(0.5 * sg * np.sum(self.wo * self.F3 * self.pc(l1, sg)) for sg in (-1, 1))

    def k11(self, l1, l2):
        a = {s: self.wo * self.pc(l1, s) for s in (-1, 1)}
        b = {s: self.wo * self.pc(l2, s) for s in (-1, 1)}
        out = 0j
        for s1 in (-1, 1):
            for s2 in (-1, 1):
                out += a[s1] @ self.F2[(s1, s2)] @ b[s2]
        # (1/(pi i)) PV oint dy on half-offset nodes = 2 mean(. y); the omega
        # double sum against F1(omega1 + omega2) is a convolution
        pv = 0j
        for y, F1, py, piy in zip(self.y, self.F1, self.parts_y, self.parts_iy):
            u = self.wo * self.lines.apply(l1, py)
            v = self.wo * self.lines.apply(l2, piy)
            pv += y * np.dot(np.convolve(u, v), F1)
        return out + 2.0 * pv / len(self.y)


@functools.lru_cache(maxsize=4)
def _kernel(params: GenFuncParams, route: str):
    if route == "series":
        return _SeriesKernel(params)
    if route == "laplace":
        _check_laplace(params)
        return _LaplaceKernel(params)
    raise DomainError(f"unknown route {route!r}")


def wtK_block(l1: float, l2: float, params: GenFuncParams, route: str = "series") -> np.ndarray:
    """2x2 block of K~^{flat,zeta}(l1, l2) by the ``series`` or ``laplace`` route."""
    if not params.symmetric:
        raise DomainError("the kernel K~ needs xi = tau^(1/4)")
    if l1 < 0 or l2 < 0:
        raise DomainError("lambda must be nonnegative")
    K = _kernel(params, route)
    return np.array([[K.k11(l1, l2), K.k12(l1)], [-K.k12(l2), 0.5 * np.sign(l2 - l1)]], dtype=complex)


def wtk_kernel(params: GenFuncParams) -> Kernel2x2:
    """K~ (series route) as a Kernel2x2 for the fredholm module."""
    K = _kernel(params, "series")

    def grid(x):
        K11, g = K.grid(x, x)
        n = len(x)
        return (K11, np.repeat(g[:, None], n, axis=1), -np.repeat(g[None, :], n, axis=0),
                0.5 * np.sign(x[None, :] - x[:, None]))

    return Kernel2x2(eval=lambda a, b: wtK_block(a, b, params), tag="sgn_block", grid=grid)


# ---------------------------------------------------------------- transforms

def _sgn_compose(K: _SeriesKernel, x):
    # (K11 S)(x_i, x_j) = int K11(x_i, u) sgn(x_j - u)/2 du, analytically in u:
    # int_0^inf e^{-uQ} sgn(l - u) du = (1 - 2 e^{-lQ}) / Q
    d = K.data
    n = len(x)
    out = np.zeros((n, n), complex)
    xi, xj = x[:, None], x[None, :]
    for m in range(1, K.mmax + 1):
        Q = d.P2[m]
        coef = K.c[m] ** 2 * d.A[m]
        # sum_k coef_k e^{-x_i P1_k} (1 - 2 e^{-x_j Q_k}) / Q_k / 2
        left = np.exp(-np.outer(x, d.P1[m])) * coef
        right = (1 - 2 * np.exp(-np.outer(Q, x))) / (2 * Q[:, None])
        out += left @ right
    for ma in range(1, K.mmax + 1):
        for mb in range(1, K.mmax + 1):
            for i in range(2):
                for j in range(2):
                    Q = d.pu[mb, j]
                    out += (K.c[ma] * K.c[mb] * d.D[ma, mb, i, j] * np.exp(-xi * d.pu[ma, i])
                            * (1 - 2 * np.exp(-xj * Q)) / (2 * Q))
    return out


def fredholm_value(params: GenFuncParams, per_panel: int = 8, scale: float | None = None) -> complex:
    """pf[J - K~] via the rank-two reduction with the analytic sgn composition."""
    K = _kernel(params, "series")
    if scale is None:
        scale = 0.125 / ((1 - params.tau) / 4)
    rule = graded_rule(per_panel, scale=scale)
    x, w = rule.nodes.real, rule.weights.real
    K11S = _sgn_compose(K, x)
    g = np.array([K.k12(v) for v in x])
    root = cmath.sqrt(pf_sgn_rank2(K11S, g, w))
    # the sign comes from a coarse direct Nystrom Pfaffian
    coarse = nystrom_pf(wtk_kernel(params), graded_rule(4, scale=scale))
    return root if abs(root - coarse) <= abs(root + coarse) else -root


def _nu_nodes(k: int) -> int:
    # circle nodes for the k-th nu-form moment; converged to ~1e-6 relative at t <= 1
    return 128 if k <= 5 else (96 if k <= 7 else 48)


def moment_series_terms(params: GenFuncParams, kmax: int = 7) -> list[complex]:
    """Terms zeta^k xi^{k(k-1)} E[tau^{kh/2}] / k_tau! for k = 0..kmax."""
    tau = params.tau
    return [params.zeta ** k * params.xi ** (k * (k - 1)) * moment_nu(k, params.t, tau, N=_nu_nodes(k), allow_large=True)
            / qfactorial(k, tau) for k in range(kmax + 1)]


def exptau_transform(params: GenFuncParams, method: str = "moment_series", tol: float = 1e-6,
                     kmax: int = 9, with_error: bool = False):
    """E^flat[exp_tau(zeta tau^{h/2}; xi)].

    ``moment_series`` stops once two consecutive terms fall below ``tol``
    times the partial sum (the terms decay like tau^{k^2/4}); exceeding
    ``kmax`` raises TruncationError. ``fredholm_pf`` needs xi = tau^(1/4).
    """
    if params.zeta == 0:
        return (1.0 + 0j, 0.0) if with_error else 1.0 + 0j
    if method == "moment_series":
        # the terms decay like tau^{k^2/4}, so once the ratio r of successive
        # terms is below 1/2 the tail is at most |term| r / (1 - r)
        tau = params.tau
        total = 0j
        prev = None
        for k in range(kmax + 1):
            mom = moment_nu(k, params.t, tau, N=_nu_nodes(k), allow_large=True)
            term = params.zeta ** k * params.xi ** (k * (k - 1)) * mom / qfactorial(k, tau)
            total += term
            if prev is not None and k >= 3:
                r = abs(term) / abs(prev) if prev != 0 else 0.0
                if r < 0.5:
                    err = abs(term) * r / (1 - r)
                    if err < tol * abs(total):
                        return (total, err) if with_error else total
            prev = term
        raise TruncationError("moment series did not reach tolerance within kmax")
    if method == "fredholm_pf":
        if not params.symmetric:
            raise DomainError("fredholm_pf needs xi = tau^(1/4)")
        val = fredholm_value(params)
        if with_error:
            coarse = fredholm_value(params, per_panel=6)
            return val, abs(val - coarse)
        return val
    raise DomainError(f"unknown method {method!r}")

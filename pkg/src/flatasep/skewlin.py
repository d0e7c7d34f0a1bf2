"""Pfaffians of skew-symmetric matrices and a catalog of Pfaffian identities.

The Pfaffian is computed by Parlett-Reid skew tridiagonalization with
partial pivoting. ``identity_check`` evaluates both sides of each catalog
identity on random instances and reports the worst relative residual.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import DomainError

SKEW_TOL = 1e-12


class SkewMatrix:
    """Even-order complex skew-symmetric matrix, checked on construction."""

    __slots__ = ("a",)

    def __init__(self, entries, tol: float = SKEW_TOL):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("SkewMatrix needs a square array")
        if a.size and np.max(np.abs(a + a.T)) > tol * max(1.0, np.max(np.abs(a))):
            raise DomainError("matrix is not skew-symmetric")
        a = 0.5 * (a - a.T)
        np.fill_diagonal(a, 0.0)
        self.a = a

    @property
    def order(self) -> int:
        return self.a.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.a if dtype is None else self.a.astype(dtype)


@nb.njit(cache=True)
def _pf_parlett_reid(a):
    # works in place on a complex copy; returns the Pfaffian
    n = a.shape[0]
    if n % 2 == 1:
        return 0j
    res = 1.0 + 0j
    for k in range(0, n - 1, 2):
        # pivot: largest entry in column k below the diagonal
        kp = k + 1
        best = abs(a[k + 1, k])
        for i in range(k + 2, n):
            v = abs(a[i, k])
            if v > best:
                best = v
                kp = i
        if kp != k + 1:
            for j in range(n):
                tmp = a[k + 1, j]
                a[k + 1, j] = a[kp, j]
                a[kp, j] = tmp
            for i in range(n):
                tmp = a[i, k + 1]
                a[i, k + 1] = a[i, kp]
                a[i, kp] = tmp
            res = -res
        piv = a[k, k + 1]
        if piv == 0:
            return 0j
        res *= piv
        if k + 2 < n:
            # tau = a[k, k+2:] / a[k, k+1]; rank-2 update of the trailing block
            for i in range(k + 2, n):
                ti = a[k, i] / piv
                for j in range(k + 2, n):
                    tj = a[k, j] / piv
                    a[i, j] += ti * a[j, k + 1] - tj * a[i, k + 1]
    return res


def pfaffian(A) -> complex:
    """Pfaffian of a skew-symmetric matrix (0 for odd order, 1 for order 0)."""
    a = np.array(A.a if isinstance(A, SkewMatrix) else A, dtype=complex)
    if a.shape[0] == 0:
        return 1.0 + 0j
    return complex(_pf_parlett_reid(a.copy()))


@nb.njit(cache=True)
def pf_small(a):
    """Pfaffian of a small complex skew matrix; does not modify its input."""
    return _pf_parlett_reid(a.copy())


def pfaffian_bruteforce(A) -> complex:
    """Sum over perfect matchings. Exponential cost; for 2n <= 8 only."""
    a = np.asarray(A.a if isinstance(A, SkewMatrix) else A, dtype=complex)
    n = a.shape[0]
    if n % 2:
        return 0j
    if n > 12:
        raise DomainError("brute-force Pfaffian limited to order 12")

    def rec(idx):
        if not idx:
            return 1.0 + 0j
        i = idx[0]
        total = 0j
        for pos in range(1, len(idx)):
            j = idx[pos]
            rest = idx[1:pos] + idx[pos + 1:]
            total += (-1) ** (pos - 1) * a[i, j] * rec(rest)
        return total

    return rec(tuple(range(n)))


def standard_j(n: int) -> np.ndarray:
    """Block-diagonal J with n blocks [[0,1],[-1,0]]."""
    j = np.zeros((2 * n, 2 * n))
    for i in range(n):
        j[2 * i, 2 * i + 1] = 1.0
        j[2 * i + 1, 2 * i] = -1.0
    return j


def fredholm_pf_series(A, lam: complex = 1.0) -> complex:
    """pf(J + lam A) by the subset expansion sum_S lam^|S| pf(A restricted to S).

    S runs over subsets of the n nodes; each node carries two rows (2i, 2i+1).
    """
    a = np.asarray(A, dtype=complex)
    n = a.shape[0] // 2
    if n > 10:
        raise DomainError("subset expansion limited to 10 nodes")
    total = 0j
    for size in range(n + 1):
        for S in itertools.combinations(range(n), size):
            rows = [r for i in S for r in (2 * i, 2 * i + 1)]
            total += lam ** size * pfaffian(a[np.ix_(rows, rows)])
    return total


@dataclass(frozen=True)
class IdentityReport:
    name: str
    residual: float
    trials: int
    seed: int

    def __post_init__(self):
        if not self.residual >= 0:
            raise ValueError("residual must be nonnegative")


def _rand_c(rng, *shape):
    return rng.random(shape) + 1j * rng.random(shape)


def _rand_skew(rng, n):
    x = _rand_c(rng, n, n)
    return x - x.T


def _rel(lhs, rhs):
    return abs(lhs - rhs) / (1.0 + abs(rhs))


def _check_schur(rng, size):
    x = _rand_c(rng, size) + 0.1
    m = (x[:, None] - x[None, :]) / (x[:, None] + x[None, :])
    rhs = np.prod([m[a, b] for a in range(size) for b in range(a + 1, size)])
    return _rel(pfaffian(m), rhs)


def _check_schur_nl(rng, size):
    y = _rand_c(rng, size) * 2 - (1 + 1j)
    m = (y[None, :] - y[:, None]) / (y[:, None] * y[None, :] - 1.0)
    np.fill_diagonal(m, 0.0)
    rhs = np.prod([m[a, b] for a in range(size) for b in range(a + 1, size)])
    return _rel(pfaffian(m), rhs)


def sign_pf_sides(ms, sigmas, variant: str = "corrected"):
    """Both sides of the integer sign-Pfaffian identity.

    The product side orders points by sigma*m. The matrix entries are
    (-s_a s_b)^min(m_a, m_b) sgn(x_a - x_b) with x = sigma*tau^(m/2), which for
    integers orders like sigma/m. ``variant="printed"`` uses sgn(s_b m_b - s_a m_a)
    instead, which already fails at two points with opposite sigmas.
    """
    k = len(ms)
    lhs = 1
    for a in range(k):
        for b in range(a + 1, k):
            e = min(ms[a], ms[b]) + 1
            lhs *= (-sigmas[a] * sigmas[b]) ** e * int(np.sign(sigmas[a] * ms[a] - sigmas[b] * ms[b]))
    mat = np.zeros((k, k))
    for a in range(k):
        for b in range(k):
            if a != b:
                e = min(ms[a], ms[b])
                if variant == "printed":
                    order = sigmas[b] * ms[b] - sigmas[a] * ms[a]
                else:
                    order = sigmas[a] * ms[b] - sigmas[b] * ms[a]
                mat[a, b] = (-sigmas[a] * sigmas[b]) ** e * np.sign(order)
    return lhs, pfaffian(mat)


def _check_sign_pf_all(size, mmax=4):
    worst = 0.0
    count = 0
    for ms in itertools.product(range(1, mmax + 1), repeat=size):
        for sg in itertools.product((-1, 1), repeat=size):
            lhs, rhs = sign_pf_sides(ms, sg)
            worst = max(worst, abs(lhs - rhs))
            count += 1
    return worst, count


def _check_block(rng, size):
    # size is the full order 2k; k may be odd or even
    k = size // 2
    A = _rand_skew(rng, k)
    B = _rand_skew(rng, k)
    U = _rand_c(rng, k)
    V = _rand_c(rng, k)
    D = np.outer(U, V)
    M = np.block([[A, D], [-D.T, B]])
    lhs = pfaffian(M)
    if k % 2 == 0:
        rhs = pfaffian(A) * pfaffian(B)
    else:
        MA = np.block([[A, U[:, None]], [-U[None, :], np.zeros((1, 1))]])
        MB = np.block([[B, V[:, None]], [-V[None, :], np.zeros((1, 1))]])
        rhs = pfaffian(MA) * pfaffian(MB)
    return _rel(lhs, rhs)


def _check_diag_scale(rng, size):
    k = size // 2
    A = _rand_skew(rng, k)
    B = _rand_skew(rng, k)
    U = _rand_c(rng, k, k)
    M = np.block([[A, U], [-U.T, B]])
    d1 = _rand_c(rng, k)
    d2 = _rand_c(rng, k)
    D = np.diag(np.concatenate([d1, d2]))
    return _rel(np.prod(d1) * np.prod(d2) * pfaffian(M), pfaffian(D @ M @ D))


def _check_congruence(rng, size):
    A = _rand_skew(rng, size)
    B = _rand_c(rng, size, size)
    return _rel(pfaffian(B @ A @ B.T), np.linalg.det(B) * pfaffian(A))


def _check_rank2_det(rng, size):
    n = size
    A = _rand_skew(rng, n) * 0.3
    B = _rand_skew(rng, n) * 0.3
    u = _rand_c(rng, n)
    v = _rand_c(rng, n)
    R = np.outer(u, v)
    I = np.eye(n)
    P = np.block([[I, B], [A, I]])
    Q = np.block([[R, np.zeros((n, n))], [np.zeros((n, n)), R.T]])
    lhs = np.linalg.det(P + Q)
    rhs = np.linalg.det(P) * (1.0 + u @ np.linalg.solve(I - A @ B, v)) ** 2
    return _rel(lhs, rhs)


def _rand_skew_kernel(rng, npts):
    return _rand_skew(rng, npts)


def _kernel_pf(K, idx):
    return pfaffian(K[np.ix_(idx, idx)])


def _check_resum(rng, size):
    # size = 2n points drawn (with repetition) from a finite X with weights mu
    npts = 4
    two_n = size
    n = two_n // 2
    mu = rng.random(npts) + 0.2
    A = _rand_skew_kernel(rng, npts)
    B = _rand_skew_kernel(rng, npts)
    C = _rand_skew_kernel(rng, npts)
    lhs = 0j
    rhs = 0j
    for xs in itertools.product(range(npts), repeat=two_n):
        w = np.prod(mu[list(xs)])
        idx = list(xs)
        pc = _kernel_pf(C, idx)
        lhs += w * _kernel_pf(A + B, idx) * pc
        for k1 in range(n + 1):
            k2 = n - k1
            pa = _kernel_pf(A, idx[: 2 * k1])
            pb = _kernel_pf(B, idx[2 * k1:])
            rhs += w * pa * pb * pc / (math.factorial(2 * k1) * math.factorial(2 * k2))
    lhs /= math.factorial(two_n)
    return _rel(lhs, rhs)


def _check_andreief_pf(rng, size):
    k = size // 2
    npts = 4 if k <= 3 else 3
    mu = rng.random(npts) + 0.2
    # A_{ab}(x, x') with A_{ab}(x,x') = -A_{ba}(x',x)
    raw = _rand_c(rng, k, k, npts, npts)
    A = raw - raw.transpose(1, 0, 3, 2)
    U = _rand_c(rng, k, k, npts)  # U_{ab}(x)
    Bm = _rand_skew(rng, k)
    phi = _rand_c(rng, k, npts)
    lhs = 0j
    for xs in itertools.product(range(npts), repeat=k):
        w = np.prod([mu[x] for x in xs]) * np.prod([phi[a, xs[a]] for a in range(k)])
        M = np.zeros((2 * k, 2 * k), complex)
        for a in range(k):
            for b in range(k):
                M[a, b] = A[a, b, xs[a], xs[b]]
                M[a, k + b] = U[a, b, xs[a]]
                M[k + a, b] = -U[b, a, xs[b]]
                M[k + a, k + b] = Bm[a, b]
        lhs += w * pfaffian(M)
    pm = phi * mu[None, :]
    Ai = np.einsum("ax,by,abxy->ab", pm, pm, A)
    Ui = np.einsum("ax,abx->ab", pm, U)
    M = np.block([[Ai, Ui], [-Ui.T, Bm]])
    return _rel(lhs, pfaffian(M))


def _check_fin_fredpf(rng, size):
    A = _rand_skew(rng, size) * 0.5
    J = standard_j(size // 2)
    lhs = fredholm_pf_series(A) ** 2
    rhs = np.linalg.det(np.eye(size) - J @ A)
    direct = pfaffian(J + A)
    return max(_rel(lhs, rhs), _rel(direct ** 2, rhs))


def _check_pf_det_conj(rng, size):
    K = _rand_skew(rng, size) * 0.5
    L = _rand_c(rng, size, size) * 0.3
    J = standard_j(size // 2)
    I = np.eye(size)
    # pf[(I+L^T)(J+K)(I+L)] with J playing the role of the identity in pf[J+K]
    M = (I + L.T) @ (J + K) @ (I + L)
    lhs = fredholm_pf_series(M - J)
    rhs = np.linalg.det(I + L) * fredholm_pf_series(K)
    return _rel(lhs, rhs)


def random_symplectic(rng, n, scale=0.3):
    """exp(J S) with S symmetric satisfies M^T J M = J."""
    from scipy.linalg import expm

    S = rng.standard_normal((2 * n, 2 * n)) * scale
    S = S + S.T
    return expm(standard_j(n) @ S)


def _check_pf_sympl(rng, size):
    n = size // 2
    K = _rand_skew(rng, size) * 0.5
    M = random_symplectic(rng, n)
    lam = complex(rng.random() + 0.5)
    lhs = fredholm_pf_series(K, lam)
    rhs = fredholm_pf_series(M.T @ K @ M, lam)
    return _rel(lhs, rhs)


_CATALOG = {
    "schur": (_check_schur, 8),
    "schur_nl": (_check_schur_nl, 8),
    "sign_pf": (None, 6),
    "block": (_check_block, 40),
    "diag_scale": (_check_diag_scale, 40),
    "congruence": (_check_congruence, 40),
    "rank2_det": (_check_rank2_det, 40),
    "resum": (_check_resum, 6),
    "andreief_pf": (_check_andreief_pf, 8),
    "fin_fredpf": (_check_fin_fredpf, 16),
    "pf_det_conj": (_check_pf_det_conj, 16),
    "pf_sympl": (_check_pf_sympl, 16),
}

IDENTITY_TAGS = tuple(_CATALOG)


def identity_check(name: str, size: int, trials: int = 20, seed: int = 0) -> IdentityReport:
    """Worst residual |LHS - RHS| / (1 + |RHS|) of an identity over random trials.

    ``sign_pf`` is exhaustive: every (m, sigma) with entries m <= 4 is checked and
    ``trials`` is ignored.
    """
    if name not in _CATALOG:
        raise DomainError(f"unknown identity {name!r}")
    fn, cap = _CATALOG[name]
    if size > cap or size < 1:
        raise DomainError(f"size {size} outside 1..{cap} for {name}")
    if name == "sign_pf":
        if size % 2:
            raise DomainError("sign_pf needs an even number of points")
        worst, count = _check_sign_pf_all(size)
        return IdentityReport(name, float(worst), count, seed)
    if size % 2 and name not in ("rank2_det", "congruence"):
        raise DomainError(f"{name} needs an even size")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        worst = max(worst, float(fn(rng, size)))
    return IdentityReport(name, worst, trials, seed)

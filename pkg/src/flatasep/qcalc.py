"""q-Pochhammer symbols, q-factorials and q-exponentials."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import DomainError, TruncationError


@dataclass(frozen=True)
class QContext:
    tau: float
    poch_tol: float = 1e-16
    series_tol: float = 1e-15
    m_cap: int = 64

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0,1), got {self.tau}")
        for name in ("poch_tol", "series_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1e-3:
                raise DomainError(f"{name} must lie in (0, 1e-3], got {v}")
        if self.m_cap < 1:
            raise DomainError("m_cap must be positive")

    @classmethod
    def from_p(cls, p: float, **kw) -> "QContext":
        return cls(tau=p / (1.0 - p), **kw)


INF = math.inf


def poch_terms(a_abs: float, q_abs: float, tol: float) -> int:
    """Number of factors K with |a||q|^K/(1-|q|) < tol (log-tail bound)."""
    if a_abs == 0.0:
        return 0
    if q_abs == 0.0:
        return 1
    k = math.log(tol * (1.0 - q_abs) / a_abs) / math.log(q_abs)
    return max(0, int(math.ceil(k)))


def qpoch(a, q, n, ctx: QContext | None = None, with_error: bool = False):
    """(a;q)_n, with n a nonnegative integer or ``math.inf``.

    For n = inf the product stops at the first K whose log-tail bound
    |a||q|^K/(1-|q|) is under ``ctx.poch_tol``; that bound is returned as the
    error estimate when ``with_error`` is set. Works elementwise on arrays.
    """
    tol = ctx.poch_tol if ctx is not None else 1e-16
    a = np.asarray(a, dtype=complex)
    if n == INF:
        qa = abs(q)
        if qa >= 1.0:
            raise DomainError("infinite q-Pochhammer needs |q| < 1")
        amax = float(np.max(np.abs(a))) if a.size else 0.0
        K = poch_terms(amax, qa, tol)
        err = amax * qa ** K / (1.0 - qa) if amax else 0.0
    else:
        if n < 0 or int(n) != n:
            raise DomainError("n must be a nonnegative integer or inf")
        K = int(n)
        err = 0.0
    out = np.ones_like(a)
    qk = 1.0 + 0j
    for _ in range(K):
        out = out * (1.0 - a * qk)
        qk = qk * q
    if out.ndim == 0:
        out = complex(out)
    return (out, err) if with_error else out


def qfactorial(n: int, q: float) -> float:
    """n_q! = [1]_q [2]_q ... [n]_q."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    r = 1.0
    for k in range(1, n + 1):
        r *= (1.0 - q ** k) / (1.0 - q)
    return r


def qfactorial_poch(n: int, q: float) -> float:
    """Same quantity through (q;q)_n / (1-q)^n."""
    return (qpoch(q, q, n).real) / (1.0 - q) ** n


def _xi_kind(xi, q):
    if abs(xi - q ** 0.25) < 1e-15:
        return "quarter"
    if abs(xi - q ** 0.5) < 1e-15:
        return "half"
    if abs(xi - 1.0) < 1e-15:
        return "one"
    return "generic"


def qexp(x, q: float, xi, ctx: QContext | None = None, with_error: bool = False):
    """Generalized q-exponential sum_k xi^{k(k-1)} x^k / k_q!.

    xi = 1 gives e_q, xi = q^(1/2) gives E_q and xi = q^(1/4) the symmetric exp_q.
    Returns the value, or (value, tail bound) when ``with_error`` is set.
    """
    series_tol = ctx.series_tol if ctx is not None else 1e-15
    m_cap = ctx.m_cap if ctx is not None else 64
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie in (0,1)")
    x = complex(x)
    xi = complex(xi)
    kind = _xi_kind(xi, q)
    axi = abs(xi)
    if axi > 1.0 + 1e-15:
        raise DomainError("|xi| must be at most 1")
    if abs(axi - 1.0) < 1e-15 and kind not in ("quarter", "half") and abs(x) >= 1.0:
        raise DomainError("|xi| = 1 needs |x| < 1")
    term = 1.0 + 0j
    total = term
    # term_k = xi^{k(k-1)} x^k / k_q!; ratio term_{k+1}/term_k = xi^{2k} x (1-q)/(1-q^{k+1})
    for k in range(0, m_cap):
        ratio = xi ** (2 * k) * x * (1.0 - q) / (1.0 - q ** (k + 1))
        term = term * ratio
        total += term
        kk = k + 1
        if abs(term) < series_tol:
            tail = _tail_bound(abs(term), abs(x), axi, q, kk)
            if tail < series_tol:
                return (total, tail) if with_error else total
    raise TruncationError(f"qexp did not converge within m_cap={m_cap} terms")


def _tail_bound(last, ax, axi, q, k):
    """Bound on sum_{j>k} |term_j| given |term_k| = last.

    The ratios |xi|^{2j} |x| (1-q)/(1-q^{j+1}) are nonincreasing in j for |xi| <= 1,
    so the tail is dominated by a geometric series.
    """
    r = axi ** (2 * k) * ax * (1.0 - q) / (1.0 - q ** (k + 1))
    if r >= 1.0:
        return math.inf
    return last * r / (1.0 - r)


def exp_tau_sym(x, q: float, ctx: QContext | None = None):
    """Symmetric q-exponential exp_q(x) = sum q^{k(k-1)/4} x^k / k_q!."""
    return qexp(x, q, q ** 0.25, ctx)


def sym_factorial(n: int, q: float) -> float:
    """q^{-n(n-1)/4} n_q!, which is invariant under q -> 1/q."""
    return q ** (-n * (n - 1) / 4.0) * qfactorial(n, q)


def exp_sym_via_factorial(x, q: float, kmax: int = 64) -> complex:
    """sum x^k / (q^{-k(k-1)/4} k_q!), written with the q <-> 1/q symmetric factorial.

    For q > 1 the q-factorial is continued as prod (q^j - 1)/(q - 1).
    """
    x = complex(x)
    term = 1.0 + 0j
    total = term
    for k in range(1, kmax):
        # ratio of consecutive terms: x q^{(k-1)/2} (q - 1) / (q^k - 1)
        term *= x * q ** ((k - 1) / 2.0) * (q - 1.0) / (q ** k - 1.0)
        total += term
    return total

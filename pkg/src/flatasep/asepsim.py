"""Continuous-time Monte Carlo for ASEP with flat and half-flat initial data.

Particles jump right at rate p and left at rate q = 1 - p on the window
-L..L with closed ends. Each trajectory draws its random numbers from a
counter-based generator keyed by (seed, trajectory index), so any partition
of the trajectories over workers produces the same samples. Sums are
accumulated per fixed-size chunk and combined in chunk order, which keeps
means bit-identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from . import DomainError
from .qcalc import qexp

INIT_CODES = {"flat": 0, "halfflat": 1, "halfflat_shifted": 2}
CHUNK = 16384


def min_window(t: float) -> int:
    return int(math.ceil(4.0 * t)) + 20


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo setup. ``shift`` moves half-flat data to sites 2*shift + 2, 2*shift + 4, ..."""
    p: float
    t: float
    window: int | None = None
    init: str = "flat"
    shift: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("p must lie in [0, 1]")
        if self.t < 0:
            raise DomainError("t must be nonnegative")
        if self.init not in INIT_CODES:
            raise DomainError(f"unknown initial data {self.init!r}")
        if self.window is None:
            object.__setattr__(self, "window", min_window(self.t))
        if self.window < min_window(self.t):
            raise DomainError(f"window {self.window} below ceil(4t)+20 = {min_window(self.t)}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must fit in 64 bits")

    @property
    def q_rate(self) -> float:
        return 1.0 - self.p

    @property
    def tau(self) -> float:
        if self.p >= 0.5:
            raise DomainError("observables need tau = p/q below 1")
        return self.p / self.q_rate

    @classmethod
    def from_tau(cls, tau: float, t: float, **kw) -> "SimConfig":
        return cls(p=tau / (1.0 + tau), t=t, **kw)


@nb.njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@nb.njit(cache=True, nogil=True)
def _run(seed, start, n, p, t, L, init, shift, xs):
    # returns rows [h(t,0), N_{xs[0]}, N_{xs[1]}, ...] for trajectories start..start+n-1
    q = 1.0 - p
    out = np.zeros((n, xs.size + 1), np.int64)
    nsite = 2 * L + 1
    gamma = np.uint64(0x9E3779B97F4A7C15)
    eta = np.zeros(nsite, np.int8)
    nbond = nsite - 1
    # bond b joins array sites b and b+1; R holds bonds with a right jump available, Lb left
    R = np.empty(nbond, np.int64)
    posR = np.empty(nbond, np.int64)
    Lb = np.empty(nbond, np.int64)
    posL = np.empty(nbond, np.int64)
    for i in range(n):
        key = _mix64(np.uint64(seed) ^ _mix64(np.uint64(start + i) * gamma + np.uint64(1)))
        ctr = np.uint64(0)
        for s in range(nsite):
            x = s - L
            if init == 0:
                eta[s] = 1 if x % 2 == 0 else 0
            elif init == 1:
                eta[s] = 1 if (x > 0 and x % 2 == 0) else 0
            else:
                eta[s] = 1 if (x > 2 * shift and x % 2 == 0) else 0
        nR = 0
        nL = 0
        for b in range(nbond):
            posR[b] = -1
            posL[b] = -1
            if eta[b] == 1 and eta[b + 1] == 0:
                R[nR] = b
                posR[b] = nR
                nR += 1
            elif eta[b] == 0 and eta[b + 1] == 1:
                Lb[nL] = b
                posL[b] = nL
                nL += 1
        clock = 0.0
        flux = 0
        while True:
            tot = p * nR + q * nL
            if tot <= 0.0:
                break
            ctr += np.uint64(1)
            u1 = (_mix64(key + ctr * gamma) >> np.uint64(11)) * (1.0 / 9007199254740992.0)
            clock += -np.log1p(-u1) / tot
            if clock > t:
                break
            ctr += np.uint64(1)
            u2 = (_mix64(key + ctr * gamma) >> np.uint64(11)) * (1.0 / 9007199254740992.0)
            r = u2 * tot
            if r < p * nR:
                j = min(int(r / p), nR - 1)
                b = R[j]
                eta[b] = 0
                eta[b + 1] = 1
                if b == L:
                    flux -= 1
            else:
                j = min(int((r - p * nR) / q), nL - 1)
                b = Lb[j]
                eta[b] = 1
                eta[b + 1] = 0
                if b == L:
                    flux += 1
            for bb in range(b - 1, b + 2):
                if bb < 0 or bb >= nbond:
                    continue
                if posR[bb] >= 0:
                    k = posR[bb]
                    nR -= 1
                    last = R[nR]
                    R[k] = last
                    posR[last] = k
                    posR[bb] = -1
                if posL[bb] >= 0:
                    k = posL[bb]
                    nL -= 1
                    last = Lb[nL]
                    Lb[k] = last
                    posL[last] = k
                    posL[bb] = -1
                if eta[bb] == 1 and eta[bb + 1] == 0:
                    R[nR] = bb
                    posR[bb] = nR
                    nR += 1
                elif eta[bb] == 0 and eta[bb + 1] == 1:
                    Lb[nL] = bb
                    posL[bb] = nL
                    nL += 1
        out[i, 0] = 2 * flux
        for j in range(xs.size):
            c = 0
            for s in range(0, min(L + xs[j] + 1, nsite)):
                c += eta[s]
            out[i, j + 1] = c
    return out


def simulate_batch(cfg: SimConfig, n: int, start: int = 0, xs=()) -> np.ndarray:
    """Rows [h(t,0), N_x for x in xs] for trajectories start .. start+n-1."""
    xs = np.asarray(xs, dtype=np.int64)
    if xs.size and (xs.min() < -cfg.window or xs.max() > cfg.window):
        raise DomainError("x outside the simulation window")
    return _run(np.uint64(cfg.seed), start, n, cfg.p, cfg.t, cfg.window, INIT_CODES[cfg.init], cfg.shift, xs)


def simulate_height(cfg: SimConfig, index: int = 0) -> int:
    """h(t, 0) of trajectory ``index``."""
    return int(simulate_batch(cfg, 1, index)[0, 0])


def simulate_halfflat_N(cfg: SimConfig, x: int, index: int = 0) -> int:
    """N_x(t), the number of particles at sites <= x, for trajectory ``index``."""
    if cfg.init == "flat":
        raise DomainError("simulate_halfflat_N needs half-flat initial data")
    return int(simulate_batch(cfg, 1, index, [x])[0, 1])


# ---------------------------------------------------------------- expectations

@dataclass(frozen=True)
class Observable:
    """kind: 'tau_pow_m_halfheight' (m), 'tau_pow_m_N' (m, x) or 'exp_tau_gen' (zeta, xi).

    For 'exp_tau_gen' xi defaults to tau^(1/4), the symmetric exp_tau.
    """
    kind: str
    m: int = 0
    x: int = 0
    zeta: complex = 0.0
    xi: complex | None = None

    def __post_init__(self):
        if self.kind not in ("tau_pow_m_halfheight", "tau_pow_m_N", "exp_tau_gen"):
            raise DomainError(f"unknown observable {self.kind!r}")


@dataclass(frozen=True)
class SimEnsemble:
    samples: int
    mean: complex
    stderr: float
    observable: Observable
    config: SimConfig
    extra: dict = field(default_factory=dict)


def _apply(obs: Observable, rows: np.ndarray, xs: list, tau: float) -> np.ndarray:
    if obs.kind == "tau_pow_m_halfheight":
        return tau ** (obs.m * (rows[:, 0] // 2)).astype(float)
    if obs.kind == "tau_pow_m_N":
        col = 1 + xs.index(obs.x)
        return tau ** (obs.m * rows[:, col]).astype(float)
    xi = tau ** 0.25 if obs.xi is None else obs.xi
    half = rows[:, 0] // 2
    vals, inv = np.unique(half, return_inverse=True)
    table = np.array([qexp(obs.zeta * tau ** float(v), tau, xi) for v in vals], dtype=complex)
    return table[inv]


def mc_expectations(observables, cfg: SimConfig, samples: int, workers: int = 1) -> list[SimEnsemble]:
    """Sample means of several observables from one set of trajectories."""
    observables = list(observables)
    if samples < 1:
        raise DomainError("need at least one sample")
    tau = cfg.tau
    if cfg.p == 0.0 and any(o.kind == "exp_tau_gen" for o in observables):
        raise DomainError("exp_tau needs tau > 0")
    for o in observables:
        if o.kind == "exp_tau_gen":
            xi = tau ** 0.25 if o.xi is None else o.xi
            if abs(xi - tau ** 0.25) < 1e-15 and abs(o.zeta) >= tau ** 0.25:
                raise DomainError("|zeta| must be below tau^(1/4)")
        if o.kind != "tau_pow_m_halfheight" and o.kind != "exp_tau_gen" and cfg.init == "flat":
            raise DomainError("tau_pow_m_N needs half-flat initial data")
    xs = sorted({o.x for o in observables if o.kind == "tau_pow_m_N"})
    chunks = [(s, min(CHUNK, samples - s)) for s in range(0, samples, CHUNK)]

    def work(ch):
        rows = simulate_batch(cfg, ch[1], ch[0], xs)
        res = []
        for o in observables:
            f = _apply(o, rows, xs, tau)
            res.append((complex(np.sum(f)), float(np.sum(np.abs(f) ** 2))))
        return res

    if workers <= 1:
        parts = [work(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, chunks))
    out = []
    for i, o in enumerate(observables):
        s1 = sum(p[i][0] for p in parts)
        s2 = sum(p[i][1] for p in parts)
        mean = s1 / samples
        var = max(s2 / samples - abs(mean) ** 2, 0.0) * samples / max(samples - 1, 1)
        out.append(SimEnsemble(samples, mean, math.sqrt(var / samples), o, cfg))
    return out


def mc_expectation(observable: Observable, cfg: SimConfig, samples: int, workers: int = 1) -> SimEnsemble:
    """Sample mean and standard error of one observable."""
    if observable.kind != "exp_tau_gen" and observable.m == 0:
        return SimEnsemble(samples, 1.0 + 0j, 0.0, observable, cfg)
    return mc_expectations([observable], cfg, samples, workers)[0]


# ---------------------------------------------------------------- exact oracle

def flux_distribution(p: float, t: float, ring_size: int, init: str = "flat") -> dict:
    """Exact law of the net leftward flux across bond (0,1) on a ring.

    The chain on (configuration, flux) is restricted to the particle-number
    sector of the initial state; |flux| is capped at ring_size. The
    distribution at time t comes from a sparse matrix exponential action.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import expm_multiply

    R = ring_size
    if R > 14 or R < 4 or R % 2:
        raise DomainError("ring_size must be even and between 4 and 14")
    if t > R / 8 + 1e-12:
        raise DomainError("t must not exceed ring_size/8")
    if init != "flat":
        raise DomainError("the ring oracle supports flat data only")
    q = 1.0 - p
    n_part = R // 2
    configs = [c for c in range(1 << R) if bin(c).count("1") == n_part]
    cidx = {c: i for i, c in enumerate(configs)}
    F = 2 * R + 1
    nst = len(configs) * F
    rows, cols, vals = [], [], []
    for c in configs:
        for fl in range(-R, R + 1):
            s = cidx[c] * F + fl + R
            out = 0.0
            for b in range(R):
                b1 = (b + 1) % R
                o0, o1 = (c >> b) & 1, (c >> b1) & 1
                if o0 == o1:
                    continue
                rate = p if o0 == 1 else q
                if rate == 0.0:
                    continue
                nc = c ^ (1 << b) ^ (1 << b1)
                nf = fl
                if b == 0:
                    nf = fl - 1 if o0 == 1 else fl + 1
                if abs(nf) > R:
                    continue
                rows.append(cidx[nc] * F + nf + R)
                cols.append(s)
                vals.append(rate)
                out += rate
            rows.append(s)
            cols.append(s)
            vals.append(-out)
    G = csr_matrix((vals, (rows, cols)), shape=(nst, nst))
    start = sum(1 << i for i in range(0, R, 2))
    p0 = np.zeros(nst)
    p0[cidx[start] * F + R] = 1.0
    pt = expm_multiply(G * t, p0) if t > 0 else p0
    pt = pt.reshape(len(configs), F).sum(axis=0)
    return {fl: float(pt[fl + R]) for fl in range(-R, R + 1)}


def exact_ring_oracle(p: float, t: float, ring_size: int, m: int = 1) -> float:
    """E[tau^{m h(t,0)/2}] on a ring, exactly (up to the flux cap)."""
    tau = p / (1.0 - p)
    dist = flux_distribution(p, t, ring_size)
    return float(sum(pr * tau ** (m * fl) for fl, pr in dist.items() if pr != 0.0))

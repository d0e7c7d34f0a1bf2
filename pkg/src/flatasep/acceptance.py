"""End-to-end acceptance checks, shared by the test suite and ``flatasep selftest``.

Each check returns ``(ok, detail)``; ``detail`` is a short human-readable
summary of the worst observed discrepancy.
"""
from __future__ import annotations

import math

import numpy as np

TAU = 0.5
MC_SAMPLES = 1_000_000
SEED = 20240611


def _fmt(x) -> str:
    return f"{x:.3g}"


def crit_moment_mc(workers: int = 1):
    from .asepsim import Observable, SimConfig, mc_expectations
    from .flatmoments import moment_flat

    worst_z, worst_rel, ok = 0.0, 0.0, True
    for t in (0.5, 1.0):
        cfg = SimConfig.from_tau(TAU, t, seed=SEED)
        ens = mc_expectations([Observable("tau_pow_m_halfheight", m=m) for m in (1, 2, 3)],
                              cfg, MC_SAMPLES, workers)
        for m, e in zip((1, 2, 3), ens):
            val, err = moment_flat(m, t, TAU, with_error=True)
            z = abs(val - e.mean.real) / e.stderr
            rel = err / abs(val)
            worst_z, worst_rel = max(worst_z, z), max(worst_rel, rel)
            ok &= z < 3.0 and rel < 1e-4
    return ok, f"max |z| = {_fmt(worst_z)}, max rel. error estimate = {_fmt(worst_rel)}"


def crit_nu_vs_pf(workers: int = 1):
    from .flatmoments import moment_flat, moment_nu

    worst = 0.0
    for t in (0.5, 1.0):
        for m in (1, 2):
            a = moment_nu(m, t, TAU)
            b = moment_flat(m, t, TAU)
            worst = max(worst, abs(a - b) / abs(b))
    return worst < 1e-6, f"max rel. diff = {_fmt(worst)}"


def crit_halfflat_mc(workers: int = 1):
    from .asepsim import Observable, SimConfig, mc_expectations
    from .flatmoments import moment_halfflat

    cfg = SimConfig.from_tau(TAU, 1.0, init="halfflat", seed=SEED + 1)
    keys = [(m, x) for m in (1, 2) for x in (0, 2)]
    ens = mc_expectations([Observable("tau_pow_m_N", m=m, x=x) for m, x in keys], cfg, MC_SAMPLES, workers)
    worst = 0.0
    for (m, x), e in zip(keys, ens):
        worst = max(worst, abs(moment_halfflat(m, 1.0, x, TAU) - e.mean.real) / e.stderr)
    return worst < 3.0, f"max |z| = {_fmt(worst)}"


def crit_genfunc(workers: int = 1):
    from .asepsim import Observable, SimConfig, mc_expectation
    from .genfunc import GenFuncParams, exptau_transform

    params = GenFuncParams(zeta=-0.5, tau=TAU, t=1.0)
    ms = exptau_transform(params, "moment_series").real
    fp = exptau_transform(params, "fredholm_pf").real
    rel = abs(ms - fp) / abs(fp)
    e = mc_expectation(Observable("exp_tau_gen", zeta=-0.5), SimConfig.from_tau(TAU, 1.0, seed=SEED + 2),
                       MC_SAMPLES, workers)
    z1 = abs(ms - e.mean.real) / e.stderr
    z2 = abs(fp - e.mean.real) / e.stderr
    ok = rel < 1e-4 and z1 < 3.0 and z2 < 3.0
    return ok, f"series {ms:.8f}, Pfaffian {fp:.8f} (rel {_fmt(rel)}), MC z = {_fmt(max(z1, z2))}"


def crit_kernel_routes(workers: int = 1):
    from .genfunc import GenFuncParams, wtK_block

    params = GenFuncParams(zeta=-0.5, tau=TAU, t=1.0)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(5):
        l1, l2 = rng.uniform(0.05, 4.0, size=2)
        a = wtK_block(l1, l2, params, "series")
        b = wtK_block(l1, l2, params, "laplace")
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst < 1e-5, f"max entrywise diff = {_fmt(worst)}"


def crit_goe(workers: int = 1):
    from .goe import fgoe_det, fgoe_pf

    worst, drift = 0.0, 0.0
    for r in (-4, -2, -1, 0, 1, 2, 4):
        d = fgoe_det(r)
        worst = max(worst, abs(fgoe_pf(r) - d))
        drift = max(drift, abs(fgoe_det(r, n_nodes=96) - d))
    return worst < 5e-4 and drift < 1e-8, f"max |pf - det| = {_fmt(worst)}, det drift 48->96 = {_fmt(drift)}"


IDENTITY_SIZES = {
    "schur": (6,), "schur_nl": (6,), "sign_pf": (2, 4), "block": (6, 8), "diag_scale": (8,),
    "congruence": (6, 7), "rank2_det": (6,), "resum": (4,), "andreief_pf": (4,), "fin_fredpf": (8,),
    "pf_det_conj": (8,), "pf_sympl": (8,),
}


def crit_identities(workers: int = 1):
    from .skewlin import IDENTITY_TAGS, identity_check

    ok, worst, name_worst = True, 0.0, ""
    for name in IDENTITY_TAGS:
        for size in IDENTITY_SIZES[name]:
            rep = identity_check(name, size, trials=50, seed=7)
            bad = rep.residual != 0.0 if name == "sign_pf" else rep.residual >= 1e-9
            ok &= not bad
            if rep.residual >= worst:
                worst, name_worst = rep.residual, f"{name}[{size}]"
    return ok, f"{len(IDENTITY_TAGS)} identities, worst residual {_fmt(worst)} ({name_worst})"


def crit_she(workers: int = 1):
    from .bosegas import she_moment_flat, volterra_oracle

    d1, d2 = 0.0, 0.0
    for t in (0.5, 1.0):
        d1 = max(d1, abs(she_moment_flat(1, t) - 1.0))
        d2 = max(d2, abs(she_moment_flat(2, t) - volterra_oracle(t)))
    return d1 < 1e-6 and d2 < 1e-4, f"|m=1 - 1| = {_fmt(d1)}, |m=2 - Volterra| = {_fmt(d2)}"


def crit_qcalc(workers: int = 1):
    from .qcalc import exp_sym_via_factorial, exp_tau_sym, qpoch

    sym = 0.0
    for q in (0.3, 0.5, 0.8):
        for x in np.linspace(-5.0, 2.0, 15):
            a = exp_tau_sym(x, q)
            b = exp_sym_via_factorial(x, 1.0 / q)
            sym = max(sym, abs(a - b) / abs(a)) if np.isfinite(b) else math.inf
    rng = np.random.default_rng(SEED)
    diff = 0.0
    for _ in range(20):
        q = rng.uniform(0.2, 0.9)
        z = complex(*rng.uniform(-2.0, 2.0, size=2))
        sq = math.sqrt(q)
        lhs = (exp_tau_sym(sq * z, q) - exp_tau_sym(z / sq, q)) / (sq * z - z / sq)
        f = exp_tau_sym(z, q)
        diff = max(diff, abs(lhs - f) / abs(f))
    rec = 0.0
    for a in (0.3, -0.7, 0.5 + 0.4j):
        for q in (0.4, 0.9):
            for n in range(30):
                lhs = qpoch(a, q, n + 1)
                rec = max(rec, abs(lhs - qpoch(a, q, n) * (1 - a * q ** n)) / abs(lhs))
    ok = bool(sym < 1e-10 and diff < 1e-9 and rec < 1e-13)
    return ok, f"symmetry {_fmt(sym)}, q-difference {_fmt(diff)}, recurrence {_fmt(rec)}"


def crit_reproducible(workers: int = 1):
    from .asepsim import Observable, SimConfig, mc_expectations

    obs = [Observable("tau_pow_m_halfheight", m=1), Observable("exp_tau_gen", zeta=-0.5)]
    ok = True
    for init in ("flat", "halfflat"):
        cfg = SimConfig.from_tau(TAU, 1.0, init=init, seed=SEED + 3)
        if init == "halfflat":
            obs = obs[:1] + [Observable("tau_pow_m_N", m=1, x=2)]
        one = mc_expectations(obs, cfg, 50_000, workers=1)
        four = mc_expectations(obs, cfg, 50_000, workers=4)
        ok &= all(a.mean == b.mean and a.stderr == b.stderr for a, b in zip(one, four))
    return ok, "bit-identical" if ok else "results differ between 1 and 4 workers"


CRITERIA = [
    (1, "flat moments vs Monte Carlo", crit_moment_mc),
    (2, "nu-form vs Pfaffian form", crit_nu_vs_pf),
    (3, "half-flat moments vs Monte Carlo", crit_halfflat_mc),
    (4, "generating function, three routes", crit_genfunc),
    (5, "kernel route agreement", crit_kernel_routes),
    (6, "GOE Pfaffian vs determinant", crit_goe),
    (7, "Pfaffian identity catalog", crit_identities),
    (8, "SHE flat moments", crit_she),
    (9, "q-calculus suite", crit_qcalc),
    (10, "Monte Carlo reproducibility", crit_reproducible),
]


def run_criterion(num: int, workers: int = 1):
    """Run criterion ``num`` and return (passed, detail)."""
    for n, _, fn in CRITERIA:
        if n == num:
            return fn(workers)
    raise KeyError(num)

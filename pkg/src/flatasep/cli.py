"""Command-line interface: ``flatasep <command> [options]``.

Every command prints one result (JSON with ``--json``) and exits 0; domain
errors exit 2 and truncation or budget failures exit 3.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import click

from . import DomainError, TruncationError

EXIT_DOMAIN = 2
EXIT_TRUNCATION = 3


@dataclass
class RunResult:
    command: str
    params: dict = field(default_factory=dict)
    value: complex = 0j
    error_estimate: float = 0.0
    stderr_mc: float | None = None
    runtime_ms: int = 0
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "value": {"re": float(self.value.real), "im": float(self.value.imag)},
            "error_estimate": float(self.error_estimate),
            "stderr": None if self.stderr_mc is None else float(self.stderr_mc),
            "runtime_ms": int(self.runtime_ms),
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunResult":
        d = json.loads(text)
        return cls(command=d["command"], params=d["params"],
                   value=complex(d["value"]["re"], d["value"]["im"]),
                   error_estimate=d["error_estimate"], stderr_mc=d["stderr"],
                   runtime_ms=d["runtime_ms"], seed=d["seed"])

    def to_text(self) -> str:
        v = self.value
        s = f"{self.command}: {v.real:.12g}" + (f" {v.imag:+.3g}i" if abs(v.imag) > 1e-14 else "")
        s += f"  (error {self.error_estimate:.3g}"
        if self.stderr_mc is not None:
            s += f", stderr {self.stderr_mc:.3g}"
        return s + f", {self.runtime_ms} ms)"


def parse_complex(text: str) -> complex:
    """'re,im' or a plain real number."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise click.BadParameter(f"expected 're,im', got {text!r}")


def parse_grid(text: str):
    """'name=lo:hi:step' -> (name, [values]) with hi included."""
    name, _, rng = text.partition("=")
    lo, hi, step = (float(v) for v in rng.split(":"))
    if step <= 0:
        raise click.BadParameter("grid step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return name.strip(), [lo + i * step for i in range(n)]


def resolve_tau(tau, p) -> float:
    if tau is not None and p is not None:
        raise DomainError("--tau and --p are mutually exclusive")
    if tau is None and p is None:
        return 0.5
    if p is not None:
        if not 0.0 < p < 0.5:
            raise DomainError("p must lie in (0, 1/2)")
        return p / (1.0 - p)
    return float(tau)


def _emit(ctx, results, csv_rows=None):
    opts = ctx.obj
    if csv_rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["command", "param", "value_re", "value_im", "error_estimate", "stderr", "runtime_ms", "seed"])
        for key, r in csv_rows:
            d = r.to_dict()
            w.writerow([d["command"], key, d["value"]["re"], d["value"]["im"], d["error_estimate"],
                        d["stderr"], d["runtime_ms"], d["seed"]])
        text = buf.getvalue().rstrip("\n")
    elif opts["json"]:
        text = "\n".join(r.to_json() for r in results)
    else:
        text = "\n".join(r.to_text() for r in results)
    if opts["out"]:
        with open(opts["out"], "w") as fh:
            fh.write(text + "\n")
    click.echo(text)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, int(round((time.perf_counter() - t0) * 1000))


def _check_tol(err, tol):
    if tol is not None and err > tol:
        raise TruncationError(f"error estimate {err:.3g} exceeds tolerance {tol:.3g}")


tau_options = [
    click.option("--tau", type=float, default=None, help="asymmetry tau = p/q (default 0.5)"),
    click.option("--p", "p", type=float, default=None, help="left jump rate p; tau = p/(1-p)"),
]


def with_tau(f):
    for opt in reversed(tau_options):
        f = opt(f)
    return f


@click.group()
@click.option("--json", "as_json", is_flag=True, help="machine-readable output on stdout")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="also write the output to FILE")
@click.pass_context
def main(ctx, as_json, out):
    """Moment formulas and Fredholm Pfaffians for flat ASEP and the SHE."""
    ctx.obj = {"json": as_json, "out": out}


@main.command()
@click.option("--m", type=int, required=True)
@click.option("--t", type=float, default=1.0, help="physical time")
@with_tau
@click.option("--method", type=click.Choice(["pfaffian", "nu"]), default="pfaffian")
@click.option("--nodes", type=int, default=128, help="circle nodes")
@click.option("--tol", type=float, default=None, help="fail with exit 3 above this error estimate")
@click.pass_context
def moments(ctx, m, t, tau, p, method, nodes, tol):
    """E[tau^{m h(t,0)/2}] for flat initial data."""
    from .flatmoments import KflatParams, moment_flat, moment_nu

    tau = resolve_tau(tau, p)
    if method == "pfaffian":
        params = KflatParams.build(tau, t, N=nodes) if m > 0 else None
        (val, err), ms = _timed(lambda: moment_flat(m, t, tau, params=params, with_error=True))
    else:
        val, ms = _timed(lambda: moment_nu(m, t, tau, N=nodes))
        err = 0.0 if m == 0 else abs(val - moment_nu(m, t, tau, N=max(8, nodes // 2)))
    _check_tol(err, tol)
    _emit(ctx, [RunResult("moments", {"m": m, "t": t, "tau": tau, "method": method, "nodes": nodes},
                          complex(val), err, None, ms)])


@main.command()
@click.option("--m", type=int, required=True)
@click.option("--x", type=int, default=0)
@click.option("--t", type=float, default=1.0)
@with_tau
@click.option("--nodes", type=int, default=256)
@click.option("--tol", type=float, default=None)
@click.pass_context
def halfflat(ctx, m, x, t, tau, p, nodes, tol):
    """E[tau^{m N_x(t)}] for half-flat initial data."""
    from .flatmoments import moment_halfflat

    tau = resolve_tau(tau, p)
    if not 0 <= m <= 4:
        raise DomainError("halfflat supports 0 <= m <= 4")
    val, ms = _timed(lambda: moment_halfflat(m, t, x, tau, N=nodes))
    err = abs(val - moment_halfflat(m, t, x, tau, N=max(16, nodes // 2)))
    _check_tol(err, tol)
    _emit(ctx, [RunResult("halfflat", {"m": m, "x": x, "t": t, "tau": tau, "nodes": nodes}, complex(val), err, None, ms)])


@main.command()
@click.option("--m", type=int, default=1)
@click.option("--t", type=float, default=1.0)
@with_tau
@click.option("--init", type=click.Choice(["flat", "halfflat"]), default="flat")
@click.option("--x", type=int, default=None, help="half-flat: observe tau^{m N_x}")
@click.option("--zeta", type=str, default=None, help="observe exp_tau(zeta tau^{h/2}; xi) instead ('re,im')")
@click.option("--xi", type=str, default=None, help="xi for --zeta (default tau^(1/4))")
@click.option("--samples", type=int, default=100000)
@click.option("--seed", type=int, default=0)
@click.option("--workers", type=int, default=None)
@click.pass_context
def simulate(ctx, m, t, tau, p, init, x, zeta, xi, samples, seed, workers):
    """Monte Carlo estimate of one observable."""
    from .asepsim import Observable, SimConfig, mc_expectation

    tau = resolve_tau(tau, p)
    workers = workers or os.cpu_count() or 1
    cfg = SimConfig.from_tau(tau, t, init=init, seed=seed)
    if zeta is not None:
        obs = Observable("exp_tau_gen", zeta=parse_complex(zeta), xi=None if xi is None else parse_complex(xi))
    elif x is not None:
        obs = Observable("tau_pow_m_N", m=m, x=x)
    else:
        obs = Observable("tau_pow_m_halfheight", m=m)
    ens, ms = _timed(lambda: mc_expectation(obs, cfg, samples, workers))
    params = {"m": m, "t": t, "tau": tau, "init": init, "x": x, "zeta": zeta, "xi": xi, "samples": samples}
    _emit(ctx, [RunResult("simulate", params, complex(ens.mean), 0.0, ens.stderr, ms, seed)])


@main.command()
@click.option("--zeta", type=str, default="-0.5")
@click.option("--xi", type=str, default=None, help="default tau^(1/4)")
@click.option("--t", type=float, default=1.0)
@with_tau
@click.option("--method", type=click.Choice(["moment_series", "fredholm_pf", "both"]), default="moment_series")
@click.option("--kernel", type=str, default=None, help="'l1,l2': print the kernel block entries instead")
@click.option("--route", type=click.Choice(["series", "laplace"]), default="series")
@click.option("--nodes", type=int, default=128, help="circle nodes")
@click.option("--tol", type=float, default=1e-6)
@click.pass_context
def genfunc(ctx, zeta, xi, t, tau, p, method, kernel, route, nodes, tol):
    """E[exp_tau(zeta tau^{h/2}; xi)] for flat data, or one kernel block."""
    from .genfunc import GenFuncParams, exptau_transform, wtK_block

    tau = resolve_tau(tau, p)
    gp = GenFuncParams(zeta=parse_complex(zeta), tau=tau, t=t, xi=None if xi is None else parse_complex(xi),
                       circle_N=nodes)
    base = {"zeta": zeta, "xi": xi, "t": t, "tau": tau, "nodes": nodes}
    if kernel is not None:
        l1, l2 = (float(v) for v in kernel.split(","))
        blk, ms = _timed(lambda: wtK_block(l1, l2, gp, route=route))
        out = [RunResult("genfunc", {**base, "entry": e, "route": route, "l1": l1, "l2": l2}, complex(blk[i, j]), 0.0, None, ms)
               for e, (i, j) in (("K11", (0, 0)), ("K12", (0, 1)), ("K21", (1, 0)), ("K22", (1, 1)))]
        _emit(ctx, out)
        return
    methods = ["moment_series", "fredholm_pf"] if method == "both" else [method]
    out = []
    for meth in methods:
        (val, err), ms = _timed(lambda: exptau_transform(gp, method=meth, tol=tol, with_error=True))
        _check_tol(err / max(abs(val), 1e-300), tol if meth == "moment_series" else 1e-4)
        out.append(RunResult("genfunc", {**base, "method": meth}, complex(val), err, None, ms))
    _emit(ctx, out)


@main.command()
@click.option("--r", type=float, default=0.0)
@click.option("--method", type=click.Choice(["pf", "det", "both"]), default="both")
@click.option("--nodes", type=int, default=None, help="Nystrom nodes (default 160 for pf, 48 for det)")
@click.option("--grid", type=str, default=None, help="sweep r, e.g. 'r=-4:4:0.5' (CSV output)")
@click.option("--variant", type=click.Choice(["corrected", "printed"]), default="corrected")
@click.pass_context
def goe(ctx, r, method, nodes, grid, variant):
    """GOE Tracy-Widom F(r) as pf[J - K_r] and as det(I - B_r)."""
    from .goe import fgoe_det, fgoe_pf

    def one(rv):
        res = []
        if method in ("pf", "both"):
            val, ms = _timed(lambda: fgoe_pf(rv, n_nodes=nodes or 160, variant=variant))
            half = fgoe_pf(rv, n_nodes=max(16, (nodes or 160) // 2), variant=variant)
            # O(n^-2) convergence: the halved run overestimates the error by about 4x
            res.append(RunResult("goe", {"r": rv, "method": "pf", "variant": variant}, complex(val),
                                 abs(val - half) / 3, None, ms))
        if method in ("det", "both"):
            val, ms = _timed(lambda: fgoe_det(rv, n_nodes=nodes or 48))
            dbl = fgoe_det(rv, n_nodes=2 * (nodes or 48))
            res.append(RunResult("goe", {"r": rv, "method": "det"}, complex(val), abs(val - dbl), None, ms))
        return res

    if grid is not None:
        name, values = parse_grid(grid)
        if name != "r":
            raise DomainError("goe grids sweep r only")
        rows = [(f"r={rv:g}", res) for rv in values for res in one(rv)]
        _emit(ctx, [res for _, res in rows], csv_rows=rows)
        return
    _emit(ctx, one(r))


@main.command()
@click.option("--m", type=int, default=2)
@click.option("--t", type=float, default=1.0)
@click.option("--init", type=click.Choice(["flat", "halfflat"]), default="flat")
@click.option("--theta", type=float, default=0.0)
@click.option("--x", type=float, default=0.0)
@click.option("--variant", type=click.Choice(["corrected", "printed"]), default="corrected")
@click.option("--nodes", type=int, default=None)
@click.pass_context
def bosegas(ctx, m, t, init, theta, x, variant, nodes):
    """Moments E[Z(t, x)^m] of the stochastic heat equation."""
    from .bosegas import SheParams, she_moment_flat, she_moment_halfflat

    params = {"m": m, "t": t, "init": init, "variant": variant}
    if init == "flat":
        n_y = nodes or 600
        val, ms = _timed(lambda: she_moment_flat(m, t, variant=variant, n_y=n_y))
        err = abs(val - she_moment_flat(m, t, variant=variant, per_panel=8, n_y=n_y // 2)) if m > 0 else 0.0
    else:
        sp = SheParams(t=t, theta=theta, x=x, n_u=nodes or 481)
        val, ms = _timed(lambda: she_moment_halfflat(m, sp))
        err = abs(val - she_moment_halfflat(m, SheParams(t=t, theta=theta, x=x, n_u=(sp.n_u + 1) // 2)))
        params.update(theta=theta, x=x)
    _emit(ctx, [RunResult("bosegas", params, complex(val), err, None, ms)])


@main.command()
@click.option("--name", type=str, default="all")
@click.option("--size", type=int, default=None, help="default: the catalog size")
@click.option("--trials", type=int, default=20)
@click.option("--seed", type=int, default=0)
@click.pass_context
def identities(ctx, name, size, trials, seed):
    """Residuals of the Pfaffian identity catalog."""
    from .skewlin import IDENTITY_TAGS, _CATALOG, identity_check

    names = IDENTITY_TAGS if name == "all" else (name,)
    out = []
    for nm in names:
        if nm not in _CATALOG:
            raise DomainError(f"unknown identity {nm!r}")
        sz = size or _CATALOG[nm][1]
        if nm == "sign_pf" and size is None:
            sz = 4
        rep, ms = _timed(lambda: identity_check(nm, sz, trials=trials, seed=seed))
        out.append(RunResult("identities", {"name": nm, "size": sz, "trials": rep.trials}, complex(rep.residual),
                             rep.residual, None, ms, seed))
    _emit(ctx, out)


@main.command()
@click.option("--only", type=str, default=None, help="comma-separated criterion numbers")
@click.option("--workers", type=int, default=None)
@click.pass_context
def selftest(ctx, only, workers):
    """Run the acceptance criteria and print a pass/fail table."""
    from .acceptance import CRITERIA, run_criterion

    ids = None if only is None else {int(v) for v in only.split(",")}
    workers = workers or os.cpu_count() or 1
    failed = 0
    results = []
    for num, title, _ in CRITERIA:
        if ids is not None and num not in ids:
            continue
        (ok, detail), ms = _timed(lambda: run_criterion(num, workers=workers))
        failed += not ok
        results.append(RunResult("selftest", {"criterion": num, "title": title, "passed": ok, "detail": detail},
                                 complex(float(ok)), 0.0, None, ms))
        if not ctx.obj["json"]:
            click.echo(f"[{'PASS' if ok else 'FAIL'}] {num:2d} {title}: {detail} ({ms} ms)")
    if ctx.obj["json"]:
        _emit(ctx, results)
    if failed:
        ctx.exit(1)


def run(argv=None) -> int:
    """Entry point returning the exit code (0 ok, 2 domain error, 3 truncation)."""
    try:
        main.main(args=argv, standalone_mode=False)
    except DomainError as e:
        click.echo(f"domain error: {e}", err=True)
        return EXIT_DOMAIN
    except TruncationError as e:
        click.echo(f"truncation error: {e}", err=True)
        return EXIT_TRUNCATION
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    return 0


def entry():
    sys.exit(run())

#!/usr/bin/env python3
"""Flat ASEP moments E[tau^{m h(t,0)/2}] from both formulas, with an optional Monte Carlo column."""
import argparse

from flatasep.asepsim import Observable, SimConfig, mc_expectations
from flatasep.flatmoments import moment_flat, moment_nu


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau", type=float, default=0.5)
    ap.add_argument("--times", type=float, nargs="+", default=[0.5, 1.0])
    ap.add_argument("--mmax", type=int, default=3)
    ap.add_argument("--samples", type=int, default=0, help="Monte Carlo samples (0 skips MC)")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    ms = list(range(1, args.mmax + 1))
    for t in args.times:
        mc = None
        if args.samples:
            cfg = SimConfig.from_tau(args.tau, t, seed=args.seed)
            mc = mc_expectations([Observable("tau_pow_m_halfheight", m=m) for m in ms], cfg, args.samples)
        print(f"t = {t}")
        for i, m in enumerate(ms):
            val, err = moment_flat(m, t, args.tau, with_error=True)
            line = f"  m={m}  pfaffian {val:.10f} (+-{err:.1e})  nu-form {moment_nu(m, t, args.tau):.10f}"
            if mc is not None:
                line += f"  MC {mc[i].mean.real:.6f} +- {mc[i].stderr:.6f}"
            print(line)


if __name__ == "__main__":
    main()

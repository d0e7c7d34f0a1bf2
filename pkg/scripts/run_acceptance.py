#!/usr/bin/env python3
"""Run the acceptance criteria and print one line per criterion.

Usage: python scripts/run_acceptance.py [--only 1,6,7] [--workers N]
Exit status is the number of failed criteria (capped at 1).
"""
import argparse
import sys
import time

from flatasep.acceptance import CRITERIA, run_criterion


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", default=None, help="comma-separated criterion numbers")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    wanted = None if args.only is None else {int(v) for v in args.only.split(",")}

    failed = 0
    for num, title, _ in CRITERIA:
        if wanted is not None and num not in wanted:
            continue
        t0 = time.perf_counter()
        ok, detail = run_criterion(num, workers=args.workers)
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {num:2d} {title}: {detail} ({time.perf_counter() - t0:.1f} s)", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""SHE moments for flat data against the closed form (m=2) and the nu-bar sum (m=3)."""
import math

from scipy.special import erfc

from flatasep.bosegas import nubar_moment, she_moment_flat

for t in (0.25, 0.5, 1.0, 2.0):
    m2 = she_moment_flat(2, t)
    exact = math.exp(t / 4) * erfc(-math.sqrt(t) / 2)
    m3 = she_moment_flat(3, t)
    print(f"t={t:4}  m1={she_moment_flat(1, t):.12f}  m2={m2:.12f} (diff {abs(m2 - exact):.1e})"
          f"  m3={m3:.10f} (nu-bar {nubar_moment(3, t):.10f})")

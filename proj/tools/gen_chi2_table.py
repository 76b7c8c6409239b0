#!/usr/bin/env python3
"""Regenerates the chi-square critical values embedded in src/stats.cpp.

Upper-tail critical value at alpha = 0.01 for df = 1..64, i.e. the
0.99 quantile of the chi-square distribution (scipy.stats.chi2.ppf).
"""
from scipy.stats import chi2

ALPHA = 0.01

for start in range(1, 65, 4):
    row = ", ".join(f"{chi2.ppf(1 - ALPHA, df):.6f}" for df in range(start, start + 4))
    print(f"    {row},")

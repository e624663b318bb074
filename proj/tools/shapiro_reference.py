#!/usr/bin/env python3
# Project molshift - Copyright 2026 The molshift Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes tests/data/shapiro_reference.csv with scipy.stats.shapiro results.

Samples come from a splitmix64 stream that the C++ tests reproduce exactly
(see tests/unit/sample_stream.hpp), so only (kind, n, seed) is stored.
"""

import math
import pathlib
import sys

import scipy
from scipy import stats

MASK = (1 << 64) - 1


class Stream:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        return ((self.next_u64() >> 11) + 0.5) * 2.0**-53

    def normal(self):
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def draw(kind, n, seed):
    s = Stream(seed)
    if kind == "normal":
        return [s.normal() for _ in range(n)]
    if kind == "uniform":
        return [s.uniform() for _ in range(n)]
    if kind == "exponential":
        return [-math.log(s.uniform()) for _ in range(n)]
    if kind == "lognormal":
        return [math.exp(0.5 * s.normal()) for _ in range(n)]
    if kind == "rounded":
        return [math.floor(s.normal() * 10.0 + 0.5) / 10.0 for _ in range(n)]
    raise ValueError(kind)


KINDS = ["normal", "uniform", "exponential", "lognormal", "rounded"]
SIZES = [10, 50, 500, 5000]


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/shapiro_reference.csv")
    rows = ["kind,n,seed,w,p"]
    for n in SIZES:
        for i, kind in enumerate(KINDS):
            seed = 1000 * n + i
            res = stats.shapiro(draw(kind, n, seed))
            rows.append(f"{kind},{n},{seed},{float(res.statistic)!r},{float(res.pvalue)!r}")
    out.write_text("# scipy " + scipy.__version__ + "\n" + "\n".join(rows) + "\n")


if __name__ == "__main__":
    main()

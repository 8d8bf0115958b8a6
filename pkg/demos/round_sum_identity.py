#!/usr/bin/env python3
"""Round-then-accumulate equals accumulate-rounded, distributionally.

For stochastic rounding, applying R after every accumulation step gives
exactly the same outcome distribution as summing individually rounded
terms. This script enumerates both distributions with exact rational
probabilities for a three-term example and prints them side by side, then
confirms the identity on random dyadic inputs.
"""

import math
from fractions import Fraction

import numpy as np

from fxsim import RoundingMode

M = RoundingMode
DELTA = Fraction(1, 4)


def p_down(x, mode):
    frac = x / DELTA - math.floor(x / DELTA)
    return 1 - frac if mode is M.CSR else Fraction(1, 2)


def round_dist(x, mode):
    lo = math.floor(x / DELTA) * DELTA
    p = p_down(x, mode)
    return {v: q for v, q in ((lo, p), (lo + DELTA, 1 - p)) if q > 0}


def sequential(xs, mode):
    dist = round_dist(xs[0], mode)
    for x in xs[1:]:
        nxt = {}
        for v, p in dist.items():
            for r, q in round_dist(v + x, mode).items():
                nxt[r] = nxt.get(r, Fraction(0)) + p * q
        dist = nxt
    return dist


def sum_of_rounded(xs, mode):
    dist = {Fraction(0): Fraction(1)}
    for x in xs:
        nxt = {}
        for v, p in dist.items():
            for r, q in round_dist(x, mode).items():
                nxt[v + r] = nxt.get(v + r, Fraction(0)) + p * q
        dist = nxt
    return dist


xs = [Fraction(3, 8), Fraction(1, 8), Fraction(5, 8)]
print(f"terms: {[str(x) for x in xs]}, delta = {DELTA}\n")
for mode in (M.CSR, M.RR):
    lhs, rhs = sequential(xs, mode), sum_of_rounded(xs, mode)
    print(f"{mode.value}: sequential R(R(R(x1)+x2)+x3)  vs  R(x1)+R(x2)+R(x3)")
    for v in sorted(set(lhs) | set(rhs)):
        print(f"   {str(v):>6}:  {str(lhs.get(v, 0)):>8}  vs  {str(rhs.get(v, 0)):>8}")
    assert lhs == rhs
    print("   identical, exactly.\n")

rng = np.random.default_rng(0)
checked = 0
for _ in range(200):
    xs = [Fraction(int(rng.integers(-64, 65)), 2 ** int(rng.integers(0, 6)))
          for _ in range(3)]
    for mode in (M.CSR, M.RR):
        assert sequential(xs, mode) == sum_of_rounded(xs, mode)
        checked += 1
print(f"identity confirmed exactly on {checked} random dyadic cases")

"""Exact-enumeration oracle for the round-then-accumulate identity.

Distributions are dicts mapping exact outcome (Fraction) to probability
(Fraction). Down-probabilities follow the rounding scheme definitions
directly, independent of the library kernels they are used to check.
"""

import math
from fractions import Fraction

from fxsim import RoundingMode

M = RoundingMode


def p_down(x: Fraction, delta: Fraction, mode) -> Fraction:
    """Exact probability of rounding x down to its grid floor."""
    scaled = x / delta
    frac = scaled - math.floor(scaled)
    if mode is M.CSR:
        return 1 - frac
    if mode is M.RR:
        return Fraction(1, 2)
    raise ValueError(f"oracle only covers stochastic modes, got {mode}")


def round_dist(x: Fraction, delta: Fraction, mode) -> dict:
    """Distribution of one rounding of x: floor w.p. p, floor+delta w.p. 1-p."""
    lo = math.floor(x / delta) * delta
    p = p_down(x, delta, mode)
    dist = {}
    if p > 0:
        dist[lo] = p
    if p < 1:
        dist[lo + delta] = 1 - p
    return dist


def sequential_dist(xs, delta: Fraction, mode) -> dict:
    """Distribution of R(...R(R(x1) + x2)... + xN), exact."""
    xs = [Fraction(x) for x in xs]
    dist = round_dist(xs[0], delta, mode)
    for x in xs[1:]:
        nxt = {}
        for val, prob in dist.items():
            for r, q in round_dist(val + x, delta, mode).items():
                nxt[r] = nxt.get(r, Fraction(0)) + prob * q
        dist = nxt
    return dist


def sum_of_rounded_dist(xs, delta: Fraction, mode) -> dict:
    """Distribution of R(x1) + R(x2) + ... + R(xN), exact."""
    xs = [Fraction(x) for x in xs]
    dist = {Fraction(0): Fraction(1)}
    for x in xs:
        nxt = {}
        for val, prob in dist.items():
            for r, q in round_dist(x, delta, mode).items():
                nxt[val + r] = nxt.get(val + r, Fraction(0)) + prob * q
        dist = nxt
    return dist


def random_dyadic(rng, depth: int = 6, span: int = 8) -> Fraction:
    """A dyadic rational k / 2**d with |value| < span."""
    d = int(rng.integers(0, depth + 1))
    k = int(rng.integers(-span * 2**d, span * 2**d + 1))
    return Fraction(k, 2**d)

"""The round-then-accumulate distributional identity, checked exhaustively.

Two independent claims are verified with exact rational arithmetic:

1. The mathematical identity itself: rounding after each accumulation step
   has exactly the same outcome distribution as summing individually rounded
   terms, for the two stochastic modes.
2. The library's rounding kernel realizes the enumerated distribution: every
   up/down branch pattern, forced through a scripted uniform stream, lands on
   the enumerated outcome and carries the enumerated probability.
"""

from fractions import Fraction

import numpy as np
import pytest

from fxsim import QFormat, RoundingMode, probability, round_value

from oracle_roundsum import (
    p_down,
    random_dyadic,
    sequential_dist,
    sum_of_rounded_dist,
)

M = RoundingMode


class ScriptedRng:
    """Stand-in for RngStream that replays a fixed list of uniforms."""

    def __init__(self, values):
        self.values = list(values)
        self.draws = 0

    def uniform(self):
        self.draws += 1
        return self.values.pop(0)

    def uniforms(self, shape):
        n = int(np.prod(shape))
        out = np.array([self.uniform() for _ in range(n)]).reshape(shape)
        return out


@pytest.mark.parametrize("mode", [M.CSR, M.RR])
@pytest.mark.parametrize("n_terms", [2, 3])
def test_identity_on_random_dyadic_tuples(mode, n_terms):
    rng = np.random.default_rng(2024)
    delta = Fraction(1, 4)
    for _ in range(25):
        xs = [random_dyadic(rng) for _ in range(n_terms)]
        lhs = sequential_dist(xs, delta, mode)
        rhs = sum_of_rounded_dist(xs, delta, mode)
        assert lhs == rhs  # exact rational equality, zero tolerance


@pytest.mark.parametrize("mode", [M.CSR, M.RR])
def test_library_probability_matches_exact_fraction(mode):
    fmt = QFormat(16, 4)
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = random_dyadic(rng, depth=4, span=4)
        expected = p_down(x, Fraction(1, 16), mode)
        assert probability(mode, float(x), fmt) == float(expected)


@pytest.mark.parametrize("mode", [M.CSR, M.RR])
def test_kernel_branches_realize_enumerated_distribution(mode):
    """Force every branch of a 3-term sequential accumulation through
    round_value and rebuild its distribution from library probabilities."""
    fmt = QFormat(16, 3)
    delta = Fraction(1, 8)
    rng = np.random.default_rng(99)
    for _ in range(10):
        xs = [random_dyadic(rng, depth=3, span=3) for _ in range(3)]
        built = {}
        for pattern in range(8):
            prob = Fraction(1)
            acc = Fraction(0)
            feed = []
            ok = True
            for i, x in enumerate(xs):
                v = acc + x
                p = p_down(v, delta, mode)
                go_up = bool((pattern >> i) & 1)
                if go_up and p == 1:
                    ok = False
                    break
                feed.append(0.999999 if go_up else 0.0)  # u >= p forces up
                prob *= (1 - p) if go_up else p
                lo = (v / delta).__floor__() * delta
                acc = lo + delta if go_up else lo
            if not ok or prob == 0:
                continue
            script = ScriptedRng(feed)
            out = Fraction(0)
            for x in xs:
                out = Fraction(round_value(float(out + x), fmt, mode, script).value)
            assert out == acc  # kernel lands on the enumerated branch outcome
            built[acc] = built.get(acc, Fraction(0)) + prob
        assert built == sequential_dist(xs, delta, mode)

"""Fixed-point number representation and rounding machinery.

A value is stored as an integer mantissa scaled by 2**-frac_bits. Rounding a
real number to the grid works on the scaled value ``xt = x * 2**frac_bits``,
where the grid spacing is 1: the result is ``floor(xt)`` with probability
``p(xt)`` and ``floor(xt) + 1`` otherwise. Deterministic modes are the
degenerate cases p in {0, 1}.

Probability of rounding down, per mode:

* ``FLOOR``:        p = 1
* ``CEIL``:         p = 0, except p = 1 on grid points (grid is preserved)
* ``NEAREST_EVEN``: p = 1 below the midpoint, 0 above, ties keep the even
  mantissa
* ``CSR``:          p = 1 - frac(xt), the unbiased choice
* ``RR``:           p = 0.5 for every input, grid points included
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "RoundingMode",
    "QFormat",
    "FxValue",
    "RngStream",
    "RoundingStats",
    "floor_to_grid",
    "probability",
    "round_value",
    "quantize_array",
    "expected_value",
    "bias",
    "variance_of",
]

# Largest magnitude for which float64 integer arithmetic is exact, with margin.
_FLOAT_EXACT_LIMIT = 2**52


class RoundingMode(Enum):
    FLOOR = "floor"
    CEIL = "ceil"
    NEAREST_EVEN = "rn"
    CSR = "csr"
    RR = "rr"

    @property
    def is_stochastic(self) -> bool:
        return self in (RoundingMode.CSR, RoundingMode.RR)

    @classmethod
    def from_name(cls, name: str) -> "RoundingMode":
        key = name.strip().lower()
        for mode in cls:
            if mode.value == key:
                return mode
        valid = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown rounding mode {name!r} (expected one of: {valid})")


@dataclass(frozen=True)
class QFormat:
    """Signed fixed-point format: ``word_bits`` total bits, ``frac_bits`` fractional.

    The grid spacing is ``delta = 2**-frac_bits``; representable mantissas are
    the two's-complement range of ``word_bits``.
    """

    word_bits: int
    frac_bits: int

    def __post_init__(self):
        if not 2 <= self.word_bits <= 64:
            raise ValueError(f"word_bits must be in [2, 64], got {self.word_bits}")
        if not 0 <= self.frac_bits <= self.word_bits - 1:
            raise ValueError(
                f"frac_bits must be in [0, word_bits-1], got {self.frac_bits}"
            )

    @property
    def delta(self) -> float:
        return 2.0**-self.frac_bits

    @property
    def scale(self) -> int:
        """Scaling factor 2**frac_bits applied before rounding to integers."""
        return 1 << self.frac_bits

    @property
    def min_mantissa(self) -> int:
        return -(1 << (self.word_bits - 1))

    @property
    def max_mantissa(self) -> int:
        return (1 << (self.word_bits - 1)) - 1

    @property
    def min_value(self) -> float:
        return self.min_mantissa * self.delta

    @property
    def max_value(self) -> float:
        return self.max_mantissa * self.delta

    def __str__(self):
        # word.frac labeling: Q16.8 is 16 word bits with 8 fractional bits
        return f"Q{self.word_bits}.{self.frac_bits}"


@dataclass(frozen=True)
class FxValue:
    """A fixed-point scalar: integer mantissa plus its format."""

    mantissa: int
    fmt: QFormat

    def __post_init__(self):
        if not self.fmt.min_mantissa <= self.mantissa <= self.fmt.max_mantissa:
            raise ValueError(
                f"mantissa {self.mantissa} out of range for {self.fmt}"
            )

    @property
    def value(self) -> float:
        return self.mantissa * self.fmt.delta

    def __float__(self):
        return self.value


class RngStream:
    """Deterministic uniform stream backed by PCG64.

    ``(seed, stream_id)`` fully determines the sequence on every platform.
    A stream is single-owner mutable state: callers that need independent
    randomness must create independent streams, not share one.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((self.seed, self.stream_id)))
        )
        self.draws = 0

    def uniform(self) -> float:
        """One u ~ U[0, 1)."""
        self.draws += 1
        return float(self._gen.random())

    def uniforms(self, shape) -> np.ndarray:
        """Array of uniforms, filled in row-major order.

        Consuming an (r, c) block here yields the same values as r*c
        successive calls to :meth:`uniform`.
        """
        out = self._gen.random(shape)
        self.draws += out.size
        return out

    def uniform_range(self, lo: float, hi: float, shape) -> np.ndarray:
        out = self._gen.uniform(lo, hi, shape)
        self.draws += out.size
        return out


@dataclass
class RoundingStats:
    """Accumulators for rounding experiments and overflow accounting."""

    abs_bias_sum: float = 0.0
    zero_count: int = 0
    op_count: int = 0
    saturations: int = 0

    def record_trial(self, abs_bias: float, is_zero: bool):
        self.abs_bias_sum += abs_bias
        self.zero_count += int(is_zero)
        self.op_count += 1

    def merge(self, other: "RoundingStats"):
        self.abs_bias_sum += other.abs_bias_sum
        self.zero_count += other.zero_count
        self.op_count += other.op_count
        self.saturations += other.saturations


def floor_to_grid(x: float, fmt: QFormat) -> float:
    """Largest multiple of delta that is <= x (exact)."""
    return math.floor(x * fmt.scale) * fmt.delta


def probability(mode: RoundingMode, x: float, fmt: QFormat) -> float:
    """Probability of rounding x DOWN to its grid floor."""
    xt = x * fmt.scale
    frac = xt - math.floor(xt)
    if mode is RoundingMode.FLOOR:
        return 1.0
    if mode is RoundingMode.CEIL:
        return 1.0 if frac == 0.0 else 0.0
    if mode is RoundingMode.NEAREST_EVEN:
        if frac < 0.5:
            return 1.0
        if frac > 0.5:
            return 0.0
        return 1.0 if math.floor(xt) % 2 == 0 else 0.0
    if mode is RoundingMode.CSR:
        return 1.0 - frac
    return 0.5  # RR, constant for every x


def _round_scaled(xt: np.ndarray, mode: RoundingMode, rng: RngStream | None):
    """Round scaled values (grid spacing 1) to integers, elementwise.

    Returns an integer-valued float64 array. Stochastic modes consume exactly
    one uniform per element in row-major order; deterministic modes consume
    none.
    """
    q = np.floor(xt)
    frac = xt - q
    if mode is RoundingMode.FLOOR:
        return q
    if mode is RoundingMode.CEIL:
        return q + (frac > 0.0)
    if mode is RoundingMode.NEAREST_EVEN:
        up = frac > 0.5
        tie = frac == 0.5
        if np.any(tie):
            up = up | (tie & (np.mod(q, 2.0) != 0.0))
        return q + up
    if rng is None:
        raise ValueError(f"{mode.value} rounding requires an RngStream")
    u = rng.uniforms(xt.shape)
    if mode is RoundingMode.CSR:
        return q + (u >= 1.0 - frac)
    return q + (u >= 0.5)  # RR


def _round_ratio_float(num: np.ndarray, den: int, mode: RoundingMode,
                       rng: RngStream | None):
    """Round the exact rationals num/den to integers; num integer-valued float64.

    Valid only while |num| and |floor(num/den)| * den stay below 2**52, so
    every intermediate is an exactly represented integer.
    """
    q = np.floor(num / den)
    rem = num - q * den
    # float division can land on the wrong side of an integer boundary
    q += rem >= den
    q -= rem < 0
    rem = num - q * den
    if mode is RoundingMode.FLOOR:
        return q
    if mode is RoundingMode.CEIL:
        return q + (rem > 0)
    if mode is RoundingMode.NEAREST_EVEN:
        up = 2.0 * rem > den
        tie = 2.0 * rem == den
        if np.any(tie):
            up = up | (tie & (np.mod(q, 2.0) != 0.0))
        return q + up
    if rng is None:
        raise ValueError(f"{mode.value} rounding requires an RngStream")
    u = rng.uniforms(num.shape)
    if mode is RoundingMode.CSR:
        return q + (u >= (den - rem) / den)
    return q + (u >= 0.5)  # RR


def _round_ratio_exact(num, den: int, mode: RoundingMode, rng: RngStream | None):
    """Arbitrary-precision variant of :func:`_round_ratio_float`.

    num is an object ndarray of Python ints (any magnitude). Slow path, used
    when the float64 window is too small for the operands.
    """
    flat = num.ravel()
    q = np.empty(flat.shape, dtype=object)
    if mode.is_stochastic:
        if rng is None:
            raise ValueError(f"{mode.value} rounding requires an RngStream")
        u = rng.uniforms(flat.shape)
    for i, n in enumerate(flat):
        lo, rem = divmod(int(n), den)
        if mode is RoundingMode.FLOOR:
            up = False
        elif mode is RoundingMode.CEIL:
            up = rem > 0
        elif mode is RoundingMode.NEAREST_EVEN:
            up = 2 * rem > den or (2 * rem == den and lo % 2 != 0)
        elif mode is RoundingMode.CSR:
            up = u[i] >= (den - rem) / den
        else:
            up = u[i] >= 0.5
        q[i] = lo + int(up)
    return q.reshape(num.shape)


def _saturate(q, fmt: QFormat, stats: RoundingStats | None) -> np.ndarray:
    """Clamp rounded mantissas to the format range, counting violations."""
    if q.dtype == object:
        clipped = np.empty(q.shape, dtype=np.int64)
        sat = 0
        flat_in, flat_out = q.ravel(), clipped.ravel()
        for i, m in enumerate(flat_in):
            if m > fmt.max_mantissa:
                flat_out[i] = fmt.max_mantissa
                sat += 1
            elif m < fmt.min_mantissa:
                flat_out[i] = fmt.min_mantissa
                sat += 1
            else:
                flat_out[i] = m
    else:
        clipped = np.clip(q, fmt.min_mantissa, fmt.max_mantissa)
        sat = int(np.count_nonzero(clipped != q))
        clipped = clipped.astype(np.int64)
    if stats is not None:
        stats.saturations += sat
    return clipped


def quantize_array(x, fmt: QFormat, mode: RoundingMode,
                   rng: RngStream | None = None,
                   stats: RoundingStats | None = None) -> np.ndarray:
    """Quantize a real-valued array to int64 mantissas of fmt.

    Scale by 2**frac_bits, round on the unit grid, saturate. One uniform per
    element for CSR/RR, none for deterministic modes.
    """
    xt = np.asarray(x, dtype=np.float64) * fmt.scale
    return _saturate(_round_scaled(xt, mode, rng), fmt, stats)


def round_value(x: float, fmt: QFormat, mode: RoundingMode,
                rng: RngStream | None = None,
                stats: RoundingStats | None = None) -> FxValue:
    """Round one real number into the format."""
    m = quantize_array(np.array([x]), fmt, mode, rng, stats)
    return FxValue(int(m[0]), fmt)


def expected_value(x: float, fmt: QFormat, mode: RoundingMode) -> float:
    """Analytic mean of the rounding distribution at x (no RNG).

    Computed from the fractional part rather than 1 - probability(), so the
    CSR mean is exactly x in floating point, not x plus an ulp of noise.
    """
    xt = x * fmt.scale
    q = math.floor(xt)
    frac = xt - q
    if mode is RoundingMode.FLOOR:
        up = 0.0
    elif mode is RoundingMode.CEIL:
        up = 0.0 if frac == 0.0 else 1.0
    elif mode is RoundingMode.NEAREST_EVEN:
        if frac != 0.5:
            up = 0.0 if frac < 0.5 else 1.0
        else:
            up = 0.0 if q % 2 == 0 else 1.0
    elif mode is RoundingMode.CSR:
        up = frac
    else:
        up = 0.5  # RR
    return (q + up) * fmt.delta


def bias(x: float, fmt: QFormat, mode: RoundingMode) -> float:
    """Signed rounding bias, mean minus input."""
    return expected_value(x, fmt, mode) - x


def variance_of(p: float, fmt: QFormat) -> float:
    """Variance of a single rounding with down-probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    return fmt.delta**2 * p * (1.0 - p)

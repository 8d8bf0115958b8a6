"""Rounding-aware linear algebra on fixed-point matrices.

Multiply-accumulate chains follow round-after-accumulation semantics: the
dot product of two quantized vectors is summed exactly at the product scale
2**-2f in a wide accumulator, divided exactly, and rounded once. Elementwise
operations compute the exact result and round once per entry.

The fast path runs integer arithmetic in float64, which is exact while every
intermediate stays below 2**52; operands that break that window fall back to
Python integers (exact at any width, much slower).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    QFormat,
    FxValue,
    RngStream,
    RoundingMode,
    RoundingStats,
    quantize_array,
    _FLOAT_EXACT_LIMIT,
    _round_ratio_exact,
    _round_ratio_float,
    _saturate,
)

__all__ = [
    "FxMatrix",
    "WideAccumulator",
    "rounded_dot",
    "rounded_matmul",
    "rounded_sum_mean",
    "rounded_row_mean",
    "rounded_elementwise",
    "exact_elementwise",
    "requantize",
]


@dataclass(frozen=True)
class FxMatrix:
    """Fixed-point matrix: int64 mantissas (row-major) plus a shared format."""

    mantissas: np.ndarray
    fmt: QFormat

    def __post_init__(self):
        m = self.mantissas
        if m.ndim != 2:
            raise ValueError(f"mantissas must be 2-d, got shape {m.shape}")
        if m.dtype != np.int64:
            raise ValueError(f"mantissas must be int64, got {m.dtype}")

    @classmethod
    def from_real(cls, x, fmt: QFormat, mode: RoundingMode,
                  rng: RngStream | None = None,
                  stats: RoundingStats | None = None) -> "FxMatrix":
        """Quantize a real-valued 2-d array into the format."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return cls(quantize_array(x, fmt, mode, rng, stats), fmt)

    @classmethod
    def zeros(cls, rows: int, cols: int, fmt: QFormat) -> "FxMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), fmt)

    @property
    def rows(self) -> int:
        return self.mantissas.shape[0]

    @property
    def cols(self) -> int:
        return self.mantissas.shape[1]

    @property
    def shape(self):
        return self.mantissas.shape

    def values(self) -> np.ndarray:
        """Real values, exact: mantissa * 2**-frac_bits."""
        return self.mantissas.astype(np.float64) * self.fmt.delta

    def transpose(self) -> "FxMatrix":
        return FxMatrix(self.mantissas.T, self.fmt)


@dataclass
class WideAccumulator:
    """Exact integer accumulator at the product scale 2**-2f.

    headroom_bits records the integer-bit growth reserved for an N-term sum
    (ceil(log2 N)), mirroring what fixed-width hardware would need; the
    Python-int value can of course never overflow.
    """

    value: int = 0
    headroom_bits: int = 0

    @classmethod
    def for_terms(cls, n_terms: int) -> "WideAccumulator":
        if n_terms < 1:
            raise ValueError("accumulator needs at least one term")
        return cls(value=0, headroom_bits=math.ceil(math.log2(n_terms)) if n_terms > 1 else 0)

    def add_product(self, a_mantissa: int, b_mantissa: int):
        self.value += int(a_mantissa) * int(b_mantissa)

    def add(self, mantissa: int):
        self.value += int(mantissa)


def _check_same_format(a: FxMatrix, b: FxMatrix):
    if a.fmt != b.fmt:
        raise ValueError(f"format mismatch: {a.fmt} vs {b.fmt}")


def _max_abs_mantissa(m: np.ndarray) -> int:
    if m.size == 0:
        return 0
    return max(-int(m.min()), int(m.max()))


def _round_ratio_to_fx(num, den: int, fmt: QFormat, mode: RoundingMode,
                       rng: RngStream | None, stats: RoundingStats | None) -> np.ndarray:
    if num.dtype == object:
        q = _round_ratio_exact(num, den, mode, rng)
    else:
        q = _round_ratio_float(num, den, mode, rng)
    return _saturate(q, fmt, stats)


def rounded_dot(x: FxMatrix, y: FxMatrix, divisor: int = 1,
                mode: RoundingMode = RoundingMode.NEAREST_EVEN,
                rng: RngStream | None = None,
                stats: RoundingStats | None = None) -> FxValue:
    """Exact dot product of a 1 x n row and an n x 1 column, divided by
    divisor, then rounded once into the working format.

    Consumes one uniform for CSR/RR, none otherwise.
    """
    _check_same_format(x, y)
    if divisor < 1:
        raise ValueError("divisor must be a positive integer")
    xm = x.mantissas.ravel()
    ym = y.mantissas.ravel()
    if xm.size != ym.size:
        raise ValueError(f"length mismatch: {xm.size} vs {ym.size}")
    acc = WideAccumulator.for_terms(max(xm.size, 1))
    for a, b in zip(xm, ym):
        acc.add_product(a, b)
    num = np.array([acc.value], dtype=object)
    den = divisor * x.fmt.scale
    out = _round_ratio_to_fx(num, den, x.fmt, mode, rng, stats)
    return FxValue(int(out[0]), x.fmt)


def rounded_matmul(a: FxMatrix, b: FxMatrix,
                   mode: RoundingMode = RoundingMode.NEAREST_EVEN,
                   rng: RngStream | None = None,
                   divisor: int = 1,
                   stats: RoundingStats | None = None) -> FxMatrix:
    """Matrix product with one rounding per output entry.

    Entry (i, j) is the exact accumulated dot of row i and column j, divided
    by divisor, rounded once. RNG draws are consumed in row-major order over
    the output.
    """
    _check_same_format(a, b)
    if a.cols != b.rows:
        raise ValueError(f"inner dimensions disagree: {a.shape} @ {b.shape}")
    if divisor < 1:
        raise ValueError("divisor must be a positive integer")
    bound = a.cols * _max_abs_mantissa(a.mantissas) * _max_abs_mantissa(b.mantissas)
    if bound < _FLOAT_EXACT_LIMIT:
        num = a.mantissas.astype(np.float64) @ b.mantissas.astype(np.float64)
    else:
        num = a.mantissas.astype(object) @ b.mantissas.astype(object)
    den = divisor * a.fmt.scale
    return FxMatrix(_round_ratio_to_fx(num, den, a.fmt, mode, rng, stats), a.fmt)


def rounded_sum_mean(values, n: int,
                     mode: RoundingMode = RoundingMode.NEAREST_EVEN,
                     rng: RngStream | None = None,
                     stats: RoundingStats | None = None) -> FxValue:
    """Exact sum of fixed-point scalars, exact division by n, one rounding.

    The intermediate sum lives in a wide accumulator with ceil(log2 N)
    headroom bits, so it cannot overflow; only the final rounded value
    saturates.
    """
    values = list(values)
    if not values:
        raise ValueError("cannot average an empty sequence")
    if n < 1:
        raise ValueError("n must be a positive integer")
    fmt = values[0].fmt
    if any(v.fmt != fmt for v in values):
        raise ValueError("all values must share one format")
    acc = WideAccumulator.for_terms(len(values))
    for v in values:
        acc.add(v.mantissa)
    num = np.array([acc.value], dtype=object)
    out = _round_ratio_to_fx(num, n, fmt, mode, rng, stats)
    return FxValue(int(out[0]), fmt)


def rounded_row_mean(a: FxMatrix,
                     mode: RoundingMode = RoundingMode.NEAREST_EVEN,
                     rng: RngStream | None = None,
                     stats: RoundingStats | None = None) -> FxMatrix:
    """Per-row mean over columns: exact row sums, exact division by the
    column count, one rounding per row. Returns a column."""
    bound = a.cols * _max_abs_mantissa(a.mantissas)
    if bound < _FLOAT_EXACT_LIMIT:
        num = a.mantissas.astype(np.float64).sum(axis=1, keepdims=True)
    else:
        num = a.mantissas.astype(object).sum(axis=1).reshape(-1, 1)
    return FxMatrix(_round_ratio_to_fx(num, a.cols, a.fmt, mode, rng, stats), a.fmt)


def exact_elementwise(op: str, a: FxMatrix, b: FxMatrix,
                      stats: RoundingStats | None = None) -> FxMatrix:
    """Saturating add/sub of same-format operands, no rounding step.

    Same-scale sums lose no precision, so a fixed-point toolbox performs
    them exactly; only saturation can occur.
    """
    if op not in ("add", "sub"):
        raise ValueError(f"only add/sub are exact on a shared grid, got {op!r}")
    return rounded_elementwise(op, a, b, RoundingMode.FLOOR, None, stats)


def requantize(a: FxMatrix, mode: RoundingMode,
               rng: RngStream | None = None,
               stats: RoundingStats | None = None) -> FxMatrix:
    """One rounding of values already on the grid, entry by entry.

    Identity for every mode except RR, which may move each entry up by
    delta; CSR consumes its per-entry draws but never moves a grid point.
    """
    if _max_abs_mantissa(a.mantissas) < _FLOAT_EXACT_LIMIT:
        num = a.mantissas.astype(np.float64)
    else:
        num = a.mantissas.astype(object)
    return FxMatrix(_round_ratio_to_fx(num, 1, a.fmt, mode, rng, stats), a.fmt)


def rounded_elementwise(op: str, a: FxMatrix, b: FxMatrix,
                        mode: RoundingMode = RoundingMode.NEAREST_EVEN,
                        rng: RngStream | None = None,
                        stats: RoundingStats | None = None) -> FxMatrix:
    """Elementwise add/sub/mul with one rounding per output entry.

    b may be a broadcastable column (bias addition); the broadcast itself is
    exact, rounding applies to each output entry.
    """
    _check_same_format(a, b)
    if op not in ("add", "sub", "mul"):
        raise ValueError(f"op must be add, sub or mul, got {op!r}")
    am, bm = a.mantissas, b.mantissas
    if bm.shape != am.shape:
        if bm.shape != (am.shape[0], 1):
            raise ValueError(
                f"shape mismatch: {am.shape} vs {bm.shape} (only column broadcast allowed)"
            )
    ma, mb = _max_abs_mantissa(am), _max_abs_mantissa(bm)
    if op == "mul":
        exact_window = ma * mb < _FLOAT_EXACT_LIMIT
        den = a.fmt.scale  # product scale 2**-2f back onto the 2**-f grid
    else:
        exact_window = ma + mb < _FLOAT_EXACT_LIMIT
        den = 1  # sums stay on the grid
    if exact_window:
        fa, fb = am.astype(np.float64), bm.astype(np.float64)
    else:
        fa, fb = am.astype(object), bm.astype(object)
    if op == "add":
        num = fa + fb
    elif op == "sub":
        num = fa - fb
    else:
        num = fa * fb
    return FxMatrix(_round_ratio_to_fx(num, den, a.fmt, mode, rng, stats), a.fmt)

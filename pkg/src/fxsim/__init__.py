"""Simulated fixed-point arithmetic with pluggable rounding modes.

Core pieces: Q-format scalars and matrices with saturating integer
mantissas; deterministic rounding (floor, ceiling, nearest-even) and two
stochastic modes (input-proportional and constant-probability); linear
algebra that accumulates exactly and rounds once per result; a two-layer
binary classifier trained entirely in a chosen format; and experiment
drivers reproducing the dot-product bias study and binary-MNIST runs.
"""

from .core import (
    FxValue,
    QFormat,
    RngStream,
    RoundingMode,
    RoundingStats,
    bias,
    expected_value,
    floor_to_grid,
    probability,
    quantize_array,
    round_value,
    variance_of,
)
from .data import Dataset, load_idx, load_pair_dataset, make_pair_dataset
from .linalg import (
    FxMatrix,
    WideAccumulator,
    requantize,
    rounded_dot,
    rounded_elementwise,
    rounded_matmul,
    rounded_row_mean,
    rounded_sum_mean,
)
from .nn import (
    EpochRecord,
    FloatParams,
    NetworkParams,
    TrainConfig,
    TrainResult,
    bce_loss,
    classification_error,
    train,
    xavier_init,
)

__version__ = "0.1.0"

"""Two-layer fully connected network for binary classification.

The quantized path keeps every stored tensor (weights, biases, activations,
inputs) in one fixed-point format. Rounding happens exactly where precision
is lost, the way a fixed-point toolbox behaves: matrix products and means
round once after exact accumulation and division, scaling a gradient by the
learning rate rounds the real product, sigmoid outputs are quantized from
float. Same-scale adds, subtractions and the ReLU gate are exact (they drop
no fractional bits), so they never consult the rounding mode. Stochastic
modes that perturb representable values (the constant-probability mode)
would otherwise push a systematic +delta*frac drift into every update and
training diverges; see the README notes.

The reference path is the same network in plain float64, used as the
single-precision-style baseline.

Layer shapes: W1 (h x n0), b1 (h x 1), W2 (1 x h), b2 (1 x 1); inputs are
n0 x m column-major samples, labels a 1 x m row of {0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import QFormat, RngStream, RoundingMode, RoundingStats
from .linalg import (
    FxMatrix,
    exact_elementwise,
    rounded_matmul,
    rounded_row_mean,
)

__all__ = [
    "NetworkParams",
    "FloatParams",
    "TrainConfig",
    "EpochRecord",
    "TrainResult",
    "xavier_init",
    "init_params",
    "quantize_params",
    "forward",
    "forward_reference",
    "bce_loss",
    "classification_error",
    "backward",
    "backward_reference",
    "sgd_update",
    "sgd_update_reference",
    "evaluate",
    "train",
]

LOSS_CLAMP = 1e-7


@dataclass(frozen=True)
class NetworkParams:
    W1: FxMatrix
    b1: FxMatrix
    W2: FxMatrix
    b2: FxMatrix

    @property
    def fmt(self) -> QFormat:
        return self.W1.fmt


@dataclass(frozen=True)
class FloatParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray


@dataclass(frozen=True)
class Gradients:
    dW1: object
    db1: object
    dW2: object
    db2: object


@dataclass(frozen=True)
class TrainConfig:
    fmt: QFormat
    mode: RoundingMode
    seed: int
    digit_pair: tuple[int, int] = (6, 9)
    learning_rate: float = 0.1
    epochs: int = 30
    hidden_units: int = 100
    precision_path: str = "fixed"  # "fixed" or "reference"
    batch_size: int | None = None  # None = full batch
    eval_reference: bool = False  # evaluate errors with the float forward pass

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.precision_path not in ("fixed", "reference"):
            raise ValueError(f"unknown precision path {self.precision_path!r}")
        d1, d2 = self.digit_pair
        if d1 == d2 or not (0 <= d1 <= 9 and 0 <= d2 <= 9):
            raise ValueError(f"digit pair must be two distinct digits, got {self.digit_pair}")


@dataclass
class EpochRecord:
    epoch: int
    train_error: float
    test_error: float
    loss: float
    saturations: int


@dataclass
class TrainResult:
    records: list
    params: object  # NetworkParams or FloatParams
    config: TrainConfig


def xavier_init(rng: RngStream, n_in: int, n_out: int) -> np.ndarray:
    """Glorot-uniform weights on [-sqrt(6/(n_in+n_out)), +...], shape (n_out, n_in)."""
    if n_in < 1 or n_out < 1:
        raise ValueError("layer dimensions must be positive")
    bound = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform_range(-bound, bound, (n_out, n_in))


def init_params(rng: RngStream, n_inputs: int, hidden_units: int) -> FloatParams:
    """Full-precision initialization: Xavier weights, zero biases.

    Draw order is W1 then W2, so equal seeds give equal initializations
    regardless of the rounding mode used afterwards.
    """
    W1 = xavier_init(rng, n_inputs, hidden_units)
    W2 = xavier_init(rng, hidden_units, 1)
    return FloatParams(
        W1=W1,
        b1=np.zeros((hidden_units, 1)),
        W2=W2,
        b2=np.zeros((1, 1)),
    )


def quantize_params(p: FloatParams, fmt: QFormat, mode: RoundingMode,
                    rng: RngStream | None, stats: RoundingStats | None = None) -> NetworkParams:
    return NetworkParams(
        W1=FxMatrix.from_real(p.W1, fmt, mode, rng, stats),
        b1=FxMatrix.from_real(p.b1, fmt, mode, rng, stats),
        W2=FxMatrix.from_real(p.W2, fmt, mode, rng, stats),
        b2=FxMatrix.from_real(p.b2, fmt, mode, rng, stats),
    )


def dequantize_params(p: NetworkParams) -> FloatParams:
    return FloatParams(p.W1.values(), p.b1.values(), p.W2.values(), p.b2.values())


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(params: NetworkParams, X: FxMatrix, mode: RoundingMode,
            rng: RngStream | None, stats: RoundingStats | None = None):
    """Quantized forward pass; X must already live in the working format.

    Rounding points, in fixed RNG order: the W1@X product, the W2@A1
    product, and the sigmoid quantization. Bias adds and ReLU are exact on
    the shared grid. Returns (Z1, A1, Z2, A2) as FxMatrix.
    """
    fmt = params.fmt
    WX = rounded_matmul(params.W1, X, mode, rng, stats=stats)
    Z1 = exact_elementwise("add", WX, params.b1, stats)
    A1 = FxMatrix(np.maximum(Z1.mantissas, 0), fmt)
    WA = rounded_matmul(params.W2, A1, mode, rng, stats=stats)
    Z2 = exact_elementwise("add", WA, params.b2, stats)
    A2 = FxMatrix.from_real(_sigmoid(Z2.values()), fmt, mode, rng, stats)
    return Z1, A1, Z2, A2


def forward_reference(params: FloatParams, X: np.ndarray):
    Z1 = params.W1 @ X + params.b1
    A1 = np.maximum(Z1, 0.0)
    Z2 = params.W2 @ A1 + params.b2
    A2 = _sigmoid(Z2)
    return Z1, A1, Z2, A2


def bce_loss(a2: np.ndarray, y: np.ndarray, clamp: float = LOSS_CLAMP) -> float:
    """Mean binary cross-entropy, computed in full precision (diagnostic)."""
    a = np.clip(np.asarray(a2, dtype=np.float64), clamp, 1.0 - clamp)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(-y * np.log(a) - (1.0 - y) * np.log(1.0 - a)))


def classification_error(a2: np.ndarray, y: np.ndarray) -> float:
    """Fraction misclassified with the >= 0.5 decision threshold."""
    pred = np.asarray(a2) >= 0.5
    return float(np.mean(pred != (np.asarray(y) >= 0.5)))


def backward(params: NetworkParams, cache, X: FxMatrix, Y: FxMatrix,
             mode: RoundingMode, rng: RngStream | None,
             stats: RoundingStats | None = None) -> Gradients:
    """Quantized backprop. Matrix products and means round once after the
    exact accumulation (division by the batch size included); the error
    A2 - Y and the ReLU gate are exact. RNG order: dW2, db2, W2^T backflow,
    dW1, db1.
    """
    Z1, A1, _, A2 = cache
    m = X.cols
    D = exact_elementwise("sub", A2, Y, stats)
    dW2 = rounded_matmul(D, A1.transpose(), mode, rng, divisor=m, stats=stats)
    db2 = rounded_row_mean(D, mode, rng, stats)
    G = rounded_matmul(params.W2.transpose(), D, mode, rng, stats=stats)
    gated = np.where(Z1.mantissas > 0, G.mantissas, np.int64(0))
    dZ1 = FxMatrix(gated, G.fmt)
    dW1 = rounded_matmul(dZ1, X.transpose(), mode, rng, divisor=m, stats=stats)
    db1 = rounded_row_mean(dZ1, mode, rng, stats)
    return Gradients(dW1=dW1, db1=db1, dW2=dW2, db2=db2)


def backward_reference(params: FloatParams, cache, X: np.ndarray,
                       y: np.ndarray) -> Gradients:
    Z1, A1, _, A2 = cache
    m = X.shape[1]
    D = A2 - y
    dW2 = (D @ A1.T) / m
    db2 = D.mean(axis=1, keepdims=True)
    dZ1 = (params.W2.T @ D) * (Z1 > 0)
    dW1 = (dZ1 @ X.T) / m
    db1 = dZ1.mean(axis=1, keepdims=True)
    return Gradients(dW1=dW1, db1=db1, dW2=dW2, db2=db2)


def sgd_update(params: NetworkParams, grads: Gradients, lr: float,
               mode: RoundingMode, rng: RngStream | None,
               stats: RoundingStats | None = None) -> NetworkParams:
    """One gradient-descent step. Scaling the gradient by the learning rate
    is a real multiplication and rounds (this is where sub-precision updates
    either die under nearest or survive stochastically); the subtraction of
    two in-format tensors is exact. Update order: W1, b1, W2, b2."""
    fmt = params.fmt

    def step(p: FxMatrix, g: FxMatrix) -> FxMatrix:
        scaled = FxMatrix.from_real(lr * g.values(), fmt, mode, rng, stats)
        return exact_elementwise("sub", p, scaled, stats)

    return NetworkParams(
        W1=step(params.W1, grads.dW1),
        b1=step(params.b1, grads.db1),
        W2=step(params.W2, grads.dW2),
        b2=step(params.b2, grads.db2),
    )


def sgd_update_reference(params: FloatParams, grads: Gradients, lr: float) -> FloatParams:
    return FloatParams(
        W1=params.W1 - lr * grads.dW1,
        b1=params.b1 - lr * grads.db1,
        W2=params.W2 - lr * grads.dW2,
        b2=params.b2 - lr * grads.db2,
    )


def evaluate(params, X, y: np.ndarray, mode: RoundingMode | None = None,
             rng: RngStream | None = None,
             stats: RoundingStats | None = None) -> tuple[float, float]:
    """Classification error and BCE loss of params on (X, y).

    Fixed-point params are evaluated with the quantized forward pass (X must
    be an FxMatrix); float params with the reference pass.
    """
    if isinstance(params, NetworkParams):
        _, _, _, A2 = forward(params, X, mode, rng, stats)
        a2 = A2.values()
    else:
        _, _, _, a2 = forward_reference(params, X)
    return classification_error(a2, y), bce_loss(a2, y)


def _column_chunks(m: int, batch_size: int | None):
    if batch_size is None or batch_size >= m:
        yield slice(0, m)
        return
    for start in range(0, m, batch_size):
        yield slice(start, min(start + batch_size, m))


def train(config: TrainConfig, dataset) -> TrainResult:
    """Train per the config on a loaded digit-pair dataset.

    Uses three independent RNG streams derived from the seed: stream 0 for
    the Xavier draws (shared by every mode), stream 1 for rounding during
    training, stream 2 for rounding during evaluation, so how often you
    evaluate never changes the training trajectory. Deterministic end to
    end for a fixed config.
    """
    init_rng = RngStream(config.seed, 0)
    round_rng = RngStream(config.seed, 1)
    eval_rng = RngStream(config.seed, 2)
    stats = RoundingStats()
    eval_stats = RoundingStats()

    Xtr, ytr = dataset.X_train, dataset.Y_train
    Xte, yte = dataset.X_test, dataset.Y_test
    n_inputs = Xtr.shape[0]
    float_params = init_params(init_rng, n_inputs, config.hidden_units)

    records: list[EpochRecord] = []

    if config.precision_path == "reference":
        params = float_params
        for epoch in range(1, config.epochs + 1):
            for cols in _column_chunks(Xtr.shape[1], config.batch_size):
                Xb, yb = Xtr[:, cols], ytr[:, cols]
                cache = forward_reference(params, Xb)
                grads = backward_reference(params, cache, Xb, yb)
                params = sgd_update_reference(params, grads, config.learning_rate)
            train_error, loss = evaluate(params, Xtr, ytr)
            test_error, _ = evaluate(params, Xte, yte)
            records.append(EpochRecord(epoch, train_error, test_error, loss, 0))
        return TrainResult(records, params, config)

    fmt, mode = config.fmt, config.mode
    # All tensors live in the working format: inputs are quantized once at
    # load time, the float initialization once before the first epoch.
    Xtr_fx = FxMatrix.from_real(Xtr, fmt, mode, round_rng, stats)
    Xte_fx = FxMatrix.from_real(Xte, fmt, mode, round_rng, stats)
    # Labels are 0/1, exact on every grid: deterministic quantization is lossless.
    Ytr_fx = FxMatrix.from_real(ytr, fmt, RoundingMode.NEAREST_EVEN, None)
    params = quantize_params(float_params, fmt, mode, round_rng, stats)

    for epoch in range(1, config.epochs + 1):
        sat_start = stats.saturations
        for cols in _column_chunks(Xtr_fx.cols, config.batch_size):
            Xb = FxMatrix(Xtr_fx.mantissas[:, cols], fmt)
            Yb = FxMatrix(Ytr_fx.mantissas[:, cols], fmt)
            cache = forward(params, Xb, mode, round_rng, stats)
            grads = backward(params, cache, Xb, Yb, mode, round_rng, stats)
            params = sgd_update(params, grads, config.learning_rate, mode,
                                round_rng, stats)
        if config.eval_reference:
            fp = dequantize_params(params)
            train_error, loss = evaluate(fp, Xtr, ytr)
            test_error, _ = evaluate(fp, Xte, yte)
        else:
            train_error, loss = evaluate(params, Xtr_fx, ytr, mode, eval_rng, eval_stats)
            test_error, _ = evaluate(params, Xte_fx, yte, mode, eval_rng, eval_stats)
        records.append(
            EpochRecord(epoch, train_error, test_error, loss,
                        stats.saturations - sat_start)
        )
    return TrainResult(records, params, config)

"""Experiment drivers: the rounded-dot-product bias study, the binary-MNIST
training sweeps, prediction histograms, CSV emission and chart plumbing.

Every run is pinned by an explicit seed; paired experiments feed identical
inputs to every rounding mode so differences are attributable to rounding
alone. Each result file gets an adjacent ``.manifest`` with the full config
echo.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import QFormat, RngStream, RoundingMode, RoundingStats
from .data import Dataset
from .linalg import FxMatrix, rounded_dot
from .nn import (
    FloatParams,
    NetworkParams,
    TrainConfig,
    TrainResult,
    forward,
    forward_reference,
    train,
)

__all__ = [
    "DotProdConfig",
    "RunManifest",
    "run_dotprod",
    "write_dotprod_csv",
    "run_train",
    "write_epoch_csv",
    "save_params",
    "load_params",
    "emit_prediction_histogram",
    "plot_csvs",
]

EPOCH_CSV_HEADER = ["epoch", "train_error", "test_error", "loss", "saturations"]
HISTOGRAM_CSV_HEADER = ["bin_lo", "bin_hi", "count"]
DOTPROD_CSV_HEADER = ["mode", "n", "n_max", "abs_bias_sum", "zero_count"]

DEFAULT_MODES = (RoundingMode.NEAREST_EVEN, RoundingMode.CSR, RoundingMode.RR)

# The reported dot-product table is reproduced with second operands drawn
# from [0, 100]; see README for the discrepancy with the narrative [0, 10].
DEFAULT_Y_RANGE = (0.0, 100.0)


@dataclass(frozen=True)
class DotProdConfig:
    """Rounded dot-product study: N_max paired trials of length-n dots."""

    n: int = 100
    n_max: int = 1000
    fmt: QFormat = QFormat(16, 8)
    modes: tuple = DEFAULT_MODES
    seed: int = 0
    x_range: tuple | None = None  # default: one grid cell around zero
    y_range: tuple = DEFAULT_Y_RANGE

    def __post_init__(self):
        if self.n < 1 or self.n_max < 1:
            raise ValueError("n and n_max must be positive")

    @property
    def effective_x_range(self) -> tuple:
        if self.x_range is not None:
            return self.x_range
        half = self.fmt.delta / 2.0
        return (-half, half)


def run_dotprod(cfg: DotProdConfig) -> dict:
    """Run the paired dot-product trials; returns per-mode RoundingStats.

    Each trial draws fresh x, y once and feeds the same vectors to every
    mode. Per mode: quantize both operands, accumulate the dot exactly,
    divide by n, round once; the absolute deviation from the full-precision
    quotient and exact zero results are tallied.
    """
    input_rng = RngStream(cfg.seed, 0)
    mode_rngs = {m: RngStream(cfg.seed, 1 + i) for i, m in enumerate(cfg.modes)}
    stats = {m: RoundingStats() for m in cfg.modes}
    x_lo, x_hi = cfg.effective_x_range
    y_lo, y_hi = cfg.y_range
    for _ in range(cfg.n_max):
        x = input_rng.uniform_range(x_lo, x_hi, (1, cfg.n))
        y = input_rng.uniform_range(y_lo, y_hi, (cfg.n, 1))
        exact = float((x @ y).item()) / cfg.n
        for m in cfg.modes:
            rng = mode_rngs[m]
            st = stats[m]
            xq = FxMatrix.from_real(x, cfg.fmt, m, rng, st)
            yq = FxMatrix.from_real(y, cfg.fmt, m, rng, st)
            r = rounded_dot(xq, yq, divisor=cfg.n, mode=m, rng=rng, stats=st)
            st.record_trial(abs(r.value - exact), r.mantissa == 0)
    return stats


def write_dotprod_csv(cfg: DotProdConfig, stats: dict, out_path) -> Path:
    out_path = Path(out_path)
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(DOTPROD_CSV_HEADER)
        for m in cfg.modes:
            st = stats[m]
            w.writerow([m.value, cfg.n, cfg.n_max, repr(st.abs_bias_sum), st.zero_count])
    return out_path


@dataclass
class RunManifest:
    """Reproducibility sidecar written next to every result file."""

    command: str
    config: dict
    seed: int
    outputs: list
    wall_time_s: float
    version: str = __version__

    def to_text(self) -> str:
        lines = [f"command = {self.command}", f"version = {self.version}",
                 f"seed = {self.seed}"]
        for k in sorted(self.config):
            lines.append(f"{k} = {self.config[k]}")
        for out in self.outputs:
            lines.append(f"output = {out}")
        lines.append(f"wall_time_s = {self.wall_time_s:.3f}")
        return "\n".join(lines) + "\n"

    def write_for(self, result_path) -> Path:
        path = Path(str(result_path) + ".manifest")
        with open(path, "w") as f:
            f.write(self.to_text())
        return path


def write_epoch_csv(records, out_path) -> Path:
    out_path = Path(out_path)
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(EPOCH_CSV_HEADER)
        for r in records:
            w.writerow([r.epoch, repr(r.train_error), repr(r.test_error),
                        repr(r.loss), r.saturations])
    return out_path


def save_params(result: TrainResult, out_path) -> Path:
    """Serialize trained parameters plus enough metadata to evaluate them."""
    out_path = Path(out_path)
    p = result.params
    cfg = result.config
    meta = dict(
        kind="reference" if isinstance(p, FloatParams) else "fixed",
        word_bits=cfg.fmt.word_bits if cfg.fmt is not None else 0,
        frac_bits=cfg.fmt.frac_bits if cfg.fmt is not None else 0,
        mode=cfg.mode.value if cfg.mode is not None else "",
        seed=cfg.seed,
        digit_lo=min(cfg.digit_pair),
        digit_hi=max(cfg.digit_pair),
    )
    if isinstance(p, FloatParams):
        arrays = dict(W1=p.W1, b1=p.b1, W2=p.W2, b2=p.b2)
    else:
        arrays = dict(W1=p.W1.mantissas, b1=p.b1.mantissas,
                      W2=p.W2.mantissas, b2=p.b2.mantissas)
    with open(out_path, "wb") as f:
        np.savez(f, **arrays, **{f"meta_{k}": np.array(v) for k, v in meta.items()})
    return out_path


def load_params(path):
    """Inverse of save_params: returns (params, meta dict)."""
    with np.load(path, allow_pickle=False) as z:
        meta = {k[5:]: z[k].item() for k in z.files if k.startswith("meta_")}
        if meta["kind"] == "reference":
            params = FloatParams(z["W1"], z["b1"], z["W2"], z["b2"])
        else:
            fmt = QFormat(int(meta["word_bits"]), int(meta["frac_bits"]))
            params = NetworkParams(
                W1=FxMatrix(z["W1"], fmt), b1=FxMatrix(z["b1"], fmt),
                W2=FxMatrix(z["W2"], fmt), b2=FxMatrix(z["b2"], fmt),
            )
    return params, meta


def run_train(base: TrainConfig, modes, include_reference: bool,
              out_dir, dataset: Dataset) -> dict:
    """Train one network per rounding mode (plus the reference baseline),
    one CSV + params file per run. Same seed means the same pre-quantization
    initialization everywhere. Returns {name: csv path}."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    runs: list[tuple[str, TrainConfig]] = []
    if include_reference:
        runs.append(("reference", replace(base, precision_path="reference")))
    for m in modes:
        runs.append((m.value, replace(base, precision_path="fixed", mode=m)))
    outputs = {}
    for name, cfg in runs:
        t0 = time.perf_counter()
        result = train(cfg, dataset)
        wall = time.perf_counter() - t0
        csv_path = write_epoch_csv(result.records, out_dir / f"{name}.csv")
        save_params(result, out_dir / f"{name}.params")
        manifest = RunManifest(
            command="train",
            config=dict(
                path=cfg.precision_path, mode=cfg.mode.value,
                format=str(cfg.fmt), digits=f"{cfg.digit_pair}",
                epochs=cfg.epochs, learning_rate=cfg.learning_rate,
                hidden_units=cfg.hidden_units,
                batch_size=cfg.batch_size if cfg.batch_size else "full",
            ),
            seed=cfg.seed,
            outputs=[str(csv_path), str(out_dir / f"{name}.params")],
            wall_time_s=wall,
        )
        manifest.write_for(csv_path)
        outputs[name] = csv_path
    return outputs


def emit_prediction_histogram(params, dataset: Dataset, out_path,
                              mode: RoundingMode | None = None,
                              seed: int = 0, bins: int = 50) -> Path:
    """Bin the network's test-set outputs into equal-width bins over [0, 1].

    Fixed-point parameters are evaluated with the quantized forward pass
    (inputs quantized with the given mode, as during training); float
    parameters with the reference pass.
    """
    if isinstance(params, NetworkParams):
        if mode is None:
            raise ValueError("fixed-point params need the rounding mode")
        rng = RngStream(seed, 2)
        st = RoundingStats()
        Xte = FxMatrix.from_real(dataset.X_test, params.fmt, mode, rng, st)
        _, _, _, A2 = forward(params, Xte, mode, rng, st)
        a2 = A2.values()
    else:
        _, _, _, a2 = forward_reference(params, dataset.X_test)
    counts, edges = np.histogram(a2.ravel(), bins=bins, range=(0.0, 1.0))
    out_path = Path(out_path)
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(HISTOGRAM_CSV_HEADER)
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c)])
    return out_path


def plot_csvs(paths, out_path, column: str = "test_error") -> Path:
    """Chart CSVs produced by the other subcommands.

    Epoch CSVs plot the chosen column against the epoch; histogram CSVs plot
    counts against bin centers. Series labels come from file stems.
    """
    from .svgplot import render_line_chart

    paths = [Path(p) for p in paths]
    if not paths:
        raise ValueError("no input CSVs")
    series = []
    ylabel = column
    for p in paths:
        with open(p, newline="") as f:
            rows = list(csv.DictReader(f))
        if not rows:
            raise ValueError(f"{p}: empty CSV")
        if "epoch" in rows[0]:
            if column not in rows[0]:
                raise ValueError(f"{p}: no column {column!r}")
            xs = [int(r["epoch"]) for r in rows]
            ys = [float(r[column]) for r in rows]
            xlabel = "epoch"
        elif "bin_lo" in rows[0]:
            xs = [(float(r["bin_lo"]) + float(r["bin_hi"])) / 2 for r in rows]
            ys = [float(r["count"]) for r in rows]
            xlabel, ylabel = "prediction", "count"
        else:
            raise ValueError(f"{p}: unrecognized CSV header {list(rows[0])}")
        series.append((p.stem, xs, ys))
    render_line_chart(series, out_path, xlabel=xlabel, ylabel=ylabel)
    return Path(out_path)

"""Command-line front end.

Subcommands: ``dotprod`` (rounded dot-product study), ``train`` (binary
MNIST sweeps), ``histogram`` (prediction histogram of a trained net),
``plot`` (CSV to SVG). A ``--config`` file holds ``key = value`` lines
mirroring the long flag names; explicit flags override file values.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .core import QFormat, RoundingMode
from .data import load_pair_dataset
from .experiments import (
    DotProdConfig,
    RunManifest,
    emit_prediction_histogram,
    load_params,
    plot_csvs,
    run_dotprod,
    run_train,
    write_dotprod_csv,
)
from .nn import TrainConfig

__all__ = ["main"]


def _parse_modes(text: str):
    return tuple(RoundingMode.from_name(tok) for tok in text.split(",") if tok)


def _parse_digits(text: str):
    parts = [int(tok) for tok in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("digits must be two comma-separated values")
    return (parts[0], parts[1])


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Pull defaults from a --config file so explicit flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        parser.error("--config needs a file path")
    values = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{path}:{line_no}: expected 'key = value'")
        key, val = (tok.strip() for tok in line.split("=", 1))
        values[key.replace("-", "_")] = val
    actions = {a.dest: a for a in parser._actions}
    unknown = set(values) - set(actions)
    if unknown:
        parser.error(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
    for key, val in values.items():
        if actions[key].nargs == 0:  # store_true flags arrive as text
            low = val.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                parser.error(f"{path}: {key} must be a boolean, got {val!r}")
            values[key] = low in ("true", "1", "yes")
    parser.set_defaults(**values)
    return argv[:idx] + argv[idx + 2:]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value file of defaults for this subcommand")
    p.add_argument("--seed", type=int, default=42)


def _build_dotprod(sub):
    p = sub.add_parser("dotprod", help="rounded dot-product bias/zeros study")
    _add_common(p)
    p.add_argument("--n", type=int, default=100, help="vector length")
    p.add_argument("--nmax", type=int, default=1000, help="number of dot products")
    p.add_argument("--word", type=int, default=16)
    p.add_argument("--frac", type=int, default=8)
    p.add_argument("--modes", default="rn,csr,rr")
    p.add_argument("--ymin", type=float, default=0.0)
    p.add_argument("--ymax", type=float, default=100.0)
    p.add_argument("--out", required=True, help="output CSV path")
    return p


def _build_train(sub):
    p = sub.add_parser("train", help="train the two-layer net per rounding mode")
    _add_common(p)
    p.add_argument("--digits", default="6,9")
    p.add_argument("--word", type=int, default=16)
    p.add_argument("--frac", type=int, default=8)
    p.add_argument("--modes", default="rn,csr,rr")
    p.add_argument("--reference", action="store_true",
                   help="also run the full-precision baseline")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--hidden", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=None,
                   help="mini-batch columns per step (default: full batch)")
    p.add_argument("--eval-reference", action="store_true",
                   help="evaluate errors with the float forward pass")
    p.add_argument("--data-dir", default="./mnist")
    p.add_argument("--out", required=True, help="output directory")
    return p


def _build_histogram(sub):
    p = sub.add_parser("histogram", help="prediction histogram of a trained net")
    _add_common(p)
    p.add_argument("--params", required=True, help="params file from train")
    p.add_argument("--digits", default=None,
                   help="digit pair (default: the pair stored in the params file)")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--data-dir", default="./mnist")
    p.add_argument("--out", required=True, help="output CSV path")
    return p


def _build_plot(sub):
    p = sub.add_parser("plot", help="render result CSVs to a static SVG")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--column", default="test_error",
                   help="epoch-CSV column to plot (default test_error)")
    p.add_argument("--out", required=True, help="output SVG path")
    return p


def _cmd_dotprod(args) -> int:
    cfg = DotProdConfig(
        n=int(args.n), n_max=int(args.nmax),
        fmt=QFormat(int(args.word), int(args.frac)),
        modes=_parse_modes(args.modes), seed=int(args.seed),
        y_range=(float(args.ymin), float(args.ymax)),
    )
    t0 = time.perf_counter()
    stats = run_dotprod(cfg)
    out = write_dotprod_csv(cfg, stats, args.out)
    RunManifest(
        command="dotprod",
        config=dict(n=cfg.n, nmax=cfg.n_max, format=str(cfg.fmt),
                    modes=",".join(m.value for m in cfg.modes),
                    x_range=str(cfg.effective_x_range), y_range=str(cfg.y_range)),
        seed=cfg.seed, outputs=[str(out)],
        wall_time_s=time.perf_counter() - t0,
    ).write_for(out)
    for m in cfg.modes:
        st = stats[m]
        print(f"{m.value:5s}  |B| = {st.abs_bias_sum:10.3f}   N_z = {st.zero_count}"
              f" / {st.op_count}")
    return 0


def _cmd_train(args) -> int:
    pair = _parse_digits(args.digits)
    base = TrainConfig(
        fmt=QFormat(int(args.word), int(args.frac)),
        mode=RoundingMode.NEAREST_EVEN,  # per-run mode set by run_train
        seed=int(args.seed), digit_pair=pair,
        learning_rate=float(args.lr), epochs=int(args.epochs),
        hidden_units=int(args.hidden),
        batch_size=None if args.batch_size in (None, "") else int(args.batch_size),
        eval_reference=bool(args.eval_reference),
    )
    dataset = load_pair_dataset(args.data_dir, pair)
    print(f"digits {pair}: {dataset.train_count} train / {dataset.test_count} test")
    outputs = run_train(base, _parse_modes(args.modes), bool(args.reference),
                        args.out, dataset)
    for name, path in outputs.items():
        print(f"{name:10s} -> {path}")
    return 0


def _cmd_histogram(args) -> int:
    params, meta = load_params(args.params)
    pair = _parse_digits(args.digits) if args.digits else (
        int(meta["digit_lo"]), int(meta["digit_hi"]))
    dataset = load_pair_dataset(args.data_dir, pair)
    mode = RoundingMode.from_name(meta["mode"]) if meta["kind"] == "fixed" else None
    out = emit_prediction_histogram(params, dataset, args.out, mode=mode,
                                    seed=int(args.seed), bins=int(args.bins))
    print(f"histogram -> {out}")
    return 0


def _cmd_plot(args) -> int:
    out = plot_csvs(args.inputs, args.out, column=args.column)
    print(f"chart -> {out}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(
        prog="fxsim",
        description="fixed-point rounding experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {
        "dotprod": _build_dotprod(sub),
        "train": _build_train(sub),
        "histogram": _build_histogram(sub),
        "plot": _build_plot(sub),
    }
    if argv and argv[0] in parsers:
        argv = [argv[0]] + _apply_config_file(parsers[argv[0]], argv[1:])
    args = parser.parse_args(argv)
    handler = {
        "dotprod": _cmd_dotprod,
        "train": _cmd_train,
        "histogram": _cmd_histogram,
        "plot": _cmd_plot,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())

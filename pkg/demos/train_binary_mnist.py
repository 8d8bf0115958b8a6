#!/usr/bin/env python3
"""Train the two-layer binary classifier in 16-bit fixed point.

Runs the 6-versus-9 problem for every rounding mode plus the float
baseline and charts test error per epoch. With 8 fractional bits the
sub-precision weight updates die under nearest rounding and training slows
to a crawl, while the stochastic modes keep learning; the
constant-probability mode converges fastest.

Expects the four MNIST IDX files (plain or .gz) in ./mnist; run from the
repository root. Full 30-epoch runs take around 20 s per mode; set EPOCHS
lower for a quick look.
"""

import time

from fxsim import QFormat, RoundingMode, TrainConfig, train
from fxsim.data import load_pair_dataset
from fxsim.svgplot import render_line_chart

EPOCHS = 30
PAIR = (6, 9)
FMT = QFormat(16, 8)
SEED = 42

dataset = load_pair_dataset("mnist", PAIR)
print(f"digits {PAIR}: {dataset.train_count} train / {dataset.test_count} test, "
      f"format {FMT}, {EPOCHS} epochs, seed {SEED}\n")

curves = []
t0 = time.perf_counter()
ref = train(TrainConfig(fmt=FMT, mode=RoundingMode.NEAREST_EVEN, seed=SEED,
                        digit_pair=PAIR, epochs=EPOCHS,
                        precision_path="reference"), dataset)
print(f"reference: final test error {ref.records[-1].test_error * 100:.2f}% "
      f"({time.perf_counter() - t0:.0f}s)")
curves.append(("reference", [r.epoch for r in ref.records],
               [r.test_error for r in ref.records]))

for mode in (RoundingMode.NEAREST_EVEN, RoundingMode.CSR, RoundingMode.RR):
    t0 = time.perf_counter()
    res = train(TrainConfig(fmt=FMT, mode=mode, seed=SEED, digit_pair=PAIR,
                            epochs=EPOCHS), dataset)
    errs = [r.test_error for r in res.records]
    print(f"{mode.value:>9}: final test error {errs[-1] * 100:.2f}% "
          f"({time.perf_counter() - t0:.0f}s)")
    curves.append((mode.value, [r.epoch for r in res.records], errs))

render_line_chart(curves, "test_error.svg", xlabel="epoch", ylabel="test error",
                  title=f"digits {PAIR[0]} vs {PAIR[1]} at {FMT}")
print("\nwrote test_error.svg")

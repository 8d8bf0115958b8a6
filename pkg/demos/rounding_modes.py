#!/usr/bin/env python3
"""A tour of the five rounding modes on a single grid cell.

Sweeps x across one cell at delta = 1 and prints/plots each mode's
probability of rounding down, the analytic bias, and the variance. The
deterministic modes are the degenerate p in {0, 1} cases; the
input-proportional mode trades variance for zero bias; the
constant-probability mode keeps p = 0.5 everywhere, zero included.
"""

import numpy as np

from fxsim import (
    QFormat,
    RngStream,
    RoundingMode,
    bias,
    expected_value,
    probability,
    round_value,
    variance_of,
)
from fxsim.svgplot import render_line_chart

fmt = QFormat(16, 0)  # delta = 1: the unit grid makes the numbers readable
xs = np.linspace(0.0, 0.999, 200)

print(f"format {fmt}: delta = {fmt.delta}, range [{fmt.min_value}, {fmt.max_value}]")
print()
print(f"{'x':>6} | " + " | ".join(f"{m.value:>20}" for m in RoundingMode))
for x in (0.0, 0.25, 0.5, 0.75):
    cells = []
    for m in RoundingMode:
        p = probability(m, x, fmt)
        cells.append(f"p={p:.2f} B={bias(x, fmt, m):+.2f}")
    print(f"{x:6.2f} | " + " | ".join(f"{c:>20}" for c in cells))

print()
print("maximum |bias| and variance over the cell (the summary-table laws):")
for m in RoundingMode:
    bs = [abs(bias(float(x), fmt, m)) for x in xs]
    vs = [variance_of(probability(m, float(x), fmt), fmt) for x in xs]
    print(f"  {m.value:>6}: |B|max = {max(bs):.3f}   Vmax = {max(vs):.3f}")

# empirical check: the sample mean of many roundings converges to the
# analytic expectation
rng = RngStream(seed=7)
x = 0.3
for m in (RoundingMode.CSR, RoundingMode.RR):
    draws = [round_value(x, fmt, m, rng).value for _ in range(50_000)]
    print(f"  {m.value}: empirical mean at x={x} -> {np.mean(draws):.4f} "
          f"(analytic {expected_value(x, fmt, m):.4f})")

series = [
    (f"bias {m.value}", xs.tolist(), [bias(float(x), fmt, m) for x in xs])
    for m in (RoundingMode.NEAREST_EVEN, RoundingMode.CSR, RoundingMode.RR)
]
render_line_chart(series, "rounding_bias.svg", xlabel="x", ylabel="bias",
                  title="rounding bias across one grid cell (delta = 1)")
print("\nwrote rounding_bias.svg")

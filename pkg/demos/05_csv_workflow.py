"""End-to-end CSV workflow mirroring a real-data analysis: write a synthetic
price file, transform to log-returns, fit, and run the test battery; the same
steps are available from the command line via `elbox test` and
`elbox diagnose`.

Run:  python demos/05_csv_workflow.py
"""

import csv
import os
import tempfile

import numpy as np

from elbox import ArmaSpec, DgpConfig, GarchSpec, simulate
from elbox.cli import RunConfig, ingest_csv, run_tests

# synthetic "exchange rate": exponentiate a simulated return series
returns = simulate(
    DgpConfig(
        arma=ArmaSpec(0.0, (0.3,), (0.4,)),
        garch=GarchSpec(0.00005, (0.1,), (0.15,)),
        n=600,
        burn_in=500,
        seed=99,
    )
).values
prices = 100.0 * np.exp(np.cumsum(returns))

workdir = tempfile.mkdtemp(prefix="elbox_demo_")
path = os.path.join(workdir, "prices.csv")
with open(path, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["date", "price"])
    for i, price in enumerate(prices):
        writer.writerow([f"day-{i:04d}", f"{price:.10f}"])
print(f"wrote {path}")

series = ingest_csv(path, column="price", transform="log_return")
print(f"log-returns: n={len(series)}, sd={series.values.std():.5f}")

bundle = run_tests(
    RunConfig(
        input=path,
        column="price",
        transform="log_return",
        p=1,
        q=1,
        m=2,
        tests=("lb", "rw", "el", "wel"),
        seed=7,
        rw_B=200,
    )
)
theta = bundle["fit"]["theta"]
print(f"fitted ARMA(1,1): mu={theta['mu']:+.5f}, phi={theta['phi'][0]:+.4f}, "
      f"psi={theta['psi'][0]:+.4f}")
print(f"{'test':>5} {'stat':>10} {'p-value':>10}")
for entry in bundle["tests"]:
    print(f"{entry['name']:>5} {entry['stat']:>10.4f} {entry['p_value']:>10.4f}")
print("\nsame thing from the shell:")
print(f"  elbox test --input {path} --column price --transform log_return "
      "--p 1 --q 1 --m 2 --tests lb,rw,el,wel --seed 7 --rw-B 200 --format json")

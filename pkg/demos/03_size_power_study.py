"""Small-scale size/power study: the null (c=0) and one local alternative,
comparing the random-weight bootstrap, EL, and WeL tests.

This is a desk-scale version of the full study (100 replications instead of
1000+); expect a few minutes of runtime.

Run:  python demos/03_size_power_study.py
"""

from elbox import ArmaSpec, ExperimentConfig, GarchSpec, run_experiment, summarize

cfg = ExperimentConfig(
    arma=ArmaSpec(0.0, (0.3,), (0.4,)),
    garch=GarchSpec(0.2, (0.1,), (0.15,)),
    mus=(0.0,),
    ns=(400,),
    cs=(0.0, 10.0),
    m=2,
    reps=100,
    levels=(0.10, 0.05),
    methods=("rw", "el", "wel"),
    bootstrap_B=200,
    root_seed=20240817,
)

rows = run_experiment(cfg)
print(summarize(rows, title="finite-variance GARCH(0.1, 0.15), m=2, 100 reps").text)
print("c=0 rows estimate the size (nominal 0.10 / 0.05); c=10 rows the local power.")

"""Simulate an ARMA(1,1) series with GARCH(1,1) errors and recover the
parameters with the conditional least-squares fit.

Run:  python demos/01_simulate_and_fit.py
"""

import numpy as np

from elbox import ArmaSpec, DgpConfig, GarchSpec, check_stationarity, ls_fit, simulate

arma = ArmaSpec(mu=0.0, phi=(0.3,), psi=(0.4,))
garch = GarchSpec(omega=0.2, a=(0.1,), b=(0.15,))

report = check_stationarity(arma)
print(f"admissible: {report.ok}  (AR root modulus {report.min_root_modulus_ar:.3f}, "
      f"MA root modulus {report.min_root_modulus_ma:.3f})")

cfg = DgpConfig(arma=arma, garch=garch, c=0.0, n=2000, burn_in=500, seed=42)
x = simulate(cfg)
print(f"simulated n={len(x)}: mean={x.values.mean():+.4f}, sd={x.values.std():.4f}, "
      f"lag-1 autocorrelation={np.corrcoef(x.values[1:], x.values[:-1])[0, 1]:.4f}")

fit = ls_fit(x, p=1, q=1)
theta = fit.theta_hat
print(f"fit: mu={theta.mu:+.4f}, phi={theta.phi[0]:.4f} (true 0.3), "
      f"psi={theta.psi[0]:.4f} (true 0.4)")
print(f"converged={fit.converged} after {fit.iterations} iterations, "
      f"score norm {fit.score_norm:.2e}")

"""Step through the empirical-likelihood portmanteau test by hand: residuals,
self-weights, moment vectors, the inner dual solve, and the profile search.

Run:  python demos/02_el_test_walkthrough.py
"""

import numpy as np

from elbox import (
    ArmaSpec,
    DgpConfig,
    GarchSpec,
    dual_solve,
    ls_fit,
    moment_vectors,
    profile_el_test,
    residuals_and_gradient,
    self_weights,
    simulate,
)

arma = ArmaSpec(0.0, (0.3,), (0.4,))
garch = GarchSpec(0.2, (0.1,), (0.15,))
x = simulate(DgpConfig(arma=arma, garch=garch, c=0.0, n=400, burn_in=500, seed=7))
m = 2

fit = ls_fit(x, 1, 1)
print(f"least-squares fit: {fit.theta_hat}")

# 1. residual sequence and its gradient at the fit
pack = residuals_and_gradient(fit.theta_hat, x)
print(f"residuals: n={pack.n}, sd={pack.eps.std():.4f}")

# 2. auxiliary vectors (score block + lag products) and the dual solve there
Z = moment_vectors(pack, m)
res = dual_solve(Z)
print(f"dual at the fit: -2 log ratio = {res.neg2log:.4f} "
      f"(residual {res.residual:.1e}, {res.iterations} Newton steps)")

# 3. profiling over theta can only lower the statistic
el = profile_el_test(x, 1, 1, m, mode="EL", fit=fit)
print(f"profile EL:  stat={el.stat:.4f}  p={el.p_value:.4f} "
      f"({el.outer_iterations} simplex iterations)")

# 4. the self-weighted variant guards against infinite-variance errors
w = self_weights(x)
print(f"self-weights: floor M_X={w.m_x:.4f}, max w={w.w.max():.4f}")
wel = profile_el_test(x, 1, 1, m, mode="WeL", fit=fit, weights=w)
print(f"profile WeL: stat={wel.stat:.4f}  p={wel.p_value:.4f}")

# sanity: forcing unit weights reproduces the unweighted statistic
from elbox import SelfWeights

unit = SelfWeights(w=np.ones(len(x)), m_x=1.0)
wel_unit = profile_el_test(x, 1, 1, m, mode="WeL", fit=fit, weights=unit)
print(f"WeL with unit weights matches EL: "
      f"|{wel_unit.stat:.6f} - {el.stat:.6f}| = {abs(wel_unit.stat - el.stat):.1e}")

"""Surrogate-function identities and convergence-rate fitting."""

import numpy as np

from fpnet import SurrogateEvaluator, check_lemma1, fit_rate_series, surrogate_value
from fpnet.operators import apply_global, make_strongly_convex_suite

suite = make_strongly_convex_suite(8)
ev = SurrogateEvaluator.for_global(suite)
rng = np.random.default_rng(0)

print("surrogate vs scaled potential (should agree to quadrature accuracy):")
for _ in range(3):
    x = rng.uniform(-0.5, 0.5, 8)
    pot = np.mean([op.tau * (op.potential(x) - op.potential(np.zeros(8)))
                   for op in suite.locals])
    print(f"  G(x) = {surrogate_value(ev, x):+.10f}   tau*fbar = {pot:+.10f}")

print("\nsmoothness / strong-convexity inequalities:")
print(check_lemma1(suite, n_samples=500, seed=1))

print("\nrate fitting on synthetic series:")
t = np.arange(1, 20001)
for label, series, model in (
        ("ln t / sqrt t", np.log(t + 1e-12) / np.sqrt(t), "log_over_sqrt"),
        ("5/t + 0.01 plateau", 5.0 / t + 0.01, "log_over_linear")):
    fit = fit_rate_series(t, series, model, window=(10, 20000))
    print(f"  {label:20s} -> slope {fit.slope:.3f}, plateau {fit.plateau_level:.4f}, "
          f"r2 {fit.r_squared:.4f}")

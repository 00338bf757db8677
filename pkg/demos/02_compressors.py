"""The unified compressor family: outputs, certified constants, bit costs.

Shows a round trip through each kind at n = 30, the declared constants
(r, phi, delta^2), a Monte-Carlo check of the unified inequality, and the
wire costs, including the dual accounting for the sparsifying kind.
"""

import numpy as np

from fpnet import (bit_cost, c1_inf_quantizer, c2_uniform, c3_sparsify_quantize,
                   certify_compressor, compress, decode, identity_compressor,
                   scaled_compress)

rng = np.random.default_rng(1)
x = rng.standard_normal(30)

for spec in (c1_inf_quantizer(30, l_bits=2), c2_uniform(30), c3_sparsify_quantize(30),
             identity_compressor(30)):
    msg = compress(spec, x, rng)
    err = np.linalg.norm(decode(msg) / spec.r - x)
    print(f"{spec.kind:22s} r={spec.r:.3f} phi={spec.phi:.3f} delta^2={spec.delta_sq:6.3f}"
          f"  ||C(x)/r - x|| = {err:.3f}  bits={msg.bits:.0f}"
          f" (expected {bit_cost(spec):.0f})")

print("\ncertifying c3 against the unified inequality (10^4 trials):")
report = certify_compressor(c3_sparsify_quantize(30), n_trials=10_000, seed=2)
print(report)

print("\ndynamic scaling: absolute error term shrinks with s_t^2")
spec = c2_uniform(30)
y = rng.standard_normal(30)
for s in (1.0, 0.1, 0.01):
    sq = [np.sum((s * decode(scaled_compress(spec, y, s, rng)) - y) ** 2)
          for _ in range(2000)]
    print(f"  s={s:5.2f}: mean error {np.mean(sq):9.6f}  (bound s^2 delta^2 = {s**2 * spec.delta_sq:.6f})")

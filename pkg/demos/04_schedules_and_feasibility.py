"""Communication schedules and theorem admissibility reports."""

from fpnet import TheoremInputs, make_schedule, validate_theorem1, validate_theorem2
from fpnet.config import default_config, theorem_inputs_from_config

for policy in ("every_step", "fixed_period", "random_gap", "front_loaded"):
    s = make_schedule(policy, 30, h=3, seed=5)
    print(f"{policy:13s} I_30 = {s.indices}")

print("\nadmissibility of the published nonconvex operating point:")
cfg = default_config()
cfg["operators"]["suite"] = "nonconvex"
cfg["consensus"].update(gamma=0.7, psi=0.99)
cfg["steps"].update(kind="inv_sqrt", a=80.0, b=0.8)
print(validate_theorem1(theorem_inputs_from_config(cfg)))

print("\nsame network with conservative auto parameters:")
cfg["consensus"].update(gamma="auto", psi="auto")
print(validate_theorem1(theorem_inputs_from_config(cfg)))

print("\ncontractive regime needs L < 1:")
inputs = TheoremInputs(gamma=0.001, psi=0.3478, r=2.875, phi=0.3478, alpha=1.3,
                       kappa=0.3, h_max=3, a=1000.0, b=12.0, lipschitz=1.0,
                       p_bias=0.0, m_growth=0.0)
print(validate_theorem2(inputs))

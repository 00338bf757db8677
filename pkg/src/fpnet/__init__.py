"""fpnet: distributed fixed-point iteration over multi-agent networks.

A desk-scale simulator and analysis toolkit for communication-efficient
fixed-point seeking of sum-separable biased stochastic operators:
compressed consensus, dynamic communication skipping, certified compressor
and oracle contracts, and numeric validation of the shipped convergence
guarantees.
"""

from .analysis import (RateFit, SurrogateEvaluator, check_lemma1, fit_rate,
                       fit_rate_series, path_integral, surrogate_value,
                       verdict_theorem1, verdict_theorem2)
from .compression import (CompressedMessage, CompressorSpec, bit_cost,
                          c1_inf_quantizer, c2_uniform, c3_sparsify_quantize,
                          certify_compressor, compress, decode,
                          identity_compressor, scaled_compress)
from .config import (apply_overrides, build_run_config, default_config,
                     dumps_config, load_config, loads_config)
from .engine import (AgentState, RunConfig, RunTrace, average_traces,
                     consensus_and_broadcast, km_local_step, run, run_sweep)
from .errors import (ConfigError, ConnectivityError, ContractViolation,
                     DivergenceError, FpnetError, InfeasibleParametersError,
                     InvalidParameterError, NoFixedPointError, StaleArtifactError)
from .experiments import ExperimentPreset, preset, run_preset, verify_manifest
from .network import (Graph, MixingMatrix, build_graph, is_connected,
                      metropolis_mixing, spectral_params)
from .operators import (GlobalOperator, OperatorSpec, apply_global,
                        find_fixed_point, make_nonconvex_suite,
                        make_quadratic_suite, make_strongly_convex_suite)
from .oracle import (OracleConfig, OracleSample, certify_oracle,
                     estimate_d_bound, sample, zeroth_order_gradient)
from .scheduling import (CommSchedule, ConsensusParams, ConstantStep,
                         StepSchedule, TheoremInputs, auto_gamma, auto_psi,
                         gamma_upper_bound, lemma6_recursion_check,
                         make_schedule, theorem1_constants, theorem2_constants,
                         validate_theorem1, validate_theorem2, zeta1, zeta2)

__version__ = "0.1.0"

"""Run configuration files: parsing, overrides, canonical echo, wiring.

Grammar (documented here, enforced by the parser):

    # comment lines start with '#' or ';'
    [section]
    key = value

Sections mirror the module names. All keys are known in advance (see
SCHEMA); an unknown section or key is a hard error, as is a value that does
not parse at the declared type. 'auto' is accepted where noted and resolved
while building the run. The canonical echo (dumps_config) materializes every
default so a sidecar re-parses to an equivalent configuration key-for-key.
"""

from __future__ import annotations

import copy


from . import compression, network, operators, scheduling
from .engine import RunConfig
from .errors import ConfigError
from .oracle import OracleConfig
from .scheduling import TheoremInputs, validate_theorem1, validate_theorem2

_AUTO = "auto"

# section -> key -> (kind, default); kind in {int, float, str, bool, float_or_auto}
SCHEMA = {
    "network": {
        "topology": (str, "random_connected"),
        "n_agents": (int, 6),
        "edge_prob": (float, 0.4),
        "graph_seed": (int, 7),
    },
    "operators": {
        "suite": (str, "strongly_convex"),
        "dim": (int, 30),
        "tau": ("float_or_auto", _AUTO),
        "box": ("float_or_auto", _AUTO),
    },
    "oracle": {
        "mechanism": (str, "additive_gaussian"),
        "noise_variance": (float, 0.01),
        "z_radius": (float, 1e-3),
        "bias_scale": (float, 0.0),
        "bias_slope": (float, 0.0),
    },
    "compressor": {
        "kind": (str, "c1"),
        "l_bits": (int, 2),
        "delta_step": (float, 1.0),
        "p_keep": (float, 0.75),
        "float_bits": (int, 64),
        "int_bits": (int, 8),
    },
    "schedule": {
        "policy": (str, "fixed_period"),
        "h": (int, 3),
        "schedule_seed": (int, 0),
    },
    "steps": {
        "kind": (str, "inv_sqrt"),
        "a": (float, 80.0),
        "b": (float, 0.8),
        "scale_policy": (str, "decaying"),
    },
    "consensus": {
        # published operating point; 'auto' derives conservative values
        # (0.9 of the admissible gamma supremum, psi = 1/r)
        "gamma": ("float_or_auto", 0.8),
        "psi": ("float_or_auto", 0.99),
    },
    "run": {
        "horizon": (int, 10000),
        "master_seed": (int, 1),
        "x0_policy": (str, "zeros"),
        "x0_radius": (float, 1.0),
        "record_fixpoint": (str, "auto"),   # auto | always | never
        "check_replicas": (bool, True),
    },
}

_SUITES = ("nonconvex", "strongly_convex", "quadratic")
_SUITE_DEFAULTS = {  # suite -> (tau, box halfwidth)
    "nonconvex": (0.1, 5.0),
    "strongly_convex": (0.5, 0.5),
    "quadratic": (0.5, 5.0),
}

_suite_cache = {}
_fixpoint_cache = {}
_dbound_cache = {}


def default_config() -> dict:
    return {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}


def _convert(section, key, raw):
    kind, _ = SCHEMA[section][key]
    raw = raw.strip() if isinstance(raw, str) else raw
    try:
        if kind == "float_or_auto":
            return _AUTO if raw == _AUTO else float(raw)
        if kind is bool:
            if isinstance(raw, bool):
                return raw
            if str(raw).lower() in ("true", "1", "yes"):
                return True
            if str(raw).lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"key {section}.{key}: cannot parse {raw!r} as {getattr(kind, '__name__', kind)}")


def loads_config(text: str) -> dict:
    """Parse configuration text into a fully-defaulted nested dict."""
    cfg = default_config()
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", ";")):
            continue
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {stripped!r}")
            section = stripped[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {section}.{key}")
        cfg[section][key] = _convert(section, key, raw)
    return cfg


def load_config(path) -> dict:
    with open(path) as fh:
        return loads_config(fh.read())


def dumps_config(cfg: dict) -> str:
    """Canonical echo: every known key, fixed order, round-trip parseable."""
    lines = []
    for sec in SCHEMA:
        lines.append(f"[{sec}]")
        for key in SCHEMA[sec]:
            v = cfg.get(sec, {}).get(key, SCHEMA[sec][key][1])
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{key} = {v}")
        lines.append("")
    return "\n".join(lines)


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply 'section.key=value' pairs; unknown keys are hard errors."""
    out = copy.deepcopy(cfg)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        dotted, _, raw = item.partition("=")
        sec, _, key = dotted.strip().partition(".")
        if sec not in SCHEMA or key not in SCHEMA[sec]:
            raise ConfigError(f"override references unknown key {sec}.{key}")
        out[sec][key] = _convert(sec, key, raw)
    return out


# ---------------------------------------------------------------------------
# wiring: config dict -> RunConfig
# ---------------------------------------------------------------------------

def _build_suite(ocfg):
    suite = ocfg["suite"]
    if suite not in _SUITES:
        raise ConfigError(f"operators.suite must be one of {_SUITES}, got {suite!r}")
    tau_d, box_d = _SUITE_DEFAULTS[suite]
    tau = tau_d if ocfg["tau"] == _AUTO else float(ocfg["tau"])
    box = box_d if ocfg["box"] == _AUTO else float(ocfg["box"])
    key = (suite, ocfg["dim"], tau, box)
    if key not in _suite_cache:
        if suite == "nonconvex":
            _suite_cache[key] = operators.make_nonconvex_suite(ocfg["dim"], tau=tau, box_halfwidth=box)
        elif suite == "strongly_convex":
            _suite_cache[key] = operators.make_strongly_convex_suite(ocfg["dim"], tau=tau, box_halfwidth=box)
        else:
            _suite_cache[key] = operators.make_quadratic_suite(ocfg["dim"], tau=tau, box_halfwidth=box)
    return _suite_cache[key]


def _build_oracle(section, gop):
    mech = section["mechanism"]
    dim = gop.dim
    if mech == "additive_gaussian":
        return OracleConfig.additive_gaussian(dim, section["noise_variance"])
    if mech == "zeroth_order":
        smooth = max(op.smoothness for op in gop.locals)
        return OracleConfig.zeroth_order(dim, section["z_radius"], gop.tau, smooth)
    if mech == "synthetic_bias":
        return OracleConfig.synthetic_bias(dim, section["bias_scale"],
                                           section["bias_slope"], section["noise_variance"])
    raise ConfigError(f"oracle.mechanism {mech!r} unknown")


def _build_compressor(section, dim):
    kind = section["kind"]
    if kind == "c1":
        return compression.c1_inf_quantizer(dim, l_bits=section["l_bits"],
                                            float_bits=section["float_bits"])
    if kind == "c2":
        return compression.c2_uniform(dim, delta_step=section["delta_step"],
                                      int_bits=section["int_bits"])
    if kind == "c3":
        return compression.c3_sparsify_quantize(dim, p_keep=section["p_keep"],
                                                delta_step=section["delta_step"],
                                                int_bits=section["int_bits"])
    if kind == "identity":
        return compression.identity_compressor(dim, float_bits=section["float_bits"])
    raise ConfigError(f"compressor.kind {kind!r} unknown")


def suite_fixed_point(gop, tol=1e-12):
    key = (gop.name, gop.dim, gop.tau, gop.box_halfwidth, tol)
    if key not in _fixpoint_cache:
        _fixpoint_cache[key] = operators.find_fixed_point(gop, tol=tol)
    return _fixpoint_cache[key]


def estimate_config_d_bound(run_cfg: RunConfig, n_samples=2000, seed=1234):
    """Cached empirical D bound over the run's operating box (max over agents)."""
    gop = run_cfg.global_operator
    oc = run_cfg.oracle_config
    key = (gop.name, gop.dim, gop.tau, gop.box_halfwidth, oc.mechanism,
           oc.noise_variance, oc.z_radius, oc.bias_scale, oc.bias_slope)
    if key not in _dbound_cache:
        from .oracle import estimate_d_bound
        _dbound_cache[key] = max(
            estimate_d_bound(oc, op, gop.box_halfwidth, n_samples=n_samples, seed=seed)
            for op in gop.locals)
    return _dbound_cache[key]


def build_run_config(cfg: dict) -> RunConfig:
    """Assemble a validated RunConfig; validator statuses go into the header."""
    cfg = {sec: dict(default_config()[sec], **cfg.get(sec, {})) for sec in SCHEMA}
    net = cfg["network"]
    graph = network.build_graph(net["topology"], net["n_agents"],
                                p=net["edge_prob"], seed=net["graph_seed"])
    mix = network.metropolis_mixing(graph)

    gop = _build_suite(cfg["operators"])
    if gop.n_agents != net["n_agents"]:
        if gop.name == "quadratic":
            gop = operators.make_quadratic_suite(
                cfg["operators"]["dim"], n_agents=net["n_agents"],
                tau=gop.tau, box_halfwidth=gop.box_halfwidth)
        else:
            raise ConfigError(
                f"suite {gop.name!r} fixes n_agents={gop.n_agents}; "
                f"network.n_agents={net['n_agents']} disagrees")
    ocfg = _build_oracle(cfg["oracle"], gop)
    comp = _build_compressor(cfg["compressor"], gop.dim)

    sched = scheduling.make_schedule(cfg["schedule"]["policy"], cfg["run"]["horizon"],
                                     h=cfg["schedule"]["h"], seed=cfg["schedule"]["schedule_seed"])
    steps = scheduling.StepSchedule(kind=cfg["steps"]["kind"],
                                    a=cfg["steps"]["a"], b=cfg["steps"]["b"])

    psi = cfg["consensus"]["psi"]
    psi = scheduling.auto_psi(comp.r) if psi == _AUTO else float(psi)
    gamma = cfg["consensus"]["gamma"]
    if gamma == _AUTO:
        gamma = scheduling.auto_gamma(comp.phi, mix.kappa, mix.alpha, psi, comp.r)
    else:
        gamma = float(gamma)

    inputs = TheoremInputs(gamma=gamma, psi=psi, r=comp.r, phi=comp.phi,
                           alpha=mix.alpha, kappa=mix.kappa, h_max=sched.h_max,
                           a=cfg["steps"]["a"], b=cfg["steps"]["b"],
                           lipschitz=gop.lipschitz, p_bias=ocfg.p,
                           m_growth=ocfg.m_growth)
    statuses = {"theorem1": validate_theorem1(inputs).status}
    statuses["theorem2"] = (validate_theorem2(inputs).status
                            if cfg["steps"]["kind"] == "inv_linear" else "n/a")

    record = cfg["run"]["record_fixpoint"]
    if record not in ("auto", "always", "never"):
        raise ConfigError(f"run.record_fixpoint must be auto|always|never, got {record!r}")
    xstar = None
    if record == "always" or (record == "auto" and gop.contractive):
        xstar = suite_fixed_point(gop)

    echo = copy.deepcopy(cfg)
    echo["consensus"]["gamma"] = gamma      # resolved values echo for audit
    echo["consensus"]["psi"] = psi
    return RunConfig(
        global_operator=gop, oracle_config=ocfg, mixing_matrix=mix,
        compressor_spec=comp, comm_schedule=sched, step_schedule=steps,
        gamma=gamma, psi=psi, horizon=cfg["run"]["horizon"],
        master_seed=cfg["run"]["master_seed"], x0_policy=cfg["run"]["x0_policy"],
        x0_radius=cfg["run"]["x0_radius"],
        scale_policy=cfg["steps"]["scale_policy"], fixed_point=xstar,
        check_replicas=cfg["run"]["check_replicas"],
        validator_status=statuses, config_echo=echo)


def theorem_inputs_from_config(cfg: dict) -> TheoremInputs:
    """Feasibility inputs without running anything (for validate-params)."""
    rc = build_run_config(cfg)
    return TheoremInputs(gamma=rc.gamma, psi=rc.psi, r=rc.compressor_spec.r,
                         phi=rc.compressor_spec.phi, alpha=rc.mixing_matrix.alpha,
                         kappa=rc.mixing_matrix.kappa, h_max=rc.comm_schedule.h_max,
                         a=rc.step_schedule.a, b=rc.step_schedule.b,
                         lipschitz=rc.global_operator.lipschitz,
                         p_bias=rc.oracle_config.p, m_growth=rc.oracle_config.m_growth)

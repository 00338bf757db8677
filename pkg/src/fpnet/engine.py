"""Distributed communication-efficient fixed-point iteration engine.

One run simulates N agents in lockstep for t = 0..T-1:

    local step        z_i = (1 - eta_t) x_i + eta_t T~_i(x_i, xi_i)
    if t+1 is a communication index:
        consensus     x_i <- z_i + gamma sum_j w_ij (xhat_j - xhat_i)
        broadcast     c_i = C((x_i - xhat_i) / s_t)  to all neighbors
        replica sync  xhat_i <- xhat_i + psi s_t decode(c_i)   at every holder
    else:
        x_i <- z_i, estimates unchanged.

Each agent keeps replicas of its neighbors' estimate vectors; because every
holder of xhat_j applies the identical decoded message, replicas stay
bit-identical (asserted when check_replicas is on). Randomness is drawn from
one stream per (agent, iteration, purpose) derived from the master seed, so
traces are bit-reproducible and independent of evaluation order.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import compression, oracle
from .errors import DivergenceError, InvalidParameterError
from .network import MixingMatrix
from .operators import GlobalOperator
from .scheduling import CommSchedule

BLOWUP_LIMIT = 1e12

CSV_COLUMNS = ("t", "residual", "consensus_error", "dist_to_fixpoint",
               "bits_cumulative", "comm_rounds", "eta_t")


@dataclass
class AgentState:
    """Local iterate plus the estimate replicas agent i holds."""

    x: np.ndarray
    x_hat_self: np.ndarray
    x_hat_neighbors: dict


@dataclass
class RunConfig:
    global_operator: GlobalOperator
    oracle_config: oracle.OracleConfig
    mixing_matrix: MixingMatrix
    compressor_spec: compression.CompressorSpec
    comm_schedule: CommSchedule
    step_schedule: object                 # anything with .eta(t)
    gamma: float
    psi: float
    horizon: int
    master_seed: int = 0
    x0_policy: str = "zeros"              # zeros | random_ball
    x0_radius: float = 1.0
    scale_policy: str = "decaying"        # decaying | frozen
    fixed_point: Optional[np.ndarray] = None
    check_replicas: bool = True
    validator_status: Optional[dict] = None
    config_echo: Optional[dict] = None

    def __post_init__(self):
        n = self.global_operator.dim
        if self.compressor_spec.dim != n or self.oracle_config.dim != n:
            raise InvalidParameterError("operator, oracle and compressor dimensions disagree")
        if self.mixing_matrix.n_agents != self.global_operator.n_agents:
            raise InvalidParameterError("mixing matrix size disagrees with operator count")
        if self.scale_policy not in ("decaying", "frozen"):
            raise InvalidParameterError(f"unknown scale policy {self.scale_policy!r}")
        if self.x0_policy not in ("zeros", "random_ball"):
            raise InvalidParameterError(f"unknown x0 policy {self.x0_policy!r}")
        if self.horizon < 1:
            raise InvalidParameterError("horizon must be >= 1")

    @property
    def consensus_params(self):
        """Consensus parameters bundled with the active compressor/graph constants."""
        from .scheduling import ConsensusParams
        return ConsensusParams(gamma=self.gamma, psi=self.psi,
                               r=self.compressor_spec.r, phi=self.compressor_spec.phi,
                               delta_sq=self.compressor_spec.delta_sq,
                               alpha=self.mixing_matrix.alpha,
                               kappa=self.mixing_matrix.kappa)


@dataclass
class RunTrace:
    t: np.ndarray
    residual: np.ndarray
    consensus_error: np.ndarray
    dist_to_fixpoint: np.ndarray
    bits_cumulative: np.ndarray
    comm_rounds: np.ndarray
    eta_t: np.ndarray
    header: dict = field(default_factory=dict)
    bits_cumulative_per_message: Optional[np.ndarray] = None
    bits_cumulative_with_index: Optional[np.ndarray] = None
    final_states: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.t)

    def column(self, name):
        if name not in CSV_COLUMNS:
            raise InvalidParameterError(f"unknown trace column {name!r}")
        return getattr(self, name)

    def to_csv(self, path):
        """17-significant-digit CSV so reruns compare byte-identically."""
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for k in range(len(self.t)):
                row = [str(int(self.t[k]))]
                for col in ("residual", "consensus_error", "dist_to_fixpoint"):
                    row.append(f"{getattr(self, col)[k]:.17g}")
                row.append(f"{self.bits_cumulative[k]:.17g}")
                row.append(str(int(self.comm_rounds[k])))
                row.append(f"{self.eta_t[k]:.17g}")
                fh.write(",".join(row) + "\n")


def read_trace_csv(path) -> RunTrace:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return RunTrace(
        t=data["t"].astype(int), residual=data["residual"],
        consensus_error=data["consensus_error"],
        dist_to_fixpoint=data["dist_to_fixpoint"],
        bits_cumulative=data["bits_cumulative"],
        comm_rounds=data["comm_rounds"].astype(int), eta_t=data["eta_t"],
        header={"path": str(path)})


def km_local_step(x, oracle_sample: oracle.OracleSample, eta_t):
    """Relaxed local update: exact convex combination of x and the sample."""
    if not (0.0 < eta_t < 1.0):
        raise InvalidParameterError(f"relaxation eta_t={eta_t} must lie in (0,1)")
    return (1.0 - eta_t) * x + eta_t * oracle_sample.value


def consensus_and_broadcast(states, w, gamma, psi, compressor, s_t, rngs,
                            check_replicas=True):
    """One communication round over current estimates.

    states[i].x must hold the post-local-step vector z_i. Returns the list of
    broadcast messages; states are updated in place (x and all replicas).
    """
    n_agents = len(states)
    # (i) consensus correction from each agent's own replicas
    new_x = []
    for i, st in enumerate(states):
        mix = np.zeros_like(st.x)
        for j, xhat_j in st.x_hat_neighbors.items():
            mix += w[i, j] * (xhat_j - st.x_hat_self)
        new_x.append(st.x + gamma * mix)
    # (ii) compress innovations against the current self-estimates
    messages = []
    for i, st in enumerate(states):
        msg = compression.scaled_compress(compressor, new_x[i] - st.x_hat_self,
                                          s_t, rngs[i])
        messages.append(msg)
    # (iii) every holder of xhat_i applies the identical decoded update
    for i, msg in enumerate(messages):
        upd = psi * s_t * compression.decode(msg)
        states[i].x_hat_self = states[i].x_hat_self + upd
        for j in states[i].x_hat_neighbors:
            states[j].x_hat_neighbors[i] = states[j].x_hat_neighbors[i] + upd
    for i, st in enumerate(states):
        st.x = new_x[i]
    if check_replicas:
        _assert_replicas_consistent(states)
    return messages


def _assert_replicas_consistent(states):
    for j, st_j in enumerate(states):
        truth = st_j.x_hat_self
        for i in st_j.x_hat_neighbors:
            replica = states[i].x_hat_neighbors[j]
            if not np.array_equal(replica, truth):
                raise AssertionError(
                    f"replica of agent {j}'s estimate held by agent {i} drifted")


def _initial_states(cfg: RunConfig):
    n_agents = cfg.global_operator.n_agents
    dim = cfg.global_operator.dim
    nbrs = cfg.mixing_matrix.neighbor_sets()
    if cfg.x0_policy == "zeros":
        x0 = np.zeros((n_agents, dim))
    else:
        x0 = np.empty((n_agents, dim))
        for i in range(n_agents):
            rng = np.random.default_rng((cfg.master_seed, 2, i))
            v = rng.standard_normal(dim)
            x0[i] = cfg.x0_radius * v / np.linalg.norm(v) * rng.uniform() ** (1.0 / dim)
    states = []
    for i in range(n_agents):
        states.append(AgentState(
            x=x0[i].copy(),
            x_hat_self=x0[i].copy(),
            x_hat_neighbors={j: x0[j].copy() for j in nbrs[i]}))
    return states


def run(cfg: RunConfig) -> RunTrace:
    """Execute one full run and record every iteration."""
    gop = cfg.global_operator
    n_agents, dim = gop.n_agents, gop.dim
    w = cfg.mixing_matrix.w
    comm_set = cfg.comm_schedule.contains()
    T = cfg.horizon
    states = _initial_states(cfg)
    degrees = [len(s.x_hat_neighbors) for s in states]

    s_frozen = float(cfg.step_schedule.eta(0)) if cfg.scale_policy == "frozen" else None
    xstar = None if cfg.fixed_point is None else np.asarray(cfg.fixed_point, dtype=float)

    cols = {name: np.zeros(T + 1) for name in
            ("residual", "consensus_error", "dist_to_fixpoint", "bits_cumulative", "eta_t")}
    comm_rounds = np.zeros(T + 1, dtype=int)
    tgrid = np.arange(T + 1)

    bits = bits_pm = bits_wi = 0.0
    rounds = 0
    box = gop.box_halfwidth
    box_note = None
    bits_pm_col = np.zeros(T + 1)
    bits_wi_col = np.zeros(T + 1)

    x_buf = np.empty((n_agents, dim))
    res_col = cols["residual"]
    ce_col = cols["consensus_error"]
    dist_col = cols["dist_to_fixpoint"]
    bits_col = cols["bits_cumulative"]
    eta_col = cols["eta_t"]

    def record(t):
        for i, s in enumerate(states):
            x_buf[i] = s.x
        X = x_buf
        tg = gop.locals[0].apply(X)
        for op in gop.locals[1:]:
            tg += op.apply(X)
        tg /= n_agents
        tg -= X
        res_col[t] = (tg * tg).sum() / n_agents
        xbar = X.mean(axis=0)
        d = X - xbar
        ce_col[t] = (d * d).sum()
        if xstar is None:
            dist_col[t] = np.nan
        else:
            d = X - xstar
            dist_col[t] = (d * d).sum() / n_agents
        bits_col[t] = bits
        bits_pm_col[t] = bits_pm
        bits_wi_col[t] = bits_wi
        comm_rounds[t] = rounds
        eta_col[t] = cfg.step_schedule.eta(t)
        return X

    for t in range(T):
        X = record(t)
        if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > BLOWUP_LIMIT:
            raise DivergenceError(
                f"state blow-up at t={t}",
                trace=_partial_trace(tgrid, cols, comm_rounds, max(t - 1, 0), cfg))
        if box_note is None and np.max(np.abs(X)) > box:
            box_note = (f"operating box |x| <= {box} first exceeded at t={t} "
                        f"(max |x| = {np.max(np.abs(X)):.4g}); certified constants may not apply")
            warnings.warn(box_note, RuntimeWarning)
        eta = float(cfg.step_schedule.eta(t))
        s_t = s_frozen if s_frozen is not None else eta
        for i in range(n_agents):
            rng = np.random.default_rng((cfg.master_seed, 0, t, i))
            smp = oracle.sample(cfg.oracle_config, gop.locals[i], states[i].x,
                                rng, draw_id=t * n_agents + i)
            states[i].x = km_local_step(states[i].x, smp, eta)
        if (t + 1) in comm_set:
            rngs = [np.random.default_rng((cfg.master_seed, 1, t, i))
                    for i in range(n_agents)]
            messages = consensus_and_broadcast(states, w, cfg.gamma, cfg.psi,
                                               cfg.compressor_spec, s_t, rngs,
                                               check_replicas=cfg.check_replicas)
            rounds += 1
            for i, msg in enumerate(messages):
                bits += degrees[i] * msg.bits          # once per receiving edge
                bits_pm += msg.bits                    # once per broadcast
                bits_wi += degrees[i] * msg.bits_with_index
    X = record(T)
    if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > BLOWUP_LIMIT:
        raise DivergenceError(f"state blow-up at t={T}",
                              trace=_partial_trace(tgrid, cols, comm_rounds, T - 1, cfg))

    header = {
        "config": cfg.config_echo or {},
        "validators": cfg.validator_status or {},
        "master_seed": cfg.master_seed,
        "bit_accounting": "per_edge",
        "notes": [] if box_note is None else [box_note],
    }
    return RunTrace(t=tgrid, residual=cols["residual"],
                    consensus_error=cols["consensus_error"],
                    dist_to_fixpoint=cols["dist_to_fixpoint"],
                    bits_cumulative=cols["bits_cumulative"],
                    comm_rounds=comm_rounds, eta_t=cols["eta_t"], header=header,
                    bits_cumulative_per_message=bits_pm_col,
                    bits_cumulative_with_index=bits_wi_col,
                    final_states=np.stack([s.x for s in states]))


def _partial_trace(tgrid, cols, comm_rounds, t, cfg):
    sl = slice(0, t + 1)
    return RunTrace(t=tgrid[sl], residual=cols["residual"][sl],
                    consensus_error=cols["consensus_error"][sl],
                    dist_to_fixpoint=cols["dist_to_fixpoint"][sl],
                    bits_cumulative=cols["bits_cumulative"][sl],
                    comm_rounds=comm_rounds[sl], eta_t=cols["eta_t"][sl],
                    header={"truncated_at": t, "master_seed": cfg.master_seed})


@dataclass
class SweepResult:
    point: dict
    seed: int
    trace: Optional[RunTrace]
    error: Optional[str] = None


def _grid_points(sweep: dict):
    keys = list(sweep.keys())
    points = [{}]
    for k in keys:
        points = [dict(p, **{k: v}) for p in points for v in sweep[k]]
    return points


def run_sweep(base_config, sweep: dict, seeds, build=None) -> list:
    """One run per (grid point, seed); failures recorded, never fatal.

    base_config is a config dictionary (see fpnet.config); sweep maps
    dotted config keys to value lists. FPNET_THREADS > 1 runs points
    concurrently (runs share nothing mutable).
    """
    if not sweep:
        raise InvalidParameterError("sweep grid must be non-empty")
    if build is None:
        from .config import build_run_config
        build = build_run_config
    jobs = []
    for point in _grid_points(sweep):
        for seed in seeds:
            jobs.append((point, int(seed)))

    def one(job):
        point, seed = job
        try:
            cfg_dict = _apply_point(base_config, point)
            cfg_dict.setdefault("run", {})["master_seed"] = seed
            trace = run(build(cfg_dict))
            return SweepResult(point=point, seed=seed, trace=trace)
        except Exception as exc:  # propagate per-run errors without aborting
            return SweepResult(point=point, seed=seed, trace=None,
                               error=f"{type(exc).__name__}: {exc}")

    n_threads = int(os.environ.get("FPNET_THREADS", "1"))
    if n_threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            return list(pool.map(one, jobs))
    return [one(job) for job in jobs]


def _apply_point(base: dict, point: dict) -> dict:
    cfg = {sec: dict(vals) for sec, vals in base.items()}
    for dotted, value in point.items():
        sec, key = dotted.split(".", 1)
        cfg.setdefault(sec, {})[key] = value
    return cfg


def average_traces(traces) -> RunTrace:
    """Plain arithmetic mean of aligned traces (the expectation estimate)."""
    if not traces:
        raise InvalidParameterError("need at least one trace to average")
    length = {len(tr) for tr in traces}
    if len(length) != 1:
        raise InvalidParameterError("traces must share a horizon to be averaged")
    def mean(attr):
        return np.mean([getattr(tr, attr) for tr in traces], axis=0)
    return RunTrace(
        t=traces[0].t.copy(),
        residual=mean("residual"),
        consensus_error=mean("consensus_error"),
        dist_to_fixpoint=mean("dist_to_fixpoint"),
        bits_cumulative=mean("bits_cumulative"),
        comm_rounds=traces[0].comm_rounds.copy(),
        eta_t=traces[0].eta_t.copy(),
        header={"averaged_over": len(traces),
                "seeds": [tr.header.get("master_seed") for tr in traces]})

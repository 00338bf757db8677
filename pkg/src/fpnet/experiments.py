"""Canned figure-family experiments: presets, sweep execution, manifests.

Each preset wires a benchmark suite, oracle, compressor and schedules into a
sweep. Parameters either come straight from the published settings of the
experiment family or are flagged as toolkit defaults in the preset notes
(echoed into the manifest). Artifacts per run: <run_id>.csv (trace) and
<run_id>.cfg (re-parseable config echo); per preset: verdicts.txt and
manifest.txt with sha256 checksums of every artifact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, scheduling
from .config import (build_run_config, default_config, dumps_config,
                     estimate_config_d_bound)
from .engine import average_traces, run_sweep
from .errors import ConfigError, InvalidParameterError, StaleArtifactError

PRESET_NAMES = ("fig1_compressor_face_off", "fig2_compressor_bits", "fig3_h_sweep",
                "fig4_bias_variance", "fig5_convex_compressors", "fig6_convex_bias")


@dataclass
class ExperimentPreset:
    name: str
    base: dict
    sweep: dict
    default_seeds: tuple = tuple(range(20))
    notes: dict = field(default_factory=dict)
    verdict: str = "theorem1"


def _nonconvex_base(noise_variance):
    cfg = default_config()
    cfg["operators"].update(suite="nonconvex", dim=30)
    cfg["oracle"].update(mechanism="additive_gaussian", noise_variance=noise_variance)
    cfg["compressor"].update(kind="c1", l_bits=2)
    cfg["schedule"].update(policy="fixed_period", h=3)
    cfg["steps"].update(kind="inv_sqrt", a=80.0, b=0.8)
    cfg["consensus"].update(gamma=0.7, psi=0.99)
    cfg["run"].update(horizon=20000)
    return cfg


def _convex_base():
    cfg = default_config()
    cfg["operators"].update(suite="strongly_convex", dim=30)
    # total variance bound sigma^2 = 0.01 spread over the 30 coordinates
    cfg["oracle"].update(mechanism="additive_gaussian", noise_variance=0.01 / 30.0)
    cfg["compressor"].update(kind="c1", l_bits=2)
    cfg["schedule"].update(policy="fixed_period", h=3)
    cfg["steps"].update(kind="inv_linear", a=500.0, b=8.0)
    cfg["consensus"].update(gamma=0.8, psi=0.99)
    cfg["run"].update(horizon=10000)
    return cfg


def preset(name: str) -> ExperimentPreset:
    if name == "fig1_compressor_face_off":
        return ExperimentPreset(
            name=name, base=_nonconvex_base(0.1),
            sweep={"compressor.kind": ["c1", "c2"]},
            notes={"noise": "N(0,0.1) read as per-coordinate variance 0.1",
                   "horizon": "default 2e4 (unspecified upstream)"})
    if name == "fig2_compressor_bits":
        return ExperimentPreset(
            name=name, base=_nonconvex_base(0.01),
            sweep={"compressor.kind": ["c1", "c2", "c3"]},
            notes={"horizon": "default 2e4 (unspecified upstream)"})
    if name == "fig3_h_sweep":
        return ExperimentPreset(
            name=name, base=_nonconvex_base(0.01),
            sweep={"schedule.h": [3, 8, 13]},
            notes={"compressor": "default c1 (unspecified upstream)",
                   "horizon": "default 2e4 (unspecified upstream)"})
    if name == "fig4_bias_variance":
        cfg = _nonconvex_base(0.01)
        cfg["oracle"].update(mechanism="synthetic_bias", bias_slope=0.0,
                             noise_variance=0.01)
        cfg["compressor"].update(kind="c2")
        return ExperimentPreset(
            name=name, base=cfg,
            sweep={"oracle.bias_scale": [0.05, 0.1, 0.2],
                   "oracle.noise_variance": [0.05**2 / 30.0, 0.1**2 / 30.0, 0.2**2 / 30.0]},
            notes={"grid": "default bias/variance grid (unspecified upstream)",
                   "variance axis": "sigma in {0.05,0.1,0.2} total, i.e. sigma^2/n per coordinate"})
    if name == "fig5_convex_compressors":
        return ExperimentPreset(
            name=name, base=_convex_base(),
            sweep={"compressor.kind": ["c1", "c2", "c3"]},
            notes={"noise": "sigma=0.01 read as total variance sigma^2=0.01"},
            verdict="theorem2")
    if name == "fig6_convex_bias":
        cfg = _convex_base()
        cfg["oracle"].update(mechanism="synthetic_bias", bias_slope=0.0,
                             noise_variance=0.01 / 30.0)
        cfg["compressor"].update(kind="c2")
        return ExperimentPreset(
            name=name, base=cfg,
            sweep={"oracle.bias_scale": [0.05, 0.1, 0.2]},
            notes={"grid": "default bias grid (unspecified upstream)",
                   "compressor": "default c2 (unspecified upstream)"},
            verdict="theorem2")
    raise InvalidParameterError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def _run_id(preset_name, point, seed):
    parts = [preset_name]
    for k in sorted(point):
        parts.append(f"{k}={point[k]}")
    parts.append(f"seed={seed}")
    return "__".join(parts)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, paths):
    out_dir = Path(out_dir)
    lines = ["# fpnet artifact manifest"]
    for p in sorted(paths):
        rel = Path(p).relative_to(out_dir)
        lines.append(f"{sha256_file(p)}  {rel}")
    manifest = out_dir / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def verify_manifest(manifest_path):
    """Recompute checksums; raises StaleArtifactError on any mismatch."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    entries = []
    for line in manifest_path.read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        digest, rel = line.split(None, 1)
        target = base / rel
        if not target.exists():
            raise StaleArtifactError(f"manifest entry missing on disk: {rel}")
        if sha256_file(target) != digest:
            raise StaleArtifactError(f"checksum mismatch for {rel}")
        entries.append(target)
    return entries


def _grid_verdict(preset_obj, point, traces):
    """Theorem verdict for one grid point's seed ensemble, if evaluable."""
    try:
        cfg_dict = {s: dict(v) for s, v in preset_obj.base.items()}
        for dotted, value in point.items():
            sec, key = dotted.split(".", 1)
            cfg_dict[sec][key] = value
        rc = build_run_config(cfg_dict)
        d = estimate_config_d_bound(rc)
        z1 = scheduling.zeta1(rc.gamma, rc.compressor_spec.phi, rc.mixing_matrix.kappa,
                              rc.mixing_matrix.alpha, rc.psi, rc.compressor_spec.r)
        z2 = scheduling.zeta2(rc.gamma, rc.compressor_spec.phi, rc.mixing_matrix.kappa,
                              rc.mixing_matrix.alpha, rc.psi, rc.compressor_spec.r,
                              rc.global_operator.n_agents, d)
        args = (z1, z2, rc.global_operator.n_agents, rc.psi, rc.compressor_spec.r,
                rc.compressor_spec.delta_sq, d, rc.comm_schedule.h_max)
        bias = dict(beta=rc.oracle_config.beta, p_bias=rc.oracle_config.p)
        if preset_obj.verdict == "theorem2":
            c2 = scheduling.theorem2_constants(*args)
            return str(analysis.verdict_theorem2(traces, c2, rc.step_schedule.a,
                                                 rc.step_schedule.b, **bias))
        c1 = scheduling.theorem1_constants(*args)
        return str(analysis.verdict_theorem1(traces, c1, rc.step_schedule.a,
                                             rc.step_schedule.b, **bias))
    except Exception as exc:
        return (f"verdict not evaluable for {point}: {type(exc).__name__}: {exc}\n"
                f"  (parameters outside the feasibility region run fine but the "
                f"closed-form constants are undefined)")


def run_preset(preset_obj: ExperimentPreset, seeds=None, out_dir="out",
               horizon=None, with_verdicts=True):
    """Execute all sweep points x seeds; write CSVs, sidecars, verdicts, manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = preset_obj.default_seeds if seeds is None else tuple(seeds)
    base = {s: dict(v) for s, v in preset_obj.base.items()}
    if horizon is not None:
        base["run"]["horizon"] = int(horizon)

    status = build_run_config(base).validator_status
    if "FAIL" in status.values():
        raise ConfigError(f"preset {preset_obj.name} fails validation: {status}")

    results = run_sweep(base, preset_obj.sweep, seeds)
    paths, errors = [], []
    by_point = {}
    for res in results:
        if res.trace is None:
            errors.append(f"{_run_id(preset_obj.name, res.point, res.seed)}: {res.error}")
            continue
        rid = _run_id(preset_obj.name, res.point, res.seed)
        csv_path = out_dir / f"{rid}.csv"
        res.trace.to_csv(csv_path)
        cfg_path = out_dir / f"{rid}.cfg"
        cfg_path.write_text(dumps_config(res.trace.header["config"]))
        paths += [csv_path, cfg_path]
        by_point.setdefault(tuple(sorted(res.point.items())), []).append(res.trace)

    if with_verdicts:
        chunks = [f"preset: {preset_obj.name}", f"seeds: {list(seeds)}",
                  f"validators: {status}"]
        for k, v in preset_obj.notes.items():
            chunks.append(f"note[{k}]: {v}")
        if errors:
            chunks.append("errors:")
            chunks += [f"  {e}" for e in errors]
        for point_key, traces in sorted(by_point.items()):
            point = dict(point_key)
            chunks.append("")
            chunks.append(f"grid point {point}: {len(traces)} seeds, "
                          f"final mean residual {np.mean([tr.residual[-1] for tr in traces]):.4g}")
            if len(traces) >= 2:
                chunks.append(_grid_verdict(preset_obj, point, traces))
        verdict_path = out_dir / "verdicts.txt"
        verdict_path.write_text("\n".join(chunks) + "\n")
        paths.append(verdict_path)

    manifest = write_manifest(out_dir, paths)
    return manifest


def seed_averaged_by_point(results):
    """Group sweep results by grid point and average each group's traces."""
    groups = {}
    for res in results:
        if res.trace is not None:
            groups.setdefault(tuple(sorted(res.point.items())), []).append(res.trace)
    return {k: average_traces(v) for k, v in groups.items()}

"""Command-line entry point.

Subcommands:
    run              one engine run -> <run_id>.csv + <run_id>.cfg sidecar
    sweep            grid sweep from --set-axis specs -> CSVs + manifest
    preset           canned figure-family experiment -> artifact directory
    validate-params  print theorem admissibility conditions with margins
    certify          Monte-Carlo certification of compressor + oracle
    fixpoint         centralized fixed-point oracle at --tol

Exit status 0 on success; nonzero with a one-line 'error: <kind>: <detail>'
on stderr otherwise. A validator FAIL refuses to run unless --allow-warn is
given; WARN proceeds behind a banner.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import compression, config, experiments, oracle
from .engine import run, run_sweep
from .errors import FpnetError
from .operators import find_fixed_point
from .scheduling import validate_theorem1, validate_theorem2


def _load(args):
    cfg = config.load_config(args.config) if args.config else config.default_config()
    cfg = config.apply_overrides(cfg, args.set or [])
    if getattr(args, "seed", None) is not None:
        cfg["run"]["master_seed"] = args.seed
    return cfg


def _gate_on_validators(rc, allow_warn):
    status = rc.validator_status or {}
    if "FAIL" in status.values() and not allow_warn:
        raise FpnetError(f"infeasible parameters (validator FAIL): {status}; "
                         f"pass --allow-warn to run anyway")
    if "WARN" in status.values() or ("FAIL" in status.values() and allow_warn):
        print(f"WARNING: running outside the certified parameter region: {status}")


def _cmd_run(args):
    cfg = _load(args)
    rc = config.build_run_config(cfg)
    _gate_on_validators(rc, args.allow_warn)
    trace = run(rc)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rid = args.run_id or f"run__seed={cfg['run']['master_seed']}"
    (out / f"{rid}.csv").parent.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out / f"{rid}.csv")
    (out / f"{rid}.cfg").write_text(config.dumps_config(trace.header["config"]))
    print(f"wrote {out / (rid + '.csv')} ({len(trace)} rows, "
          f"{int(trace.comm_rounds[-1])} communication rounds, "
          f"{trace.bits_cumulative[-1]:.0f} bits)")
    return 0


def _cmd_sweep(args):
    cfg = _load(args)
    rc = config.build_run_config(cfg)
    _gate_on_validators(rc, args.allow_warn)
    sweep = {}
    for spec in args.axis:
        dotted, _, values = spec.partition("=")
        vals = []
        for v in values.split(","):
            sec, key = dotted.split(".", 1)
            vals.append(config._convert(sec, key, v))
        sweep[dotted] = vals
    seeds = [int(s) for s in args.seeds.split(",")]
    results = run_sweep(cfg, sweep, seeds)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for res in results:
        rid = experiments._run_id("sweep", res.point, res.seed)
        if res.trace is None:
            print(f"error in {rid}: {res.error}")
            continue
        res.trace.to_csv(out / f"{rid}.csv")
        (out / f"{rid}.cfg").write_text(config.dumps_config(res.trace.header["config"]))
        paths += [out / f"{rid}.csv", out / f"{rid}.cfg"]
    manifest = experiments.write_manifest(out, paths)
    print(f"wrote {len(paths)} artifacts + {manifest}")
    return 0


def _cmd_preset(args):
    p = experiments.preset(args.name)
    seeds = None if args.seeds is None else [int(s) for s in args.seeds.split(",")]
    manifest = experiments.run_preset(p, seeds=seeds, out_dir=args.out_dir,
                                      horizon=args.horizon)
    print(f"wrote {manifest}")
    return 0


def _cmd_validate(args):
    cfg = _load(args)
    inputs = config.theorem_inputs_from_config(cfg)
    r1 = validate_theorem1(inputs)
    print(r1)
    if cfg["steps"]["kind"] == "inv_linear" or args.both:
        print(validate_theorem2(inputs))
    return 0


def _cmd_certify(args):
    cfg = _load(args)
    rc = config.build_run_config(cfg)
    comp_report = compression.certify_compressor(rc.compressor_spec,
                                                 n_trials=args.trials,
                                                 seed=cfg["run"]["master_seed"])
    print(comp_report)
    oc = rc.oracle_config
    oc.d_bound = config.estimate_config_d_bound(rc)
    orc_report = oracle.certify_oracle(oc, rc.global_operator.locals[0],
                                       n_samples=args.trials,
                                       sample_box=rc.global_operator.box_halfwidth,
                                       seed=cfg["run"]["master_seed"])
    print(orc_report)
    print(f"certified D bound: {oc.d_bound:.6g}")
    if comp_report.passed and orc_report.passed:
        return 0
    failed = [r.what for r in (comp_report, orc_report) if not r.passed]
    print(f"error: CertificationFailed: {', '.join(failed)}", file=sys.stderr)
    return 3


def _cmd_fixpoint(args):
    cfg = _load(args)
    rc = config.build_run_config(cfg)
    x = find_fixed_point(rc.global_operator, tol=args.tol)
    from .operators import apply_global
    res = float(np.linalg.norm(apply_global(rc.global_operator, x) - x))
    kind = "unique (contractive)" if rc.global_operator.contractive else "local stationary point"
    print(f"fixed point [{kind}], residual {res:.3e}")
    print("x* head:", np.array2string(x[: min(6, len(x))], precision=12))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="fpnet",
                                 description="distributed fixed-point iteration toolbench")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="configuration file (defaults apply if omitted)")
        p.add_argument("--set", action="append", metavar="SEC.KEY=VALUE",
                       help="override a config key (repeatable)")
        if seed:
            p.add_argument("--seed", type=int, help="master seed override")

    p = sub.add_parser("run", help="single engine run")
    common(p)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--run-id", default=None)
    p.add_argument("--allow-warn", action="store_true",
                   help="run even if a validator reports FAIL")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep", help="grid sweep")
    common(p, seed=False)
    p.add_argument("--axis", action="append", required=True,
                   metavar="SEC.KEY=V1,V2,...", help="sweep axis (repeatable)")
    p.add_argument("--seeds", default="0,1,2")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--allow-warn", action="store_true")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("preset", help="canned figure-family experiment")
    p.add_argument("name", choices=experiments.PRESET_NAMES)
    p.add_argument("--seeds", default=None, help="comma list (default: 0..19)")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--horizon", type=int, default=None,
                   help="override the preset horizon (reduced smoke runs)")
    p.set_defaults(fn=_cmd_preset)

    p = sub.add_parser("validate-params", help="theorem admissibility report")
    common(p, seed=False)
    p.add_argument("--both", action="store_true", help="also print the contractive-regime report")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("certify", help="compressor + oracle certification")
    common(p)
    p.add_argument("--trials", type=int, default=10000)
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("fixpoint", help="centralized fixed-point oracle")
    common(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(fn=_cmd_fixpoint)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except FpnetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: FileNotFoundError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

"""Reduced run of the communication-interval sweep preset.

Executes the H in {3, 8, 13} family at a short horizon with two seeds,
writes the artifact directory with manifest and verdicts, and prints the
communication-cost comparison the sweep exists to show.
"""

import numpy as np

from fpnet import preset, run_preset, verify_manifest
from fpnet.engine import read_trace_csv

p = preset("fig3_h_sweep")
manifest = run_preset(p, seeds=[0, 1], out_dir="out/fig3_demo", horizon=600)
entries = verify_manifest(manifest)
print(f"manifest verified: {len(entries)} artifacts")

by_h = {}
for f in sorted(manifest.parent.glob("*.csv")):
    h = int(f.name.split("schedule.h=")[1].split("__")[0])
    tr = read_trace_csv(f)
    by_h.setdefault(h, []).append(tr)

print(f"\n{'H':>3s} {'rounds':>7s} {'bits':>10s} {'final residual':>15s}")
for h, traces in sorted(by_h.items()):
    rounds = int(traces[0].comm_rounds[-1])
    bits = np.mean([t.bits_cumulative[-1] for t in traces])
    res = np.mean([t.residual[-1] for t in traces])
    print(f"{h:3d} {rounds:7d} {bits:10.0f} {res:15.4e}")

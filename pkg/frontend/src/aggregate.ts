import { NoDataError, SchemaError } from "./errors";
import { ManifestEntry } from "./manifest";
import { PlotSpec } from "./plotspec";
import { readSidecarConfig, readTraceCsv, Trace, TraceColumn } from "./trace";

export interface RunArtifact {
    stem: string;
    trace: Trace;
    config: Map<string, string>;
}

export interface GroupedCurve {
    group: string;                 // value of the group_by key
    x: number[];                   // seed-averaged x column
    mean: number[];                // seed-averaged metric
    lo: number[];                  // min envelope across seeds
    hi: number[];                  // max envelope across seeds
    seeds: number;
}

/** Pair each trace CSV in the manifest with its .cfg sidecar. */
export function collectRuns(entries: ManifestEntry[]): RunArtifact[] {
    const byStem = new Map<string, { csv?: string; cfg?: string }>();
    for (const e of entries) {
        if (e.relPath.endsWith(".csv")) {
            const stem = e.relPath.slice(0, -4);
            byStem.set(stem, { ...(byStem.get(stem) ?? {}), csv: e.absPath });
        } else if (e.relPath.endsWith(".cfg")) {
            const stem = e.relPath.slice(0, -4);
            byStem.set(stem, { ...(byStem.get(stem) ?? {}), cfg: e.absPath });
        }
    }
    const runs: RunArtifact[] = [];
    for (const [stem, files] of [...byStem.entries()].sort()) {
        if (!files.csv || !files.cfg) continue;
        runs.push({ stem, trace: readTraceCsv(files.csv), config: readSidecarConfig(files.cfg) });
    }
    if (runs.length === 0) {
        throw new NoDataError("manifest lists no (csv, cfg) run pairs");
    }
    return runs;
}

function mean(values: number[]): number {
    let s = 0;
    for (const v of values) s += v;
    return s / values.length;
}

/** Group runs by the sweep axis and seed-average each group's curves. */
export function groupAndAverage(runs: RunArtifact[], spec: PlotSpec): GroupedCurve[] {
    const xColumn: TraceColumn = spec.x_axis === "bits" ? "bits_cumulative" : "t";
    const groups = new Map<string, RunArtifact[]>();
    for (const run of runs) {
        const value = run.config.get(spec.group_by);
        if (value === undefined) {
            throw new SchemaError(`run ${run.stem} has no config key '${spec.group_by}'`);
        }
        groups.set(value, [...(groups.get(value) ?? []), run]);
    }
    // grouped curves must share the config apart from the sweep axis and seed
    for (const [value, members] of groups) {
        const ref = members[0].config;
        for (const run of members.slice(1)) {
            for (const [key, v] of ref) {
                if (key === spec.group_by || key === "run.master_seed") continue;
                if (run.config.get(key) !== v) {
                    throw new SchemaError(
                        `group '${value}' mixes configs: ${run.stem} differs at ${key}`);
                }
            }
        }
    }
    const curves: GroupedCurve[] = [];
    for (const [value, members] of [...groups.entries()].sort()) {
        const len = Math.min(...members.map((m) => m.trace.length));
        const x: number[] = [], m: number[] = [], lo: number[] = [], hi: number[] = [];
        for (let i = 0; i < len; i++) {
            const ys = members.map((r) => r.trace.columns[spec.y_metric][i]);
            if (ys.some((v) => Number.isNaN(v))) continue;  // unrecorded metric rows
            x.push(mean(members.map((r) => r.trace.columns[xColumn][i])));
            m.push(mean(ys));
            lo.push(Math.min(...ys));
            hi.push(Math.max(...ys));
        }
        if (m.length === 0) {
            throw new NoDataError(`metric '${spec.y_metric}' has no finite values in group '${value}'`);
        }
        curves.push({ group: value, x, mean: m, lo, hi, seeds: members.length });
    }
    return curves;
}

import { createHash } from "node:crypto";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeEach, describe, expect, it } from "vitest";

import { collectRuns, groupAndAverage } from "../src/aggregate";
import { NoDataError, SchemaError, StaleArtifactError } from "../src/errors";
import { loadManifest } from "../src/manifest";
import { parsePlotSpec } from "../src/plotspec";
import { render } from "../src/render";

const HEADER = "t,residual,consensus_error,dist_to_fixpoint,bits_cumulative,comm_rounds,eta_t";

function traceCsv(rows: number[][]): string {
    return [HEADER, ...rows.map((r) => r.join(","))].join("\n") + "\n";
}

function sidecar(h: number, seed: number): string {
    return [
        "[schedule]", "policy = fixed_period", `h = ${h}`, "",
        "[run]", `master_seed = ${seed}`, "horizon = 4", "",
    ].join("\n");
}

/** Synthetic sweep: 3 values of schedule.h, 2 seeds each. Bits scale ~ 1/h. */
function makeArtifacts(dir: string): string {
    const files: string[] = [];
    for (const h of [3, 8, 13]) {
        for (const seed of [0, 1]) {
            const stem = `fig3__schedule.h=${h}__seed=${seed}`;
            const rows = [0, 1, 2, 3, 4].map((t) => [
                t,
                1.0 / (t + 1) + 0.001 * seed,
                0.5 / (t + 1),
                NaN,
                (t * 924) / h,
                Math.floor(t / h),
                0.1,
            ]);
            writeFileSync(join(dir, `${stem}.csv`), traceCsv(rows));
            writeFileSync(join(dir, `${stem}.cfg`), sidecar(h, seed));
            files.push(`${stem}.csv`, `${stem}.cfg`);
        }
    }
    const lines = ["# fpnet artifact manifest"];
    for (const f of files.sort()) {
        const digest = createHash("sha256").update(readFileSync(join(dir, f))).digest("hex");
        lines.push(`${digest}  ${f}`);
    }
    const manifest = join(dir, "manifest.txt");
    writeFileSync(manifest, lines.join("\n") + "\n");
    return manifest;
}

const SPEC_BITS = JSON.stringify({
    x_axis: "bits", y_metric: "residual", group_by: "schedule.h", scale: "semilogy",
});

let dir: string;

beforeEach(() => {
    dir = mkdtempSync(join(tmpdir(), "fpnet-plots-"));
});

describe("manifest verification", () => {
    it("accepts intact artifacts", () => {
        const manifest = makeArtifacts(dir);
        expect(loadManifest(manifest).length).toBe(12);
    });

    it("raises a stale-artifact error on checksum mismatch", () => {
        const manifest = makeArtifacts(dir);
        writeFileSync(join(dir, "fig3__schedule.h=3__seed=0.csv"), traceCsv([[0, 1, 1, NaN, 0, 0, 0.1]]));
        expect(() => loadManifest(manifest)).toThrow(StaleArtifactError);
    });

    it("raises on missing files", () => {
        const manifest = join(dir, "manifest.txt");
        writeFileSync(manifest, "deadbeef  nothere.csv\n");
        expect(() => loadManifest(manifest)).toThrow(StaleArtifactError);
    });
});

describe("plot spec validation", () => {
    it("accepts the documented shape", () => {
        const spec = parsePlotSpec(SPEC_BITS);
        expect(spec.group_by).toBe("schedule.h");
    });

    it("rejects unknown metrics and malformed keys", () => {
        expect(() => parsePlotSpec(JSON.stringify({
            x_axis: "bits", y_metric: "speed", group_by: "schedule.h", scale: "semilogy",
        }))).toThrow(SchemaError);
        expect(() => parsePlotSpec(JSON.stringify({
            x_axis: "bits", y_metric: "residual", group_by: "h", scale: "semilogy",
        }))).toThrow(SchemaError);
        expect(() => parsePlotSpec("not json")).toThrow(SchemaError);
    });
});

describe("aggregation", () => {
    it("seed-averages with a plain mean", () => {
        const manifest = makeArtifacts(dir);
        const runs = collectRuns(loadManifest(manifest));
        const curves = groupAndAverage(runs, parsePlotSpec(SPEC_BITS));
        const h3 = curves.find((c) => c.group === "3")!;
        // residual rows: 1/(t+1) and 1/(t+1) + 0.001 -> mean has +0.0005
        expect(h3.mean[0]).toBeCloseTo(1.0005, 12);
        expect(h3.lo[0]).toBeCloseTo(1.0, 12);
        expect(h3.hi[0]).toBeCloseTo(1.001, 12);
        expect(h3.seeds).toBe(2);
    });

    it("rejects mixed configs inside one group", () => {
        const manifest = makeArtifacts(dir);
        // corrupt one sidecar: same h but different horizon
        const stem = "fig3__schedule.h=8__seed=1";
        writeFileSync(join(dir, `${stem}.cfg`),
            sidecar(8, 1).replace("horizon = 4", "horizon = 9"));
        // re-hash the manifest so verification passes and grouping is reached
        const entries = readFileSync(manifest, "utf8").split("\n");
        const fixed = entries.map((line) => {
            if (!line.includes(`${stem}.cfg`)) return line;
            const digest = createHash("sha256")
                .update(readFileSync(join(dir, `${stem}.cfg`))).digest("hex");
            return `${digest}  ${stem}.cfg`;
        });
        writeFileSync(manifest, fixed.join("\n"));
        const runs = collectRuns(loadManifest(manifest));
        expect(() => groupAndAverage(runs, parsePlotSpec(SPEC_BITS))).toThrow(SchemaError);
    });

    it("errors when the metric column has no finite values", () => {
        const manifest = makeArtifacts(dir);
        const runs = collectRuns(loadManifest(manifest));
        const spec = parsePlotSpec(SPEC_BITS.replace("residual", "dist_to_fixpoint"));
        expect(() => groupAndAverage(runs, spec)).toThrow(NoDataError);
    });
});

describe("rendering", () => {
    it("draws one curve per group with terminal-bits ordering", () => {
        const manifest = makeArtifacts(dir);
        const out = join(dir, "fig.svg");
        render(manifest, writeSpec(dir, SPEC_BITS), out);
        const svg = readFileSync(out, "utf8");
        expect(svg.match(/class="curve"/g)?.length).toBe(3);
        const terminals = [...svg.matchAll(/data-group="(\d+)" data-terminal-x="([0-9.eE+-]+)"/g)]
            .map((m) => [m[1], Number(m[2])] as const);
        const ordered = [...terminals].sort((a, b) => a[1] - b[1]).map(([g]) => g);
        expect(ordered).toEqual(["13", "8", "3"]);  // fewer rounds -> fewer bits
    });

    it("renders byte-identically on reruns", () => {
        const manifest = makeArtifacts(dir);
        const a = join(dir, "a.svg");
        const b = join(dir, "b.svg");
        const spec = writeSpec(dir, SPEC_BITS);
        render(manifest, spec, a);
        render(manifest, spec, b);
        expect(readFileSync(a)).toEqual(readFileSync(b));
    });

    it("writes nothing on an empty manifest", () => {
        const manifest = join(dir, "manifest.txt");
        writeFileSync(manifest, "# empty\n");
        const out = join(dir, "nothing.svg");
        expect(() => render(manifest, writeSpec(dir, SPEC_BITS), out)).toThrow(NoDataError);
        expect(existsSync(out)).toBe(false);
    });

    it("raises a schema error for a missing column", () => {
        const manifest = makeArtifacts(dir);
        const stem = "fig3__schedule.h=3__seed=0";
        const broken = readFileSync(join(dir, `${stem}.csv`), "utf8")
            .replace("bits_cumulative", "bits");
        writeFileSync(join(dir, `${stem}.csv`), broken);
        const entries = readFileSync(manifest, "utf8").split("\n").map((line) => {
            if (!line.includes(`${stem}.csv`)) return line;
            const digest = createHash("sha256")
                .update(readFileSync(join(dir, `${stem}.csv`))).digest("hex");
            return `${digest}  ${stem}.csv`;
        });
        writeFileSync(manifest, entries.join("\n"));
        const out = join(dir, "broken.svg");
        expect(() => render(manifest, writeSpec(dir, SPEC_BITS), out)).toThrow(SchemaError);
        expect(existsSync(out)).toBe(false);
    });

    it("supports iteration-axis overlays", () => {
        const manifest = makeArtifacts(dir);
        const spec = writeSpec(dir, JSON.stringify({
            x_axis: "iterations", y_metric: "consensus_error",
            group_by: "schedule.h", scale: "semilogy",
        }));
        const out = join(dir, "iters.svg");
        render(manifest, spec, out);
        expect(readFileSync(out, "utf8").match(/class="curve"/g)?.length).toBe(3);
    });
});

function writeSpec(base: string, body: string): string {
    const p = join(base, "spec.json");
    writeFileSync(p, body);
    return p;
}

import { readFileSync } from "node:fs";
import { SchemaError } from "./errors";

export const TRACE_COLUMNS = [
    "t", "residual", "consensus_error", "dist_to_fixpoint",
    "bits_cumulative", "comm_rounds", "eta_t",
] as const;

export type TraceColumn = (typeof TRACE_COLUMNS)[number];

export interface Trace {
    columns: Record<TraceColumn, number[]>;
    length: number;
}

/** Parse one engine trace CSV, enforcing the exact column schema. */
export function readTraceCsv(path: string): Trace {
    const lines = readFileSync(path, "utf8").split("\n").filter((l) => l.length > 0);
    if (lines.length < 2) throw new SchemaError(`trace ${path} has no data rows`);
    const header = lines[0].split(",");
    for (const col of TRACE_COLUMNS) {
        if (!header.includes(col)) {
            throw new SchemaError(`trace ${path} is missing column '${col}'`);
        }
    }
    const index = new Map(header.map((h, i) => [h, i]));
    const columns = Object.fromEntries(
        TRACE_COLUMNS.map((c) => [c, new Array<number>(lines.length - 1)]),
    ) as Record<TraceColumn, number[]>;
    for (let r = 1; r < lines.length; r++) {
        const cells = lines[r].split(",");
        for (const col of TRACE_COLUMNS) {
            columns[col][r - 1] = Number(cells[index.get(col)!]);
        }
    }
    return { columns, length: lines.length - 1 };
}

/** Parse a run's .cfg sidecar into section.key -> string value. */
export function readSidecarConfig(path: string): Map<string, string> {
    const out = new Map<string, string>();
    let section = "";
    for (const raw of readFileSync(path, "utf8").split("\n")) {
        const line = raw.trim();
        if (!line || line.startsWith("#") || line.startsWith(";")) continue;
        if (line.startsWith("[") && line.endsWith("]")) {
            section = line.slice(1, -1).trim();
            continue;
        }
        const eq = line.indexOf("=");
        if (eq < 0 || !section) continue;
        out.set(`${section}.${line.slice(0, eq).trim()}`, line.slice(eq + 1).trim());
    }
    return out;
}

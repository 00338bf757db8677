import { readFileSync } from "node:fs";
import { SchemaError } from "./errors";

export interface PlotSpec {
    x_axis: "iterations" | "bits";
    y_metric: "residual" | "consensus_error" | "dist_to_fixpoint";
    group_by: string;               // dotted config key, e.g. "schedule.h"
    scale: "loglog" | "semilogy";
}

const X_AXES = ["iterations", "bits"];
const METRICS = ["residual", "consensus_error", "dist_to_fixpoint"];
const SCALES = ["loglog", "semilogy"];

export function parsePlotSpec(text: string): PlotSpec {
    let raw: unknown;
    try {
        raw = JSON.parse(text);
    } catch (e) {
        throw new SchemaError(`plot spec is not valid JSON: ${(e as Error).message}`);
    }
    const obj = raw as Record<string, unknown>;
    for (const key of ["x_axis", "y_metric", "group_by", "scale"]) {
        if (typeof obj[key] !== "string") {
            throw new SchemaError(`plot spec missing string field '${key}'`);
        }
    }
    if (!X_AXES.includes(obj.x_axis as string)) {
        throw new SchemaError(`x_axis must be one of ${X_AXES}`);
    }
    if (!METRICS.includes(obj.y_metric as string)) {
        throw new SchemaError(`y_metric must be one of ${METRICS}`);
    }
    if (!SCALES.includes(obj.scale as string)) {
        throw new SchemaError(`scale must be one of ${SCALES}`);
    }
    if (!(obj.group_by as string).includes(".")) {
        throw new SchemaError("group_by must be a dotted config key like 'schedule.h'");
    }
    return obj as unknown as PlotSpec;
}

export function loadPlotSpec(path: string): PlotSpec {
    return parsePlotSpec(readFileSync(path, "utf8"));
}

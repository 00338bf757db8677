import { writeFileSync } from "node:fs";
import { basename } from "node:path";
import { collectRuns, groupAndAverage } from "./aggregate";
import { loadManifest } from "./manifest";
import { loadPlotSpec } from "./plotspec";
import { renderSvg } from "./svg";

/** Verify the manifest, aggregate its runs, render, and write the image. */
export function render(manifestPath: string, specPath: string, outImage: string): void {
    const spec = loadPlotSpec(specPath);
    const entries = loadManifest(manifestPath);
    const runs = collectRuns(entries);
    const curves = groupAndAverage(runs, spec);
    const title = `${spec.y_metric} vs ${spec.x_axis} by ${spec.group_by} (${basename(manifestPath)})`;
    const svg = renderSvg(curves, spec, title);
    // write only after a successful render: errors must not leave empty images
    writeFileSync(outImage, svg);
}

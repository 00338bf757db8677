import { NoDataError } from "./errors";
import { GroupedCurve } from "./aggregate";
import { PlotSpec } from "./plotspec";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 24, top: 28, bottom: 52 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

interface Scale {
    (v: number): number;
}

function log10(v: number): number {
    return Math.log(v) / Math.LN10;
}

function makeScale(lo: number, hi: number, outLo: number, outHi: number, log: boolean): Scale {
    const a = log ? log10(lo) : lo;
    const b = log ? log10(hi) : hi;
    const span = b - a || 1;
    return (v: number) => {
        const t = ((log ? log10(v) : v) - a) / span;
        return outLo + t * (outHi - outLo);
    };
}

function powerTicks(lo: number, hi: number): number[] {
    const ticks: number[] = [];
    for (let e = Math.ceil(log10(lo) - 1e-9); e <= Math.floor(log10(hi) + 1e-9); e++) {
        ticks.push(Math.pow(10, e));
    }
    return ticks;
}

function linearTicks(lo: number, hi: number, count = 6): number[] {
    const step = (hi - lo) / (count - 1);
    return Array.from({ length: count }, (_, i) => lo + i * step);
}

function fmtTick(v: number): string {
    if (v === 0) return "0";
    const e = Math.round(log10(Math.abs(v)));
    if (Math.abs(v - Math.pow(10, e)) / Math.abs(v) < 1e-9) return `1e${e}`;
    return v.toPrecision(3);
}

/** Deterministic SVG line chart with seed-averaged curves and envelopes. */
export function renderSvg(curves: GroupedCurve[], spec: PlotSpec, title: string): string {
    const xLog = spec.scale === "loglog" || spec.x_axis === "bits";
    // log-y always: drop nonpositive values (and x <= 0 when x is log)
    const pts = curves.map((c) => {
        const x: number[] = [], m: number[] = [], lo: number[] = [], hi: number[] = [];
        for (let i = 0; i < c.mean.length; i++) {
            if (c.mean[i] <= 0 || c.lo[i] <= 0) continue;
            if (xLog && c.x[i] <= 0) continue;
            x.push(c.x[i]);
            m.push(c.mean[i]);
            lo.push(c.lo[i]);
            hi.push(c.hi[i]);
        }
        return { ...c, x, mean: m, lo, hi };
    }).filter((c) => c.x.length > 1);
    if (pts.length === 0) {
        throw new NoDataError("no positive data points to draw on a log scale");
    }

    const xs = pts.flatMap((c) => c.x);
    const ysAll = pts.flatMap((c) => [...c.lo, ...c.hi]);
    const xMin = Math.min(...xs), xMax = Math.max(...xs);
    const yMin = Math.min(...ysAll), yMax = Math.max(...ysAll);
    const sx = makeScale(xMin, xMax, MARGIN.left, WIDTH - MARGIN.right, xLog);
    const sy = makeScale(yMin, yMax, HEIGHT - MARGIN.bottom, MARGIN.top, true);

    const out: string[] = [];
    out.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`);
    out.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
    out.push(`<text x="${WIDTH / 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">${title}</text>`);

    const xTicks = xLog ? powerTicks(xMin, xMax) : linearTicks(xMin, xMax);
    for (const v of xTicks) {
        const px = sx(v).toFixed(2);
        out.push(`<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${HEIGHT - MARGIN.bottom}" stroke="#dddddd" stroke-width="1"/>`);
        out.push(`<text x="${px}" y="${HEIGHT - MARGIN.bottom + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmtTick(v)}</text>`);
    }
    for (const v of powerTicks(yMin, yMax)) {
        const py = sy(v).toFixed(2);
        out.push(`<line x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}" stroke="#dddddd" stroke-width="1"/>`);
        out.push(`<text x="${MARGIN.left - 6}" y="${py}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">${fmtTick(v)}</text>`);
    }
    out.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${WIDTH - MARGIN.left - MARGIN.right}" height="${HEIGHT - MARGIN.top - MARGIN.bottom}" fill="none" stroke="#333333"/>`);
    const xLabel = spec.x_axis === "bits" ? "cumulative bits" : "iteration t";
    out.push(`<text x="${WIDTH / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">${xLabel}</text>`);
    out.push(`<text x="16" y="${HEIGHT / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 ${HEIGHT / 2})">${spec.y_metric}</text>`);

    pts.forEach((c, k) => {
        const color = PALETTE[k % PALETTE.length];
        const forward = c.x.map((x, i) => `${sx(x).toFixed(2)},${sy(c.hi[i]).toFixed(2)}`);
        const backward = [...c.x.keys()].reverse().map(
            (i) => `${sx(c.x[i]).toFixed(2)},${sy(c.lo[i]).toFixed(2)}`);
        out.push(`<polygon class="envelope" fill="${color}" fill-opacity="0.15" stroke="none" points="${forward.join(" ")} ${backward.join(" ")}"/>`);
    });
    pts.forEach((c, k) => {
        const color = PALETTE[k % PALETTE.length];
        const points = c.x.map((x, i) => `${sx(x).toFixed(2)},${sy(c.mean[i]).toFixed(2)}`);
        const terminal = c.x[c.x.length - 1];
        out.push(`<polyline class="curve" data-group="${c.group}" data-terminal-x="${terminal.toExponential(6)}" fill="none" stroke="${color}" stroke-width="1.6" points="${points.join(" ")}"/>`);
    });
    pts.forEach((c, k) => {
        const color = PALETTE[k % PALETTE.length];
        const y = MARGIN.top + 14 + 16 * k;
        out.push(`<line x1="${WIDTH - 160}" y1="${y}" x2="${WIDTH - 136}" y2="${y}" stroke="${color}" stroke-width="2"/>`);
        out.push(`<text x="${WIDTH - 130}" y="${y + 4}" font-family="sans-serif" font-size="11">${c.group} (${c.seeds} seeds)</text>`);
    });
    out.push("</svg>");
    return out.join("\n") + "\n";
}

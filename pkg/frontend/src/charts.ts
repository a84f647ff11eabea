/**
 * Chart builders for the three experiment file types.
 *
 * Every figure is drawn twice through one code path: into an SVG document
 * (vector) and onto a raster canvas (PNG), so both outputs always agree.
 */

import { numbers, Table } from "./csv";
import { encodePng } from "./png";
import { BLACK, Canvas, parseColor, Rgb } from "./raster";
import { extent, formatTick, linearScale, Scale, ticks } from "./scales";
import { SvgDocument } from "./svg";

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const GRAY = "#888888";

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 64, right: 20, top: 36, bottom: 48 };

export interface Figure {
    svg: string;
    png: Buffer;
}

class Panel {
    readonly svg = new SvgDocument(WIDTH, HEIGHT);
    readonly canvas = new Canvas(WIDTH, HEIGHT);
    readonly xs: Scale;
    readonly ys: Scale;
    private legendSlot = 0;

    constructor(
        xDomain: [number, number],
        yDomain: [number, number],
        title: string,
        xLabel: string,
        yLabel: string,
    ) {
        this.xs = linearScale(xDomain[0], xDomain[1], MARGIN.left, WIDTH - MARGIN.right);
        this.ys = linearScale(yDomain[0], yDomain[1], HEIGHT - MARGIN.bottom, MARGIN.top);
        this.frame(title, xLabel, yLabel);
    }

    private frame(title: string, xLabel: string, yLabel: string): void {
        const x0 = MARGIN.left;
        const x1 = WIDTH - MARGIN.right;
        const y0 = HEIGHT - MARGIN.bottom;
        const y1 = MARGIN.top;
        this.svg.text(WIDTH / 2, 20, title, 13, "middle");
        this.canvas.text(WIDTH / 2 - title.length * 3, 12, title, BLACK);
        this.svg.line(x0, y0, x1, y0, "#000000");
        this.svg.line(x0, y0, x0, y1, "#000000");
        this.canvas.line(x0, y0, x1, y0, BLACK);
        this.canvas.line(x0, y0, x0, y1, BLACK);
        for (const t of ticks(this.xs.domainMin, this.xs.domainMax)) {
            const px = this.xs.map(t);
            this.svg.line(px, y0, px, y0 + 4, "#000000");
            this.svg.text(px, y0 + 16, formatTick(t), 10, "middle");
            this.canvas.line(px, y0, px, y0 + 4, BLACK);
            this.canvas.text(px - formatTick(t).length * 3, y0 + 8, formatTick(t), BLACK);
        }
        for (const t of ticks(this.ys.domainMin, this.ys.domainMax)) {
            const py = this.ys.map(t);
            this.svg.line(x0 - 4, py, x0, py, "#000000");
            this.svg.text(x0 - 6, py + 3, formatTick(t), 10, "end");
            this.canvas.line(x0 - 4, py, x0, py, BLACK);
            this.canvas.text(x0 - 8 - formatTick(t).length * 6, py - 3, formatTick(t), BLACK);
        }
        this.svg.text((x0 + x1) / 2, HEIGHT - 12, xLabel, 11, "middle");
        this.canvas.text((x0 + x1) / 2 - xLabel.length * 3, HEIGHT - 14, xLabel, BLACK);
        this.svg.text(14, (y0 + y1) / 2, yLabel, 11, "middle");
        this.canvas.text(4, (y0 + y1) / 2, yLabel, BLACK);
    }

    curve(xs: number[], ys: number[], color: string, cls?: string, dashed = false): void {
        const pts: Array<[number, number]> = [];
        for (let i = 0; i < xs.length; i++) {
            if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
                pts.push([this.xs.map(xs[i]), this.ys.map(ys[i])]);
            }
        }
        if (pts.length === 0) return;
        this.svg.polyline(pts, color, 1.5, cls);
        const c = parseColor(color);
        for (let i = 1; i < pts.length; i++) {
            if (dashed) {
                this.canvas.dashedLine(pts[i - 1][0], pts[i - 1][1], pts[i][0], pts[i][1], c);
            } else {
                this.canvas.line(pts[i - 1][0], pts[i - 1][1], pts[i][0], pts[i][1], c, true);
            }
        }
    }

    markers(xs: number[], ys: number[], color: string): void {
        const c = parseColor(color);
        for (let i = 0; i < xs.length; i++) {
            if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
            const px = this.xs.map(xs[i]);
            const py = this.ys.map(ys[i]);
            this.svg.circle(px, py, 3, color);
            this.canvas.marker(px, py, c);
        }
    }

    errorBars(xs: number[], ys: number[], errs: number[], color: string): void {
        const c = parseColor(color);
        for (let i = 0; i < xs.length; i++) {
            if (!Number.isFinite(errs[i]) || errs[i] <= 0) continue;
            const px = this.xs.map(xs[i]);
            const lo = this.ys.map(ys[i] - errs[i]);
            const hi = this.ys.map(ys[i] + errs[i]);
            this.svg.line(px, lo, px, hi, color, 1);
            this.svg.line(px - 3, lo, px + 3, lo, color, 1);
            this.svg.line(px - 3, hi, px + 3, hi, color, 1);
            this.canvas.line(px, lo, px, hi, c);
            this.canvas.line(px - 3, lo, px + 3, lo, c);
            this.canvas.line(px - 3, hi, px + 3, hi, c);
        }
    }

    hline(y: number, color: string, label: string, cls?: string): void {
        const py = this.ys.map(y);
        const x0 = MARGIN.left;
        const x1 = WIDTH - MARGIN.right;
        this.svg.line(x0, py, x1, py, color, 1, "6,4");
        const c = parseColor(color);
        this.canvas.dashedLine(x0, py, x1, py, c);
        if (label) {
            this.svg.text(x1 - 4, py - 4, label, 10, "end");
            this.canvas.text(x1 - label.length * 6 - 4, py - 10, label, c);
        }
        if (cls) {
            this.svg.polyline([[x0, py], [x1, py]], color, 0.5, cls);
        }
    }

    legend(label: string, color: string): void {
        const x = MARGIN.left + 10;
        const y = MARGIN.top + 8 + this.legendSlot * 16;
        this.legendSlot += 1;
        this.svg.line(x, y, x + 18, y, color, 2);
        this.svg.text(x + 24, y + 4, label, 10);
        const c = parseColor(color);
        this.canvas.line(x, y, x + 18, y, c, true);
        this.canvas.text(x + 24, y - 3, label, c);
    }

    figure(): Figure {
        return {
            svg: this.svg.render(),
            png: encodePng(WIDTH, HEIGHT, this.canvas.data),
        };
    }
}

export interface LabeledTable {
    label: string;
    table: Table;
}

/** Invasion probability vs a: measured fractions with error bars, bracketed
 * by the survival-probability curves of the bounding branching processes. */
export function invasionProbabilityFigure(sweeps: LabeledTable[], dbpc?: Table): Figure {
    if (sweeps.length === 0) throw new Error("need at least one sweep table");
    const allA = sweeps.flatMap(({ table }) => numbers(table, "a"));
    const panel = new Panel(
        extent(allA),
        [0, 1.05],
        sweeps.length > 1 ? "invasion probability (comparison)" : `invasion probability (${sweeps[0].label})`,
        "a (brood scale)",
        "probability",
    );
    sweeps.forEach(({ label, table }, i) => {
        const color = PALETTE[i % PALETTE.length];
        const a = numbers(table, "a");
        const fraction = numbers(table, "fraction");
        const stderr = numbers(table, "stderr");
        panel.markers(a, fraction, color);
        panel.errorBars(a, fraction, stderr.map((s) => 3 * s), color);
        panel.curve(a, fraction, color);
        panel.legend(`${label} fraction`, color);
    });
    // bound curves come from the first sweep (they depend only on a)
    const first = sweeps[0].table;
    const a = numbers(first, "a");
    panel.curve(a, numbers(first, "pi_upper"), "#d62728", "pi-upper", true);
    panel.legend("survival upper bound", "#d62728");
    panel.curve(a, numbers(first, "pi_lower"), "#2ca02c", "pi-lower", true);
    panel.legend("survival lower bound", "#2ca02c");
    if (dbpc) {
        panel.curve(numbers(dbpc, "a"), numbers(dbpc, "pi_hat"), "#9467bd", "pi-dbpc", true);
        panel.legend("survival estimate", "#9467bd");
    }
    return panel.figure();
}

/** Invasion times per replicate against the predicted window edges. */
export function invasionTimeFigure(time: Table): Figure {
    const replicate = numbers(time, "replicate");
    const T = numbers(time, "T");
    const lower = numbers(time, "T_lower");
    const upperBase = numbers(time, "T_upper_base");
    const minusInitial = numbers(time, "T_minus_initial");
    const yDomain = extent([...T, ...lower, ...upperBase, ...minusInitial], 0.1);
    const panel = new Panel(
        extent(replicate),
        yDomain,
        "invasion time per successful replicate",
        "replicate",
        "generations",
    );
    panel.markers(replicate, T, PALETTE[0]);
    panel.legend("T", PALETTE[0]);
    if (minusInitial.some((v) => Number.isFinite(v))) {
        panel.markers(replicate, minusInitial, PALETTE[4]);
        panel.legend("T minus initial phase", PALETTE[4]);
    }
    panel.hline(lower[0], "#d62728", `lower = ${formatTick(lower[0])}`, "t-lower");
    panel.hline(upperBase[0], "#2ca02c", `upper base = ${formatTick(upperBase[0])}`, "t-upper");
    return panel.figure();
}

/** Wavefront traces: farthest half-radius shell per generation, one polyline
 * per replicate, against the slope-1 and slope-2 reference lines. */
export function wavefrontFigure(wavefront: Table): Figure {
    const replicate = numbers(wavefront, "replicate");
    const g = numbers(wavefront, "g");
    const d = numbers(wavefront, "box_distance");
    const gMax = Math.max(...g.filter(Number.isFinite), 1);
    const dMax = Math.max(...d.filter(Number.isFinite), 1);
    const panel = new Panel(
        [0, gMax * 1.02],
        [0, dMax * 1.08],
        "wavefront box distance per generation",
        "generation",
        "box distance (r/2 units)",
    );
    const ids = [...new Set(replicate)];
    ids.forEach((id, i) => {
        const xs: number[] = [];
        const ys: number[] = [];
        for (let row = 0; row < replicate.length; row++) {
            if (replicate[row] === id) {
                xs.push(g[row]);
                ys.push(d[row]);
            }
        }
        panel.curve(xs, ys, PALETTE[i % PALETTE.length], `trace-${id}`);
    });
    const gRef = Math.min(gMax, dMax);
    panel.curve([0, gRef], [0, gRef], GRAY, "slope-one", true);
    panel.curve([0, Math.min(gMax, dMax / 2)], [0, Math.min(gMax * 2, dMax)], GRAY, "slope-two", true);
    panel.legend("slope 1 and slope 2 references", GRAY);
    return panel.figure();
}

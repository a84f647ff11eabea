/**
 * Minimal SVG document builder.
 *
 * Output is deterministic: numbers are formatted with a fixed precision and
 * elements appear in insertion order, so regenerating a figure from the same
 * CSV yields identical bytes.
 */

const PRECISION = 2;

function fmt(x: number): string {
    const s = x.toFixed(PRECISION);
    return s === "-0.00" ? "0.00" : s;
}

function esc(text: string): string {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class SvgDocument {
    private parts: string[] = [];

    constructor(readonly width: number, readonly height: number) {}

    line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash?: string): void {
        const d = dash ? ` stroke-dasharray="${dash}"` : "";
        this.parts.push(
            `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`,
        );
    }

    polyline(points: Array<[number, number]>, stroke: string, width = 1.5, cls?: string): void {
        const attr = cls ? ` class="${cls}"` : "";
        const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
        this.parts.push(
            `<polyline${attr} points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`,
        );
    }

    circle(cx: number, cy: number, r: number, fill: string): void {
        this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${fill}"/>`);
    }

    rect(x: number, y: number, w: number, h: number, fill: string): void {
        this.parts.push(
            `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
        );
    }

    text(x: number, y: number, content: string, size = 11, anchor: "start" | "middle" | "end" = "start"): void {
        this.parts.push(
            `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" font-family="sans-serif" text-anchor="${anchor}">${esc(content)}</text>`,
        );
    }

    render(): string {
        return [
            `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
            `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
            ...this.parts,
            "</svg>",
        ].join("\n");
    }
}

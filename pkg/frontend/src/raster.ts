/**
 * Software RGBA canvas: lines, rectangles, markers, and a 5x7 bitmap font.
 * Backs the PNG output so figures need no native rendering dependency.
 */

export interface Rgb {
    r: number;
    g: number;
    b: number;
}

export function rgb(r: number, g: number, b: number): Rgb {
    return { r, g, b };
}

export const BLACK = rgb(0, 0, 0);
export const WHITE = rgb(255, 255, 255);

export function parseColor(hex: string): Rgb {
    const m = /^#([0-9a-f]{6})$/i.exec(hex);
    if (!m) throw new Error(`expected #rrggbb color, got ${hex}`);
    const v = parseInt(m[1], 16);
    return rgb((v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff);
}

// Each glyph is 5 columns x 7 rows, one byte per row, low 5 bits used.
const FONT: Record<string, number[]> = {
    "0": [0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e],
    "1": [0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e],
    "2": [0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f],
    "3": [0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e],
    "4": [0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02],
    "5": [0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e],
    "6": [0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e],
    "7": [0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
    "8": [0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e],
    "9": [0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c],
    ".": [0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c],
    ",": [0x00, 0x00, 0x00, 0x00, 0x0c, 0x04, 0x08],
    "-": [0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00],
    "+": [0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00],
    "=": [0x00, 0x00, 0x1f, 0x00, 0x1f, 0x00, 0x00],
    "/": [0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10],
    "(": [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
    ")": [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
    " ": [0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00],
    _: [0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1f],
    a: [0x00, 0x00, 0x0e, 0x01, 0x0f, 0x11, 0x0f],
    b: [0x10, 0x10, 0x1e, 0x11, 0x11, 0x11, 0x1e],
    c: [0x00, 0x00, 0x0e, 0x10, 0x10, 0x11, 0x0e],
    d: [0x01, 0x01, 0x0f, 0x11, 0x11, 0x11, 0x0f],
    e: [0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e],
    f: [0x06, 0x08, 0x1c, 0x08, 0x08, 0x08, 0x08],
    g: [0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x0e],
    h: [0x10, 0x10, 0x1e, 0x11, 0x11, 0x11, 0x11],
    i: [0x04, 0x00, 0x0c, 0x04, 0x04, 0x04, 0x0e],
    j: [0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0c],
    k: [0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12],
    l: [0x0c, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e],
    m: [0x00, 0x00, 0x1a, 0x15, 0x15, 0x15, 0x15],
    n: [0x00, 0x00, 0x1e, 0x11, 0x11, 0x11, 0x11],
    o: [0x00, 0x00, 0x0e, 0x11, 0x11, 0x11, 0x0e],
    p: [0x00, 0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10],
    q: [0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x01],
    r: [0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10],
    s: [0x00, 0x00, 0x0f, 0x10, 0x0e, 0x01, 0x1e],
    t: [0x08, 0x08, 0x1c, 0x08, 0x08, 0x09, 0x06],
    u: [0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0d],
    v: [0x00, 0x00, 0x11, 0x11, 0x11, 0x0a, 0x04],
    w: [0x00, 0x00, 0x15, 0x15, 0x15, 0x15, 0x0a],
    x: [0x00, 0x00, 0x11, 0x0a, 0x04, 0x0a, 0x11],
    y: [0x00, 0x11, 0x11, 0x0f, 0x01, 0x11, 0x0e],
    z: [0x00, 0x00, 0x1f, 0x02, 0x04, 0x08, 0x1f],
    T: [0x1f, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
};

export class Canvas {
    readonly data: Uint8Array;

    constructor(readonly width: number, readonly height: number) {
        this.data = new Uint8Array(width * height * 4);
        this.clear(WHITE);
    }

    clear(color: Rgb): void {
        for (let i = 0; i < this.width * this.height; i++) {
            this.data[i * 4] = color.r;
            this.data[i * 4 + 1] = color.g;
            this.data[i * 4 + 2] = color.b;
            this.data[i * 4 + 3] = 255;
        }
    }

    set(x: number, y: number, color: Rgb): void {
        const xi = Math.round(x);
        const yi = Math.round(y);
        if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
        const i = (yi * this.width + xi) * 4;
        this.data[i] = color.r;
        this.data[i + 1] = color.g;
        this.data[i + 2] = color.b;
        this.data[i + 3] = 255;
    }

    fillRect(x: number, y: number, w: number, h: number, color: Rgb): void {
        for (let yy = y; yy < y + h; yy++) {
            for (let xx = x; xx < x + w; xx++) {
                this.set(xx, yy, color);
            }
        }
    }

    /** DDA line, optionally thickened by one pixel. */
    line(x1: number, y1: number, x2: number, y2: number, color: Rgb, thick = false): void {
        const steps = Math.max(Math.abs(x2 - x1), Math.abs(y2 - y1), 1);
        for (let s = 0; s <= steps; s++) {
            const x = x1 + ((x2 - x1) * s) / steps;
            const y = y1 + ((y2 - y1) * s) / steps;
            this.set(x, y, color);
            if (thick) {
                this.set(x + 1, y, color);
                this.set(x, y + 1, color);
            }
        }
    }

    /** Dashed line with a fixed 4px-on/4px-off pattern. */
    dashedLine(x1: number, y1: number, x2: number, y2: number, color: Rgb): void {
        const steps = Math.max(Math.abs(x2 - x1), Math.abs(y2 - y1), 1);
        for (let s = 0; s <= steps; s++) {
            if (s % 8 >= 4) continue;
            this.set(x1 + ((x2 - x1) * s) / steps, y1 + ((y2 - y1) * s) / steps, color);
        }
    }

    marker(x: number, y: number, color: Rgb): void {
        for (let dy = -2; dy <= 2; dy++) {
            for (let dx = -2; dx <= 2; dx++) {
                if (dx * dx + dy * dy <= 4) this.set(x + dx, y + dy, color);
            }
        }
    }

    text(x: number, y: number, content: string, color: Rgb): void {
        let cx = Math.round(x);
        for (const ch of content) {
            const glyph = FONT[ch] ?? FONT[ch.toLowerCase()] ?? FONT[" "];
            for (let row = 0; row < 7; row++) {
                for (let col = 0; col < 5; col++) {
                    if ((glyph[row] >> (4 - col)) & 1) {
                        this.set(cx + col, y + row, color);
                    }
                }
            }
            cx += 6;
        }
    }
}

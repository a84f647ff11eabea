/** Linear axis scale and tick placement. */

export interface Scale {
    domainMin: number;
    domainMax: number;
    rangeMin: number;
    rangeMax: number;
    map(x: number): number;
}

export function linearScale(
    domainMin: number,
    domainMax: number,
    rangeMin: number,
    rangeMax: number,
): Scale {
    const span = domainMax - domainMin || 1;
    return {
        domainMin,
        domainMax,
        rangeMin,
        rangeMax,
        map: (x: number) => rangeMin + ((x - domainMin) / span) * (rangeMax - rangeMin),
    };
}

/** Round tick step to 1/2/5 x 10^k covering the domain with ~count ticks. */
export function ticks(min: number, max: number, count = 6): number[] {
    if (!(max > min)) {
        return [min];
    }
    const raw = (max - min) / count;
    const mag = Math.pow(10, Math.floor(Math.log10(raw)));
    const norm = raw / mag;
    const step = (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10) * mag;
    const start = Math.ceil(min / step) * step;
    const out: number[] = [];
    for (let t = start; t <= max + step * 1e-9; t += step) {
        out.push(Math.abs(t) < step * 1e-9 ? 0 : t);
    }
    return out;
}

export function formatTick(x: number): string {
    if (x === 0) return "0";
    const ax = Math.abs(x);
    if (ax >= 10000 || ax < 0.001) return x.toExponential(1);
    return Number(x.toPrecision(4)).toString();
}

/** Padded [min, max] of finite values (fallback to [0, 1]). */
export function extent(values: number[], padFraction = 0.05): [number, number] {
    const finite = values.filter((v) => Number.isFinite(v));
    if (finite.length === 0) return [0, 1];
    let lo = Math.min(...finite);
    let hi = Math.max(...finite);
    if (lo === hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const pad = (hi - lo) * padFraction;
    return [lo - pad, hi + pad];
}

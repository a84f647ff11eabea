#!/usr/bin/env node
/**
 * coopsim-plots: render experiment CSVs to SVG + PNG panels.
 *
 *   coopsim-plots invasion-probability --sweep rgg.csv [--sweep s2.csv ...]
 *                                      [--dbpc dbpc.csv] --out-dir figs
 *   coopsim-plots invasion-time --time time.csv --out-dir figs
 *   coopsim-plots wavefront --wavefront wave.csv --out-dir figs
 *
 * Pure CSV -> image transforms: identical inputs give identical bytes.
 * Exit codes: 0 ok, 1 schema or usage error (message names the column).
 */

import * as fs from "fs";
import * as path from "path";

import {
    Figure,
    invasionProbabilityFigure,
    invasionTimeFigure,
    wavefrontFigure,
} from "./charts";
import {
    DBPC_HEADER,
    readTable,
    SchemaError,
    SWEEP_HEADER,
    TIME_HEADER,
    WAVEFRONT_HEADER,
} from "./csv";

interface Args {
    command: string;
    sweeps: string[];
    dbpc?: string;
    time?: string;
    wavefront?: string;
    outDir: string;
    name?: string;
}

function parseArgs(argv: string[]): Args {
    const [command, ...rest] = argv;
    const args: Args = { command: command ?? "", sweeps: [], outDir: "." };
    for (let i = 0; i < rest.length; i++) {
        const flag = rest[i];
        const value = rest[i + 1];
        switch (flag) {
            case "--sweep":
                args.sweeps.push(need(flag, value));
                i++;
                break;
            case "--dbpc":
                args.dbpc = need(flag, value);
                i++;
                break;
            case "--time":
                args.time = need(flag, value);
                i++;
                break;
            case "--wavefront":
                args.wavefront = need(flag, value);
                i++;
                break;
            case "--out-dir":
                args.outDir = need(flag, value);
                i++;
                break;
            case "--name":
                args.name = need(flag, value);
                i++;
                break;
            default:
                throw new Error(`unknown flag ${flag}`);
        }
    }
    return args;
}

function need(flag: string, value: string | undefined): string {
    if (value === undefined) throw new Error(`${flag} needs a value`);
    return value;
}

function stem(file: string): string {
    return path.basename(file).replace(/\.[^.]+$/, "");
}

function writeFigure(outDir: string, name: string, figure: Figure): void {
    fs.mkdirSync(outDir, { recursive: true });
    fs.writeFileSync(path.join(outDir, `${name}.svg`), figure.svg);
    fs.writeFileSync(path.join(outDir, `${name}.png`), figure.png);
    process.stdout.write(`wrote ${path.join(outDir, name)}.{svg,png}\n`);
}

export function run(argv: string[]): number {
    let args: Args;
    try {
        args = parseArgs(argv);
    } catch (err) {
        process.stderr.write(`usage error: ${(err as Error).message}\n`);
        return 1;
    }
    try {
        switch (args.command) {
            case "invasion-probability": {
                if (args.sweeps.length === 0) throw new Error("need at least one --sweep file");
                const labeled = args.sweeps.map((file) => ({
                    label: stem(file),
                    table: readTable(file, SWEEP_HEADER),
                }));
                const dbpc = args.dbpc ? readTable(args.dbpc, DBPC_HEADER) : undefined;
                for (const one of labeled) {
                    writeFigure(
                        args.outDir,
                        args.name ? `${args.name}_${one.label}` : `invasion_probability_${one.label}`,
                        invasionProbabilityFigure([one], dbpc),
                    );
                }
                if (labeled.length > 1) {
                    writeFigure(
                        args.outDir,
                        args.name ? `${args.name}_comparison` : "invasion_probability_comparison",
                        invasionProbabilityFigure(labeled, dbpc),
                    );
                }
                return 0;
            }
            case "invasion-time": {
                if (!args.time) throw new Error("need --time file");
                const table = readTable(args.time, TIME_HEADER);
                writeFigure(args.outDir, args.name ?? `invasion_time_${stem(args.time)}`, invasionTimeFigure(table));
                return 0;
            }
            case "wavefront": {
                if (!args.wavefront) throw new Error("need --wavefront file");
                const table = readTable(args.wavefront, WAVEFRONT_HEADER);
                writeFigure(args.outDir, args.name ?? `wavefront_${stem(args.wavefront)}`, wavefrontFigure(table));
                return 0;
            }
            default:
                process.stderr.write(
                    "usage: coopsim-plots <invasion-probability|invasion-time|wavefront> [flags]\n",
                );
                return 1;
        }
    } catch (err) {
        if (err instanceof SchemaError) {
            const col = err.column ? ` (column: ${err.column})` : "";
            process.stderr.write(`schema error: ${err.message}${col}\n`);
        } else {
            process.stderr.write(`error: ${(err as Error).message}\n`);
        }
        return 1;
    }
}

if (require.main === module) {
    process.exit(run(process.argv.slice(2)));
}

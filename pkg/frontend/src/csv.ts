/**
 * CSV reading with strict header validation.
 *
 * Each experiment file type declares its expected header; a missing or
 * misnamed column fails fast and names the offending column so batch
 * plotting scripts stop at the real problem.
 */

import * as fs from "fs";

export class SchemaError extends Error {
    constructor(message: string, public readonly column?: string) {
        super(message);
        this.name = "SchemaError";
    }
}

export interface Table {
    header: string[];
    rows: string[][];
}

export const SWEEP_HEADER = ["a", "v", "replicates", "invaded", "fraction", "stderr", "pi_lower", "pi_upper"];
export const TIME_HEADER = ["replicate", "T", "T_lower", "T_upper_base", "T_minus_initial"];
export const WAVEFRONT_HEADER = ["replicate", "g", "box_distance"];
export const DBPC_HEADER = ["a", "z0", "threshold", "replicates", "survived", "died", "undecided", "pi_hat", "stderr"];

export function parseCsv(text: string): Table {
    const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
    if (lines.length === 0) {
        throw new SchemaError("empty file: no header row");
    }
    const header = lines[0].split(",");
    const rows = lines.slice(1).map((line) => line.split(","));
    for (const row of rows) {
        if (row.length !== header.length) {
            throw new SchemaError(
                `row has ${row.length} fields, header has ${header.length}`,
            );
        }
    }
    return { header, rows };
}

export function readTable(path: string, expectedHeader: string[]): Table {
    const table = parseCsv(fs.readFileSync(path, "utf-8"));
    for (let i = 0; i < expectedHeader.length; i++) {
        if (table.header[i] !== expectedHeader[i]) {
            throw new SchemaError(
                `${path}: expected column ${i + 1} to be '${expectedHeader[i]}', found '${table.header[i] ?? "<missing>"}'`,
                expectedHeader[i],
            );
        }
    }
    if (table.header.length !== expectedHeader.length) {
        throw new SchemaError(
            `${path}: expected ${expectedHeader.length} columns, found ${table.header.length}`,
        );
    }
    if (table.rows.length === 0) {
        throw new SchemaError(`${path}: no data rows`);
    }
    return table;
}

/** Column as numbers; blank cells become NaN. */
export function numbers(table: Table, column: string): number[] {
    const idx = table.header.indexOf(column);
    if (idx < 0) {
        throw new SchemaError(`missing column '${column}'`, column);
    }
    return table.rows.map((row) => (row[idx] === "" ? NaN : Number(row[idx])));
}

import assert from "node:assert/strict";
import { test } from "node:test";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { run } from "../src/cli";

const TESTDATA = path.join(__dirname, "..", "..", "testdata");

function tempDir(): string {
    return fs.mkdtempSync(path.join(os.tmpdir(), "plots-out-"));
}

function captureStderr<T>(fn: () => T): { value: T; stderr: string } {
    const chunks: string[] = [];
    const original = process.stderr.write.bind(process.stderr);
    (process.stderr.write as unknown) = (chunk: string | Uint8Array) => {
        chunks.push(chunk.toString());
        return true;
    };
    try {
        return { value: fn(), stderr: chunks.join("") };
    } finally {
        process.stderr.write = original;
    }
}

test("regenerates invasion-probability, time, and wavefront panels", () => {
    const out = tempDir();
    assert.equal(
        run([
            "invasion-probability",
            "--sweep", path.join(TESTDATA, "sweep_cube1d.csv"),
            "--sweep", path.join(TESTDATA, "sweep_sphere.csv"),
            "--dbpc", path.join(TESTDATA, "dbpc_survival.csv"),
            "--out-dir", out,
        ]),
        0,
    );
    assert.equal(run(["invasion-time", "--time", path.join(TESTDATA, "time_cube1d.csv"), "--out-dir", out]), 0);
    assert.equal(run(["wavefront", "--wavefront", path.join(TESTDATA, "wavefront_cube2d.csv"), "--out-dir", out]), 0);
    const files = fs.readdirSync(out).sort();
    const expected = [
        "invasion_probability_comparison",
        "invasion_probability_sweep_cube1d",
        "invasion_probability_sweep_sphere",
        "invasion_time_time_cube1d",
        "wavefront_wavefront_cube2d",
    ];
    for (const name of expected) {
        assert.ok(files.includes(`${name}.svg`), `${name}.svg missing`);
        assert.ok(files.includes(`${name}.png`), `${name}.png missing`);
        assert.ok(fs.statSync(path.join(out, `${name}.svg`)).size > 0);
        assert.ok(fs.statSync(path.join(out, `${name}.png`)).size > 0);
    }
});

test("reruns produce identical bytes", () => {
    const out1 = tempDir();
    const out2 = tempDir();
    for (const out of [out1, out2]) {
        assert.equal(
            run(["invasion-probability", "--sweep", path.join(TESTDATA, "sweep_cube1d.csv"), "--out-dir", out]),
            0,
        );
    }
    const name = "invasion_probability_sweep_cube1d";
    for (const ext of ["svg", "png"]) {
        const a = fs.readFileSync(path.join(out1, `${name}.${ext}`));
        const b = fs.readFileSync(path.join(out2, `${name}.${ext}`));
        assert.ok(a.equals(b), `${ext} differs between reruns`);
    }
});

test("schema mismatch exits nonzero, names the column, writes nothing", () => {
    const out = tempDir();
    const bad = path.join(tempDir(), "bad.csv");
    fs.writeFileSync(bad, "a,v,replicates,invaded,fraction,stderr,pi_low,pi_upper\n1,2,3,4,0.5,0.1,0,1\n");
    const { value, stderr } = captureStderr(() =>
        run(["invasion-probability", "--sweep", bad, "--out-dir", out]),
    );
    assert.equal(value, 1);
    assert.ok(stderr.includes("pi_lower"));
    assert.equal(fs.readdirSync(out).length, 0);
});

test("empty data rows exit nonzero and write nothing", () => {
    const out = tempDir();
    const empty = path.join(tempDir(), "empty.csv");
    fs.writeFileSync(empty, "a,v,replicates,invaded,fraction,stderr,pi_lower,pi_upper\n");
    const { value } = captureStderr(() =>
        run(["invasion-probability", "--sweep", empty, "--out-dir", out]),
    );
    assert.equal(value, 1);
    assert.equal(fs.readdirSync(out).length, 0);
});

test("unknown command or flag exits nonzero", () => {
    assert.equal(captureStderr(() => run(["frobnicate"])).value, 1);
    assert.equal(captureStderr(() => run(["wavefront", "--bogus", "x"])).value, 1);
});

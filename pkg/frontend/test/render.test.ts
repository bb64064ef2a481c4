import { describe, expect, it } from "vitest";
import { execFileSync, spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { parseCsv, requireColumns, SchemaError } from "../src/csv.js";
import { FIGURES } from "../src/figures.js";
import { sceneToSvg } from "../src/svg.js";
import { sceneToPng } from "../src/raster.js";
import { parseArgs, UsageError } from "../src/render.js";

const GOLDEN = join(__dirname, "..", "golden");
const CLI = join(__dirname, "..", "dist", "render.js");

const KIND_INPUTS: Record<string, string[]> = {
  overlay: ["hydro.csv"],
  convergence: ["hydro_summary.csv"],
  variance: ["fluct.csv"],
  trajectory: ["trajectory.csv", "pde.csv"],
};

function loadTables(files: string[]) {
  return files.map((f) => {
    const p = join(GOLDEN, f);
    return parseCsv(readFileSync(p, "utf8"), p);
  });
}

describe("figure determinism", () => {
  for (const [kind, files] of Object.entries(KIND_INPUTS)) {
    it(`${kind}: SVG bytes identical across two renders`, () => {
      const opts = { logx: false, logy: false };
      const a = sceneToSvg(FIGURES[kind](loadTables(files), opts));
      const b = sceneToSvg(FIGURES[kind](loadTables(files), opts));
      expect(a).toBe(b);
      expect(a.startsWith("<svg ")).toBe(true);
      expect(a.length).toBeGreaterThan(500);
    });

    it(`${kind}: PNG bytes identical across two renders`, () => {
      const opts = { logx: false, logy: false };
      const a = sceneToPng(FIGURES[kind](loadTables(files), opts));
      const b = sceneToPng(FIGURES[kind](loadTables(files), opts));
      expect(a.equals(b)).toBe(true);
      expect(a.subarray(1, 4).toString("ascii")).toBe("PNG");
    });
  }

  it("CLI writes byte-identical files across runs", () => {
    const dir = mkdtempSync(join(tmpdir(), "iflfig-"));
    for (const [kind, files] of Object.entries(KIND_INPUTS)) {
      const ins = files.map((f) => join(GOLDEN, f));
      const o1 = join(dir, `${kind}-1.svg`);
      const o2 = join(dir, `${kind}-2.svg`);
      execFileSync("node", [CLI, "--kind", kind, "--in", ...ins, "--out", o1]);
      execFileSync("node", [CLI, "--kind", kind, "--in", ...ins, "--out", o2]);
      expect(readFileSync(o1).equals(readFileSync(o2))).toBe(true);
    }
  });
});

describe("schema validation", () => {
  it("missing required column is fatal and names the column", () => {
    const dir = mkdtempSync(join(tmpdir(), "iflfig-"));
    const broken = join(dir, "broken.csv");
    // hydro schema without abs_err
    writeFileSync(broken,
      "N,gamma,t,phi_id,replica,empirical,pde\n" +
      "26,1,0.25,cos1,0,0.5,0.5\n");
    const res = spawnSync("node",
      [CLI, "--kind", "overlay", "--in", broken, "--out", join(dir, "x.svg")]);
    expect(res.status).toBe(1);
    expect(res.stderr.toString()).toContain("missing column abs_err");
  });

  it("malformed rows and empty files are fatal with diagnostics", () => {
    const t = () => parseCsv("a,b\n1\n", "f.csv");
    expect(t).toThrow(SchemaError);
    expect(t).toThrow(/row 2/);
    expect(() => parseCsv("a,b\n", "f.csv")).toThrow(/no data rows/);
    const table = parseCsv("a,b\n1,2\n", "f.csv");
    expect(() => requireColumns(table, ["zz"])).toThrow(/missing column zz/);
  });

  it("variance figure requires var rows", () => {
    const table = parseCsv(
      "N,gamma,t,phi_id,stat,value,stderr,theory,pass\n" +
      "26,1,0.2,cos1,mean_M,0.1,0.1,0,true\n", "f.csv");
    expect(() => FIGURES.variance([table], { logx: false, logy: false }))
      .toThrow(/variance rows/);
  });

  it("non-numeric cells are fatal with row/column named", () => {
    const table = parseCsv("t,Y\n0,oops\n", "f.csv");
    expect(() => FIGURES.trajectory([table], { logx: false, logy: false }))
      .toThrow(/column Y, row 2/);
  });
});

describe("CLI argument handling", () => {
  it("rejects unknown flags and bad kinds with usage errors", () => {
    expect(() => parseArgs(["--wat"])).toThrow(UsageError);
    expect(() => parseArgs(["--kind", "pie", "--in", "x", "--out", "y.svg"]))
      .toThrow(/--kind/);
    expect(() => parseArgs(["--kind", "overlay", "--out", "y.svg"]))
      .toThrow(/--in/);
    expect(() => parseArgs(["--kind", "overlay", "--in", "x", "--out", "y.txt"]))
      .toThrow(/svg or .png/);
    const res = spawnSync("node", [CLI, "--bogus"]);
    expect(res.status).toBe(2);
  });

  it("missing input file exits 1", () => {
    const res = spawnSync("node",
      [CLI, "--kind", "overlay", "--in", "nope.csv", "--out", "/tmp/x.svg"]);
    expect(res.status).toBe(1);
  });

  it("log flags change the scene deterministically", () => {
    const tables = loadTables(["trajectory.csv"]);
    const lin = sceneToSvg(FIGURES.trajectory(tables, { logx: false, logy: false }));
    const log = sceneToSvg(FIGURES.trajectory(tables, { logx: true, logy: false }));
    expect(lin).not.toBe(log);
  });
});

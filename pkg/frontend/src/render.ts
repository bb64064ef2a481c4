#!/usr/bin/env node
/**
 * render --kind <overlay|convergence|variance|trajectory>
 *        --in <csv...> --out <file.svg|file.png> [--logx] [--logy]
 *
 * Reads harness CSV outputs and writes a deterministic figure; the output
 * format follows the file extension.  Exit codes: 0 ok, 1 bad data
 * (missing columns, malformed rows, empty inputs), 2 usage errors.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv, SchemaError, Table } from "./csv.js";
import { FIGURES, FigureOptions } from "./figures.js";
import { sceneToSvg } from "./svg.js";
import { sceneToPng } from "./raster.js";

export class UsageError extends Error {}

export interface FigureSpec {
  kind: string;
  inputs: string[];
  out: string;
  opts: FigureOptions;
}

export function parseArgs(argv: string[]): FigureSpec {
  let kind = "";
  let out = "";
  const inputs: string[] = [];
  const opts: FigureOptions = { logx: false, logy: false };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--kind") {
      kind = argv[++i] ?? "";
    } else if (a === "--in") {
      while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
        inputs.push(argv[++i]);
      }
    } else if (a === "--out") {
      out = argv[++i] ?? "";
    } else if (a === "--logx") {
      opts.logx = true;
    } else if (a === "--logy") {
      opts.logy = true;
    } else {
      throw new UsageError(`unknown argument ${a}`);
    }
  }
  if (!FIGURES[kind]) {
    throw new UsageError(
      `--kind must be one of ${Object.keys(FIGURES).join(", ")}, got ${JSON.stringify(kind)}`);
  }
  if (inputs.length === 0) throw new UsageError("--in requires at least one CSV");
  if (!out) throw new UsageError("--out is required");
  if (!out.endsWith(".svg") && !out.endsWith(".png")) {
    throw new UsageError(`--out must end in .svg or .png, got ${out}`);
  }
  return { kind, inputs, out, opts };
}

export function renderToBytes(kind: string, tables: Table[],
                              opts: FigureOptions, ext: "svg" | "png"): Buffer {
  const scene = FIGURES[kind](tables, opts);
  return ext === "svg" ? Buffer.from(sceneToSvg(scene), "utf8")
                       : sceneToPng(scene);
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (e) {
    if (e instanceof UsageError) {
      process.stderr.write(`render: ${e.message}\n`);
      return 2;
    }
    throw e;
  }
  try {
    const tables = spec.inputs.map((f) => parseCsv(readFileSync(f, "utf8"), f));
    const ext = spec.out.endsWith(".png") ? "png" : "svg";
    const bytes = renderToBytes(spec.kind, tables, spec.opts, ext);
    writeFileSync(spec.out, bytes);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      process.stderr.write(`render: ${e.message}\n`);
      return 1;
    }
    if ((e as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`render: ${(e as Error).message}\n`);
      return 1;
    }
    throw e;
  }
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}

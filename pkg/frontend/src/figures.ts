/**
 * The four figure kinds, each a pure map from parsed harness tables to a
 * Scene.  Every plotted number appears verbatim in an input file: the
 * figures apply axis transforms only, never statistics.
 *
 *   overlay     hydro.csv          empirical pairings vs the PDE reference
 *   convergence hydro_summary.csv  mean error vs N, log-log, guide slope
 *   variance    fluct.csv          variance bars vs their theory markers
 *   trajectory  trajectory/pde CSV Y(t) paths
 */

import { Table, requireColumns, num, SchemaError } from "./csv.js";
import { Scene, Primitive, PALETTE, GRID_COLOR, AXIS_COLOR } from "./scene.js";
import { Scale, makeScale, extent, logExtent } from "./scales.js";

export interface FigureOptions {
  logx: boolean;
  logy: boolean;
}

const W = 720;
const H = 480;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };

interface Axes {
  items: Primitive[];
  sx: Scale;
  sy: Scale;
}

function axes(xs: number[], ys: number[], opts: FigureOptions, title: string,
              xlabel: string, ylabel: string): Axes {
  const [x0, x1] = opts.logx ? logExtent(xs) : extent(xs);
  const [y0, y1] = opts.logy ? logExtent(ys) : extent(ys);
  const sx = makeScale(x0, x1, MARGIN.left, W - MARGIN.right, opts.logx);
  const sy = makeScale(y0, y1, H - MARGIN.bottom, MARGIN.top, opts.logy);
  const items: Primitive[] = [];
  for (const t of sx.ticks()) {
    const px = sx.toPixel(t);
    items.push({ kind: "line", x1: px, y1: MARGIN.top, x2: px,
                 y2: H - MARGIN.bottom, stroke: GRID_COLOR, width: 1 });
    items.push({ kind: "text", x: px, y: H - MARGIN.bottom + 16, s: sx.label(t),
                 size: 10, fill: AXIS_COLOR, anchor: "middle" });
  }
  for (const t of sy.ticks()) {
    const py = sy.toPixel(t);
    items.push({ kind: "line", x1: MARGIN.left, y1: py, x2: W - MARGIN.right,
                 y2: py, stroke: GRID_COLOR, width: 1 });
    items.push({ kind: "text", x: MARGIN.left - 6, y: py + 3, s: sy.label(t),
                 size: 10, fill: AXIS_COLOR, anchor: "end" });
  }
  items.push({ kind: "line", x1: MARGIN.left, y1: H - MARGIN.bottom,
               x2: W - MARGIN.right, y2: H - MARGIN.bottom,
               stroke: AXIS_COLOR, width: 1 });
  items.push({ kind: "line", x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left,
               y2: H - MARGIN.bottom, stroke: AXIS_COLOR, width: 1 });
  items.push({ kind: "text", x: W / 2, y: 22, s: title, size: 13,
               fill: AXIS_COLOR, anchor: "middle" });
  items.push({ kind: "text", x: W / 2, y: H - 14, s: xlabel, size: 11,
               fill: AXIS_COLOR, anchor: "middle" });
  items.push({ kind: "text", x: MARGIN.left, y: MARGIN.top - 8, s: ylabel,
               size: 11, fill: AXIS_COLOR, anchor: "start" });
  return { items, sx, sy };
}

function legend(items: Primitive[], labels: string[], colors: string[]): void {
  labels.forEach((lb, i) => {
    const y = MARGIN.top + 14 + 14 * i;
    const x = W - MARGIN.right - 160;
    items.push({ kind: "rect", x, y: y - 7, w: 10, h: 10, fill: colors[i] });
    items.push({ kind: "text", x: x + 16, y: y + 2, s: lb, size: 10,
                 fill: AXIS_COLOR, anchor: "start" });
  });
}

function groupKeys<T>(rows: T[], key: (r: T) => string): string[] {
  const seen: string[] = [];
  for (const r of rows) {
    const k = key(r);
    if (!seen.includes(k)) seen.push(k);
  }
  return seen;
}

// ---------------------------------------------------------------------------
// overlay: per-replica empirical pairings as points, PDE values as lines
// ---------------------------------------------------------------------------

export function overlayFigure(tables: Table[], opts: FigureOptions): Scene {
  const items: Primitive[] = [];
  const rows: { t: number; emp: number; pde: number; key: string }[] = [];
  for (const tb of tables) {
    requireColumns(tb, ["N", "gamma", "t", "phi_id", "replica", "empirical",
                        "pde", "abs_err"]);
    tb.rows.forEach((r, i) => {
      rows.push({
        t: num(r, "t", tb.file, i),
        emp: num(r, "empirical", tb.file, i),
        pde: num(r, "pde", tb.file, i),
        key: `${r.phi_id} N=${r.N}`,
      });
    });
  }
  const keys = groupKeys(rows, (r) => r.key);
  const ax = axes(rows.map((r) => r.t),
                  rows.flatMap((r) => [r.emp, r.pde]), opts,
                  "empirical pairings vs PDE", "t", "<pi_t, phi>");
  items.push(...ax.items);
  keys.forEach((k, ki) => {
    const color = PALETTE[ki % PALETTE.length];
    const sub = rows.filter((r) => r.key === k);
    for (const r of sub) {
      items.push({ kind: "circle", cx: ax.sx.toPixel(r.t),
                   cy: ax.sy.toPixel(r.emp), r: 2, fill: color });
    }
    const ts = groupKeys(sub, (r) => String(r.t));
    const pts = ts.map((t) => {
      const r = sub.find((q) => String(q.t) === t)!;
      return [ax.sx.toPixel(r.t), ax.sy.toPixel(r.pde)] as [number, number];
    });
    pts.sort((a, b) => a[0] - b[0]);
    items.push({ kind: "polyline", pts, stroke: color, width: 2, dash: "6,3" });
  });
  legend(items, keys, keys.map((_, i) => PALETTE[i % PALETTE.length]));
  return { width: W, height: H, items };
}

// ---------------------------------------------------------------------------
// convergence: mean error vs N on log-log axes with a guide slope
// ---------------------------------------------------------------------------

export function convergenceFigure(tables: Table[], opts: FigureOptions): Scene {
  const items: Primitive[] = [];
  const rows: { N: number; err: number; key: string }[] = [];
  for (const tb of tables) {
    requireColumns(tb, ["N", "t", "phi_id", "mean_abs_err", "stderr"]);
    tb.rows.forEach((r, i) => {
      rows.push({
        N: num(r, "N", tb.file, i),
        err: num(r, "mean_abs_err", tb.file, i),
        key: `${r.phi_id} t=${r.t}`,
      });
    });
  }
  // convergence plots force log-log axes regardless of the flags
  const lopts = { logx: true, logy: true };
  const ax = axes(rows.map((r) => r.N), rows.map((r) => r.err), lopts,
                  "pairing error vs N (log-log)", "N", "mean |err|");
  items.push(...ax.items);
  const keys = groupKeys(rows, (r) => r.key);
  keys.forEach((k, ki) => {
    const color = PALETTE[ki % PALETTE.length];
    const sub = rows.filter((r) => r.key === k).sort((a, b) => a.N - b.N);
    const pts = sub.map((r) =>
      [ax.sx.toPixel(r.N), ax.sy.toPixel(r.err)] as [number, number]);
    items.push({ kind: "polyline", pts, stroke: color, width: 2 });
    for (const r of sub) {
      items.push({ kind: "circle", cx: ax.sx.toPixel(r.N),
                   cy: ax.sy.toPixel(r.err), r: 3, fill: color });
    }
  });
  // guide slope N^{-1/2} anchored at the first point of the first series
  const first = rows.filter((r) => r.key === keys[0]).sort((a, b) => a.N - b.N);
  if (first.length >= 2) {
    const n0 = first[0].N;
    const n1 = first[first.length - 1].N;
    const e0 = first[0].err * 1.3;
    const pts: [number, number][] = [
      [ax.sx.toPixel(n0), ax.sy.toPixel(e0)],
      [ax.sx.toPixel(n1), ax.sy.toPixel(e0 * Math.sqrt(n0 / n1))],
    ];
    items.push({ kind: "polyline", pts, stroke: "#999999", width: 1,
                 dash: "5,4" });
    items.push({ kind: "text", x: pts[1][0], y: pts[1][1] - 6,
                 s: "slope -1/2", size: 10, fill: "#999999", anchor: "end" });
  }
  legend(items, keys, keys.map((_, i) => PALETTE[i % PALETTE.length]));
  return { width: W, height: H, items };
}

// ---------------------------------------------------------------------------
// variance: bars for variance statistics with theory markers
// ---------------------------------------------------------------------------

export function varianceFigure(tables: Table[], opts: FigureOptions): Scene {
  const items: Primitive[] = [];
  const rows: { label: string; value: number; theory: number }[] = [];
  for (const tb of tables) {
    requireColumns(tb, ["N", "gamma", "t", "phi_id", "stat", "value",
                        "stderr", "theory", "pass"]);
    tb.rows.forEach((r, i) => {
      if (r.stat.startsWith("var")) {
        rows.push({
          label: `${r.stat}[${r.phi_id}] N=${r.N}`,
          value: num(r, "value", tb.file, i),
          theory: num(r, "theory", tb.file, i),
        });
      }
    });
  }
  if (rows.length === 0) {
    throw new SchemaError("no variance rows (stat=var*) in the inputs");
  }
  const vals = rows.flatMap((r) => [r.value, r.theory, 0]);
  const sy = makeScale(Math.min(...vals), Math.max(...vals) * 1.1,
                       H - MARGIN.bottom, MARGIN.top, opts.logy && false);
  const items0: Primitive[] = [];
  for (const t of sy.ticks()) {
    const py = sy.toPixel(t);
    items0.push({ kind: "line", x1: MARGIN.left, y1: py, x2: W - MARGIN.right,
                  y2: py, stroke: GRID_COLOR, width: 1 });
    items0.push({ kind: "text", x: MARGIN.left - 6, y: py + 3, s: sy.label(t),
                  size: 10, fill: AXIS_COLOR, anchor: "end" });
  }
  items.push(...items0);
  items.push({ kind: "line", x1: MARGIN.left, y1: H - MARGIN.bottom,
               x2: W - MARGIN.right, y2: H - MARGIN.bottom,
               stroke: AXIS_COLOR, width: 1 });
  items.push({ kind: "text", x: W / 2, y: 22,
               s: "variances vs theory", size: 13, fill: AXIS_COLOR,
               anchor: "middle" });
  const span = W - MARGIN.left - MARGIN.right;
  const slot = span / rows.length;
  const bw = Math.min(60, slot * 0.6);
  const zero = sy.toPixel(0);
  rows.forEach((r, i) => {
    const cx = MARGIN.left + slot * (i + 0.5);
    const top = sy.toPixel(r.value);
    items.push({ kind: "rect", x: cx - bw / 2, y: Math.min(top, zero),
                 w: bw, h: Math.abs(zero - top),
                 fill: PALETTE[i % PALETTE.length] });
    const ty = sy.toPixel(r.theory);
    items.push({ kind: "line", x1: cx - bw * 0.75, y1: ty, x2: cx + bw * 0.75,
                 y2: ty, stroke: "#000000", width: 2, dash: "4,2" });
    items.push({ kind: "text", x: cx, y: H - MARGIN.bottom + 16, s: r.label,
                 size: 10, fill: AXIS_COLOR, anchor: "middle" });
  });
  items.push({ kind: "text", x: W - MARGIN.right, y: MARGIN.top - 8,
               s: "dashes: theory", size: 10, fill: AXIS_COLOR, anchor: "end" });
  return { width: W, height: H, items };
}

// ---------------------------------------------------------------------------
// trajectory: Y(t) paths, one line per input file
// ---------------------------------------------------------------------------

export function trajectoryFigure(tables: Table[], opts: FigureOptions): Scene {
  const items: Primitive[] = [];
  const series: { label: string; pts: [number, number][] }[] = [];
  const ts: number[] = [];
  const ys: number[] = [];
  for (const tb of tables) {
    requireColumns(tb, ["t", "Y"]);
    const pts: [number, number][] = tb.rows.map((r, i) => {
      const t = num(r, "t", tb.file, i);
      const y = num(r, "Y", tb.file, i);
      ts.push(t);
      ys.push(y);
      return [t, y];
    });
    series.push({ label: tb.file.split("/").pop() ?? tb.file, pts });
  }
  const ax = axes(ts, ys.concat([0]), opts, "integral trajectories Y(t)",
                  "t", "Y");
  items.push(...ax.items);
  const zero = ax.sy.toPixel(0);
  items.push({ kind: "line", x1: MARGIN.left, y1: zero, x2: W - MARGIN.right,
               y2: zero, stroke: "#aaaaaa", width: 1, dash: "2,3" });
  series.forEach((s, i) => {
    const pts = s.pts.map(([t, y]) =>
      [ax.sx.toPixel(t), ax.sy.toPixel(y)] as [number, number]);
    items.push({ kind: "polyline", pts, stroke: PALETTE[i % PALETTE.length],
                 width: 2 });
  });
  legend(items, series.map((s) => s.label),
         series.map((_, i) => PALETTE[i % PALETTE.length]));
  return { width: W, height: H, items };
}

export const FIGURES: Record<string, (t: Table[], o: FigureOptions) => Scene> = {
  overlay: overlayFigure,
  convergence: convergenceFigure,
  variance: varianceFigure,
  trajectory: trajectoryFigure,
};

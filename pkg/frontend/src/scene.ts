/**
 * Backend-neutral scene model: figures build primitive lists, and the SVG
 * and PNG writers consume them.  Everything is deterministic — no clocks,
 * no randomness, fixed fonts and formatting.
 */

export interface Line {
  kind: "line";
  x1: number; y1: number; x2: number; y2: number;
  stroke: string;
  width: number;
  dash?: string;
}

export interface Polyline {
  kind: "polyline";
  pts: [number, number][];
  stroke: string;
  width: number;
  dash?: string;
}

export interface Rect {
  kind: "rect";
  x: number; y: number; w: number; h: number;
  fill: string;
  stroke?: string;
}

export interface Circle {
  kind: "circle";
  cx: number; cy: number; r: number;
  fill: string;
}

export interface Text {
  kind: "text";
  x: number; y: number;
  s: string;
  size: number;
  fill: string;
  anchor: "start" | "middle" | "end";
}

export type Primitive = Line | Polyline | Rect | Circle | Text;

export interface Scene {
  width: number;
  height: number;
  items: Primitive[];
}

/** Fixed number formatting so output bytes are stable. */
export function fmt(v: number): string {
  if (Number.isInteger(v) && Math.abs(v) < 1e15) return String(v);
  return Number(v.toPrecision(8)).toString();
}

export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

export const GRID_COLOR = "#dddddd";
export const AXIS_COLOR = "#333333";

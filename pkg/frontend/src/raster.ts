/**
 * Scene -> PNG bytes, with no native dependencies: Bresenham lines, filled
 * circles, a built-in 5x7 bitmap font, and a minimal PNG encoder on top of
 * node:zlib.  Deterministic for a given scene.
 */

import { deflateSync } from "node:zlib";
import { Scene, Primitive } from "./scene.js";

// ---------------------------------------------------------------------------
// 5x7 bitmap font ('X' = on); lowercase maps to uppercase
// ---------------------------------------------------------------------------

const F: Record<string, string[]> = {
  "A": [".XXX.", "X...X", "X...X", "XXXXX", "X...X", "X...X", "X...X"],
  "B": ["XXXX.", "X...X", "X...X", "XXXX.", "X...X", "X...X", "XXXX."],
  "C": [".XXX.", "X...X", "X....", "X....", "X....", "X...X", ".XXX."],
  "D": ["XXXX.", "X...X", "X...X", "X...X", "X...X", "X...X", "XXXX."],
  "E": ["XXXXX", "X....", "X....", "XXXX.", "X....", "X....", "XXXXX"],
  "F": ["XXXXX", "X....", "X....", "XXXX.", "X....", "X....", "X...."],
  "G": [".XXX.", "X...X", "X....", "X.XXX", "X...X", "X...X", ".XXX."],
  "H": ["X...X", "X...X", "X...X", "XXXXX", "X...X", "X...X", "X...X"],
  "I": ["XXXXX", "..X..", "..X..", "..X..", "..X..", "..X..", "XXXXX"],
  "J": ["..XXX", "...X.", "...X.", "...X.", "...X.", "X..X.", ".XX.."],
  "K": ["X...X", "X..X.", "X.X..", "XX...", "X.X..", "X..X.", "X...X"],
  "L": ["X....", "X....", "X....", "X....", "X....", "X....", "XXXXX"],
  "M": ["X...X", "XX.XX", "X.X.X", "X.X.X", "X...X", "X...X", "X...X"],
  "N": ["X...X", "XX..X", "X.X.X", "X..XX", "X...X", "X...X", "X...X"],
  "O": [".XXX.", "X...X", "X...X", "X...X", "X...X", "X...X", ".XXX."],
  "P": ["XXXX.", "X...X", "X...X", "XXXX.", "X....", "X....", "X...."],
  "Q": [".XXX.", "X...X", "X...X", "X...X", "X.X.X", "X..X.", ".XX.X"],
  "R": ["XXXX.", "X...X", "X...X", "XXXX.", "X.X..", "X..X.", "X...X"],
  "S": [".XXXX", "X....", "X....", ".XXX.", "....X", "....X", "XXXX."],
  "T": ["XXXXX", "..X..", "..X..", "..X..", "..X..", "..X..", "..X.."],
  "U": ["X...X", "X...X", "X...X", "X...X", "X...X", "X...X", ".XXX."],
  "V": ["X...X", "X...X", "X...X", "X...X", "X...X", ".X.X.", "..X.."],
  "W": ["X...X", "X...X", "X...X", "X.X.X", "X.X.X", "XX.XX", "X...X"],
  "X": ["X...X", "X...X", ".X.X.", "..X..", ".X.X.", "X...X", "X...X"],
  "Y": ["X...X", "X...X", ".X.X.", "..X..", "..X..", "..X..", "..X.."],
  "Z": ["XXXXX", "....X", "...X.", "..X..", ".X...", "X....", "XXXXX"],
  "0": [".XXX.", "X...X", "X..XX", "X.X.X", "XX..X", "X...X", ".XXX."],
  "1": ["..X..", ".XX..", "..X..", "..X..", "..X..", "..X..", "XXXXX"],
  "2": [".XXX.", "X...X", "....X", "...X.", "..X..", ".X...", "XXXXX"],
  "3": [".XXX.", "X...X", "....X", "..XX.", "....X", "X...X", ".XXX."],
  "4": ["...X.", "..XX.", ".X.X.", "X..X.", "XXXXX", "...X.", "...X."],
  "5": ["XXXXX", "X....", "XXXX.", "....X", "....X", "X...X", ".XXX."],
  "6": [".XXX.", "X....", "X....", "XXXX.", "X...X", "X...X", ".XXX."],
  "7": ["XXXXX", "....X", "...X.", "..X..", ".X...", ".X...", ".X..."],
  "8": [".XXX.", "X...X", "X...X", ".XXX.", "X...X", "X...X", ".XXX."],
  "9": [".XXX.", "X...X", "X...X", ".XXXX", "....X", "....X", ".XXX."],
  " ": [".....", ".....", ".....", ".....", ".....", ".....", "....."],
  ".": [".....", ".....", ".....", ".....", ".....", ".XX..", ".XX.."],
  ",": [".....", ".....", ".....", ".....", ".XX..", "..X..", ".X..."],
  "-": [".....", ".....", ".....", "XXXXX", ".....", ".....", "....."],
  "+": [".....", "..X..", "..X..", "XXXXX", "..X..", "..X..", "....."],
  "=": [".....", ".....", "XXXXX", ".....", "XXXXX", ".....", "....."],
  "_": [".....", ".....", ".....", ".....", ".....", ".....", "XXXXX"],
  "(": ["...X.", "..X..", ".X...", ".X...", ".X...", "..X..", "...X."],
  ")": [".X...", "..X..", "...X.", "...X.", "...X.", "..X..", ".X..."],
  "[": [".XXX.", ".X...", ".X...", ".X...", ".X...", ".X...", ".XXX."],
  "]": [".XXX.", "...X.", "...X.", "...X.", "...X.", "...X.", ".XXX."],
  "/": ["....X", "....X", "...X.", "..X..", ".X...", "X....", "X...."],
  ":": [".....", ".XX..", ".XX..", ".....", ".XX..", ".XX..", "....."],
  "%": ["XX..X", "XX..X", "...X.", "..X..", ".X...", "X..XX", "X..XX"],
  "<": ["...X.", "..X..", ".X...", "X....", ".X...", "..X..", "...X."],
  ">": [".X...", "..X..", "...X.", "....X", "...X.", "..X..", ".X..."],
  "|": ["..X..", "..X..", "..X..", "..X..", "..X..", "..X..", "..X.."],
  "*": [".....", "X.X.X", ".XXX.", "XXXXX", ".XXX.", "X.X.X", "....."],
  "?": [".XXX.", "X...X", "....X", "...X.", "..X..", ".....", "..X.."],
};

function glyph(ch: string): string[] {
  const up = ch.toUpperCase();
  return F[up] ?? F["?"];
}

// ---------------------------------------------------------------------------
// Raster canvas
// ---------------------------------------------------------------------------

function parseColor(hex: string): [number, number, number] {
  const h = hex.replace("#", "");
  return [parseInt(h.slice(0, 2), 16), parseInt(h.slice(2, 4), 16),
          parseInt(h.slice(4, 6), 16)];
}

class Raster {
  readonly w: number;
  readonly h: number;
  readonly data: Uint8Array;

  constructor(w: number, h: number) {
    this.w = Math.round(w);
    this.h = Math.round(h);
    this.data = new Uint8Array(this.w * this.h * 3).fill(255);
  }

  set(x: number, y: number, c: [number, number, number]): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.w || yi >= this.h) return;
    const o = (yi * this.w + xi) * 3;
    this.data[o] = c[0];
    this.data[o + 1] = c[1];
    this.data[o + 2] = c[2];
  }

  stamp(x: number, y: number, c: [number, number, number], width: number): void {
    const r = Math.max(0, Math.floor(width / 2));
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        this.set(x + dx, y + dy, c);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number,
       c: [number, number, number], width: number, dash?: string): void {
    let on = Infinity;
    let off = 0;
    if (dash) {
      const parts = dash.split(",").map((s) => Math.max(1, Math.round(Number(s))));
      on = parts[0];
      off = parts[1] ?? parts[0];
    }
    let xa = Math.round(x1);
    let ya = Math.round(y1);
    const xb = Math.round(x2);
    const yb = Math.round(y2);
    const dx = Math.abs(xb - xa);
    const dy = -Math.abs(yb - ya);
    const sx = xa < xb ? 1 : -1;
    const sy = ya < yb ? 1 : -1;
    let err = dx + dy;
    let step = 0;
    for (;;) {
      if (step % (on + off) < on) this.stamp(xa, ya, c, width);
      step++;
      if (xa === xb && ya === yb) break;
      const e2 = 2 * err;
      if (e2 >= dy) { err += dy; xa += sx; }
      if (e2 <= dx) { err += dx; ya += sy; }
    }
  }

  circle(cx: number, cy: number, r: number, c: [number, number, number]): void {
    for (let y = Math.floor(cy - r); y <= Math.ceil(cy + r); y++) {
      for (let x = Math.floor(cx - r); x <= Math.ceil(cx + r); x++) {
        if ((x - cx) ** 2 + (y - cy) ** 2 <= r * r + 0.25) this.set(x, y, c);
      }
    }
  }

  rect(x: number, y: number, w: number, h: number,
       c: [number, number, number]): void {
    for (let yy = Math.round(y); yy < Math.round(y + h); yy++) {
      for (let xx = Math.round(x); xx < Math.round(x + w); xx++) {
        this.set(xx, yy, c);
      }
    }
  }

  text(x: number, y: number, s: string, size: number,
       c: [number, number, number], anchor: "start" | "middle" | "end"): void {
    const scale = size >= 13 ? 2 : 1;
    const adv = 6 * scale;
    const total = s.length * adv - scale;
    let x0 = Math.round(x);
    if (anchor === "middle") x0 -= Math.round(total / 2);
    if (anchor === "end") x0 -= total;
    const y0 = Math.round(y) - 7 * scale;  // y is the baseline, as in SVG
    for (const ch of s) {
      const g = glyph(ch);
      for (let r = 0; r < 7; r++) {
        for (let q = 0; q < 5; q++) {
          if (g[r][q] === "X") {
            this.rect(x0 + q * scale, y0 + r * scale, scale, scale, c);
          }
        }
      }
      x0 += adv;
    }
  }
}

// ---------------------------------------------------------------------------
// PNG encoding (8-bit RGB, filter 0)
// ---------------------------------------------------------------------------

const CRC_TABLE = (() => {
  const t = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    t[n] = c >>> 0;
  }
  return t;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (const b of buf) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, "ascii");
  const crc = Buffer.alloc(4);
  const typed = Buffer.concat([Buffer.from(type, "ascii"), Buffer.from(data)]);
  crc.writeUInt32BE(crc32(typed), 0);
  return Buffer.concat([head, Buffer.from(data), crc]);
}

function encodePng(r: Raster): Buffer {
  const sig = Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]);
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(r.w, 0);
  ihdr.writeUInt32BE(r.h, 4);
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 2;   // colour type: truecolour
  const raw = Buffer.alloc(r.h * (1 + r.w * 3));
  for (let y = 0; y < r.h; y++) {
    const o = y * (1 + r.w * 3);
    raw[o] = 0;  // filter: none
    raw.set(r.data.subarray(y * r.w * 3, (y + 1) * r.w * 3), o + 1);
  }
  const idat = deflateSync(raw, { level: 9 });
  return Buffer.concat([sig, chunk("IHDR", ihdr), chunk("IDAT", idat),
                        chunk("IEND", new Uint8Array(0))]);
}

// ---------------------------------------------------------------------------
// Scene walker
// ---------------------------------------------------------------------------

export function sceneToPng(scene: Scene): Buffer {
  const r = new Raster(scene.width, scene.height);
  for (const p of scene.items) {
    draw(r, p);
  }
  return encodePng(r);
}

function draw(r: Raster, p: Primitive): void {
  switch (p.kind) {
    case "line":
      r.line(p.x1, p.y1, p.x2, p.y2, parseColor(p.stroke),
             Math.max(1, Math.round(p.width)), p.dash);
      break;
    case "polyline": {
      const c = parseColor(p.stroke);
      for (let i = 1; i < p.pts.length; i++) {
        r.line(p.pts[i - 1][0], p.pts[i - 1][1], p.pts[i][0], p.pts[i][1], c,
               Math.max(1, Math.round(p.width)), p.dash);
      }
      break;
    }
    case "rect":
      r.rect(p.x, p.y, p.w, p.h, parseColor(p.fill));
      break;
    case "circle":
      r.circle(p.cx, p.cy, p.r, parseColor(p.fill));
      break;
    case "text":
      r.text(p.x, p.y, p.s, p.size, parseColor(p.fill), p.anchor);
      break;
  }
}

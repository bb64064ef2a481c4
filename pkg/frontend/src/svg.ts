/** Scene -> SVG string.  Monospace text, fixed attribute order, no metadata. */

import { Scene, Primitive, fmt } from "./scene.js";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function emit(p: Primitive): string {
  switch (p.kind) {
    case "line": {
      const dash = p.dash ? ` stroke-dasharray="${p.dash}"` : "";
      return `<line x1="${fmt(p.x1)}" y1="${fmt(p.y1)}" x2="${fmt(p.x2)}" ` +
        `y2="${fmt(p.y2)}" stroke="${p.stroke}" stroke-width="${fmt(p.width)}"${dash}/>`;
    }
    case "polyline": {
      const pts = p.pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      const dash = p.dash ? ` stroke-dasharray="${p.dash}"` : "";
      return `<polyline points="${pts}" fill="none" stroke="${p.stroke}" ` +
        `stroke-width="${fmt(p.width)}"${dash}/>`;
    }
    case "rect": {
      const stroke = p.stroke ? ` stroke="${p.stroke}"` : "";
      return `<rect x="${fmt(p.x)}" y="${fmt(p.y)}" width="${fmt(p.w)}" ` +
        `height="${fmt(p.h)}" fill="${p.fill}"${stroke}/>`;
    }
    case "circle":
      return `<circle cx="${fmt(p.cx)}" cy="${fmt(p.cy)}" r="${fmt(p.r)}" ` +
        `fill="${p.fill}"/>`;
    case "text":
      return `<text x="${fmt(p.x)}" y="${fmt(p.y)}" font-family="monospace" ` +
        `font-size="${fmt(p.size)}" fill="${p.fill}" ` +
        `text-anchor="${p.anchor}">${esc(p.s)}</text>`;
  }
}

export function sceneToSvg(scene: Scene): string {
  const head = `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" ` +
    `height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">`;
  const body = scene.items.map(emit).join("\n");
  return `${head}\n<rect x="0" y="0" width="${scene.width}" ` +
    `height="${scene.height}" fill="#ffffff"/>\n${body}\n</svg>\n`;
}

/** Linear and log10 axis scales with deterministic tick selection. */

export interface Scale {
  toPixel(v: number): number;
  ticks(): number[];
  label(v: number): string;
  readonly log: boolean;
}

export function makeScale(min: number, max: number, pxA: number, pxB: number,
                          log: boolean): Scale {
  if (log) {
    if (min <= 0 || max <= 0) {
      throw new Error("log scale needs positive data");
    }
    const lo = Math.log10(min);
    const hi = Math.log10(max);
    const span = hi - lo || 1;
    return {
      log: true,
      // non-positive values clamp to the low edge instead of diverging
      toPixel: (v) => v <= 0 ? pxA
        : pxA + ((Math.log10(v) - lo) / span) * (pxB - pxA),
      ticks: () => {
        const out: number[] = [];
        for (let e = Math.floor(lo) - 1; e <= Math.ceil(hi) + 1; e++) {
          for (const m of [1, 2, 5]) {
            const v = m * Math.pow(10, e);
            const lv = Math.log10(v);
            if (lv >= lo - 1e-9 && lv <= hi + 1e-9) out.push(v);
          }
        }
        if (out.length === 0) out.push(Math.pow(10, lo), Math.pow(10, hi));
        return out;
      },
      label: (v) => {
        const e = Math.floor(Math.log10(v) + 1e-9);
        const m = Math.round(v / Math.pow(10, e));
        return m === 1 ? `1e${e}` : `${m}e${e}`;
      },
    };
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const span = max - min;
  const step = niceStep(span / 5);
  return {
    log: false,
    toPixel: (v) => pxA + ((v - min) / span) * (pxB - pxA),
    ticks: () => {
      const out: number[] = [];
      const start = Math.ceil(min / step - 1e-9) * step;
      for (let v = start; v <= max + 1e-9 * span; v += step) {
        out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
      }
      return out;
    },
    label: (v) => {
      if (v === 0) return "0";
      const a = Math.abs(v);
      if (a >= 0.001 && a < 100000) {
        return Number(v.toPrecision(6)).toString();
      }
      return v.toExponential(1).replace("e+", "e").replace("e-0", "e-");
    },
  };
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2 * mag;
  if (r < 7.5) return 5 * mag;
  return 10 * mag;
}

export function extent(values: number[], pad = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(lo <= hi)) throw new Error("empty extent");
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export function logExtent(values: number[]): [number, number] {
  const pos = values.filter((v) => v > 0);
  if (pos.length === 0) throw new Error("log scale needs positive data");
  const [lo, hi] = extent(pos, 0);
  return [lo / 1.3, hi * 1.3];
}

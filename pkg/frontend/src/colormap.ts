// Heat rendering for the uncertainty overlay: a small perceptually ordered
// ramp (dark violet -> red -> yellow), applied row-major so buffer index 0 is
// the top-left image pixel.

const STOPS: Array<[number, [number, number, number]]> = [
  [0.0, [13, 8, 135]],
  [0.25, [126, 3, 168]],
  [0.5, [204, 71, 120]],
  [0.75, [248, 149, 64]],
  [1.0, [240, 249, 33]],
];

export function heatColor(value: number): [number, number, number] {
  const v = Math.min(Math.max(value, 0), 1);
  for (let i = 1; i < STOPS.length; i++) {
    const [t1, c1] = STOPS[i];
    const [t0, c0] = STOPS[i - 1];
    if (v <= t1) {
      const t = (v - t0) / (t1 - t0);
      return [
        Math.round(c0[0] + t * (c1[0] - c0[0])),
        Math.round(c0[1] + t * (c1[1] - c0[1])),
        Math.round(c0[2] + t * (c1[2] - c0[2])),
      ];
    }
  }
  return STOPS[STOPS.length - 1][1];
}

/** RGBA heat overlay; per-pixel alpha scales with the value so confident
 * regions stay transparent. ``opacity`` is the slider's 0..1 master level. */
export function heatOverlayRgba(
  values: Float32Array,
  height: number,
  width: number,
  opacity: number,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(height * width * 4);
  for (let i = 0; i < height * width; i++) {
    const v = values[i];
    const [r, g, b] = heatColor(v);
    out[4 * i] = r;
    out[4 * i + 1] = g;
    out[4 * i + 2] = b;
    out[4 * i + 3] = Math.round(255 * opacity * Math.min(Math.max(v, 0), 1));
  }
  return out;
}

// Binary fixtures built by hand so the decoders are tested against the wire
// layout, not against our own encoders.

export function makeZivp(
  height: number,
  width: number,
  channels: number,
  values: (row: number, col: number, ch: number) => number,
): ArrayBuffer {
  const count = height * width * channels;
  const buffer = new ArrayBuffer(20 + 4 * count);
  const view = new DataView(buffer);
  view.setUint8(0, 0x5a); // Z
  view.setUint8(1, 0x49); // I
  view.setUint8(2, 0x56); // V
  view.setUint8(3, 0x50); // P
  view.setUint32(4, 1, true);
  view.setUint32(8, height, true);
  view.setUint32(12, width, true);
  view.setUint32(16, channels, true);
  let i = 0;
  for (let r = 0; r < height; r++) {
    for (let c = 0; c < width; c++) {
      for (let ch = 0; ch < channels; ch++) {
        view.setFloat32(20 + 4 * i, values(r, c, ch), true);
        i++;
      }
    }
  }
  return buffer;
}

/** Single-channel grid with distinct markers in the top-left and
 * bottom-left corners; any row flip or transpose moves them. */
export function cornerMarkerZivp(height: number, width: number): ArrayBuffer {
  return makeZivp(height, width, 1, (r, c) => {
    if (r === 0 && c === 0) return 1.0;
    if (r === height - 1 && c === 0) return 0.5;
    return 0.05;
  });
}

export function makePgm(height: number, width: number, pixel: (r: number, c: number) => number): ArrayBuffer {
  const header = `P5\n${width} ${height}\n255\n`;
  const head = new TextEncoder().encode(header);
  const out = new Uint8Array(head.length + height * width);
  out.set(head, 0);
  let i = head.length;
  for (let r = 0; r < height; r++) {
    for (let c = 0; c < width; c++) {
      out[i++] = pixel(r, c) & 0xff;
    }
  }
  return out.buffer;
}

export function makePpm(height: number, width: number, pixel: (r: number, c: number) => [number, number, number]): ArrayBuffer {
  const header = `P6\n${width} ${height}\n255\n`;
  const head = new TextEncoder().encode(header);
  const out = new Uint8Array(head.length + height * width * 3);
  out.set(head, 0);
  let i = head.length;
  for (let r = 0; r < height; r++) {
    for (let c = 0; c < width; c++) {
      const [red, green, blue] = pixel(r, c);
      out[i++] = red & 0xff;
      out[i++] = green & 0xff;
      out[i++] = blue & 0xff;
    }
  }
  return out.buffer;
}

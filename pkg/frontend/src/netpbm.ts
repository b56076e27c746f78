// Binary netpbm decoding for the frame endpoints: P5 (grayscale) for masks
// and generated previews, P6 (RGB) in case real footage is served.

export interface PnmImage {
  width: number;
  height: number;
  /** grayscale: 1 byte per pixel; rgb: 3 bytes per pixel, row-major */
  channels: 1 | 3;
  pixels: Uint8Array;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0c;
}

/** Read `count` header tokens (skipping # comments), returning the tokens and
 * the offset just past the single whitespace byte after the last one. */
function headerTokens(bytes: Uint8Array, count: number): { tokens: string[]; offset: number } {
  const tokens: string[] = [];
  let i = 0;
  while (tokens.length < count) {
    while (i < bytes.length && isSpace(bytes[i])) i++;
    if (i < bytes.length && bytes[i] === 0x23 /* # */) {
      while (i < bytes.length && bytes[i] !== 0x0a) i++;
      continue;
    }
    const start = i;
    while (i < bytes.length && !isSpace(bytes[i])) i++;
    if (start === i) throw new Error("netpbm header incomplete");
    tokens.push(String.fromCharCode(...bytes.subarray(start, i)));
  }
  if (i >= bytes.length) throw new Error("netpbm header incomplete");
  return { tokens, offset: i + 1 };
}

export function decodePnm(buffer: ArrayBuffer): PnmImage {
  const bytes = new Uint8Array(buffer);
  const { tokens, offset } = headerTokens(bytes, 4);
  const [magic, w, h, maxval] = tokens;
  if (magic !== "P5" && magic !== "P6") {
    throw new Error(`unsupported netpbm magic "${magic}"`);
  }
  if (maxval !== "255") {
    throw new Error(`expected maxval 255, got ${maxval}`);
  }
  const width = parseInt(w, 10);
  const height = parseInt(h, 10);
  const channels = magic === "P5" ? 1 : 3;
  const expected = width * height * channels;
  const pixels = bytes.subarray(offset);
  if (pixels.length !== expected) {
    throw new Error(`netpbm payload is ${pixels.length} bytes, expected ${expected}`);
  }
  return { width, height, channels, pixels: new Uint8Array(pixels) };
}

/** RGBA buffer (row 0 on top) ready for an ImageData of the same size. */
export function pnmToRgba(image: PnmImage): Uint8ClampedArray {
  const out = new Uint8ClampedArray(image.width * image.height * 4);
  for (let i = 0; i < image.width * image.height; i++) {
    const r = image.channels === 1 ? image.pixels[i] : image.pixels[3 * i];
    const g = image.channels === 1 ? image.pixels[i] : image.pixels[3 * i + 1];
    const b = image.channels === 1 ? image.pixels[i] : image.pixels[3 * i + 2];
    out[4 * i] = r;
    out[4 * i + 1] = g;
    out[4 * i + 2] = b;
    out[4 * i + 3] = 255;
  }
  return out;
}

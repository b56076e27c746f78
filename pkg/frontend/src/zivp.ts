// ZIVP float-grid decoder. Layout: "ZIVP", u32 version (=1), u32 H, u32 W,
// u32 C, then H*W*C little-endian float32 in row-major order with the class
// index varying fastest. Row 0 is the TOP image row; nothing here flips it.

export interface ZivpGrid {
  height: number;
  width: number;
  channels: number;
  /** length = height * width * channels, row-major, channel fastest */
  data: Float32Array;
}

export function decodeZivp(buffer: ArrayBuffer): ZivpGrid {
  const view = new DataView(buffer);
  if (buffer.byteLength < 20) {
    throw new Error(`ZIVP header incomplete (${buffer.byteLength} bytes)`);
  }
  const magic = String.fromCharCode(
    view.getUint8(0), view.getUint8(1), view.getUint8(2), view.getUint8(3),
  );
  if (magic !== "ZIVP") {
    throw new Error(`bad magic "${magic}"`);
  }
  const version = view.getUint32(4, true);
  if (version !== 1) {
    throw new Error(`unsupported ZIVP version ${version}`);
  }
  const height = view.getUint32(8, true);
  const width = view.getUint32(12, true);
  const channels = view.getUint32(16, true);
  const count = height * width * channels;
  if (buffer.byteLength !== 20 + 4 * count) {
    throw new Error(
      `ZIVP payload is ${buffer.byteLength - 20} bytes, expected ${4 * count}`,
    );
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = view.getFloat32(20 + 4 * i, true);
  }
  return { height, width, channels, data };
}

/** First channel of a grid as a dense row-major plane. */
export function channelPlane(grid: ZivpGrid, channel = 0): Float32Array {
  if (channel >= grid.channels) {
    throw new Error(`channel ${channel} out of range (C=${grid.channels})`);
  }
  if (grid.channels === 1 && channel === 0) {
    return grid.data;
  }
  const plane = new Float32Array(grid.height * grid.width);
  for (let i = 0; i < plane.length; i++) {
    plane[i] = grid.data[i * grid.channels + channel];
  }
  return plane;
}

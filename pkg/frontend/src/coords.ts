// Canvas <-> image-pixel mapping. The canvas is the image scaled by an
// integer zoom factor; a click anywhere inside a displayed pixel must map to
// exactly that (row, col), and the center of a pixel must round-trip at any
// zoom.

export interface PixelPos {
  row: number;
  col: number;
}

/** Canvas coordinates of the CENTER of an image pixel. */
export function pixelCenterToCanvas(pos: PixelPos, zoom: number): { x: number; y: number } {
  return { x: (pos.col + 0.5) * zoom, y: (pos.row + 0.5) * zoom };
}

/** Image pixel under a canvas point, rounding to the nearest pixel center
 * and clamping into the frame. */
export function canvasToPixel(
  x: number,
  y: number,
  zoom: number,
  height: number,
  width: number,
): PixelPos {
  const row = Math.round(y / zoom - 0.5);
  const col = Math.round(x / zoom - 0.5);
  return {
    row: Math.min(Math.max(row, 0), height - 1),
    col: Math.min(Math.max(col, 0), width - 1),
  };
}

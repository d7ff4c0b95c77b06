// Browser-only canvas glue: grids to PNG blobs and back. Kept apart from the
// pure editing logic so that logic stays testable off-DOM.

import { PaintGrid } from "./grid.js";

export function gridToImageData(grid: PaintGrid): ImageData {
  const rgba = new Uint8ClampedArray(grid.width * grid.height * 4);
  const gray = grid.toGray8();
  for (let i = 0; i < gray.length; i++) {
    rgba[4 * i] = rgba[4 * i + 1] = rgba[4 * i + 2] = gray[i];
    rgba[4 * i + 3] = 255;
  }
  return new ImageData(rgba, grid.width, grid.height);
}

export async function gridToPngBlob(grid: PaintGrid): Promise<Blob> {
  const canvas = document.createElement("canvas");
  canvas.width = grid.width;
  canvas.height = grid.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");
  ctx.putImageData(gridToImageData(grid), 0, 0);
  return new Promise((resolve, reject) => {
    canvas.toBlob((blob) => (blob ? resolve(blob) : reject(new Error("PNG encode failed"))), "image/png");
  });
}

export async function blobToGray(blob: Blob): Promise<{ width: number; height: number; gray: Uint8ClampedArray }> {
  const bitmap = await createImageBitmap(blob);
  const canvas = document.createElement("canvas");
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas unavailable");
  ctx.drawImage(bitmap, 0, 0);
  const image = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  const gray = new Uint8ClampedArray(bitmap.width * bitmap.height);
  for (let i = 0; i < gray.length; i++) gray[i] = image.data[4 * i];
  return { width: bitmap.width, height: bitmap.height, gray };
}

// Paintable region mask: brush strokes composite 1s into the grid (eraser
// mode paints 0s); uploaded to the session as 8-bit grayscale PNG.

import { PaintGrid } from "./grid.js";

export class MaskEditor {
  readonly grid: PaintGrid;
  brushRadius = 8;
  erasing = false;
  private stroking = false;
  private lastX = 0;
  private lastY = 0;

  constructor(width: number, height: number) {
    this.grid = new PaintGrid(width, height);
  }

  beginStroke(x: number, y: number): void {
    this.grid.snapshot();
    this.stroking = true;
    this.lastX = x;
    this.lastY = y;
    this.grid.paintDisk(x, y, this.brushRadius, this.erasing ? 0 : 1);
  }

  continueStroke(x: number, y: number): void {
    if (!this.stroking) return;
    this.grid.paintStroke(this.lastX, this.lastY, x, y, this.brushRadius, this.erasing ? 0 : 1);
    this.lastX = x;
    this.lastY = y;
  }

  endStroke(): void {
    this.stroking = false;
  }

  fillAll(): void {
    this.grid.snapshot();
    this.grid.fill(1);
  }

  clearAll(): void {
    this.grid.snapshot();
    this.grid.fill(0);
  }

  undo(): boolean {
    return this.grid.undo();
  }
}

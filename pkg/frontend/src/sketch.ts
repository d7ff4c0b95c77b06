// Sketch authoring: start from a Canny edge map, rub strokes out with the
// eraser, upload what remains as the base-normal sketch.

import { PaintGrid } from "./grid.js";

export class SketchEditor {
  readonly grid: PaintGrid;
  eraserRadius = 6;
  private stroking = false;
  private lastX = 0;
  private lastY = 0;

  constructor(width: number, height: number, edges?: ArrayLike<number>) {
    this.grid = new PaintGrid(width, height, edges);
  }

  static fromEdgeBitmap(width: number, height: number, gray8: ArrayLike<number>): SketchEditor {
    const data = new Float32Array(width * height);
    for (let i = 0; i < data.length; i++) data[i] = gray8[i] > 127 ? 1 : 0;
    return new SketchEditor(width, height, data);
  }

  beginErase(x: number, y: number): void {
    this.grid.snapshot();
    this.stroking = true;
    this.lastX = x;
    this.lastY = y;
    this.grid.paintDisk(x, y, this.eraserRadius, 0);
  }

  continueErase(x: number, y: number): void {
    if (!this.stroking) return;
    this.grid.paintStroke(this.lastX, this.lastY, x, y, this.eraserRadius, 0);
    this.lastX = x;
    this.lastY = y;
  }

  endErase(): void {
    this.stroking = false;
  }

  eraseAll(): void {
    this.grid.snapshot();
    this.grid.fill(0);
  }

  undo(): boolean {
    return this.grid.undo();
  }

  strokePixels(): number {
    return this.grid.countAbove(0.5);
  }
}

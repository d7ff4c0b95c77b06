// Shared pixel-grid editing core: a float grid in [0, 1] with disk brushes,
// stroke stamping, and an undo stack of snapshots.

export class PaintGrid {
  readonly width: number;
  readonly height: number;
  data: Float32Array;
  private undoStack: Float32Array[] = [];
  private readonly maxUndo: number;

  constructor(width: number, height: number, initial?: ArrayLike<number>, maxUndo = 32) {
    if (width < 1 || height < 1) throw new Error(`bad grid size ${width}x${height}`);
    this.width = width;
    this.height = height;
    this.maxUndo = maxUndo;
    this.data = new Float32Array(width * height);
    if (initial) {
      if (initial.length !== width * height) {
        throw new Error(`initial data length ${initial.length} != ${width * height}`);
      }
      this.data.set(initial);
    }
  }

  at(x: number, y: number): number {
    return this.data[y * this.width + x];
  }

  snapshot(): void {
    this.undoStack.push(this.data.slice());
    if (this.undoStack.length > this.maxUndo) this.undoStack.shift();
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.data = prev;
    return true;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  fill(value: number): void {
    this.data.fill(clamp01(value));
  }

  paintDisk(cx: number, cy: number, radius: number, value: number): void {
    const v = clamp01(value);
    const r2 = radius * radius;
    const x0 = Math.max(0, Math.floor(cx - radius));
    const x1 = Math.min(this.width - 1, Math.ceil(cx + radius));
    const y0 = Math.max(0, Math.floor(cy - radius));
    const y1 = Math.min(this.height - 1, Math.ceil(cy + radius));
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const dx = x - cx;
        const dy = y - cy;
        if (dx * dx + dy * dy <= r2) this.data[y * this.width + x] = v;
      }
    }
  }

  // stamp disks along the segment so fast pointer moves leave no gaps
  paintStroke(x0: number, y0: number, x1: number, y1: number, radius: number, value: number): void {
    const dist = Math.hypot(x1 - x0, y1 - y0);
    const steps = Math.max(1, Math.ceil(dist / Math.max(1, radius / 2)));
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      this.paintDisk(x0 + t * (x1 - x0), y0 + t * (y1 - y0), radius, value);
    }
  }

  countAbove(threshold = 0): number {
    let n = 0;
    for (const v of this.data) if (v > threshold) n++;
    return n;
  }

  isEmpty(): boolean {
    return this.countAbove(0) === 0;
  }

  toGray8(): Uint8ClampedArray {
    const out = new Uint8ClampedArray(this.data.length);
    for (let i = 0; i < this.data.length; i++) out[i] = Math.round(this.data[i] * 255);
    return out;
  }
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

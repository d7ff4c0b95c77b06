// Per-label height offsets for layered stylization solves.

export class LayerOffsets {
  private offsets = new Map<number, number>();

  set(label: number, offset: number): string | null {
    if (!Number.isInteger(label) || label < 0) return "label must be a non-negative integer";
    if (!Number.isFinite(offset)) return "offset must be a number";
    this.offsets.set(label, offset);
    return null;
  }

  remove(label: number): void {
    this.offsets.delete(label);
  }

  get size(): number {
    return this.offsets.size;
  }

  entries(): Array<[number, number]> {
    return [...this.offsets.entries()].sort((a, b) => a[0] - b[0]);
  }

  // JSON object keys are strings; the engine converts them back to ints
  toJSON(): Record<string, number> {
    const out: Record<string, number> = {};
    for (const [label, offset] of this.offsets) out[String(label)] = offset;
    return out;
  }

  auxSpec(labelsInput: string): Record<string, unknown> {
    return { kind: "layered", labels: labelsInput, offsets: this.toJSON() };
  }
}

// Detail-patch placement: choose a source detail artifact (plus optional
// weight mask), drag it to a target offset, and build the transfer request.

export interface PatchPlacement {
  patch: string;
  patchMask: string;
  base: string;
  offsetX: number;
  offsetY: number;
  out?: string;
}

export interface Rect {
  width: number;
  height: number;
}

export function overlaps(placement: PatchPlacement, patchSize: Rect, baseSize: Rect): boolean {
  const x0 = Math.max(0, placement.offsetX);
  const y0 = Math.max(0, placement.offsetY);
  const x1 = Math.min(baseSize.width, placement.offsetX + patchSize.width);
  const y1 = Math.min(baseSize.height, placement.offsetY + patchSize.height);
  return x1 > x0 && y1 > y0;
}

export function transferRequest(placement: PatchPlacement): Record<string, unknown> {
  const body: Record<string, unknown> = {
    patch: placement.patch,
    patch_mask: placement.patchMask,
    base: placement.base,
    offset: [Math.round(placement.offsetX), Math.round(placement.offsetY)],
  };
  if (placement.out) body.out = placement.out;
  return body;
}

export function placementFromDrag(
  startOffset: { x: number; y: number },
  dragStart: { x: number; y: number },
  dragNow: { x: number; y: number },
): { x: number; y: number } {
  return {
    x: Math.round(startOffset.x + (dragNow.x - dragStart.x)),
    y: Math.round(startOffset.y + (dragNow.y - dragStart.y)),
  };
}

"""Detail and base normal images from a single photograph or sketch.

Detail normals come straight from image intensity: Sobel derivatives
``(dx, dy)`` plus a z-component ``alpha1 * alpha2**|(dx, dy)|`` that shrinks
where the response is strong, then ``normalize(-dx, -dy, dz)``.  The minus
signs keep the height-field convention (normal of ``h(x, y)`` is
``(-h_x, -h_y, 1)``); flipping them mirrors every downstream relief.

Base normals come from a sketch: the edge map's gradients are diffused into
a smooth vector field by iterating the Euler-Lagrange update of

    E(g) = sum |grad gx|^2 + |grad gy|^2 + omega |grad e|^2 |g - grad e|^2

and the field is capped with a constant z to form normals (small z lifts the
shape more).  Few iterations hug the strokes; many iterations flood the
interior and plump the shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from basrelief.errors import DimensionMismatch, UnstableStep, ValidationError
from basrelief.normal_algebra import normalize

# 1/8-normalized Sobel kernels: response to a unit ramp is exactly 1.
SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]) / 8.0
SOBEL_Y = SOBEL_X.T

# Explicit 5-point diffusion is stable only up to h^2/4 with unit spacing.
MAX_STEP_SIZE = 0.25

EDGE_SMOOTH_SIGMA = 1.0


@dataclass
class SobelParams:
    """z-assembly for detail normals: dz = alpha1 * alpha2**|(dx, dy)|."""

    alpha1: float = 1.0
    alpha2: float = 0.5

    def __post_init__(self):
        if self.alpha1 <= 0:
            raise ValidationError(f"alpha1 must be > 0, got {self.alpha1}")
        if not 0 < self.alpha2 <= 1:
            raise ValidationError(f"alpha2 must be in (0, 1], got {self.alpha2}")


@dataclass
class GvfParams:
    """Edge-gradient diffusion controls.

    omega weighs edge fidelity against smoothness; iterations sets how far
    the field floods inward; z_const is the constant z used when assembling
    normals; step_size is the explicit diffusion step (must stay <= 0.25).
    """

    omega: float = 2.0
    iterations: int = 500
    z_const: float = 1.0
    step_size: float = 0.2

    def __post_init__(self):
        if self.omega < 0:
            raise ValidationError(f"omega must be >= 0, got {self.omega}")
        if self.iterations < 0:
            raise ValidationError(f"iterations must be >= 0, got {self.iterations}")
        if self.z_const <= 0:
            raise ValidationError(f"z_const must be > 0, got {self.z_const}")


def _require_gray(g: np.ndarray, name: str = "gray image") -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] < 1 or g.shape[1] < 1:
        raise DimensionMismatch(f"{name} must have shape (H, W), got {g.shape}")
    return g


def grayscale(rgb: np.ndarray) -> np.ndarray:
    """Luminance 0.299 R + 0.587 G + 0.114 B of an (H, W, 3|4) image in [0, 1]."""
    rgb = np.asarray(rgb, dtype=float)
    if rgb.ndim == 2:
        return np.clip(rgb, 0.0, 1.0)
    if rgb.ndim != 3 or rgb.shape[2] < 3:
        raise DimensionMismatch(f"expected (H, W, 3|4) color image, got {rgb.shape}")
    lum = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(lum, 0.0, 1.0)


def sobel_gradients(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(dx, dy) from the 1/8-normalized 3x3 Sobel kernels, edges replicated."""
    g = _require_gray(g)
    dx = ndimage.correlate(g, SOBEL_X, mode="nearest")
    dy = ndimage.correlate(g, SOBEL_Y, mode="nearest")
    return dx, dy


def normal_from_image(g: np.ndarray, p: SobelParams | None = None) -> np.ndarray:
    """Detail normal image from a gray image via Sobel derivatives."""
    p = p or SobelParams()
    dx, dy = sobel_gradients(g)
    dz = p.alpha1 * p.alpha2 ** np.hypot(dx, dy)
    return normalize(np.stack([-dx, -dy, dz], axis=-1))


def canny_edges(g: np.ndarray, low: float, high: float, sigma: float = 1.0) -> np.ndarray:
    """Binary edge map by Canny: blur, Sobel, non-maximum suppression, hysteresis.

    Thresholds are fractions of the maximum gradient magnitude, 0 <= low <= high.
    """
    g = _require_gray(g)
    if not 0 <= low <= high:
        raise ValidationError(f"need 0 <= low <= high, got low={low} high={high}")

    smoothed = ndimage.gaussian_filter(g, sigma, mode="nearest")
    dx, dy = sobel_gradients(smoothed)
    mag = np.hypot(dx, dy)
    peak = mag.max()
    if peak <= 1e-12:  # flat image up to rounding noise
        return np.zeros_like(g)
    mag = mag / peak

    # Quantize the gradient direction to 4 sectors and keep local maxima along
    # it.  Ties break toward the positive direction so a symmetric step keeps
    # a single-pixel line.
    angle = np.mod(np.arctan2(dy, dx), np.pi)
    sector = np.rint(angle / (np.pi / 4.0)).astype(int) % 4
    padded = np.pad(mag, 1)
    h, w = mag.shape
    steps = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}  # (di, dj) per sector
    keep = np.zeros_like(mag, dtype=bool)
    for s, (di, dj) in steps.items():
        fwd = padded[1 + di:1 + di + h, 1 + dj:1 + dj + w]
        bwd = padded[1 - di:1 - di + h, 1 - dj:1 - dj + w]
        keep |= (sector == s) & (mag > bwd) & (mag >= fwd)

    candidates = keep & (mag >= low)
    strong = keep & (mag >= high)
    labels, count = ndimage.label(candidates, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return np.zeros_like(g)
    connected = np.unique(labels[strong])
    edge = candidates & np.isin(labels, connected[connected > 0])
    return edge.astype(float)


def _laplacian(f: np.ndarray) -> np.ndarray:
    """5-point Laplacian with replicated borders (no flux across the frame)."""
    p = np.pad(f, 1, mode="edge")
    return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * f


def edge_gradient(e: np.ndarray, smooth_sigma: float = EDGE_SMOOTH_SIGMA) -> np.ndarray:
    """(H, W, 2) gradient of the edge map after the stabilizing 1-pixel blur."""
    e = _require_gray(e, "edge map")
    es = ndimage.gaussian_filter(e, smooth_sigma, mode="nearest")
    return np.stack([np.gradient(es, axis=1), np.gradient(es, axis=0)], axis=-1)


def gvf_field(
    e: np.ndarray,
    p: GvfParams | None = None,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Diffuse edge gradients into a dense vector field.

    Runs ``p.iterations`` steps of ``g <- g + dt (lap g - omega |grad e|^2 (g - grad e))``
    with the data term taken implicitly, which damps strongly weighted pixels
    and keeps the explicit scheme inside its stability bound.  Pass ``initial``
    to continue a previous run (e.g. probing 100/500/1000 iterations).
    """
    p = p or GvfParams()
    if not 0 < p.step_size <= MAX_STEP_SIZE:
        raise UnstableStep(
            f"step_size {p.step_size} outside (0, {MAX_STEP_SIZE}] explicit stability bound"
        )
    ge = edge_gradient(e)
    ex, ey = ge[..., 0], ge[..., 1]
    weight = ex * ex + ey * ey

    if initial is None:
        x, y = ex.copy(), ey.copy()
    else:
        initial = np.asarray(initial, dtype=float)
        if initial.shape != ge.shape:
            raise DimensionMismatch(f"initial field {initial.shape} vs expected {ge.shape}")
        x, y = initial[..., 0].copy(), initial[..., 1].copy()

    dt = p.step_size
    drive = dt * p.omega * weight
    denom = 1.0 + drive
    for _ in range(p.iterations):
        x = (x + dt * _laplacian(x) + drive * ex) / denom
        y = (y + dt * _laplacian(y) + drive * ey) / denom
    return np.stack([x, y], axis=-1)


def gvf_energy(field: np.ndarray, e: np.ndarray, p: GvfParams | None = None) -> float:
    """Discrete diffusion energy of a field against an edge map (for monitoring descent)."""
    p = p or GvfParams()
    ge = edge_gradient(e)
    weight = ge[..., 0] ** 2 + ge[..., 1] ** 2
    field = np.asarray(field, dtype=float)
    smooth = 0.0
    for c in range(2):
        f = field[..., c]
        smooth += np.sum((f[:, 1:] - f[:, :-1]) ** 2) + np.sum((f[1:, :] - f[:-1, :]) ** 2)
    data = np.sum(weight * np.sum((field - ge) ** 2, axis=-1))
    return float(smooth + p.omega * data)


def gvf_base_normal(e: np.ndarray, p: GvfParams | None = None) -> np.ndarray:
    """Base normal image from a sketch: diffused field capped with constant z."""
    p = p or GvfParams()
    field = gvf_field(e, p)
    z = np.full(field.shape[:2], p.z_const)
    return normalize(np.stack([-field[..., 0], -field[..., 1], z], axis=-1))

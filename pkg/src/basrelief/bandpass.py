"""Band-pass decomposition and layer editing of normal images.

The smoothing kernel is a bilateral filter acting on normals as 3-vectors:
spatial closeness weight ``exp(-|p-q|^2 / 2 sigma_c^2)`` times similarity
weight ``exp(-|N(p)-N(q)|^2 / 2 sigma_s^2)``, with the weighted vector sum
scaled back to unit length.  Window radius is ``ceil(3 sigma_c)``, clipped at
the image bounds (the unit-normalization absorbs the missing tail weight).

Subtracting the smoothed image with the rotation operator ``ominus`` yields a
detail layer; ``oplus`` composes it back.  Fractional mask weights blend
normals by normalized linear interpolation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from basrelief.errors import (
    DegenerateSumWarning,
    DimensionMismatch,
    EmptyOverlap,
    FlatDetailWarning,
    ValidationError,
)
from basrelief.normal_algebra import normalize, ominus, oplus

MAX_TUNED_ANGLE = np.deg2rad(89.9)


@dataclass
class FilterParams:
    """Bilateral filter widths: spatial sigma in pixels, range sigma in vector-difference units.

    ``pre_sigma_c``/``pre_sigma_s`` optionally pre-smooth the input before
    decomposition to suppress noise; ``pre_sigma_s`` defaults to ``sigma_s``.
    """

    sigma_c: float
    sigma_s: float = 0.9
    pre_sigma_c: float | None = None
    pre_sigma_s: float | None = None

    def __post_init__(self):
        if self.sigma_c <= 0:
            raise ValidationError(f"sigma_c must be > 0, got {self.sigma_c}")
        if self.sigma_s <= 0:
            raise ValidationError(f"sigma_s must be > 0, got {self.sigma_s}")
        if self.pre_sigma_c is not None and self.pre_sigma_c <= 0:
            raise ValidationError(f"pre_sigma_c must be > 0, got {self.pre_sigma_c}")
        if self.pre_sigma_s is not None and self.pre_sigma_s <= 0:
            raise ValidationError(f"pre_sigma_s must be > 0, got {self.pre_sigma_s}")


@dataclass
class DetailTuning:
    """Angle remap gain and exponent: theta -> beta * theta_m * (theta/theta_m)^gamma."""

    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError(f"beta must be >= 0, got {self.beta}")
        if self.gamma <= 0:
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")


def _require_normal_image(N: np.ndarray, name: str = "normal image") -> np.ndarray:
    N = np.asarray(N, dtype=float)
    if N.ndim != 3 or N.shape[2] != 3 or N.shape[0] < 1 or N.shape[1] < 1:
        raise DimensionMismatch(f"{name} must have shape (H, W, 3), got {N.shape}")
    return N


def _require_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise DimensionMismatch(f"{what}: {a.shape[:2]} vs {b.shape[:2]}")


def nlerp(a: np.ndarray, b: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Normalized linear interpolation between unit-vector grids, weight t toward b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    if t.ndim == a.ndim - 1:
        t = t[..., None]
    v = (1.0 - t) * a + t * b
    return normalize(v, fallback=a)


def bilateral_filter(N: np.ndarray, p: FilterParams) -> np.ndarray:
    """Edge-preserving smoothing of a normal image.

    Each output pixel is the unit-normalized weighted sum over a square
    window of radius ``ceil(3 sigma_c)``.  Pixels whose weighted sum collapses
    below 1e-12 fall back to the input value (with a DegenerateSumWarning).
    """
    N = _require_normal_image(N)
    h, w = N.shape[:2]
    radius = int(np.ceil(3.0 * p.sigma_c))
    radius = min(radius, max(h, w) - 1)

    inv2sc = 1.0 / (2.0 * p.sigma_c * p.sigma_c)
    inv2ss = 1.0 / (2.0 * p.sigma_s * p.sigma_s)

    acc = N.copy()  # the q == p term has weight exactly 1
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if di == 0 and dj == 0:
                continue
            wc = np.exp(-(di * di + dj * dj) * inv2sc)
            if wc == 0.0:
                continue
            i0, i1 = max(0, -di), min(h, h - di)
            j0, j1 = max(0, -dj), min(w, w - dj)
            if i0 >= i1 or j0 >= j1:
                continue
            center = N[i0:i1, j0:j1]
            neighbor = N[i0 + di:i1 + di, j0 + dj:j1 + dj]
            diff = center - neighbor
            ws = np.exp(-np.sum(diff * diff, axis=-1) * inv2ss)
            acc[i0:i1, j0:j1] += (wc * ws)[..., None] * neighbor

    norms = np.linalg.norm(acc, axis=-1, keepdims=True)
    degenerate = norms[..., 0] < 1e-12
    if np.any(degenerate):
        warnings.warn(
            f"{int(degenerate.sum())} pixel(s) with degenerate weighted sum fell back to input",
            DegenerateSumWarning,
        )
        acc = np.where(degenerate[..., None], N, acc)
        norms = np.where(degenerate[..., None], 1.0, norms)
    return acc / norms


def decompose(N: np.ndarray, p: FilterParams) -> tuple[np.ndarray, np.ndarray]:
    """Split a normal image into (detail, base) layers.

    Optional pre-smoothing (``pre_sigma_c``) replaces the input before the
    band split, so the layers reconstruct the denoised image rather than raw
    sensor noise.  ``compose(detail, base)`` inverts the split exactly.
    """
    N = _require_normal_image(N)
    if p.pre_sigma_c is not None:
        pre = FilterParams(
            sigma_c=p.pre_sigma_c,
            sigma_s=p.pre_sigma_s if p.pre_sigma_s is not None else p.sigma_s,
        )
        N = bilateral_filter(N, pre)
    base = bilateral_filter(N, p)
    detail = ominus(N, base)
    return detail, base


def compose(detail: np.ndarray, base: np.ndarray) -> np.ndarray:
    """Pixelwise ``detail oplus base``: re-attach a detail layer onto a carrier."""
    detail = _require_normal_image(detail, "detail")
    base = _require_normal_image(base, "base")
    _require_same_shape(detail, base, "compose layer shapes differ")
    return oplus(detail, base)


def tune_detail(detail: np.ndarray, t: DetailTuning) -> np.ndarray:
    """Boost or attenuate a detail layer by remapping each pixel's tilt angle.

    The angle theta from the z-axis maps to ``beta * theta_m * (theta/theta_m)^gamma``
    (theta_m = image maximum) about the unchanged azimuth, clamped below 90
    degrees so downstream gradients stay finite.  A flat detail image is
    returned unchanged with a FlatDetailWarning.
    """
    detail = _require_normal_image(detail, "detail")
    nz = np.clip(detail[..., 2], -1.0, 1.0)
    theta = np.arccos(nz)
    theta_m = float(theta.max())
    if theta_m < 1e-12:
        warnings.warn("detail image is flat; returning input unchanged", FlatDetailWarning)
        return detail.copy()
    remapped = t.beta * theta_m * (theta / theta_m) ** t.gamma
    remapped = np.minimum(remapped, MAX_TUNED_ANGLE)
    phi = np.arctan2(detail[..., 1], detail[..., 0])
    s = np.sin(remapped)
    out = np.stack([s * np.cos(phi), s * np.sin(phi), np.cos(remapped)], axis=-1)
    return normalize(out)


def partial_smooth(N: np.ndarray, mask: np.ndarray, p: FilterParams) -> np.ndarray:
    """Blend toward the bilateral-smoothed image where mask is 1, keep N where 0."""
    N = _require_normal_image(N)
    mask = np.asarray(mask, dtype=float)
    _require_same_shape(N, mask, "mask shape differs from image")
    smoothed = bilateral_filter(N, p)
    return nlerp(N, smoothed, mask)


def transfer_detail(
    patch: np.ndarray,
    patch_mask: np.ndarray,
    base: np.ndarray,
    offset: tuple[int, int],
) -> np.ndarray:
    """Grow a detail patch onto a base image at pixel offset ``(x, y)``.

    Inside the mask the result is ``patch oplus base`` so transferred bumps
    follow the base orientation instead of overwriting it; fractional mask
    values blend with the base.  The patch is clipped to the base bounds;
    a fully clipped placement raises EmptyOverlap.
    """
    patch = _require_normal_image(patch, "patch")
    base = _require_normal_image(base, "base")
    patch_mask = np.asarray(patch_mask, dtype=float)
    _require_same_shape(patch, patch_mask, "patch mask shape differs from patch")

    x0, y0 = int(offset[0]), int(offset[1])
    h, w = base.shape[:2]
    ph, pw = patch.shape[:2]
    ty0, ty1 = max(0, y0), min(h, y0 + ph)
    tx0, tx1 = max(0, x0), min(w, x0 + pw)
    if ty0 >= ty1 or tx0 >= tx1:
        raise EmptyOverlap(f"patch {pw}x{ph} at offset ({x0}, {y0}) misses base {w}x{h}")

    region = base[ty0:ty1, tx0:tx1]
    src = patch[ty0 - y0:ty1 - y0, tx0 - x0:tx1 - x0]
    m = patch_mask[ty0 - y0:ty1 - y0, tx0 - x0:tx1 - x0]
    grown = oplus(src, region)
    out = base.copy()
    out[ty0:ty1, tx0:tx1] = nlerp(region, grown, m)
    return out

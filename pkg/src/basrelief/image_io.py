"""Bit-exact PNG codecs and Wavefront OBJ export.

Normal maps are RGB(A) PNGs at 8 or 16 bits with channels mapped by
``n = 2 c / maxval - 1``; alpha 0 marks background.  Height fields are 16-bit
grayscale PNGs whose affine range is recorded in text chunks so the values
survive the trip.  Label maps are indexed or grayscale PNGs.

Normal/mask/label codecs ride on OpenCV and Pillow; OpenCV's internal
threading is disabled so encoded bytes are deterministic.
"""

from __future__ import annotations

import io
import warnings

import cv2
import numpy as np
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from basrelief.errors import BadFormat, DimensionMismatch, EmptyDomain, NonUnitWarning
from basrelief.relief_solver import foreground_mask

cv2.setNumThreads(0)  # deterministic PNG byte streams

HEIGHT_MIN_KEY = "basrelief-height-min"
HEIGHT_MAX_KEY = "basrelief-height-max"

_PNG_PARAMS = [int(cv2.IMWRITE_PNG_COMPRESSION), 6]


def _imencode_png(arr: np.ndarray) -> bytes:
    ok, buf = cv2.imencode(".png", arr, _PNG_PARAMS)
    if not ok:
        raise BadFormat("PNG encoding failed")
    return buf.tobytes()


def _imdecode_png(data: bytes) -> np.ndarray:
    arr = cv2.imdecode(np.frombuffer(data, np.uint8), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise BadFormat("not a decodable image")
    return arr


def _maxval(arr: np.ndarray) -> int:
    if arr.dtype == np.uint8:
        return 255
    if arr.dtype == np.uint16:
        return 65535
    raise BadFormat(f"unsupported sample type {arr.dtype}")


def encode_normal_png(
    N: np.ndarray,
    mask: np.ndarray | None = None,
    bit_depth: int = 8,
) -> bytes:
    """Quantize a normal image to an RGB(A) PNG; mask becomes the alpha channel."""
    if bit_depth not in (8, 16):
        raise BadFormat(f"bit_depth must be 8 or 16, got {bit_depth}")
    N = np.asarray(N, dtype=float)
    if N.ndim != 3 or N.shape[2] != 3:
        raise DimensionMismatch(f"normal image must be (H, W, 3), got {N.shape}")
    maxval = 255 if bit_depth == 8 else 65535
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    c = np.clip(np.rint((N + 1.0) / 2.0 * maxval), 0, maxval).astype(dtype)
    bgr = c[..., ::-1]
    if mask is None:
        return _imencode_png(np.ascontiguousarray(bgr))
    mask = np.asarray(mask, dtype=float)
    if mask.shape != N.shape[:2]:
        raise DimensionMismatch(f"mask {mask.shape} vs image {N.shape[:2]}")
    alpha = np.clip(np.rint(mask * maxval), 0, maxval).astype(dtype)
    return _imencode_png(np.ascontiguousarray(np.dstack([bgr, alpha])))


def decode_normal_png(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Decode an RGB(A) PNG to (unit normal image, mask).

    The alpha channel (when present) becomes the domain mask and zero-alpha
    pixels get the flat normal (0, 0, 1).  Pixels whose raw length strays
    from 1 by more than 0.1 are counted and reported via NonUnitWarning
    before renormalization.
    """
    arr = _imdecode_png(data)
    if arr.ndim != 3 or arr.shape[2] not in (3, 4):
        raise BadFormat(f"expected RGB or RGBA samples, got shape {arr.shape}")
    maxval = _maxval(arr)
    rgb = arr[..., 2::-1].astype(float)  # BGR(A) -> RGB
    raw = 2.0 * rgb / maxval - 1.0
    if arr.shape[2] == 4:
        mask = arr[..., 3].astype(float) / maxval
    else:
        mask = np.ones(arr.shape[:2])

    lengths = np.linalg.norm(raw, axis=-1)
    fg = mask > 0
    off = fg & (np.abs(lengths - 1.0) > 0.1)
    if np.any(off):
        warnings.warn(
            f"{int(off.sum())} pixel(s) deviate from unit length by more than 0.1",
            NonUnitWarning,
        )
    n = raw / np.maximum(lengths, 1e-12)[..., None]
    n[~fg] = (0.0, 0.0, 1.0)
    return n, mask


def encode_mask_png(mask: np.ndarray) -> bytes:
    """Store a weight mask as 8-bit grayscale."""
    mask = np.asarray(mask, dtype=float)
    if mask.ndim != 2:
        raise DimensionMismatch(f"mask must be 2-d, got {mask.shape}")
    return _imencode_png(np.clip(np.rint(mask * 255.0), 0, 255).astype(np.uint8))


def decode_mask_png(data: bytes) -> np.ndarray:
    """Read a grayscale PNG as weights in [0, 1]."""
    arr = _imdecode_png(data)
    if arr.ndim == 3:
        arr = arr[..., 0]
    return arr.astype(float) / _maxval(arr)


def encode_gray_png(g: np.ndarray) -> bytes:
    """Store a [0, 1] scalar field (gray image, edge map, sketch) as 8-bit grayscale."""
    return encode_mask_png(g)


def decode_gray_png(data: bytes) -> np.ndarray:
    """Read a grayscale or color PNG as a [0, 1] gray image (color uses luminance)."""
    arr = _imdecode_png(data)
    maxval = _maxval(arr)
    if arr.ndim == 3:
        rgb = arr[..., 2::-1].astype(float) / maxval
        return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return arr.astype(float) / maxval


def decode_color_png(data: bytes) -> np.ndarray:
    """Read a PNG as an (H, W, 3) RGB image in [0, 1] (gray replicated)."""
    arr = _imdecode_png(data)
    maxval = _maxval(arr)
    if arr.ndim == 2:
        g = arr.astype(float) / maxval
        return np.stack([g, g, g], axis=-1)
    return arr[..., 2::-1].astype(float) / maxval


def encode_height_png(z: np.ndarray) -> bytes:
    """Store a height field as 16-bit grayscale with its range in text chunks.

    The affine map [min, max] -> [0, 65535] is inverted by decode_height_png
    using the recorded range, so heights survive within 1/65535 of the range.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise DimensionMismatch(f"height field must be 2-d, got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise BadFormat("height field contains non-finite values")
    lo, hi = float(z.min()), float(z.max())
    if hi > lo:
        scaled = np.rint((z - lo) / (hi - lo) * 65535.0).astype(np.uint16)
    else:
        scaled = np.zeros(z.shape, dtype=np.uint16)
    meta = PngInfo()
    meta.add_text(HEIGHT_MIN_KEY, repr(lo))
    meta.add_text(HEIGHT_MAX_KEY, repr(hi))
    im = Image.fromarray(scaled)
    out = io.BytesIO()
    im.save(out, format="PNG", pnginfo=meta)
    return out.getvalue()


def decode_height_png(data: bytes) -> tuple[np.ndarray, tuple[float, float]]:
    """Read a height PNG back to float heights plus its recorded (min, max)."""
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        raise BadFormat(f"not a decodable height PNG: {exc}") from None
    arr = np.asarray(im, dtype=float)
    if arr.ndim != 2:
        raise BadFormat(f"height PNG must be grayscale, got mode {im.mode}")
    text = getattr(im, "text", {})
    if HEIGHT_MIN_KEY in text and HEIGHT_MAX_KEY in text:
        lo, hi = float(text[HEIGHT_MIN_KEY]), float(text[HEIGHT_MAX_KEY])
    else:
        lo, hi = 0.0, 1.0
    denom = 65535.0 if im.mode in ("I;16", "I") else 255.0
    return lo + arr / denom * (hi - lo), (lo, hi)


def decode_label_png(data: bytes) -> np.ndarray:
    """Read an indexed or grayscale PNG as an integer label map."""
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        raise BadFormat(f"not a decodable label PNG: {exc}") from None
    if im.mode not in ("P", "L", "I", "I;16", "1"):
        raise BadFormat(f"label map must be indexed or grayscale, got mode {im.mode}")
    return np.asarray(im, dtype=np.int64)


def encode_label_png(labels: np.ndarray) -> bytes:
    """Store an integer label map as grayscale (8 or 16 bit as needed)."""
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.min() < 0:
        raise BadFormat("label map must be 2-d with non-negative labels")
    dtype = np.uint8 if labels.max() <= 255 else np.uint16
    out = io.BytesIO()
    Image.fromarray(labels.astype(dtype)).save(out, format="PNG")
    return out.getvalue()


def export_mesh_obj(z: np.ndarray, domain: np.ndarray, xy_scale: float = 1.0) -> bytes:
    """Triangulate a height field over its foreground into Wavefront OBJ text.

    One vertex per foreground pixel at ``(col * s, row * s, z)``, two
    triangles per quad whose four corners are all foreground, per-vertex
    normals from the height gradient.  Raises EmptyDomain when the mask has
    no foreground pixel or the mesh would contain no complete quad
    (vertices alone are not emitted).
    """
    z = np.asarray(z, dtype=float)
    fg = foreground_mask(domain)
    if z.shape != fg.shape:
        raise DimensionMismatch(f"height {z.shape} vs domain {fg.shape}")
    n_vertices = int(fg.sum())
    if n_vertices == 0:
        raise EmptyDomain("no foreground pixel to mesh")
    quads = fg[:-1, :-1] & fg[:-1, 1:] & fg[1:, :-1] & fg[1:, 1:]
    if not np.any(quads):
        raise EmptyDomain("no complete foreground quad to triangulate")

    ids = np.zeros(fg.shape, dtype=np.int64)
    ids[fg] = np.arange(1, n_vertices + 1)  # OBJ indices are 1-based

    s = float(xy_scale)
    gy, gx = np.gradient(z)
    normals = np.stack([-gx, -gy, np.full(z.shape, s)], axis=-1)
    normals /= np.linalg.norm(normals, axis=-1, keepdims=True)

    rows, cols = np.nonzero(fg)
    lines = [f"# basrelief height-field mesh: {n_vertices} vertices"]
    for i, j in zip(rows, cols):
        lines.append(f"v {j * s:.8g} {i * s:.8g} {z[i, j]:.8g}")
    for i, j in zip(rows, cols):
        nx, ny, nz = normals[i, j]
        lines.append(f"vn {nx:.8g} {ny:.8g} {nz:.8g}")

    qr, qc = np.nonzero(quads)
    for i, j in zip(qr, qc):
        a, b = ids[i, j], ids[i, j + 1]
        c, d = ids[i + 1, j + 1], ids[i + 1, j]
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
        lines.append(f"f {a}//{a} {c}//{c} {d}//{d}")
    lines.append("")
    return "\n".join(lines).encode("ascii")

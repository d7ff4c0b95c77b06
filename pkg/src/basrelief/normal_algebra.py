"""Quaternion algebra on unit normals.

Normals are arrays whose last axis holds ``(x, y, z)`` components; quaternions
use the scalar-first layout ``(w, qx, qy, qz)``.  Every function broadcasts
over leading axes, so the same code path serves a single vector of shape
``(3,)`` and a full image of shape ``(H, W, 3)``.

The two image-editing operators live here:

* ``ominus(n1, n2)`` expresses ``n1`` in the frame where ``n2`` becomes the
  z-axis (deviation of ``n1`` from ``n2``).
* ``oplus(n1, n2)`` is the exact inverse in the second argument: it re-plants
  a deviation vector onto the carrier ``n2``.

Both are conjugations of the pure quaternion ``[0, n1]`` by the rotation that
maps one vector onto the other along their mutual cross-product axis; results
are re-normalized to absorb floating-point drift.
"""

from __future__ import annotations

import numpy as np

Z_AXIS = np.array([0.0, 0.0, 1.0])

_DEGENERATE_CROSS = 1e-8


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Hamilton product of scalar-first quaternions, broadcasting over leading axes."""
    w1, x1, y1, z1 = np.moveaxis(np.asarray(q1, dtype=float), -1, 0)
    w2, x2, y2, z2 = np.moveaxis(np.asarray(q2, dtype=float), -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    """Conjugate ``(w, -qx, -qy, -qz)``; the inverse for unit quaternions."""
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def normalize(v: np.ndarray, fallback: np.ndarray | None = None) -> np.ndarray:
    """Scale vectors on the last axis to unit length.

    Entries with near-zero norm are replaced by ``fallback`` when given,
    otherwise left untouched (scaled by 1).
    """
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(n < 1e-300, 1.0, n)
    out = v / safe
    if fallback is not None:
        out = np.where(n < 1e-12, fallback, out)
    return out


def rotation_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit quaternion rotating unit vector ``a`` onto ``b`` about the axis ``a × b``.

    Built from the half-way vector ``h = (a + b)/|a + b|`` as
    ``q = (a·h, a×h)``, which is exactly unit for unit inputs and numerically
    stable.  Degenerate cases:

    * ``a ≈ b`` (cross below 1e-8, positive dot): identity rotation.
    * ``a ≈ -b``: 180° turn about the projection of ``(1,0,0)`` onto the plane
      perpendicular to ``a``, falling back to ``(0,1,0)`` when ``a`` is along x.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)

    cross = np.cross(a, b)
    cross_norm = np.linalg.norm(cross, axis=-1)
    dot = np.sum(a * b, axis=-1)

    h = normalize(a + b, fallback=np.zeros(3))
    w = np.sum(a * h, axis=-1)
    q = np.concatenate([w[..., None], np.cross(a, h)], axis=-1)

    degenerate = cross_norm < _DEGENERATE_CROSS
    parallel = degenerate & (dot > 0.0)
    antipodal = degenerate & (dot <= 0.0)

    if np.any(parallel):
        identity = np.zeros(q.shape)
        identity[..., 0] = 1.0
        q = np.where(parallel[..., None], identity, q)
    if np.any(antipodal):
        ex = np.zeros_like(a)
        ex[..., 0] = 1.0
        axis = ex - np.sum(ex * a, axis=-1, keepdims=True) * a
        ey = np.zeros_like(a)
        ey[..., 1] = 1.0
        axis_y = ey - np.sum(ey * a, axis=-1, keepdims=True) * a
        small = np.linalg.norm(axis, axis=-1, keepdims=True) < _DEGENERATE_CROSS
        axis = normalize(np.where(small, axis_y, axis))
        half_turn = np.concatenate([np.zeros(w.shape + (1,)), axis], axis=-1)
        q = np.where(antipodal[..., None], half_turn, q)

    return normalize(q)


def rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply rotation ``q`` to vector ``v`` by conjugating the pure quaternion ``[0, v]``.

    The rotated vector is re-normalized so unit inputs stay unit to 1e-12.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    pure = np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)
    rotated = quat_multiply(quat_multiply(q, pure), quat_conjugate(q))[..., 1:]
    return normalize(rotated)


def ominus(n1: np.ndarray, n2: np.ndarray) -> np.ndarray:
    """Deviation of ``n1`` from ``n2``: conjugate ``n1`` by the rotation taking ``n2`` to the z-axis."""
    return rotate(rotation_between(n2, Z_AXIS), n1)


def oplus(n1: np.ndarray, n2: np.ndarray) -> np.ndarray:
    """Re-plant deviation ``n1`` onto carrier ``n2``: conjugate by the rotation taking the z-axis to ``n2``."""
    return rotate(rotation_between(Z_AXIS, n2), n1)

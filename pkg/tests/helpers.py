"""Shared synthetic inputs and independent oracles for the test suite."""

import math

import numpy as np


def random_normal_image(rng, h, w, min_z=0.05):
    v = rng.normal(size=(h, w, 3))
    v[..., 2] = np.abs(v[..., 2]) + min_z
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def normal_image_from_height(z):
    """Unit normals (-dz/dx, -dz/dy, 1)/|.| of a height grid (central differences)."""
    gy, gx = np.gradient(np.asarray(z, dtype=float))
    n = np.stack([-gx, -gy, np.ones_like(gx)], axis=-1)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def dome_ripple_height(h=64, w=64, dome_amp=8.0, ripple_amp=0.4, ripple_period=6.0):
    """Low-frequency dome plus a high-frequency ripple along x, in pixel units."""
    jj, ii = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    dome = dome_amp * np.exp(-((jj - cx) ** 2 + (ii - cy) ** 2) / (2 * (w / 4.0) ** 2))
    ripple = ripple_amp * np.sin(2.0 * np.pi * jj / ripple_period)
    return dome + ripple


def hemisphere_normal_image(h, w, radius=None):
    """Sphere-cap normals inside the disk, (0,0,1) outside; returns (image, domain)."""
    radius = radius if radius is not None else 0.45 * min(h, w)
    jj, ii = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    x, y = jj - cx, ii - cy
    d2 = x * x + y * y
    inside = d2 < radius * radius
    z = np.sqrt(np.maximum(radius * radius - d2, 0.0))
    n = np.stack([x, y, z], axis=-1) / radius
    flat = np.zeros_like(n)
    flat[..., 2] = 1.0
    n = np.where(inside[..., None], n, flat)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    return n, inside.astype(float)


def axis_angle_matrix(axis, angle):
    ax = np.asarray(axis, dtype=float)
    ax = ax / np.linalg.norm(ax)
    K = np.array([
        [0.0, -ax[2], ax[1]],
        [ax[2], 0.0, -ax[0]],
        [-ax[1], ax[0], 0.0],
    ])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotation_matrix_between(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cross = np.cross(a, b)
    cn = np.linalg.norm(cross)
    if cn < 1e-12:
        return np.eye(3)
    return axis_angle_matrix(cross / cn, np.arctan2(cn, np.dot(a, b)))


def brute_force_bilateral(N, sigma_c, sigma_s):
    """Literal double-loop evaluation of the bilateral definition (test oracle)."""
    h, w = N.shape[:2]
    radius = int(math.ceil(3.0 * sigma_c))
    out = np.zeros_like(N)
    for i in range(h):
        for j in range(w):
            acc = np.zeros(3)
            for qi in range(max(0, i - radius), min(h, i + radius + 1)):
                for qj in range(max(0, j - radius), min(w, j + radius + 1)):
                    d2 = (i - qi) ** 2 + (j - qj) ** 2
                    wc = math.exp(-d2 / (2.0 * sigma_c * sigma_c))
                    diff = N[i, j] - N[qi, qj]
                    ws = math.exp(-float(diff @ diff) / (2.0 * sigma_s * sigma_s))
                    acc = acc + wc * ws * N[qi, qj]
            out[i, j] = acc / np.linalg.norm(acc)
    return out


def mean_detail_angle(detail):
    return float(np.mean(np.arccos(np.clip(detail[..., 2], -1.0, 1.0))))


def settle_normal_png(N, mask=None, bit_depth=8, max_passes=3):
    """Push an image through encode/decode until the bytes are a fixpoint.

    Nearest-integer quantization plus renormalization can flip a borderline
    channel once; one settling pass absorbs it.
    """
    from basrelief.image_io import decode_normal_png, encode_normal_png

    data = encode_normal_png(N, mask, bit_depth)
    for _ in range(max_passes):
        n, m = decode_normal_png(data)
        again = encode_normal_png(n, None if mask is None else m, bit_depth)
        if again == data:
            return data
        data = again
    raise AssertionError("quantization did not settle")

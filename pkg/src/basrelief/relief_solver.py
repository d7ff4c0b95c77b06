"""Height-field reconstruction by a screened Poisson solve.

The relief minimizes ``|grad z - g|^2 + lambda^2 |z - h|^2`` over the
foreground domain with z = 0 on background pixels, whose Euler-Lagrange
equation is ``(lap - lambda^2) z = div g - lambda^2 h``.  Discretization uses
forward differences for the data term and the matching backward-difference
divergence, so the normal equations are exactly the 5-point screened Poisson
stencil.  The resulting system is symmetric positive definite (Dirichlet rows
eliminated) and is solved by Jacobi-preconditioned conjugate gradients.

The target gradient comes from a normal image as ``(Nx, Ny) * Nz**alpha``;
larger alpha flattens steep silhouette pixels where Nz is small.  The
auxiliary surface h biases the solution toward a chosen base shape: constant,
ramp, hemisphere cap, or per-label constant layers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import linalg as splinalg

from basrelief.errors import (
    ConstantFieldWarning,
    DimensionMismatch,
    EmptyDomain,
    LabelGap,
    NonConvergence,
    ValidationError,
)

MIN_NZ = 1e-4


@dataclass
class SolverConfig:
    """Screened Poisson solve controls.

    lam is the screening weight (the system uses lam**2); alpha is the
    default gradient attenuation exponent; tolerance is the relative residual
    target; max_iterations defaults to ``10 sqrt(W H) + 1000``.  Boundary
    policy is fixed: zero Dirichlet on background pixels.
    """

    lam: float = 0.0
    alpha: float = 1.0
    tolerance: float = 1e-10
    max_iterations: int | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError(f"lambda must be >= 0, got {self.lam}")
        if self.alpha < 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if self.tolerance <= 0:
            raise ValidationError(f"tolerance must be > 0, got {self.tolerance}")


@dataclass
class AuxSurface:
    """Description of the base surface h(u, v).

    kinds: ``constant`` (value), ``ramp`` (start..end along axis 'x'|'y'),
    ``radial`` (hemisphere cap of given radius/center, scaled), ``layered``
    (integer label map plus per-label offsets).
    """

    kind: str = "constant"
    value: float = 0.0
    start: float = 0.0
    end: float = 1.0
    axis: str = "x"
    center: tuple[float, float] | None = None
    radius: float | None = None
    scale: float = 1.0
    labels: np.ndarray | None = None
    offsets: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("constant", "ramp", "radial", "layered"):
            raise ValidationError(f"unknown aux surface kind '{self.kind}'")
        if self.kind == "ramp" and self.axis not in ("x", "y"):
            raise ValidationError(f"ramp axis must be 'x' or 'y', got '{self.axis}'")
        if self.kind == "layered" and self.labels is None:
            raise ValidationError("layered aux surface requires a label map")


def _require_field(a: np.ndarray, name: str, depth: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    expect = 2 if depth is None else 3
    if a.ndim != expect or (depth is not None and a.shape[2] != depth):
        raise DimensionMismatch(f"{name} has shape {a.shape}")
    return a


def gradient_from_normals(N: np.ndarray, alpha: float = 1.0) -> np.ndarray:
    """Target gradient ``g = (Nx, Ny) * Nz**alpha`` with Nz clamped at 1e-4."""
    N = _require_field(N, "normal image", depth=3)
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    nz = np.maximum(N[..., 2], MIN_NZ)
    return N[..., :2] * (nz ** alpha)[..., None]


def divergence(g: np.ndarray) -> np.ndarray:
    """Backward-difference divergence matching the solver's forward-difference data term.

    Composing it with forward differences reproduces the 5-point Laplacian
    exactly; the last column of gx and last row of gy have no forward pair
    and are ignored.
    """
    g = _require_field(g, "gradient field", depth=2)
    gx = g[..., 0].copy()
    gy = g[..., 1].copy()
    gx[:, -1] = 0.0
    gy[-1, :] = 0.0
    div = gx + gy
    div[:, 1:] -= gx[:, :-1]
    div[1:, :] -= gy[:-1, :]
    return div


def foreground_mask(domain: np.ndarray) -> np.ndarray:
    """Binary foreground from a weight mask (threshold 0.5)."""
    return np.asarray(domain, dtype=float) > 0.5


def build_aux_surface(spec: AuxSurface, domain: np.ndarray) -> np.ndarray:
    """Realize an auxiliary base surface over the domain's grid."""
    fg = foreground_mask(domain)
    h, w = fg.shape
    if spec.kind == "constant":
        return np.full((h, w), float(spec.value))
    if spec.kind == "ramp":
        if spec.axis == "x":
            t = np.linspace(0.0, 1.0, w) if w > 1 else np.zeros(1)
            ramp = np.tile(spec.start + (spec.end - spec.start) * t, (h, 1))
        else:
            t = np.linspace(0.0, 1.0, h) if h > 1 else np.zeros(1)
            ramp = np.tile((spec.start + (spec.end - spec.start) * t)[:, None], (1, w))
        return ramp
    if spec.kind == "radial":
        cx, cy = spec.center if spec.center is not None else ((w - 1) / 2.0, (h - 1) / 2.0)
        radius = spec.radius if spec.radius is not None else min(w - 1, h - 1) / 2.0
        jj, ii = np.meshgrid(np.arange(w), np.arange(h))
        d2 = (jj - cx) ** 2 + (ii - cy) ** 2
        return spec.scale * np.sqrt(np.maximum(radius * radius - d2, 0.0))
    # layered
    labels = np.asarray(spec.labels)
    if labels.shape != fg.shape:
        raise DimensionMismatch(f"label map {labels.shape} vs domain {fg.shape}")
    known = np.array(sorted(spec.offsets), dtype=labels.dtype)
    missing = fg & ~np.isin(labels, known)
    if np.any(missing):
        gaps = sorted(np.unique(labels[missing]).tolist())
        raise LabelGap(f"foreground labels without offsets: {gaps}")
    out = np.zeros(fg.shape)
    for label, offset in spec.offsets.items():
        out[labels == label] = float(offset)
    return out


def assemble_system(
    g: np.ndarray,
    h: np.ndarray,
    lam: float,
    domain: np.ndarray,
) -> tuple[sparse.csr_matrix, np.ndarray, np.ndarray]:
    """Sparse SPD system (A, b, ids) for the screened Poisson normal equations.

    Unknowns are the foreground pixels; background neighbors contribute their
    known zero through the stencil.  ``ids`` maps pixels to unknown indices
    (-1 on background).
    """
    fg = foreground_mask(domain)
    height, width = fg.shape
    n = int(fg.sum())
    if n == 0:
        raise EmptyDomain("domain mask selects no foreground pixel")
    g = _require_field(g, "gradient field", depth=2)
    h = _require_field(h, "aux surface")
    if g.shape[:2] != fg.shape or h.shape != fg.shape:
        raise DimensionMismatch(
            f"shapes differ: g {g.shape[:2]}, h {h.shape}, domain {fg.shape}"
        )

    ids = -np.ones((height, width), dtype=np.int64)
    ids[fg] = np.arange(n)

    # Degree counts every in-image 4-neighbor edge; edges to background keep
    # their diagonal contribution (the known zero just drops from the RHS).
    deg = np.zeros((height, width))
    deg[1:, :] += 1.0
    deg[:-1, :] += 1.0
    deg[:, 1:] += 1.0
    deg[:, :-1] += 1.0

    diag = deg[fg] + lam * lam
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals = [diag]
    pair_v = fg[:-1, :] & fg[1:, :]
    pair_h = fg[:, :-1] & fg[:, 1:]
    for a_ids, b_ids in (
        (ids[:-1, :][pair_v], ids[1:, :][pair_v]),
        (ids[:, :-1][pair_h], ids[:, 1:][pair_h]),
    ):
        rows.extend([a_ids, b_ids])
        cols.extend([b_ids, a_ids])
        vals.extend([-np.ones(a_ids.size), -np.ones(b_ids.size)])

    A = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    b = (-divergence(g) + lam * lam * h)[fg]
    return A, b, ids


def _cg_solve(A: sparse.csr_matrix, b: np.ndarray, cfg: SolverConfig, label: str) -> np.ndarray:
    n = A.shape[0]
    max_iter = cfg.max_iterations
    if max_iter is None:
        max_iter = int(10 * np.sqrt(n) + 1000)
    precond = sparse.diags(1.0 / A.diagonal())
    x, info = splinalg.cg(
        A, b, x0=np.zeros(n), rtol=cfg.tolerance, atol=0.0, maxiter=max_iter, M=precond
    )
    if info != 0:
        bnorm = np.linalg.norm(b)
        res = np.linalg.norm(b - A @ x) / (bnorm if bnorm > 0 else 1.0)
        raise NonConvergence(
            f"CG on {label} stopped after {max_iter} iterations at relative residual "
            f"{res:.3e} (target {cfg.tolerance:.1e})"
        )
    return x


def solve_screened_poisson(
    g: np.ndarray,
    h: np.ndarray | AuxSurface,
    cfg: SolverConfig,
    domain: np.ndarray,
) -> np.ndarray:
    """Solve ``(lap - lambda^2) z = div g - lambda^2 h`` with zero-Dirichlet background.

    Connected foreground components are independent blocks of the system
    (background separates them), so each is solved on its own: editing one
    scene element can never perturb another through solver round-off.
    Returns the full-grid height field with background pixels exactly 0.
    Raises NonConvergence if CG cannot reach the residual tolerance.
    """
    if isinstance(h, AuxSurface):
        h = build_aux_surface(h, domain)
    fg = foreground_mask(domain)
    if not np.any(fg):
        raise EmptyDomain("domain mask selects no foreground pixel")
    components, count = ndimage.label(fg, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    out = np.zeros(fg.shape)
    for c in range(1, count + 1):
        piece = components == c
        A, b, ids = assemble_system(g, h, cfg.lam, piece.astype(float))
        out[ids >= 0] = _cg_solve(A, b, cfg, f"component {c}/{count}")
    return out


def rescale_height(
    z: np.ndarray,
    target_range: float,
    domain: np.ndarray | None = None,
) -> np.ndarray:
    """Affinely map foreground heights onto [0, target_range]; background stays 0.

    A constant foreground cannot be rescaled: the result is all zeros and a
    ConstantFieldWarning is emitted.
    """
    z = _require_field(z, "height field")
    fg = np.ones(z.shape, dtype=bool) if domain is None else foreground_mask(domain)
    if not np.any(fg):
        raise EmptyDomain("domain mask selects no foreground pixel")
    vals = z[fg]
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo <= 0.0:
        warnings.warn("constant height field; rescale returns zeros", ConstantFieldWarning)
        return np.zeros_like(z)
    out = np.zeros_like(z)
    out[fg] = (vals - lo) * (float(target_range) / (hi - lo))
    return out

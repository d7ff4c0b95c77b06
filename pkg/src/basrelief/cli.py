"""Command-line front end: one subcommand per engine operation plus run/serve.

Exit codes: 0 success, 2 validation failure, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from basrelief import bandpass, image_io, image_to_normal, pipeline, relief_solver
from basrelief.errors import BasReliefError, ValidationError


def _read(path: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"no such file: {path}")
    return p.read_bytes()


def _write(path: str, data: bytes) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(data)


def _load_normal(path: str):
    return image_io.decode_normal_png(_read(path))


def _save_normal(path: str, n, mask, bit_depth: int) -> None:
    _write(path, image_io.encode_normal_png(n, mask, bit_depth))


def _load_mask_arg(path: str | None, shape) -> np.ndarray:
    if path is None:
        return np.ones(shape)
    return image_io.decode_mask_png(_read(path))


def cmd_decompose(args) -> int:
    n, mask = _load_normal(args.input)
    params = bandpass.FilterParams(
        sigma_c=args.sigma_c,
        sigma_s=args.sigma_s,
        pre_sigma_c=args.pre_sigma_c,
        pre_sigma_s=args.pre_sigma_s,
    )
    detail, base = bandpass.decompose(n, params)
    _save_normal(args.detail, detail, mask, args.bit_depth)
    _save_normal(args.base, base, mask, args.bit_depth)
    return 0


def cmd_compose(args) -> int:
    detail, _ = _load_normal(args.detail)
    base, mask = _load_normal(args.base)
    _save_normal(args.out, bandpass.compose(detail, base), mask, args.bit_depth)
    return 0


def cmd_tune(args) -> int:
    n, mask = _load_normal(args.input)
    tuned = bandpass.tune_detail(n, bandpass.DetailTuning(beta=args.beta, gamma=args.gamma))
    _save_normal(args.out, tuned, mask, args.bit_depth)
    return 0


def cmd_smooth(args) -> int:
    n, mask = _load_normal(args.input)
    region = image_io.decode_mask_png(_read(args.mask))
    params = bandpass.FilterParams(sigma_c=args.sigma_c, sigma_s=args.sigma_s)
    _save_normal(args.out, bandpass.partial_smooth(n, region, params), mask, args.bit_depth)
    return 0


def cmd_transfer(args) -> int:
    patch, patch_alpha = _load_normal(args.patch)
    base, mask = _load_normal(args.base)
    if args.patch_mask is not None:
        patch_mask = image_io.decode_mask_png(_read(args.patch_mask))
    else:
        patch_mask = patch_alpha
    merged = bandpass.transfer_detail(patch, patch_mask, base, (args.offset_x, args.offset_y))
    _save_normal(args.out, merged, mask, args.bit_depth)
    return 0


def cmd_img2normal(args) -> int:
    gray = image_io.decode_gray_png(_read(args.input))
    p = image_to_normal.SobelParams(alpha1=args.alpha1, alpha2=args.alpha2)
    n = image_to_normal.normal_from_image(gray, p)
    _save_normal(args.out, n, np.ones(gray.shape), args.bit_depth)
    return 0


def cmd_canny(args) -> int:
    gray = image_io.decode_gray_png(_read(args.input))
    edges = image_to_normal.canny_edges(gray, args.low, args.high, args.sigma)
    _write(args.out, image_io.encode_gray_png(edges))
    return 0


def cmd_sketch2base(args) -> int:
    sketch = image_io.decode_gray_png(_read(args.input))
    p = image_to_normal.GvfParams(
        omega=args.omega, iterations=args.iterations, z_const=args.z, step_size=args.step_size
    )
    n = image_to_normal.gvf_base_normal(sketch, p)
    _save_normal(args.out, n, np.ones(sketch.shape), args.bit_depth)
    return 0


def _aux_from_args(args, domain: np.ndarray) -> np.ndarray:
    if args.aux is None:
        return np.zeros(domain.shape)
    try:
        spec = json.loads(args.aux)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--aux is not valid JSON: {exc}") from None
    if not isinstance(spec, dict):
        raise ValidationError("--aux must be a JSON object")
    if spec.get("kind") == "layered":
        labels_path = spec.get("labels")
        if not isinstance(labels_path, str):
            raise ValidationError("layered aux needs 'labels': <png path>")
        spec["labels"] = image_io.decode_label_png(_read(labels_path))
        try:
            spec["offsets"] = {int(k): float(v) for k, v in (spec.get("offsets") or {}).items()}
        except (TypeError, ValueError):
            raise ValidationError("aux offsets must map integer labels to numbers") from None
    try:
        aux = relief_solver.AuxSurface(**spec)
    except TypeError as exc:
        raise ValidationError(f"bad aux spec: {exc}") from None
    return relief_solver.build_aux_surface(aux, domain)


def cmd_solve(args) -> int:
    n, alpha_mask = _load_normal(args.normal)
    if args.domain is not None:
        domain = image_io.decode_mask_png(_read(args.domain))
    else:
        domain = alpha_mask
    g = relief_solver.gradient_from_normals(n, args.alpha)
    h = _aux_from_args(args, domain)
    cfg = relief_solver.SolverConfig(
        lam=args.lam, tolerance=args.tolerance, max_iterations=args.max_iterations
    )
    z = relief_solver.solve_screened_poisson(g, h, cfg, domain)
    if args.rescale is not None:
        z = relief_solver.rescale_height(z, args.rescale, domain)
    _write(args.height, image_io.encode_height_png(z))
    if args.mesh is not None:
        _write(args.mesh, image_io.export_mesh_obj(z, domain, args.xy_scale))
    if args.preview is not None:
        _write(args.preview, pipeline.render_preview(z, args.xy_scale))
    return 0


def cmd_mesh(args) -> int:
    z, _ = image_io.decode_height_png(_read(args.height))
    domain = _load_mask_arg(args.domain, z.shape)
    _write(args.out, image_io.export_mesh_obj(z, domain, args.xy_scale))
    return 0


def cmd_run(args) -> int:
    config = pipeline.load_config(args.config)
    base_dir = Path(args.base_dir) if args.base_dir else Path(args.config).parent
    written = pipeline.run_pipeline(config, base_dir)
    for name, path in sorted(written.items()):
        print(f"{name}: {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from basrelief.server import create_app

    app = create_app(Path(args.state_dir))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_bit_depth(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=16,
                   help="output normal map depth (default 16)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="basrelief",
        description="Normal-image editing and bas-relief height-field generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="split a normal map into detail and base layers")
    p.add_argument("--input", required=True)
    p.add_argument("--sigma-c", type=float, required=True)
    p.add_argument("--sigma-s", type=float, default=0.9)
    p.add_argument("--pre-sigma-c", type=float, default=None)
    p.add_argument("--pre-sigma-s", type=float, default=None)
    p.add_argument("--detail", required=True)
    p.add_argument("--base", required=True)
    _add_bit_depth(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("compose", help="re-attach a detail layer onto a base layer")
    p.add_argument("--detail", required=True)
    p.add_argument("--base", required=True)
    p.add_argument("--out", required=True)
    _add_bit_depth(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("tune", help="boost or attenuate a detail layer")
    p.add_argument("--input", required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--out", required=True)
    _add_bit_depth(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("smooth", help="bilateral-smooth a normal map inside a mask")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--sigma-c", type=float, required=True)
    p.add_argument("--sigma-s", type=float, default=0.9)
    p.add_argument("--out", required=True)
    _add_bit_depth(p)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("transfer", help="grow a detail patch onto another normal map")
    p.add_argument("--patch", required=True)
    p.add_argument("--patch-mask", default=None, help="grayscale weights (default: patch alpha)")
    p.add_argument("--base", required=True)
    p.add_argument("--offset-x", type=int, default=0)
    p.add_argument("--offset-y", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_bit_depth(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("img2normal", help="detail normals from a photo via Sobel")
    p.add_argument("--input", required=True)
    p.add_argument("--alpha1", type=float, default=1.0)
    p.add_argument("--alpha2", type=float, default=0.5)
    p.add_argument("--out", required=True)
    _add_bit_depth(p)
    p.set_defaults(func=cmd_img2normal)

    p = sub.add_parser("canny", help="binary edge map of a gray image")
    p.add_argument("--input", required=True)
    p.add_argument("--low", type=float, default=0.1)
    p.add_argument("--high", type=float, default=0.3)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_canny)

    p = sub.add_parser("sketch2base", help="base normals from a sketch by gradient diffusion")
    p.add_argument("--input", required=True)
    p.add_argument("--omega", type=float, default=2.0)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--step-size", type=float, default=0.2)
    p.add_argument("--out", required=True)
    _add_bit_depth(p)
    p.set_defaults(func=cmd_sketch2base)

    p = sub.add_parser("solve", help="reconstruct a height field from a normal map")
    p.add_argument("--normal", required=True)
    p.add_argument("--alpha", type=float, default=1.0, help="gradient attenuation exponent")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--aux", default=None, help='aux surface JSON, e.g. \'{"kind":"ramp"}\'')
    p.add_argument("--domain", default=None, help="foreground mask PNG (default: alpha channel)")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--rescale", type=float, default=None, help="rescale heights to [0, R]")
    p.add_argument("--height", required=True, help="output height PNG")
    p.add_argument("--mesh", default=None, help="optional output OBJ path")
    p.add_argument("--preview", default=None, help="optional shaded preview PNG")
    p.add_argument("--xy-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("mesh", help="export a height PNG as a Wavefront OBJ grid mesh")
    p.add_argument("--height", required=True)
    p.add_argument("--domain", default=None)
    p.add_argument("--xy-scale", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("run", help="execute a JSON pipeline config")
    p.add_argument("config")
    p.add_argument("--base-dir", default=None, help="resolve paths here (default: config dir)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="start the HTTP editing service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8575)
    p.add_argument("--state-dir", default="./basrelief-sessions")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except BasReliefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())

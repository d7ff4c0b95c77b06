"""Declarative pipelines: validate a JSON config, then run its stages in order.

A config has three sections::

    {
      "inputs":  {"name": {"path": "file.png", "kind": "normal"}, ...},
      "stages":  [{"op": "decompose", "input": "name", ...}, ...],
      "outputs": {"artifact-name": "relative/output/path", ...}
    }

Input kinds: ``normal`` (RGB(A) normal map; its alpha becomes ``<name>.mask``),
``color``, ``gray``, ``mask``, ``labels``, ``height``.  Stages read and write
named artifacts; outputs pick artifacts to encode to disk.  Validation checks
every file, parameter range, and artifact reference before any stage runs, so
a bad config never produces partial output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from basrelief import bandpass, image_io, image_to_normal, relief_solver
from basrelief.errors import StageError, ValidationError
from basrelief.normal_algebra import normalize


@dataclass
class Artifact:
    kind: str
    data: object
    mask: np.ndarray | None = None


INPUT_KINDS = ("normal", "color", "gray", "mask", "labels", "height")

_DECODERS = {
    "color": image_io.decode_color_png,
    "gray": image_io.decode_gray_png,
    "mask": image_io.decode_mask_png,
    "labels": image_io.decode_label_png,
}


def render_preview(z: np.ndarray, xy_scale: float = 1.0) -> bytes:
    """Lambertian headlight shading of a height field, as 8-bit gray PNG.

    With the light at (0, 0, 1) the intensity is just the z-component of the
    derived surface normal, so flat background renders white and slopes
    darken with steepness.
    """
    gy, gx = np.gradient(np.asarray(z, dtype=float))
    n = normalize(np.stack([-gx / xy_scale, -gy / xy_scale, np.ones_like(gx)], axis=-1))
    return image_io.encode_gray_png(np.clip(n[..., 2], 0.0, 1.0))


def encode_artifact(artifact: Artifact) -> bytes:
    """PNG/OBJ bytes for an artifact (gradients encode as magnitude previews)."""
    if artifact.kind == "normal":
        return image_io.encode_normal_png(artifact.data, artifact.mask, bit_depth=16)
    if artifact.kind in ("gray", "color"):
        data = artifact.data
        if artifact.kind == "color":
            data = image_to_normal.grayscale(data)
        return image_io.encode_gray_png(data)
    if artifact.kind == "mask":
        return image_io.encode_mask_png(artifact.data)
    if artifact.kind == "labels":
        return image_io.encode_label_png(artifact.data)
    if artifact.kind in ("height", "aux"):
        return image_io.encode_height_png(artifact.data)
    if artifact.kind == "gradient":
        mag = np.linalg.norm(artifact.data, axis=-1)
        peak = mag.max()
        return image_io.encode_gray_png(mag / peak if peak > 0 else mag)
    if artifact.kind in ("mesh", "preview"):
        return artifact.data
    raise ValidationError(f"artifact kind '{artifact.kind}' is not encodable")


class _Planner:
    """Tracks artifact kinds while compiling stages, so references are checked early."""

    def __init__(self, kinds: dict[str, str]):
        self.kinds = kinds

    def require(self, stage: dict, field: str, allowed: tuple[str, ...], where: str) -> str:
        name = stage.get(field)
        if not isinstance(name, str):
            raise ValidationError(f"{where}: missing or non-string field '{field}'")
        kind = self.kinds.get(name)
        if kind is None:
            raise ValidationError(f"{where}: unknown artifact '{name}'")
        if kind not in allowed:
            raise ValidationError(
                f"{where}: artifact '{name}' has kind '{kind}', expected one of {allowed}"
            )
        return name

    def produce(self, stage: dict, field: str, kind: str, where: str) -> str:
        name = stage.get(field)
        if not isinstance(name, str) or not name:
            raise ValidationError(f"{where}: missing output name '{field}'")
        self.kinds[name] = kind
        return name


def _mask_of(store: dict[str, Artifact], name: str) -> np.ndarray:
    art = store[name]
    if art.kind == "mask":
        return art.data
    if art.kind == "normal":
        if art.mask is None:
            return np.ones(art.data.shape[:2])
        return art.mask
    raise ValidationError(f"artifact '{name}' cannot serve as a mask")


def _aux_spec(stage: dict, planner: _Planner, where: str):
    """Compile the aux-surface description of a solve/aux stage."""
    spec = stage.get("aux", {"kind": "constant", "value": 0.0})
    if isinstance(spec, str):
        name = planner.require({"aux": spec}, "aux", ("height", "aux"), where)
        return lambda store, domain: np.asarray(store[name].data, dtype=float)
    if not isinstance(spec, dict):
        raise ValidationError(f"{where}: 'aux' must be an artifact name or a spec object")
    spec = dict(spec)
    kind = spec.get("kind", "constant")
    labels_name = None
    if kind == "layered":
        labels_name = planner.require(spec, "labels", ("labels",), where)
        offsets = spec.get("offsets")
        if not isinstance(offsets, dict) or not offsets:
            raise ValidationError(f"{where}: layered aux needs an 'offsets' mapping")
        try:
            spec["offsets"] = {int(k): float(v) for k, v in offsets.items()}
        except (TypeError, ValueError):
            raise ValidationError(f"{where}: offsets must map integer labels to numbers") from None
        spec["labels"] = None

    def build(store: dict[str, Artifact], domain: np.ndarray) -> np.ndarray:
        params = dict(spec)
        if labels_name is not None:
            params["labels"] = store[labels_name].data
        aux = relief_solver.AuxSurface(**params)
        return relief_solver.build_aux_surface(aux, domain)

    # construct once with dummy labels to validate ranges/kind early
    probe = dict(spec)
    if labels_name is not None:
        probe["labels"] = np.zeros((1, 1), dtype=int)
        probe["offsets"] = {0: 0.0, **spec["offsets"]}
    try:
        relief_solver.AuxSurface(**probe)
    except TypeError as exc:
        raise ValidationError(f"{where}: bad aux spec: {exc}") from None
    return build


def _float(stage: dict, field: str, default, where: str) -> float:
    value = stage.get(field, default)
    if value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: field '{field}' must be a number") from None


def _required_float(stage: dict, field: str, where: str) -> float:
    if field not in stage:
        raise ValidationError(f"{where}: missing required field '{field}'")
    return _float(stage, field, None, where)


def _int(stage: dict, field: str, default, where: str) -> int:
    value = stage.get(field, default)
    try:
        if value != int(value):
            raise ValueError
        return int(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: field '{field}' must be an integer") from None


def _compile_stage(stage: dict, planner: _Planner, where: str) -> Callable:
    op = stage.get("op")
    if op == "decompose":
        src = planner.require(stage, "input", ("normal",), where)
        params = bandpass.FilterParams(
            sigma_c=_required_float(stage, "sigma_c", where),
            sigma_s=_float(stage, "sigma_s", 0.9, where),
            pre_sigma_c=_float(stage, "pre_sigma_c", None, where),
            pre_sigma_s=_float(stage, "pre_sigma_s", None, where),
        )
        detail = planner.produce(stage, "detail", "normal", where)
        base = planner.produce(stage, "base", "normal", where)

        def run(store):
            art = store[src]
            d, b = bandpass.decompose(art.data, params)
            store[detail] = Artifact("normal", d, art.mask)
            store[base] = Artifact("normal", b, art.mask)

        return run

    if op == "compose":
        detail = planner.require(stage, "detail", ("normal",), where)
        base = planner.require(stage, "base", ("normal",), where)
        out = planner.produce(stage, "out", "normal", where)

        def run(store):
            combined = bandpass.compose(store[detail].data, store[base].data)
            store[out] = Artifact("normal", combined, store[base].mask)

        return run

    if op == "tune":
        src = planner.require(stage, "input", ("normal",), where)
        tuning = bandpass.DetailTuning(
            beta=_float(stage, "beta", 1.0, where), gamma=_float(stage, "gamma", 1.0, where)
        )
        out = planner.produce(stage, "out", "normal", where)

        def run(store):
            art = store[src]
            store[out] = Artifact("normal", bandpass.tune_detail(art.data, tuning), art.mask)

        return run

    if op == "smooth":
        src = planner.require(stage, "input", ("normal",), where)
        mask = planner.require(stage, "mask", ("mask", "normal"), where)
        params = bandpass.FilterParams(
            sigma_c=_required_float(stage, "sigma_c", where),
            sigma_s=_float(stage, "sigma_s", 0.9, where),
        )
        out = planner.produce(stage, "out", "normal", where)

        def run(store):
            art = store[src]
            smoothed = bandpass.partial_smooth(art.data, _mask_of(store, mask), params)
            store[out] = Artifact("normal", smoothed, art.mask)

        return run

    if op == "transfer":
        patch = planner.require(stage, "patch", ("normal",), where)
        pmask = planner.require(stage, "patch_mask", ("mask", "normal"), where)
        base = planner.require(stage, "base", ("normal",), where)
        offset = stage.get("offset", [0, 0])
        if not (isinstance(offset, (list, tuple)) and len(offset) == 2):
            raise ValidationError(f"{where}: 'offset' must be [x, y]")
        offset = (int(offset[0]), int(offset[1]))
        out = planner.produce(stage, "out", "normal", where)

        def run(store):
            art = store[base]
            merged = bandpass.transfer_detail(
                store[patch].data, _mask_of(store, pmask), art.data, offset
            )
            store[out] = Artifact("normal", merged, art.mask)

        return run

    if op == "grayscale":
        src = planner.require(stage, "input", ("color", "gray"), where)
        out = planner.produce(stage, "out", "gray", where)

        def run(store):
            store[out] = Artifact("gray", image_to_normal.grayscale(store[src].data))

        return run

    if op == "img2normal":
        src = planner.require(stage, "input", ("gray",), where)
        params = image_to_normal.SobelParams(
            alpha1=_float(stage, "alpha1", 1.0, where),
            alpha2=_float(stage, "alpha2", 0.5, where),
        )
        out = planner.produce(stage, "out", "normal", where)

        def run(store):
            store[out] = Artifact("normal", image_to_normal.normal_from_image(store[src].data, params))

        return run

    if op == "canny":
        src = planner.require(stage, "input", ("gray",), where)
        low = _float(stage, "low", 0.1, where)
        high = _float(stage, "high", 0.3, where)
        sigma = _float(stage, "sigma", 1.0, where)
        if not 0 <= low <= high:
            raise ValidationError(f"{where}: need 0 <= low <= high")
        out = planner.produce(stage, "out", "gray", where)

        def run(store):
            store[out] = Artifact(
                "gray", image_to_normal.canny_edges(store[src].data, low, high, sigma)
            )

        return run

    if op == "sketch2base":
        src = planner.require(stage, "input", ("gray",), where)
        params = image_to_normal.GvfParams(
            omega=_float(stage, "omega", 2.0, where),
            iterations=_int(stage, "iterations", 500, where),
            z_const=_float(stage, "z", 1.0, where),
            step_size=_float(stage, "step_size", 0.2, where),
        )
        out = planner.produce(stage, "out", "normal", where)

        def run(store):
            store[out] = Artifact(
                "normal", image_to_normal.gvf_base_normal(store[src].data, params)
            )

        return run

    if op == "gradient":
        src = planner.require(stage, "input", ("normal",), where)
        alpha = _float(stage, "alpha", 1.0, where)
        if alpha < 0:
            raise ValidationError(f"{where}: alpha must be >= 0")
        out = planner.produce(stage, "out", "gradient", where)

        def run(store):
            store[out] = Artifact(
                "gradient", relief_solver.gradient_from_normals(store[src].data, alpha)
            )

        return run

    if op == "aux":
        domain = planner.require(stage, "domain", ("mask", "normal"), where)
        build = _aux_spec(stage, planner, where)
        out = planner.produce(stage, "out", "aux", where)

        def run(store):
            d = _mask_of(store, domain)
            store[out] = Artifact("aux", build(store, d))

        return run

    if op == "solve":
        grad = planner.require(stage, "gradient", ("gradient",), where)
        domain = planner.require(stage, "domain", ("mask", "normal"), where)
        cfg = relief_solver.SolverConfig(
            lam=_float(stage, "lambda", 0.0, where),
            tolerance=_float(stage, "tolerance", 1e-10, where),
            max_iterations=_int(stage, "max_iterations", None, where)
            if "max_iterations" in stage
            else None,
        )
        build = _aux_spec(stage, planner, where)
        out = planner.produce(stage, "out", "height", where)

        def run(store):
            d = _mask_of(store, domain)
            h = build(store, d)
            z = relief_solver.solve_screened_poisson(store[grad].data, h, cfg, d)
            store[out] = Artifact("height", z)

        return run

    if op == "rescale":
        src = planner.require(stage, "input", ("height",), where)
        target = _float(stage, "range", 1.0, where)
        domain = None
        if "domain" in stage:
            domain = planner.require(stage, "domain", ("mask", "normal"), where)
        out = planner.produce(stage, "out", "height", where)

        def run(store):
            d = None if domain is None else _mask_of(store, domain)
            store[out] = Artifact("height", relief_solver.rescale_height(store[src].data, target, d))

        return run

    if op == "mesh":
        src = planner.require(stage, "input", ("height",), where)
        domain = planner.require(stage, "domain", ("mask", "normal"), where)
        scale = _float(stage, "xy_scale", 1.0, where)
        out = planner.produce(stage, "out", "mesh", where)

        def run(store):
            data = image_io.export_mesh_obj(store[src].data, _mask_of(store, domain), scale)
            store[out] = Artifact("mesh", data)

        return run

    if op == "preview":
        src = planner.require(stage, "input", ("height",), where)
        scale = _float(stage, "xy_scale", 1.0, where)
        out = planner.produce(stage, "out", "preview", where)

        def run(store):
            store[out] = Artifact("preview", render_preview(store[src].data, scale))

        return run

    raise ValidationError(f"{where}: unknown op '{op}'")


@dataclass
class Plan:
    inputs: dict[str, tuple[Path, str]]
    stages: list[tuple[str, Callable]]
    outputs: dict[str, Path]


def validate_config(config: dict, base_dir: Path) -> Plan:
    """Check files, parameter ranges, and artifact references; returns a runnable plan."""
    if not isinstance(config, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(config) - {"inputs", "stages", "outputs"}
    if unknown:
        raise ValidationError(f"unknown config sections: {sorted(unknown)}")

    base_dir = Path(base_dir)
    inputs: dict[str, tuple[Path, str]] = {}
    kinds: dict[str, str] = {}
    for name, entry in (config.get("inputs") or {}).items():
        if isinstance(entry, str):
            entry = {"path": entry, "kind": "normal"}
        if not isinstance(entry, dict) or "path" not in entry:
            raise ValidationError(f"input '{name}': expected {{path, kind}}")
        kind = entry.get("kind", "normal")
        if kind not in INPUT_KINDS:
            raise ValidationError(f"input '{name}': unknown kind '{kind}'")
        path = base_dir / entry["path"]
        if not path.is_file():
            raise ValidationError(f"input '{name}': no such file {path}")
        inputs[name] = (path, kind)
        kinds[name] = kind
        if kind == "normal":
            kinds[f"{name}.mask"] = "mask"

    planner = _Planner(kinds)
    stages = []
    for i, stage in enumerate(config.get("stages") or []):
        if not isinstance(stage, dict):
            raise ValidationError(f"stages[{i}]: expected an object")
        where = f"stages[{i}]:{stage.get('op', '?')}"
        stages.append((where, _compile_stage(stage, planner, where)))

    outputs: dict[str, Path] = {}
    for name, rel in (config.get("outputs") or {}).items():
        if name not in planner.kinds:
            raise ValidationError(f"output '{name}': no stage or input produces it")
        outputs[name] = base_dir / rel
    return Plan(inputs=inputs, stages=stages, outputs=outputs)


def load_inputs(plan: Plan) -> dict[str, Artifact]:
    store: dict[str, Artifact] = {}
    for name, (path, kind) in plan.inputs.items():
        data = path.read_bytes()
        if kind == "normal":
            n, mask = image_io.decode_normal_png(data)
            store[name] = Artifact("normal", n, mask)
            store[f"{name}.mask"] = Artifact("mask", mask)
        elif kind == "height":
            z, _ = image_io.decode_height_png(data)
            store[name] = Artifact("height", z)
        else:
            store[name] = Artifact(kind, _DECODERS[kind](data))
    return store


def run_pipeline(config: dict, base_dir: Path | str = ".") -> dict[str, Path]:
    """Validate and execute a pipeline config; returns {artifact: written path}."""
    plan = validate_config(config, Path(base_dir))
    store = load_inputs(plan)
    for where, stage in plan.stages:
        try:
            stage(store)
        except ValidationError:
            raise
        except Exception as exc:
            raise StageError(where, exc) from exc

    written = {}
    for name, path in plan.outputs.items():
        data = encode_artifact(store[name])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        written[name] = path
    return written


def load_config(path: Path | str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None

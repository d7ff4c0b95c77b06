"""HTTP editing service: JSON control, PNG/OBJ payloads.

Surface (consumed by the browser editor):

* ``POST /sessions`` -> 201 ``{"id": ...}``
* ``PUT /sessions/{id}/inputs/{name}`` -- upload a PNG input
* ``POST /sessions/{id}/{op}`` -- run an engine op; returns artifact names
* ``GET /sessions/{id}/artifacts/{name}`` -- fetch a produced PNG/OBJ
* ``GET /sessions/{id}`` -- list inputs and artifacts

Each op compiles to a single-use pipeline over the session's files, so the
engine stays the only place numerical work happens.  Session state lives
under ``state_dir/<id>`` and survives restarts.  Ops within a session
serialize on a lock; a second solve while one is running returns 409.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response

from basrelief import pipeline
from basrelief.errors import BasReliefError, ValidationError

NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")

MEDIA_TYPES = {".png": "image/png", ".obj": "text/plain"}

# op -> (input fields with expected kinds, output fields with default artifact
# names, passthrough numeric params, output extension)
SIMPLE_OPS = {
    "decompose": (
        {"input": "normal"},
        {"detail": "detail", "base": "base"},
        ("sigma_c", "sigma_s", "pre_sigma_c", "pre_sigma_s"),
        ".png",
    ),
    "compose": ({"detail": "normal", "base": "normal"}, {"out": "composed"}, (), ".png"),
    "tune": ({"input": "normal"}, {"out": "tuned"}, ("beta", "gamma"), ".png"),
    "smooth": (
        {"input": "normal", "mask": "mask"},
        {"out": "smoothed"},
        ("sigma_c", "sigma_s"),
        ".png",
    ),
    "transfer": (
        {"patch": "normal", "patch_mask": "mask", "base": "normal"},
        {"out": "transferred"},
        ("offset",),
        ".png",
    ),
    "grayscale": ({"input": "color"}, {"out": "gray"}, (), ".png"),
    "img2normal": ({"input": "gray"}, {"out": "sobel-normal"}, ("alpha1", "alpha2"), ".png"),
    "canny": ({"input": "gray"}, {"out": "edges"}, ("low", "high", "sigma"), ".png"),
    "sketch2base": (
        {"input": "gray"},
        {"out": "base-normal"},
        ("omega", "iterations", "z", "step_size"),
        ".png",
    ),
    "mesh": ({"input": "height", "domain": "mask"}, {"out": "relief"}, ("xy_scale",), ".obj"),
    "preview": ({"input": "height"}, {"out": "preview"}, ("xy_scale",), ".png"),
}


class SessionStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def create(self) -> str:
        sid = uuid.uuid4().hex[:12]
        (self.root / sid / "inputs").mkdir(parents=True)
        (self.root / sid / "artifacts").mkdir(parents=True)
        return sid

    def dir(self, sid: str) -> Path:
        d = self.root / sid
        if not NAME_RE.match(sid) or not d.is_dir():
            raise HTTPException(status_code=404, detail=f"no such session '{sid}'")
        return d

    def lock(self, sid: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(sid, threading.Lock())


def _checked_name(name: str, what: str) -> str:
    if not NAME_RE.match(name) or ".." in name:
        raise HTTPException(status_code=400, detail=f"illegal {what} name '{name}'")
    return name


def _resolve_ref(session_dir: Path, ref: str) -> str:
    """Locate an artifact or uploaded input by name; returns a session-relative path."""
    for candidate in (f"artifacts/{ref}.png", f"artifacts/{ref}", f"inputs/{ref}"):
        if (session_dir / candidate).is_file():
            return candidate
    raise HTTPException(status_code=404, detail=f"no input or artifact named '{ref}'")


def _require_ref(body: dict, field: str) -> str:
    ref = body.get(field)
    if not isinstance(ref, str):
        raise HTTPException(status_code=400, detail=f"missing input reference '{field}'")
    return _checked_name(ref, "input")


def _compile_simple(op: str, body: dict, session_dir: Path):
    fields, outs, params, ext = SIMPLE_OPS[op]
    inputs = {}
    stage = {"op": op}
    for field, kind in fields.items():
        ref = _require_ref(body, field)
        inputs[ref] = {"path": _resolve_ref(session_dir, ref), "kind": kind}
        stage[field] = ref
    for param in params:
        if param in body:
            stage[param] = body[param]
    outputs = {}
    for field, default in outs.items():
        artifact = _checked_name(str(body.get(field, default)), "artifact")
        stage[field] = artifact
        outputs[artifact] = f"artifacts/{artifact}{ext}"
    return inputs, [stage], outputs


def _compile_solve(body: dict, session_dir: Path):
    normal_ref = _require_ref(body, "normal")
    inputs = {normal_ref: {"path": _resolve_ref(session_dir, normal_ref), "kind": "normal"}}
    if "domain" in body:
        domain_ref = _require_ref(body, "domain")
        inputs[domain_ref] = {"path": _resolve_ref(session_dir, domain_ref), "kind": "mask"}
        domain = domain_ref
    else:
        domain = f"{normal_ref}.mask"

    aux = body.get("aux", {"kind": "constant", "value": 0.0})
    if isinstance(aux, dict) and aux.get("kind") == "layered":
        labels_ref = aux.get("labels")
        if not isinstance(labels_ref, str):
            raise HTTPException(status_code=400, detail="layered aux needs 'labels': <input name>")
        labels_ref = _checked_name(labels_ref, "input")
        inputs[labels_ref] = {"path": _resolve_ref(session_dir, labels_ref), "kind": "labels"}
        aux = dict(aux, labels=labels_ref)

    xy_scale = body.get("xy_scale", 1.0)
    stages = [
        {"op": "gradient", "input": normal_ref, "alpha": body.get("alpha", 1.0), "out": "_g"},
        {
            "op": "solve",
            "gradient": "_g",
            "domain": domain,
            "lambda": body.get("lambda", 0.0),
            "tolerance": body.get("tolerance", 1e-10),
            "aux": aux,
            "out": "height",
        },
    ]
    if body.get("rescale") is not None:
        stages.append(
            {"op": "rescale", "input": "height", "range": body["rescale"], "domain": domain,
             "out": "height"}
        )
    stages.append({"op": "preview", "input": "height", "xy_scale": xy_scale, "out": "preview"})
    outputs = {"height": "artifacts/height.png", "preview": "artifacts/preview.png"}
    if body.get("mesh", True):
        stages.append(
            {"op": "mesh", "input": "height", "domain": domain, "xy_scale": xy_scale,
             "out": "relief"}
        )
        outputs["relief"] = "artifacts/relief.obj"
    return inputs, stages, outputs


def create_app(state_dir: Path | str) -> FastAPI:
    store = SessionStore(Path(state_dir))
    app = FastAPI(title="basrelief", version="0.1.0")
    app.state.store = store

    @app.exception_handler(ValidationError)
    async def _validation(request, exc):
        return Response(
            content=json.dumps({"detail": str(exc)}), status_code=400,
            media_type="application/json",
        )

    @app.exception_handler(BasReliefError)
    async def _engine(request, exc):
        return Response(
            content=json.dumps({"detail": str(exc)}), status_code=400,
            media_type="application/json",
        )

    @app.post("/sessions", status_code=201)
    def create_session():
        return {"id": store.create()}

    @app.get("/sessions/{sid}")
    def describe_session(sid: str):
        d = store.dir(sid)
        return {
            "id": sid,
            "inputs": sorted(p.name for p in (d / "inputs").iterdir()),
            "artifacts": sorted(p.name for p in (d / "artifacts").iterdir()),
        }

    @app.put("/sessions/{sid}/inputs/{name}")
    async def upload_input(sid: str, name: str, request: Request):
        d = store.dir(sid)
        name = _checked_name(name, "input")
        data = await request.body()
        if not data:
            raise HTTPException(status_code=400, detail="empty upload")
        lock = store.lock(sid)
        with lock:
            (d / "inputs" / name).write_bytes(data)
        return {"name": name, "bytes": len(data)}

    @app.get("/sessions/{sid}/artifacts/{name}")
    def fetch_artifact(sid: str, name: str):
        d = store.dir(sid)
        name = _checked_name(name, "artifact")
        path = d / "artifacts" / name
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"no artifact '{name}'")
        media = MEDIA_TYPES.get(path.suffix, "application/octet-stream")
        return Response(content=path.read_bytes(), media_type=media)

    @app.post("/sessions/{sid}/{op}")
    def run_op(sid: str, op: str, body: dict):
        d = store.dir(sid)
        if op == "solve":
            compiled = _compile_solve(body, d)
        elif op in SIMPLE_OPS:
            compiled = _compile_simple(op, body, d)
        else:
            raise HTTPException(status_code=404, detail=f"unknown op '{op}'")
        inputs, stages, outputs = compiled
        config = {"inputs": inputs, "stages": stages, "outputs": outputs}

        lock = store.lock(sid)
        if op == "solve":
            if not lock.acquire(blocking=False):
                raise HTTPException(status_code=409, detail="a solve is already running")
        else:
            lock.acquire()
        try:
            with open(d / "ops.jsonl", "a", encoding="utf-8") as log:
                log.write(json.dumps({"op": op, "body": body}) + "\n")
            written = pipeline.run_pipeline(config, d)
        finally:
            lock.release()
        return {"artifacts": {name: path.name for name, path in written.items()}}

    return app

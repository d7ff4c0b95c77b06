import json

import numpy as np
import pytest

from basrelief import image_io
from basrelief.cli import main as cli_main
from basrelief.errors import StageError, ValidationError
from basrelief.pipeline import render_preview, run_pipeline, validate_config

from helpers import hemisphere_normal_image, random_normal_image


@pytest.fixture
def workspace(tmp_path):
    rng = np.random.default_rng(0)
    N, domain = hemisphere_normal_image(24, 24, radius=9.0)
    (tmp_path / "normal.png").write_bytes(image_io.encode_normal_png(N, domain, bit_depth=16))
    (tmp_path / "photo.png").write_bytes(
        image_io.encode_gray_png(rng.random((20, 20)))
    )
    labels = (np.arange(24)[None, :] >= 12).astype(int) * np.ones((24, 1), dtype=int)
    (tmp_path / "labels.png").write_bytes(image_io.encode_label_png(labels))
    return tmp_path


def test_empty_pipeline_succeeds_with_no_outputs(tmp_path):
    assert run_pipeline({}, tmp_path) == {}


def test_decompose_only_pipeline(workspace):
    config = {
        "inputs": {"n": {"path": "normal.png", "kind": "normal"}},
        "stages": [
            {"op": "decompose", "input": "n", "sigma_c": 3.0, "sigma_s": 0.9,
             "detail": "d", "base": "b"}
        ],
        "outputs": {"d": "out/detail.png", "b": "out/base.png"},
    }
    written = run_pipeline(config, workspace)
    assert set(written) == {"d", "b"}
    detail, _ = image_io.decode_normal_png((workspace / "out/detail.png").read_bytes())
    assert detail.shape == (24, 24, 3)


def test_full_single_image_pipeline(workspace):
    config = {
        "inputs": {"photo": {"path": "photo.png", "kind": "gray"}},
        "stages": [
            {"op": "img2normal", "input": "photo", "alpha1": 1.0, "alpha2": 0.5,
             "out": "detail"},
            {"op": "canny", "input": "photo", "low": 0.1, "high": 0.3, "out": "sketch"},
            {"op": "sketch2base", "input": "sketch", "iterations": 60, "z": 0.8,
             "out": "base"},
            {"op": "compose", "detail": "detail", "base": "base", "out": "combined"},
            {"op": "gradient", "input": "combined", "alpha": 1.0, "out": "g"},
            {"op": "aux", "kind": "constant", "value": 0.0, "domain": "combined",
             "out": "h", "aux": {"kind": "constant", "value": 0.0}},
            {"op": "solve", "gradient": "g", "domain": "combined", "lambda": 0.5,
             "aux": "h", "out": "z"},
            {"op": "rescale", "input": "z", "range": 2.0, "out": "z2"},
            {"op": "mesh", "input": "z2", "domain": "combined", "out": "relief"},
            {"op": "preview", "input": "z2", "out": "shaded"},
        ],
        "outputs": {
            "detail": "out/detail.png",
            "sketch": "out/sketch.png",
            "z2": "out/height.png",
            "relief": "out/relief.obj",
            "shaded": "out/preview.png",
            "g": "out/gradient.png",
        },
    }
    written = run_pipeline(config, workspace)
    assert len(written) == 6
    z, (lo, hi) = image_io.decode_height_png((workspace / "out/height.png").read_bytes())
    assert (lo, hi) == (0.0, 2.0)
    obj = (workspace / "out/relief.obj").read_bytes()
    assert obj.startswith(b"#") and b"\nf " in obj


def test_layered_solve_pipeline(workspace):
    config = {
        "inputs": {
            "n": {"path": "normal.png", "kind": "normal"},
            "layers": {"path": "labels.png", "kind": "labels"},
        },
        "stages": [
            {"op": "gradient", "input": "n", "out": "g"},
            {"op": "solve", "gradient": "g", "domain": "n", "lambda": 1.0,
             "aux": {"kind": "layered", "labels": "layers",
                     "offsets": {"0": 0.0, "1": 0.3}},
             "out": "z"},
        ],
        "outputs": {"z": "out/height.png"},
    }
    written = run_pipeline(config, workspace)
    assert (workspace / "out/height.png").is_file()


def test_determinism_byte_identical_heights(workspace):
    config = {
        "inputs": {"n": {"path": "normal.png", "kind": "normal"}},
        "stages": [
            {"op": "decompose", "input": "n", "sigma_c": 2.0, "detail": "d", "base": "b"},
            {"op": "compose", "detail": "d", "base": "b", "out": "c"},
            {"op": "gradient", "input": "c", "out": "g"},
            {"op": "solve", "gradient": "g", "domain": "n", "lambda": 0.3, "out": "z"},
        ],
        "outputs": {"z": "run/height.png"},
    }
    run_pipeline(config, workspace)
    first = (workspace / "run/height.png").read_bytes()
    (workspace / "run/height.png").unlink()
    run_pipeline(config, workspace)
    second = (workspace / "run/height.png").read_bytes()
    assert first == second


@pytest.mark.parametrize(
    "bad_stage",
    [
        {"op": "decompose", "input": "n", "sigma_c": -1.0, "detail": "d", "base": "b"},
        {"op": "decompose", "input": "n", "detail": "d", "base": "b"},
        {"op": "tune", "input": "n", "gamma": 0.0, "out": "t"},
        {"op": "solve", "gradient": "n", "domain": "n", "out": "z"},
        {"op": "solve", "gradient": "g", "domain": "n", "lambda": -0.5, "out": "z"},
        {"op": "frobnicate", "out": "x"},
        {"op": "compose", "detail": "missing", "base": "n", "out": "c"},
    ],
)
def test_validation_rejects_bad_stages(workspace, bad_stage):
    config = {
        "inputs": {"n": {"path": "normal.png", "kind": "normal"}},
        "stages": [bad_stage],
        "outputs": {},
    }
    with pytest.raises(ValidationError):
        validate_config(config, workspace)


def test_validation_rejects_missing_file_and_unknown_output(workspace):
    with pytest.raises(ValidationError):
        validate_config(
            {"inputs": {"n": {"path": "nope.png", "kind": "normal"}}}, workspace
        )
    with pytest.raises(ValidationError):
        validate_config({"outputs": {"ghost": "x.png"}}, workspace)


def test_stage_errors_carry_stage_name(workspace):
    # a 1-pixel-wide patch placed fully outside the base fails at run time
    config = {
        "inputs": {"n": {"path": "normal.png", "kind": "normal"}},
        "stages": [
            {"op": "transfer", "patch": "n", "patch_mask": "n.mask", "base": "n",
             "offset": [500, 500], "out": "t"}
        ],
        "outputs": {},
    }
    with pytest.raises(StageError) as err:
        run_pipeline(config, workspace)
    assert "stages[0]:transfer" in str(err.value)


def test_render_preview_flat_field_is_white():
    data = render_preview(np.zeros((8, 8)))
    gray = image_io.decode_gray_png(data)
    np.testing.assert_allclose(gray, 1.0)


def test_render_preview_slopes_darken():
    z = np.tile(np.linspace(0.0, 6.0, 16), (16, 1))
    gray = image_io.decode_gray_png(render_preview(z))
    assert gray[8, 8] < 0.95


def test_cli_roundtrip_decompose_solve(workspace, capsys):
    rc = cli_main([
        "decompose", "--input", str(workspace / "normal.png"), "--sigma-c", "3",
        "--detail", str(workspace / "cli_detail.png"),
        "--base", str(workspace / "cli_base.png"),
    ])
    assert rc == 0
    rc = cli_main([
        "compose", "--detail", str(workspace / "cli_detail.png"),
        "--base", str(workspace / "cli_base.png"),
        "--out", str(workspace / "cli_composed.png"),
    ])
    assert rc == 0
    rc = cli_main([
        "solve", "--normal", str(workspace / "cli_composed.png"),
        "--lambda", "0.5", "--rescale", "1.0",
        "--height", str(workspace / "cli_height.png"),
        "--mesh", str(workspace / "cli_relief.obj"),
        "--preview", str(workspace / "cli_preview.png"),
    ])
    assert rc == 0
    assert (workspace / "cli_relief.obj").stat().st_size > 0
    z, _ = image_io.decode_height_png((workspace / "cli_height.png").read_bytes())
    assert z.shape == (24, 24)

    original, _ = image_io.decode_normal_png((workspace / "normal.png").read_bytes())
    composed, _ = image_io.decode_normal_png((workspace / "cli_composed.png").read_bytes())
    assert np.max(np.abs(original - composed)) < 2e-3  # 16-bit quantization only


def test_cli_exit_codes(workspace, capsys):
    assert cli_main(["decompose", "--input", str(workspace / "normal.png"),
                     "--sigma-c", "-3", "--detail", "d.png", "--base", "b.png"]) == 2
    assert cli_main(["decompose", "--input", str(workspace / "ghost.png"),
                     "--sigma-c", "3", "--detail", "d.png", "--base", "b.png"]) == 2
    capsys.readouterr()


def test_cli_run_subcommand(workspace, capsys):
    config = {
        "inputs": {"n": {"path": "normal.png", "kind": "normal"}},
        "stages": [
            {"op": "decompose", "input": "n", "sigma_c": 2.0, "detail": "d", "base": "b"}
        ],
        "outputs": {"d": "out/d.png"},
    }
    cfg_path = workspace / "job.json"
    cfg_path.write_text(json.dumps(config))
    assert cli_main(["run", str(cfg_path)]) == 0
    assert (workspace / "out/d.png").is_file()
    out = capsys.readouterr().out
    assert "d:" in out


def test_cli_run_rejects_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli_main(["run", str(bad)]) == 2
    missing = tmp_path / "missing.json"
    assert cli_main(["run", str(missing)]) == 2
    capsys.readouterr()

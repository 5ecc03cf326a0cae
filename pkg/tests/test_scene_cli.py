import json

import jsonschema
import numpy as np
import pytest
from click.testing import CliRunner

from ruledkit import DegeneracyError, ValidationError, ingest
from ruledkit.analysis import analyze
from ruledkit.cli import main
from ruledkit.scene import _load_schema, normalized_scene_bytes
from ruledkit.selftest import run_selftest, all_passed
from ruledkit.multilinear import TolerancePolicy

CONE_SCENE = {"builtin_patch": "circular_cone", "grid": {"t_samples": 32}}
HELICOID_SCENE = {"builtin_patch": "helicoid_frame", "grid": {"t_samples": 32}}
CYLINDER_SCENE = {"builtin_patch": "cylinder_helix", "grid": {"t_samples": 32}}

EXPLICIT_HELICOID = {
    "ambient_dim": 3,
    "m": 2,
    "directrix": {"kind": "polynomial", "coefficients": [[0.0], [0.0], [0.0, 1.0]]},
    "frame": [{"kind": "fourier", "coordinates": [
        {"constant": 0.0, "cos": [1.0], "sin": [], "omega": 1.0},
        {"constant": 0.0, "cos": [], "sin": [1.0], "omega": 1.0},
        {"constant": 0.0, "cos": [], "sin": [], "omega": 1.0},
    ]}],
    "interval": [0.0, 6.283185307179586],
    "grid": {"t_samples": 32},
}

NON_UNIT_SPEED = {
    "ambient_dim": 3,
    "m": 2,
    "directrix": {"kind": "polynomial", "coefficients": [[0.0, 2.0], [0.0], [0.0]]},
    "frame": [{"kind": "constant", "value": [0.0, 1.0, 0.0]}],
    "interval": [0.0, 1.0],
    "grid": {"t_samples": 16},
}

DEPENDENT_FRAME = {
    "ambient_dim": 3,
    "m": 3,
    "directrix": {"kind": "polynomial", "coefficients": [[0.0], [0.0], [0.0, 1.0]]},
    "frame": [
        {"kind": "constant", "value": [1.0, 0.0, 0.0]},
        {"kind": "polynomial", "coefficients": [[1.0], [0.0, 1.0], [0.0]]},
    ],
    "interval": [0.0, 1.0],
    "grid": {"t_samples": 9},
}


def write_scene(tmp_path, doc, name="scene.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_ingest_builtin_scene(tmp_path):
    result = ingest(write_scene(tmp_path, CONE_SCENE))
    assert result.patch.m == 2
    assert result.patch.grid.t_samples.size == 32
    assert result.notes == []
    assert result.normalized["normalization"] == {
        "reparametrized": False, "orthonormalized": False}


def test_ingest_explicit_scene(tmp_path):
    result = ingest(write_scene(tmp_path, EXPLICIT_HELICOID))
    assert result.patch.dim == 3
    result.patch.fc.validate_on(result.patch.grid)


def test_ingest_reparametrizes_non_unit_speed(tmp_path):
    result = ingest(write_scene(tmp_path, NON_UNIT_SPEED))
    assert any("reparametrized" in n for n in result.notes)
    assert result.normalized["normalization"]["reparametrized"] is True
    # the new interval is the curve length
    lo, hi = result.patch.fc.interval
    assert (lo, hi) == (0.0, pytest.approx(2.0, abs=1e-9))


def test_ingest_orthonormalizes_skewed_frame(tmp_path):
    doc = {
        "ambient_dim": 3,
        "m": 3,
        "directrix": {"kind": "polynomial", "coefficients": [[0.0], [0.0], [0.0, 1.0]]},
        "frame": [
            {"kind": "constant", "value": [1.0, 0.0, 0.0]},
            {"kind": "constant", "value": [1.0, 1.0, 0.0]},
        ],
        "interval": [0.0, 1.0],
        "grid": {"t_samples": 9},
    }
    result = ingest(write_scene(tmp_path, doc))
    assert any("orthonormalized" in n for n in result.notes)
    assert result.normalized["normalization"]["orthonormalized"] is True
    result.patch.fc.validate_on(result.patch.grid, result.patch.tol)


def test_ingest_reports_dependent_frame_parameter(tmp_path):
    with pytest.raises(DegeneracyError, match="t=0"):
        ingest(write_scene(tmp_path, DEPENDENT_FRAME))


def test_ingest_rejects_unknown_patch(tmp_path):
    with pytest.raises(ValidationError, match="unknown builtin patch"):
        ingest(write_scene(tmp_path, {"builtin_patch": "torus"}))


def test_ingest_rejects_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"builtin_patch": ')
    with pytest.raises(ValidationError, match="line"):
        ingest(str(path))


def test_ingest_rejects_schema_violations(tmp_path):
    # explicit form requires m, directrix, frame, interval together
    with pytest.raises(ValidationError):
        ingest(write_scene(tmp_path, {"ambient_dim": 3}))
    with pytest.raises(ValidationError):
        ingest(write_scene(tmp_path, {"builtin_patch": "circular_cone",
                                      "grid": {"t_samples": 1}}))


def test_ingest_rejects_dimension_mismatch(tmp_path):
    doc = dict(EXPLICIT_HELICOID, ambient_dim=4)
    with pytest.raises(ValidationError, match="dimension"):
        ingest(write_scene(tmp_path, doc))


def test_normalization_idempotent(tmp_path):
    for doc in (CONE_SCENE, NON_UNIT_SPEED):
        first = ingest(write_scene(tmp_path, doc, "a.json"))
        emitted = tmp_path / "normalized.json"
        emitted.write_bytes(normalized_scene_bytes(first.normalized))
        second = ingest(str(emitted))
        assert normalized_scene_bytes(second.normalized) == emitted.read_bytes()


def test_cli_overrides_apply(tmp_path):
    result = ingest(write_scene(tmp_path, CONE_SCENE),
                    overrides={"t_samples": 48, "u_extent": 3.5,
                               "rank_rel_tol": 1e-6})
    assert result.patch.grid.t_samples.size == 48
    assert result.patch.grid.u_extent == 3.5
    assert result.patch.tol.rank_rel_tol == 1e-6
    assert result.normalized["grid"]["t_samples"] == 48


def test_scene_interval_override_for_builtin(tmp_path):
    doc = dict(CONE_SCENE, interval=[0.0, 3.0])
    result = ingest(write_scene(tmp_path, doc))
    assert result.patch.fc.interval == (0.0, 3.0)
    assert result.normalized["interval"] == [0.0, 3.0]


# --- full analysis runs ------------------------------------------------------

def test_analyze_cone_outputs(tmp_path):
    out = tmp_path / "out"
    result = ingest(CONE_SCENE)
    report = analyze(result, out, seed=0)
    assert (out / "report.json").exists()
    assert (out / "striction.csv").exists()
    assert (out / "mesh.obj").exists()
    assert (out / "normalized_scene.json").exists()

    loaded = json.loads((out / "report.json").read_text())
    jsonschema.validate(loaded, _load_schema("report.schema.json"))
    assert loaded == json.loads(json.dumps(report))
    region = loaded["classification"]["regions"][0]
    assert region["kind"] == "conical"
    assert np.abs(np.asarray(region["evidence"]["apex"])).max() < 1e-6
    assert loaded["directrix_invariance"]["max_deviation"] < 1e-6

    obj = (out / "mesh.obj").read_text().splitlines()
    vertices = [line for line in obj if line.startswith("v ")]
    assert len(vertices) == 32 * 5 + 32  # patch grid plus striction polyline
    assert any(line.startswith("l ") for line in obj)
    # vertex lines are plain numbers, parseable by standard OBJ readers
    first = np.array([float(v) for v in vertices[0].split()[1:]])
    assert first.shape == (3,) and np.all(np.isfinite(first))


def test_analyze_helicoid_striction_line(tmp_path):
    out = tmp_path / "out"
    report = analyze(ingest(HELICOID_SCENE), out, seed=0, invariance=False)
    assert report["classification"]["regions"][0]["kind"] == "non_rank_one"
    assert (out / "striction.csv").exists()
    # the striction line exists (the axis) but carries no singular points
    assert report["striction"][0]["singular_fraction"] == 0.0
    with open(out / "striction.csv") as fh:
        rows = fh.read().splitlines()
    assert rows[0] == "t,s1,b1,b2,b3,wedge_residual,singular"
    assert all(r.endswith("false") for r in rows[1:])


def test_analyze_cylinder_no_striction(tmp_path):
    out = tmp_path / "out"
    report = analyze(ingest(CYLINDER_SCENE), out, seed=0, invariance=False)
    assert report["classification"]["regions"][0]["kind"] == "cylindrical"
    assert not (out / "striction.csv").exists()
    assert not (out / "mesh.obj").exists()  # ambient dimension 4
    assert report["outputs"] == {"mesh": None, "striction_csv": []}


def test_report_deterministic(tmp_path):
    a = analyze(ingest(CONE_SCENE), tmp_path / "a", seed=7)
    b = analyze(ingest(CONE_SCENE), tmp_path / "b", seed=7)
    assert (tmp_path / "a" / "report.json").read_bytes() == \
        (tmp_path / "b" / "report.json").read_bytes()


# --- CLI ---------------------------------------------------------------------

def test_cli_analyze_end_to_end(tmp_path):
    scene = write_scene(tmp_path, CONE_SCENE)
    out = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(main, ["analyze", scene, "-o", str(out),
                                  "--t-samples", "24", "--no-invariance"])
    assert result.exit_code == 0, result.output
    assert "conical" in result.output
    assert (out / "report.json").exists()


def test_cli_analyze_missing_scene_exits_2(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["analyze", str(tmp_path / "nope.json"),
                                  "-o", str(tmp_path / "out")])
    assert result.exit_code == 2


def test_cli_analyze_numeric_error_exits_3(tmp_path):
    scene = write_scene(tmp_path, DEPENDENT_FRAME)
    runner = CliRunner()
    result = runner.invoke(main, ["analyze", scene, "-o", str(tmp_path / "out")])
    assert result.exit_code == 3


def test_cli_list_builtins():
    result = CliRunner().invoke(main, ["list-builtins"])
    assert result.exit_code == 0
    assert "patch:circular_cone" in result.output
    assert "curve:helix" in result.output


def test_cli_selftest_bad_tolerance_exits_4():
    result = CliRunner().invoke(
        main, ["selftest", "--t-samples", "24", "--rank-tol", "0.5"])
    assert result.exit_code == 4
    assert "FAIL" in result.output


def test_selftest_fails_loudly_with_bad_tolerance():
    results = run_selftest(tol=TolerancePolicy(rank_rel_tol=0.5), t_samples=24)
    assert not all_passed(results)
    assert sum(not r.passed for r in results) >= 3


def test_shipped_scenes_ingest(pytestconfig):
    import pathlib
    scene_dir = pathlib.Path(pytestconfig.rootpath) / "scenes"
    scenes = sorted(scene_dir.glob("*.json"))
    assert len(scenes) >= 5
    for scene in scenes:
        result = ingest(str(scene), overrides={"t_samples": 16})
        result.patch.fc.validate_on(result.patch.grid, result.patch.tol)


def test_degree_detection_breaks_with_bad_rank_tolerance():
    # unequal rotation rates: the slow direction falls below a 0.5 relative
    # cutoff, so the degree check fails loudly under that override
    from ruledkit import FramedCurve, FourierField, PolynomialField, SampleGrid, degree_profile
    directrix = PolynomialField([[0.0, 1.0], [0.0], [0.0], [0.0], [0.0]])
    x1 = FourierField([(0.0, [], [], 1.0), (0.0, [1.0], [], 1.0),
                       (0.0, [], [1.0], 1.0), (0.0, [], [], 1.0), (0.0, [], [], 1.0)])
    x2 = FourierField([(0.0, [], [], 0.4), (0.0, [], [], 0.4), (0.0, [], [], 0.4),
                       (0.0, [1.0], [], 0.4), (0.0, [], [1.0], 0.4)])
    fc = FramedCurve(5, 3, directrix, (x1, x2), (0.0, 6.0))
    grid = SampleGrid.uniform(fc.interval, 16)
    assert degree_profile(fc, grid, TolerancePolicy()).constant_degree == 2
    assert degree_profile(fc, grid, TolerancePolicy(rank_rel_tol=0.5)).constant_degree == 1

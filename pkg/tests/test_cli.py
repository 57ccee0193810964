import json
import subprocess
import sys

import pytest

from spatialcm import samples
from spatialcm.cli import run_command
from spatialcm.docio import parse_document, serialize_document
from spatialcm.kernel import iterate_objects, set_value


@pytest.fixture()
def files(tmp_path):
    mm = samples.workshop_metamodel()
    paths = {}
    docs = {
        "mm": mm, "frames": samples.workshop_frames(),
        "l4": samples.machine_operation(4, mm), "room": samples.server_room(mm),
        "site": samples.site_model(mm),
    }
    for name, doc in docs.items():
        p = tmp_path / f"{name}.scm.json"
        p.write_text(serialize_document(doc), encoding="utf-8")
        paths[name] = str(p)
    paths["dir"] = tmp_path
    paths["mm_obj"] = mm
    return paths


def run(argv, capsys):
    code = run_command(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_metamodel_ok(files, capsys):
    code, out, _ = run(["validate-metamodel", files["mm"]], capsys)
    assert code == 0
    assert json.loads(out) == {"format_version": "1", "report": {"violations": []}}


def test_validate_model_card_violation(files, capsys):
    mm = files["mm_obj"]
    model = samples.machine_operation(1, mm)
    step = iterate_objects(model, mm, "Step")[0].uuid
    set_value(model, mm, step, "tags", ["a", "b", "c"])
    path = files["dir"] / "bad.scm.json"
    path.write_text(serialize_document(model))
    code, out, _ = run(["validate-model", str(path), "--metamodel", files["mm"]], capsys)
    assert code == 1
    [v] = json.loads(out)["report"]["violations"]
    assert v["code"] == "CARD_VIOLATION" and v["location"].endswith(".tags")


def test_classify_level(files, capsys):
    code, out, _ = run(["classify-level", files["l4"], "--metamodel", files["mm"]], capsys)
    assert code == 0
    assert json.loads(out)["result"] == {"level": 4, "designation": "Dynamically Anchored Spatial CM"}


def test_resolve_scene_server_room(files, capsys):
    ctx = files["dir"] / "ctx.json"
    out_path = files["dir"] / "scene.json"
    ctx.write_text('{"user_zone": "serverroom"}')
    code, _, _ = run(["resolve-scene", files["room"], "--metamodel", files["mm"], "--context", str(ctx),
                      "--frames", files["frames"], "--out", str(out_path)], capsys)
    assert code == 0
    scene = parse_document(out_path.read_text())
    glyphs = {p.vizrep.get("glyph", (None,))[0] for p in scene.placements}
    assert {"ERP", "CRM"} <= glyphs
    ctx.write_text('{"user_zone": "office"}')
    code, out, _ = run(["resolve-scene", files["room"], "--metamodel", files["mm"], "--context", str(ctx),
                        "--frames", files["frames"]], capsys)
    assert code == 0
    glyphs = {p.vizrep.get("glyph", (None,))[0] for p in parse_document(out).placements}
    assert glyphs == {"Emergency exit"}


def test_resolve_scene_missing_variable(files, capsys):
    code, _, err = run(["resolve-scene", files["room"], "--metamodel", files["mm"],
                        "--frames", files["frames"]], capsys)
    assert code == 1 and "UNKNOWN_VARIABLE" in err


def _node_ids(files):
    mm = files["mm_obj"]
    model = parse_document(open(files["site"]).read())
    nodes = sorted(iterate_objects(model, mm, "Junction"), key=lambda o: o.values["position"][0].position)
    return [o.uuid for o in nodes], model


def test_query_shortest_path(files, capsys):
    (origin, _, _, far), _ = _node_ids(files)
    code, out, _ = run(["query", files["site"], "--metamodel", files["mm"], "--op", "shortest-path",
                        "--a", origin, "--b", far, "--weight", "length"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["length"] == 7


def test_query_distance_and_radius(files, capsys):
    (origin, top, right, far), _ = _node_ids(files)
    code, out, _ = run(["query", files["site"], "--metamodel", files["mm"], "--op", "distance",
                        "--a", origin, "--b", far], capsys)
    assert code == 0 and json.loads(out)["result"] == 5
    code, out, _ = run(["query", files["site"], "--metamodel", files["mm"], "--op", "within-radius",
                        "--a", origin, "--radius", "3.5", "--frames", files["frames"]], capsys)
    assert code == 0 and json.loads(out)["result"] == sorted([origin, right])
    code, _, err = run(["query", files["site"], "--metamodel", files["mm"], "--op", "within-radius",
                        "--a", origin, "--radius", "3.5"], capsys)
    assert code == 1 and "UNKNOWN_FRAME" in err


def test_query_is_at(files, capsys):
    (origin, top, _, _), _ = _node_ids(files)
    base = ["query", files["site"], "--metamodel", files["mm"], "--op", "is-at", "--a", origin, "--b", top]
    assert run(base + ["--tol", "3.9"], capsys)[1].count("false") == 1
    assert run(base + ["--tol", "4"], capsys)[1].count("true") == 1


def test_query_when(files, capsys):
    mm = files["mm_obj"]
    model = parse_document(open(files["site"]).read())
    first = min(iterate_objects(model, mm, "Measurement"), key=lambda o: o.values["start"][0])
    code, out, _ = run(["query", files["site"], "--metamodel", files["mm"], "--op", "when",
                        "--a", first.uuid], capsys)
    assert code == 0 and json.loads(out)["result"] == 1700000000


def test_query_is_in_without_extent(files, capsys):
    (origin, top, _, _), _ = _node_ids(files)
    code, _, err = run(["query", files["site"], "--metamodel", files["mm"], "--op", "is-in",
                        "--a", origin, "--b", top], capsys)
    assert code == 1 and "NO_EXTENT" in err


def test_no_path_status(files, capsys, tmp_path):
    mm = files["mm_obj"]
    model = samples.site_model(mm)
    for cable in iterate_objects(model, mm, "Cable"):
        del model.objects[cable.uuid]
    path = tmp_path / "nocables.json"
    path.write_text(serialize_document(model))
    (origin, _, _, far), _ = _node_ids(files)
    code, out, _ = run(["query", str(path), "--metamodel", files["mm"], "--op", "shortest-path",
                        "--a", origin, "--b", far], capsys)
    assert code == 0 and json.loads(out) == {"format_version": "1", "result": None, "status": "NO_PATH"}


def test_usage_errors(files, capsys):
    assert run([], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2
    assert run(["query", files["site"], "--metamodel", files["mm"], "--op", "is-at"], capsys)[0] == 2
    assert run(["validate-metamodel", str(files["dir"] / "missing.json")], capsys)[0] == 2
    assert run(["validate-metamodel", files["site"]], capsys)[0] == 2


def test_parse_error_exit(files, capsys):
    bad = files["dir"] / "bad.json"
    bad.write_text('{\n  "format_version": "1",\n  "metamodel": {\n')
    code, out, err = run(["validate-metamodel", str(bad)], capsys)
    assert code == 3 and out == ""
    assert "line 4" in err


def test_help_exits_zero(capsys):
    assert run(["--help"], capsys)[0] == 0


def test_console_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "spatialcm.cli", "classify-level", files["l4"],
                           "--metamodel", files["mm"]], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["level"] == 4

import copy
import math

import numpy as np
import pytest

from spatialcm import samples
from spatialcm.anchoring import (
    anchors, classify_anchoring_level, create_anchor, resolve_scene, world_pose,
)
from spatialcm.errors import ParseError, SCMError
from spatialcm.geometry import IDENTITY, CoordinateValue, FramedPose, FrameTree, Pose
from spatialcm.kernel import (
    MODEL, ModelInstance, create_object, delete_object, iterate_objects, set_value,
)

from .generators import max_abs


@pytest.fixture(scope="module")
def mm():
    return samples.workshop_metamodel()


@pytest.fixture(scope="module")
def tree():
    return samples.workshop_frames()


def _uuids(model, mm, t):
    return [o.uuid for o in iterate_objects(model, mm, t)]


@pytest.mark.parametrize("level", range(5))
def test_fixture_levels(mm, level):
    assert classify_anchoring_level(samples.machine_operation(level, mm), mm) == level


def test_level_zero_has_no_spatial_values(mm):
    model = samples.machine_operation(0, mm)
    assert not any(a in o.values for o in model.objects.values()
                   for a in ("position", "rotation", "scale", "extent"))


def test_extent_alone_spatialises(mm):
    model = samples.machine_operation(0, mm)
    step = _uuids(model, mm, "Step")[0]
    set_value(model, mm, step, "extent", [samples.ExtentBox((0, 0, 0), (1, 1, 1))])
    assert classify_anchoring_level(model, mm) == 1


def test_glyph_alone_does_not_spatialise(mm):
    model = samples.machine_operation(0, mm)
    set_value(model, mm, _uuids(model, mm, "Step")[0], "glyph", ["label"])
    assert classify_anchoring_level(model, mm) == 0


def test_invalid_model_rejected(mm):
    model = samples.machine_operation(3, mm)
    delete_object(model, _uuids(model, mm, "Switch")[0])
    with pytest.raises(SCMError) as exc:
        classify_anchoring_level(model, mm)
    assert exc.value.code == "INVALID_MODEL"


def test_create_anchor_raises_level(mm):
    model = samples.machine_operation(1, mm)
    step, switch = _uuids(model, mm, "Step")[0], _uuids(model, mm, "Switch")[0]
    create_anchor(model, mm, step, switch)
    assert classify_anchoring_level(model, mm) == 3


def test_monotone_under_anchor_addition(mm):
    for level in range(5):
        model = samples.machine_operation(level, mm)
        before = classify_anchoring_level(model, mm)
        create_anchor(model, mm, MODEL, FramedPose("workshop", IDENTITY))
        assert classify_anchoring_level(model, mm) >= before


def test_real_source_rejected(mm):
    model = samples.machine_operation(1, mm)
    switch = _uuids(model, mm, "Switch")[0]
    with pytest.raises(SCMError) as exc:
        create_anchor(model, mm, switch, _uuids(model, mm, "Machine")[0])
    assert exc.value.code == "ENDPOINT_KIND"


def test_virtual_target_rejected(mm):
    model = samples.machine_operation(1, mm)
    a, b = _uuids(model, mm, "Step")[:2]
    with pytest.raises(SCMError) as exc:
        create_anchor(model, mm, a, b)
    assert exc.value.code == "ENDPOINT_KIND"


def test_bad_condition_rejected(mm):
    model = samples.machine_operation(1, mm)
    step, switch = _uuids(model, mm, "Step")[0], _uuids(model, mm, "Switch")[0]
    with pytest.raises(ParseError) as exc:
        create_anchor(model, mm, step, switch, condition="user_zone ==")
    assert exc.value.offset == 12
    assert len(anchors(model, mm)) == 0


def test_unknown_object(mm):
    model = samples.machine_operation(1, mm)
    with pytest.raises(SCMError) as exc:
        create_anchor(model, mm, "missing", _uuids(model, mm, "Switch")[0])
    assert exc.value.code == "UNKNOWN_OBJECT"


def test_unconditional_anchor_places_at_target(mm):
    tree = FrameTree()
    model = ModelInstance("m", "process")
    step = create_object(model, mm, "Step").uuid
    machine = create_object(model, mm, "Machine").uuid
    set_value(model, mm, machine, "position", [CoordinateValue("world", (1, 2, 3))])
    set_value(model, mm, machine, "rotation", [samples.rot_z(0.3)])
    create_anchor(model, mm, step, machine)
    [placement] = resolve_scene(model, mm, tree, {})
    assert placement.source == step
    assert max_abs(placement.pose.matrix(), world_pose(model, mm, tree, machine).matrix()) < 1e-12


def test_offset_applied_in_target_frame(mm, tree):
    model = samples.machine_operation(1, mm)
    step, switch = _uuids(model, mm, "Step")[0], _uuids(model, mm, "Switch")[1]
    offset = Pose(samples.rot_z(math.pi), (0.0, 0.0, 0.05), 0.5)
    create_anchor(model, mm, step, switch, offset)
    [placement] = resolve_scene(model, mm, tree)
    expected = (tree.world_pose("machine1").matrix()
                @ world_pose(model, mm, FrameTree({"machine1": ("world", IDENTITY)}), switch).matrix()
                @ offset.matrix())
    assert max_abs(placement.pose.matrix(), expected) < 1e-9


def test_conditional_anchor_filtered(mm, tree):
    model = samples.machine_operation(4, mm)
    running = resolve_scene(model, mm, tree, {"machine_state": "running"})
    idle = resolve_scene(model, mm, tree, {"machine_state": "idle"})
    assert len(running) == 3 and len(idle) == 2
    assert {p.source for p in idle} < {p.source for p in running}


def test_missing_context_variable_names_anchor(mm, tree):
    model = samples.machine_operation(4, mm)
    conditional = [a for a in anchors(model, mm) if a.condition][0]
    with pytest.raises(SCMError) as exc:
        resolve_scene(model, mm, tree, {})
    assert exc.value.code == "UNKNOWN_VARIABLE"
    assert exc.value.details["anchor"] == conditional.uuid


def test_condition_free_invariance(mm, tree):
    model = samples.machine_operation(3, mm)
    assert resolve_scene(model, mm, tree) == resolve_scene(model, mm, tree, {"anything": 1, "x": "y"})


def test_model_anchor_composes_local_poses(mm, tree):
    model = samples.machine_operation(2, mm)
    [anchor] = anchors(model, mm)
    scene = resolve_scene(model, mm, tree)
    base = world_pose(model, mm, tree, anchor.target).matrix() @ anchor.offset.matrix()
    steps = _uuids(model, mm, "Step")
    assert [p.source for p in scene] == sorted(steps)
    for p in scene:
        local = model.first(p.source, "position").position
        expected = base @ np.array([*local, 1.0])
        assert max_abs(p.pose.translation, expected[:3]) < 1e-9


def test_placements_are_virtual_and_sorted(mm, tree):
    for level in (2, 3, 4):
        model = samples.machine_operation(level, mm)
        scene = resolve_scene(model, mm, tree, {"machine_state": "running"})
        for p in scene:
            assert mm.object_type(model.get(p.source).object_type).realm == "virtual"
            assert all(math.isfinite(c) for c in p.pose.matrix().ravel())
        assert [p.source for p in scene] == sorted(p.source for p in scene)


def test_vizrep_echoed(mm, tree):
    model = samples.server_room(mm)
    scene = resolve_scene(model, mm, tree, {"user_zone": "serverroom"})
    glyphs = {p.vizrep.get("glyph", (None,))[0] for p in scene}
    assert {"ERP", "CRM", "Emergency exit"} <= glyphs


def test_poi_target(mm):
    tree = FrameTree({"hall": ("world", Pose(translation=(5, 0, 0)))})
    model = ModelInstance("m", "process")
    step = create_object(model, mm, "Step").uuid
    create_anchor(model, mm, step, FramedPose("hall", Pose(translation=(0, 1, 0))))
    [p] = resolve_scene(model, mm, tree)
    assert p.pose.translation == (5.0, 1.0, 0.0)


def test_adding_condition_to_level3_yields_4(mm):
    for i in range(3):
        model = samples.machine_operation(3, mm)
        a = anchors(model, mm)[i]
        set_value(model, mm, a.uuid, "condition", ["ok == true"])
        assert classify_anchoring_level(model, mm) == 4


def test_fixture_deterministic(mm):
    assert samples.machine_operation(4, mm) == copy.deepcopy(samples.machine_operation(4, mm))

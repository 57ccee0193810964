"""Ready-made metamodel, frames and models used by the demos and tests.

The workshop metamodel has three model types:

* ``process``: operating steps (virtual) for a machine and its switches
  (real), anchored with ``StepAnchor``;
* ``architecture``: enterprise-architecture elements shown in a server room;
* ``site``: a temperature field, measurement events with temporal relations
  and participations, and a cable network.

Fixture uuids are deterministic so documents and demos are reproducible.
"""

from __future__ import annotations

import math
import random
import uuid as uuidlib

from .anchoring import create_anchor
from .fields import analytic_field
from .geometry import CoordinateValue, FrameTree, Pose, euler_xyz_to_quat
from .kernel import (
    MODEL, Attribute, Card, DataType, ExtentBox, Metamodel, ModelInstance, ModelType,
    create_object, make_metamodel, object_type, set_value,
)


def fixed_uuids(seed: str):
    """Endless deterministic stream of version-4 uuid strings."""
    rng = random.Random(seed)
    while True:
        yield str(uuidlib.UUID(int=rng.getrandbits(128), version=4))


def workshop_metamodel() -> Metamodel:
    process = ModelType(
        "process",
        (
            object_type("Step", "virtual", "Process step"),
            object_type("Decision", "virtual", "Decision step"),
            object_type("Machine", "real"),
            object_type("Switch", "real"),
            object_type("StepAnchor", "anchor", "Step anchor"),
        ),
        (DataType("Severity", "enumeration", ("high", "low", "medium")),),
        (
            Attribute("order", "Order"),
            Attribute("instructions", "Instructions"),
            Attribute("tags", "Tags"),
            Attribute("severity", "Severity"),
            Attribute("performed_at", "Performed at"),
            Attribute("documented_in", "Documented in"),
        ),
    )
    architecture = ModelType(
        "architecture",
        (
            object_type("Application", "virtual"),
            object_type("Server", "virtual"),
            object_type("Rack", "real", "Server rack"),
            object_type("Door", "real"),
            object_type("ArchAnchor", "anchor", "Architecture anchor"),
        ),
        (),
        (Attribute("owner", "Owner"), Attribute("runs_on", "Runs on")),
    )
    site = ModelType(
        "site",
        (
            object_type("TemperatureField", "field", "Temperature field"),
            object_type("Measurement", "event"),
            object_type("Precedes", "temporal-relation", "Temporal relation"),
            object_type("Involves", "participation"),
            object_type("Sensor", "real"),
            object_type("Junction", "node"),
            object_type("Cable", "edge"),
        ),
        (),
        (Attribute("length", "Length"), Attribute("capacity", "Capacity")),
    )
    return make_metamodel(
        "spatial-workshop",
        (process, architecture, site),
        inheritance=[("Decision", "Step")],
        attributes={
            "order": (["Step"], "integer", Card(0, 1)),
            "instructions": (["Step"], "text", Card(0, None)),
            "tags": (["Step"], "text", Card(0, 2)),
            "severity": (["Step"], "Severity", Card(0, 1)),
            "performed_at": (["Step"], "Machine", Card(0, 1)),
            "documented_in": (["Step"], "architecture", Card(0, 1)),
            "owner": (["Application"], "text", Card(1, 1)),
            "runs_on": (["Application"], "Server", Card(0, None)),
            "length": (["Cable"], "real-number", Card(1, 1)),
            "capacity": (["Junction"], "integer", Card(0, 1)),
        },
    )


def rot_z(angle: float) -> tuple[float, float, float, float]:
    return (math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2))


def workshop_frames() -> FrameTree:
    """world -> workshop -> machine1, and world -> building -> serverroom."""
    return FrameTree.from_frames([
        ("workshop", "world", Pose(rot_z(math.pi / 2), (10.0, 5.0, 0.0))),
        ("machine1", "workshop", Pose(euler_xyz_to_quat((0.1, 0.0, math.pi / 6)), (2.0, 0.0, 0.8))),
        ("building", "world", Pose(translation=(100.0, 0.0, 0.0))),
        ("serverroom", "building", Pose(rot_z(math.pi), (5.0, 5.0, 3.0))),
    ])


SWITCH_LAYOUT = (
    ((0.2, 0.0, 0.1), 0.0),
    ((0.4, 0.0, 0.1), math.pi / 4),
    ((0.6, 0.05, 0.1), math.pi / 2),
)


def machine_operation(level: int, mm: Metamodel | None = None) -> ModelInstance:
    """Operating instructions for a machine, prepared at anchoring ``level``.

    0: steps only; 1: steps laid out in space and the machine's switches
    located; 2: the whole model anchored above the machine; 3: each step
    anchored to its switch; 4: as 3, with the last step's anchor only active
    while the machine is running.
    """
    mm = mm or workshop_metamodel()
    ids = fixed_uuids("machine-operation")
    model = ModelInstance("machine-operation", "process")
    steps = []
    for n in range(3):
        step = create_object(model, mm, "Step", uuid=next(ids))
        set_value(model, mm, step.uuid, "order", [n + 1])
        set_value(model, mm, step.uuid, "instructions", [f"Turn switch {n + 1}"])
        steps.append(step.uuid)
    machine = create_object(model, mm, "Machine", uuid=next(ids)).uuid
    switches = [create_object(model, mm, "Switch", uuid=next(ids)).uuid for _ in SWITCH_LAYOUT]
    for s in steps:
        set_value(model, mm, s, "performed_at", [machine])
    anchor_ids = [next(ids) for _ in range(4)]
    if level == 0:
        return model

    for n, s in enumerate(steps):
        set_value(model, mm, s, "position", [CoordinateValue("world", (0.0, 0.3 * n, 0.0))])
        set_value(model, mm, s, "extent", [ExtentBox((0.0, 0.0, 0.0), (0.1, 0.1, 0.01))])
    set_value(model, mm, machine, "position", [CoordinateValue("machine1", (0.0, 0.0, 0.0))])
    set_value(model, mm, machine, "extent", [ExtentBox((0.4, 0.0, 0.0), (0.6, 0.4, 0.5))])
    for sw, (pos, angle) in zip(switches, SWITCH_LAYOUT):
        set_value(model, mm, sw, "position", [CoordinateValue("machine1", pos)])
        set_value(model, mm, sw, "rotation", [rot_z(angle)])
    if level == 1:
        return model

    if level == 2:
        create_anchor(model, mm, MODEL, machine, Pose(translation=(0.0, 0.0, 1.5)),
                      uuid=anchor_ids[3])
        return model

    for n, (s, sw) in enumerate(zip(steps, switches)):
        condition = "machine_state == 'running'" if level >= 4 and n == 2 else None
        create_anchor(model, mm, s, sw, condition=condition, uuid=anchor_ids[n])
    return model


def server_room(mm: Metamodel | None = None) -> ModelInstance:
    """Enterprise architecture shown at a server rack while the user is in
    the server room; an emergency notice stays pinned to the door."""
    mm = mm or workshop_metamodel()
    ids = fixed_uuids("server-room")
    model = ModelInstance("enterprise-architecture", "architecture")
    server = create_object(model, mm, "Server", uuid=next(ids)).uuid
    set_value(model, mm, server, "position", [CoordinateValue("world", (0.0, 0.0, 0.0))])
    for n, (name, owner) in enumerate((("ERP", "Finance"), ("CRM", "Sales"))):
        app = create_object(model, mm, "Application", uuid=next(ids)).uuid
        set_value(model, mm, app, "owner", [owner])
        set_value(model, mm, app, "runs_on", [server])
        set_value(model, mm, app, "glyph", [name])
        set_value(model, mm, app, "position", [CoordinateValue("world", (0.5 * (n + 1), 0.0, 0.4))])
    rack = create_object(model, mm, "Rack", uuid=next(ids)).uuid
    set_value(model, mm, rack, "position", [CoordinateValue("serverroom", (1.0, 2.0, 0.0))])
    set_value(model, mm, rack, "extent", [ExtentBox((0.0, 0.0, 1.0), (0.3, 0.5, 1.0))])
    door = create_object(model, mm, "Door", uuid=next(ids)).uuid
    set_value(model, mm, door, "position", [CoordinateValue("serverroom", (0.0, 0.0, 1.0))])
    notice = create_object(model, mm, "Server", uuid=next(ids)).uuid
    set_value(model, mm, notice, "glyph", ["Emergency exit"])
    create_anchor(model, mm, MODEL, rack, Pose(translation=(0.0, -0.8, 1.2)),
                  condition="user_zone == 'serverroom'", uuid=next(ids))
    create_anchor(model, mm, notice, door, uuid=next(ids))
    return model


def site_model(mm: Metamodel | None = None) -> ModelInstance:
    """Lab site with a temperature field, timed measurements and a cable network."""
    mm = mm or workshop_metamodel()
    ids = fixed_uuids("site")
    model = ModelInstance("lab-site", "site")
    field = create_object(model, mm, "TemperatureField", uuid=next(ids)).uuid
    set_value(model, mm, field, "field", [analytic_field("293.15 + 0.5 * z", "workshop", "K")])
    sensor = create_object(model, mm, "Sensor", uuid=next(ids)).uuid
    set_value(model, mm, sensor, "position", [CoordinateValue("workshop", (1.0, 1.0, 1.0))])
    events = []
    for start, duration in ((1700000000, 600), (1700000600, 300), (1700003600, 0)):
        e = create_object(model, mm, "Measurement", uuid=next(ids)).uuid
        set_value(model, mm, e, "start", [start])
        set_value(model, mm, e, "duration", [duration])
        events.append(e)
    for (a, b), rel in (((0, 1), "meets"), ((1, 2), "before")):
        r = create_object(model, mm, "Precedes", source=events[a], target=events[b], uuid=next(ids))
        set_value(model, mm, r.uuid, "relation", [rel])
    part = create_object(model, mm, "Involves", source=events[0], target=sensor, uuid=next(ids))
    set_value(model, mm, part.uuid, "role", ["instrument"])
    junctions = []
    for pos in ((0.0, 0.0, 0.0), (3.0, 0.0, 0.0), (3.0, 4.0, 0.0), (0.0, 4.0, 0.0)):
        j = create_object(model, mm, "Junction", uuid=next(ids)).uuid
        set_value(model, mm, j, "position", [CoordinateValue("world", pos)])
        junctions.append(j)
    for a, b, length in ((0, 1, 3.5), (1, 2, 4.0), (0, 3, 4.0), (3, 2, 3.0), (0, 2, 9.0)):
        c = create_object(model, mm, "Cable", source=junctions[a], target=junctions[b], uuid=next(ids))
        set_value(model, mm, c.uuid, "length", [length])
    return model

"""A short tour: build a metamodel, anchor content, resolve a scene, query it."""

from spatialcm import samples
from spatialcm.anchoring import LEVEL_NAMES, classify_anchoring_level, resolve_scene
from spatialcm.fields import evaluate_field
from spatialcm.geometry import CoordinateValue
from spatialcm.kernel import iterate_objects, validate_metamodel, validate_model
from spatialcm.query import is_in, shortest_path, within_radius
from spatialcm.temporal import check_temporal_consistency, event_interval, infer_relation

mm = samples.workshop_metamodel()
frames = samples.workshop_frames()
print("metamodel violations:", validate_metamodel(mm))

print("\nanchoring levels of the machine-operation variants")
for level in range(5):
    model = samples.machine_operation(level, mm)
    got = classify_anchoring_level(model, mm)
    print(f"  variant {level}: level {got} ({LEVEL_NAMES[got]})")

model = samples.machine_operation(3, mm)
print("\nstep placements in the world frame")
for p in resolve_scene(model, mm, frames, {}):
    t = ", ".join(f"{c:.3f}" for c in p.pose.translation)
    print(f"  {p.source[:8]} at ({t})")

room = samples.server_room(mm)
for zone in ("serverroom", "office"):
    scene = resolve_scene(room, mm, frames, {"user_zone": zone})
    glyphs = sorted(g for p in scene for g in p.vizrep.get("glyph", ()))
    print(f"\nuser_zone={zone!r}: {len(scene)} placements, glyphs {glyphs}")

site = samples.site_model(mm)
print("\nsite model violations:", validate_model(site, mm))
print("temporal consistency:", check_temporal_consistency(site, mm))
first, second, _ = sorted(iterate_objects(site, mm, "Measurement"), key=lambda o: o.values["start"][0])
print("first vs second measurement:",
      infer_relation(event_interval(site, mm, first.uuid), event_interval(site, mm, second.uuid)))

field = iterate_objects(site, mm, "TemperatureField")[0].values["field"][0]
probe = CoordinateValue("workshop", (1.0, 1.0, 2.0))
print("temperature at the probe:", evaluate_field(field, frames, probe), "K")

junctions = sorted(iterate_objects(site, mm, "Junction"), key=lambda o: o.values["position"][0].position)
path, length = shortest_path(site, mm, junctions[0].uuid, junctions[-1].uuid, "length")
print(f"cheapest cable route: {len(path)} junctions, length {length}")
near = within_radius(site, mm, frames, CoordinateValue("world", (0.0, 0.0, 0.0)), 3.5)
print("junctions within 3.5 of the origin:", len(near))

rack = iterate_objects(room, mm, "Rack")[0].uuid
door = iterate_objects(room, mm, "Door")[0].uuid
print("door inside rack volume:", is_in(room, mm, frames, door, rack))

"""Anchors binding virtual content to the real world, and scene resolution.

Anchoring levels:

====  ===============================  =====================================
0     Traditional CM                   no spatial values, no anchors
1     Unanchored Spatial CM            objects carry coordinates/transforms
2     Model-Anchored Spatial CM        the whole model anchored (source MODEL)
3     Statically Anchored Spatial CM   individual elements anchored
4     Dynamically Anchored Spatial CM  some anchor carries a condition
====  ===============================  =====================================

The highest matching level wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import SCMError
from .expressions import evaluate_condition, parse_condition
from .geometry import IDENTITY, FramedPose, FrameTree, Pose, compose
from .kernel import (
    MODEL, Metamodel, ModelInstance, ObjectInstance, create_object, objects_of_kind,
    validate_model,
)

LEVEL_NAMES = {
    0: "Traditional CM",
    1: "Unanchored Spatial CM",
    2: "Model-Anchored Spatial CM",
    3: "Statically Anchored Spatial CM",
    4: "Dynamically Anchored Spatial CM",
}


@dataclass(frozen=True)
class Anchor:
    uuid: str
    source: str
    target: str | FramedPose
    offset: Pose = IDENTITY
    condition: str | None = None


@dataclass(frozen=True)
class Placement:
    source: str
    anchor: str
    pose: Pose
    vizrep: Mapping[str, tuple] = field(default_factory=dict)


def anchors(model: ModelInstance, mm: Metamodel) -> list[Anchor]:
    """Anchor views of every anchor-kind object, sorted by uuid."""
    b = mm.builtins
    src_attr, tgt_attr = b.endpoint_attrs
    cond_attr, offset_attr, pose_attr = b.anchor_attrs
    out = []
    for obj in objects_of_kind(model, mm, {"anchor"}):
        v = obj.values
        target = (v.get(tgt_attr) or v.get(pose_attr) or [None])[0]
        cond = (v.get(cond_attr) or [None])[0]
        out.append(Anchor(obj.uuid, v[src_attr][0], target,
                          (v.get(offset_attr) or [IDENTITY])[0], cond or None))
    return out


def _require_valid(model: ModelInstance, mm: Metamodel) -> None:
    report = validate_model(model, mm)
    if report:
        raise SCMError("INVALID_MODEL", f"model {model.id!r} has {len(report)} violation(s)",
                       violations=report)


def classify_anchoring_level(model: ModelInstance, mm: Metamodel) -> int:
    _require_valid(model, mm)
    found = anchors(model, mm)
    if any(a.condition for a in found):
        return 4
    if any(a.source != MODEL for a in found):
        return 3
    if found:
        return 2
    b = mm.builtins
    spatial = (*b.coord, *b.transform, b.vizrep[0])
    if any(obj.values.get(attr) for obj in model.objects.values() for attr in spatial):
        return 1
    return 0


def create_anchor(model: ModelInstance, mm: Metamodel, source: str, target: str | FramedPose,
                  offset: Pose = IDENTITY, condition: str | None = None,
                  anchor_type: str | None = None, uuid: str | None = None) -> Anchor:
    """Anchor a virtual object (or the whole model, ``MODEL``) to a target.

    ``target`` is the uuid of a real object or a point of interest given as
    a :class:`FramedPose`. ``anchor_type`` defaults to the single anchor
    type of the model's model type.
    """
    if anchor_type is None:
        mt = mm.model_type(model.model_type)
        candidates = [t.id for t in mt.object_types if t.kind == "anchor"]
        if len(candidates) != 1:
            raise SCMError("UNKNOWN_TYPE", f"model type {mt.id!r} has {len(candidates)} anchor types")
        anchor_type = candidates[0]
    spec = mm.object_type(anchor_type).endpoints
    if mm.kind_of(anchor_type) != "anchor":
        raise SCMError("KIND_MISMATCH", f"{anchor_type!r} is not an anchor type")
    _check_endpoint(model, mm, source, spec.source, "source")
    if isinstance(target, FramedPose):
        if "poi" not in spec.target:
            raise SCMError("ENDPOINT_KIND", f"{anchor_type} does not accept points of interest")
    else:
        _check_endpoint(model, mm, target, spec.target, "target")
    if condition is not None:
        parse_condition(condition)
    obj = create_object(model, mm, anchor_type, source=source, target=target, uuid=uuid)
    cond_attr, offset_attr, _ = mm.builtins.anchor_attrs
    if offset != IDENTITY:
        obj.values[offset_attr] = [offset]
    if condition is not None:
        obj.values[cond_attr] = [condition]
    return Anchor(obj.uuid, source, target, offset, condition)


def _check_endpoint(model: ModelInstance, mm: Metamodel, ref: str, allowed, role: str) -> None:
    if ref == MODEL:
        if "model" not in allowed:
            raise SCMError("ENDPOINT_KIND", f"MODEL cannot be an anchor {role}")
        return
    kind = mm.kind_of(model.get(ref).object_type)
    if kind not in allowed:
        raise SCMError("ENDPOINT_KIND", f"a {kind} object cannot be an anchor {role}")


def local_pose(model: ModelInstance, mm: Metamodel, obj: ObjectInstance) -> tuple[str, Pose] | None:
    """``(frame, pose)`` from an object's coordinate and transform values."""
    b = mm.builtins
    pos = (obj.values.get(b.coord[0]) or [None])[0]
    rotation = (obj.values.get(b.transform[0]) or [IDENTITY.rotation])[0]
    scale = (obj.values.get(b.transform[1]) or [1.0])[0]
    if pos is None:
        return None
    return pos.frame, Pose(rotation, pos.position, scale)


def world_pose(model: ModelInstance, mm: Metamodel, tree: FrameTree, uuid: str) -> Pose:
    located = local_pose(model, mm, model.get(uuid))
    if located is None:
        raise SCMError("NO_POSITION", f"object {uuid} has no position")
    frame, pose = located
    return compose(tree.world_pose(frame), pose)


def _vizrep(mm: Metamodel, obj: ObjectInstance) -> dict[str, tuple]:
    return {a: tuple(obj.values[a]) for a in mm.builtins.vizrep if obj.values.get(a)}


def resolve_scene(model: ModelInstance, mm: Metamodel, tree: FrameTree,
                  context: Mapping[str, object] | None = None) -> list[Placement]:
    """World-frame placements of every active anchor, sorted by source uuid.

    Element anchors place their source at ``target ∘ offset``. A MODEL
    anchor places each virtual object at ``target ∘ offset ∘ local``, where
    ``local`` comes from the object's own coordinate and transform values
    (their frame name is ignored: they are model-local).
    """
    _require_valid(model, mm)
    context = context or {}
    virtual = [o for o in model.objects.values()
               if mm.object_type(o.object_type).realm == "virtual"]
    out = []
    for a in anchors(model, mm):
        if a.condition:
            try:
                active = evaluate_condition(a.condition, context)
            except SCMError as exc:
                raise SCMError(exc.code, f"anchor {a.uuid}: {exc.message}",
                               anchor=a.uuid, **exc.details) from exc
            if not active:
                continue
        if isinstance(a.target, FramedPose):
            base = compose(tree.world_pose(a.target.frame), a.target.pose)
        else:
            base = world_pose(model, mm, tree, a.target)
        base = compose(base, a.offset)
        if a.source == MODEL:
            for obj in virtual:
                located = local_pose(model, mm, obj)
                pose = base if located is None else compose(base, located[1])
                out.append(Placement(obj.uuid, a.uuid, pose, _vizrep(mm, obj)))
        else:
            out.append(Placement(a.source, a.uuid, base, _vizrep(mm, model.get(a.source))))
    return sorted(out, key=lambda p: (p.source, p.anchor))

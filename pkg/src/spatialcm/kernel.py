"""Metamodels, model instances and conformance checking.

A :class:`Metamodel` is the tuple ``<model types, inheritance, domain, range,
card>``: model types group object types, data types and attributes;
``domain`` attaches attributes to object types, ``range`` gives the type of
their values and ``card`` bounds how many values an object may hold.
A :class:`ModelInstance` holds typed objects whose attribute values are
checked against that metamodel by :func:`validate_model`.

Every object type carries the universal spatial attributes (identity,
coordinates, transform, visual representation); field, event and relational
kinds carry their own. :func:`attach_builtins` fills those entries in.
"""

from __future__ import annotations

import math
import re
import uuid as uuidlib
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Sequence

from .errors import ParseError, SCMError
from .expressions import parse_condition
from .fields import FieldSpec
from .geometry import CoordinateValue, FramedPose, Pose

MODEL = "MODEL"
"""Anchor source token meaning "the whole model"."""

REAL_KINDS = frozenset({"real"})
VIRTUAL_KINDS = frozenset({"virtual", "field", "event", "node"})
RELATIONAL_KINDS = frozenset({"anchor", "edge", "temporal-relation", "participation"})
OBJECT_KINDS = REAL_KINDS | VIRTUAL_KINDS | RELATIONAL_KINDS
# endpoint_spec entries: object kinds, "*" (any non-relational), "model", "poi"
ENDPOINT_TOKENS = OBJECT_KINDS | {"*", "model", "poi"}

DATA_KINDS = frozenset({
    "text", "integer", "real-number", "boolean", "enumeration", "timestamp", "duration",
    "coordinate-triple", "rotation", "extent-box", "field-spec", "pose", "frame-pose",
    "reference",
})

ALLEN_RELATIONS = (
    "before", "after", "meets", "met-by", "overlaps", "overlapped-by", "during",
    "contains", "starts", "started-by", "finishes", "finished-by", "equals",
)

_UUID_RE = re.compile(r"^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$")


# ---------------------------------------------------------------------------
# Metamodel structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DataType:
    id: str
    kind: str
    values: tuple[str, ...] = ()


@dataclass(frozen=True)
class EndpointSpec:
    source: frozenset[str]
    target: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "source", frozenset(self.source))
        object.__setattr__(self, "target", frozenset(self.target))


@dataclass(frozen=True)
class ObjectType:
    id: str
    name: str
    kind: str
    endpoints: EndpointSpec | None = None

    @property
    def realm(self) -> str | None:
        """``"real"``, ``"virtual"`` or None for relational kinds."""
        if self.kind in REAL_KINDS:
            return "real"
        if self.kind in VIRTUAL_KINDS:
            return "virtual"
        return None


@dataclass(frozen=True)
class Attribute:
    id: str
    name: str
    builtin: bool = False


@dataclass(frozen=True)
class ModelType:
    id: str
    object_types: tuple[ObjectType, ...] = ()
    data_types: tuple[DataType, ...] = ()
    attributes: tuple[Attribute, ...] = ()

    def __post_init__(self):
        for name in ("object_types", "data_types", "attributes"):
            object.__setattr__(self, name, tuple(sorted(getattr(self, name), key=lambda e: e.id)))


@dataclass(frozen=True)
class Card:
    min: int = 0
    max: int | None = None  # None = unbounded

    def admits(self, n: int) -> bool:
        return n >= self.min and (self.max is None or n <= self.max)


@dataclass(frozen=True)
class BuiltinAttributeSets:
    """Ids of the attributes every metamodel provides.

    ``uuid``, ``coord``, ``transform`` and ``vizrep`` apply to every object
    type; the remaining sets apply to the kinds named in :data:`BUILTIN_KINDS`.
    """

    uuid: str = "uuid"
    coord: tuple[str, ...] = ("position",)
    transform: tuple[str, ...] = ("rotation", "scale")
    vizrep: tuple[str, ...] = ("extent", "glyph", "lod")
    field_attrs: tuple[str, ...] = ("field",)
    event_attrs: tuple[str, ...] = ("duration", "start")
    endpoint_attrs: tuple[str, ...] = ("source", "target")
    anchor_attrs: tuple[str, ...] = ("condition", "offset", "target_pose")
    temporal_attrs: tuple[str, ...] = ("relation",)
    participation_attrs: tuple[str, ...] = ("role",)

    def universal(self) -> tuple[str, ...]:
        return (self.uuid, *self.coord, *self.transform, *self.vizrep)

    def by_set(self) -> dict[str, tuple[str, ...]]:
        return {
            "uuid": (self.uuid,), "coord": self.coord, "transform": self.transform,
            "vizrep": self.vizrep, "field_attrs": self.field_attrs,
            "event_attrs": self.event_attrs, "endpoint_attrs": self.endpoint_attrs,
            "anchor_attrs": self.anchor_attrs, "temporal_attrs": self.temporal_attrs,
            "participation_attrs": self.participation_attrs,
        }

    def all(self) -> tuple[str, ...]:
        return tuple(a for ids in self.by_set().values() for a in ids)


# Object kinds each builtin set attaches to (None = every object type).
BUILTIN_KINDS: dict[str, frozenset[str] | None] = {
    "uuid": None, "coord": None, "transform": None, "vizrep": None,
    "field_attrs": frozenset({"field"}),
    "event_attrs": frozenset({"event"}),
    "endpoint_attrs": RELATIONAL_KINDS,
    "anchor_attrs": frozenset({"anchor"}),
    "temporal_attrs": frozenset({"temporal-relation"}),
    "participation_attrs": frozenset({"participation"}),
}

# Default range and card of builtin attributes, keyed by default id.
BUILTIN_SIGNATURES: dict[str, tuple[str, Card]] = {
    "uuid": ("text", Card(1, 1)),
    "position": ("coordinate-triple", Card(0, 1)),
    "rotation": ("rotation", Card(0, 1)),
    "scale": ("real-number", Card(0, 1)),
    "extent": ("extent-box", Card(0, 1)),
    "glyph": ("text", Card(0, 1)),
    "lod": ("integer", Card(0, 1)),
    "field": ("field-spec", Card(0, 1)),
    "start": ("timestamp", Card(0, 1)),
    "duration": ("duration", Card(0, 1)),
    "source": ("reference", Card(1, 1)),
    "target": ("reference", Card(0, 1)),
    "target_pose": ("frame-pose", Card(0, 1)),
    "offset": ("pose", Card(0, 1)),
    "condition": ("text", Card(0, 1)),
    "relation": ("allen-relation", Card(1, 1)),
    "role": ("text", Card(0, 1)),
}

BUILTIN_DATA_TYPES: dict[str, DataType] = {
    k: DataType(k, k) for k in DATA_KINDS if k != "enumeration"
}
BUILTIN_DATA_TYPES["allen-relation"] = DataType("allen-relation", "enumeration", ALLEN_RELATIONS)

DEFAULT_ENDPOINTS: dict[str, EndpointSpec] = {
    "anchor": EndpointSpec(VIRTUAL_KINDS | {"model"}, {"real", "poi"}),
    "edge": EndpointSpec({"node"}, {"node"}),
    "temporal-relation": EndpointSpec({"event"}, {"event"}),
    "participation": EndpointSpec({"event"}, {"*"}),
}


def object_type(id: str, kind: str, name: str | None = None,
                endpoints: EndpointSpec | None = None) -> ObjectType:
    """Shorthand that fills in default endpoint rules for relational kinds."""
    if endpoints is None and kind in RELATIONAL_KINDS:
        endpoints = DEFAULT_ENDPOINTS[kind]
    return ObjectType(id, name or id, kind, endpoints)


@dataclass(frozen=True)
class Metamodel:
    id: str
    model_types: tuple[ModelType, ...]
    inheritance: frozenset[tuple[str, str]] = frozenset()
    domain_map: Mapping[str, frozenset[str]] = field(default_factory=dict)
    range_map: Mapping[str, str] = field(default_factory=dict)
    card_map: Mapping[str, Card] = field(default_factory=dict)
    builtins: BuiltinAttributeSets = BuiltinAttributeSets()

    def __post_init__(self):
        object.__setattr__(self, "model_types", tuple(sorted(self.model_types, key=lambda m: m.id)))
        object.__setattr__(self, "inheritance", frozenset(tuple(p) for p in self.inheritance))
        object.__setattr__(self, "domain_map", {k: frozenset(v) for k, v in self.domain_map.items()})
        object.__setattr__(self, "range_map", dict(self.range_map))
        object.__setattr__(self, "card_map", dict(self.card_map))
        object.__setattr__(self, "_memo", {})

    def __hash__(self):
        return hash((self.id, self.model_types, self.inheritance))

    # -- lookups -------------------------------------------------------------

    def _index(self, name: str) -> dict:
        if name not in self._memo:
            idx = {}
            for mt in self.model_types:
                for e in getattr(mt, name):
                    idx.setdefault(e.id, e)
            self._memo[name] = idx
        return self._memo[name]

    @property
    def object_types(self) -> dict[str, ObjectType]:
        return self._index("object_types")

    @property
    def data_types(self) -> dict[str, DataType]:
        return {**BUILTIN_DATA_TYPES, **self._index("data_types")}

    @property
    def attributes(self) -> dict[str, Attribute]:
        out = {a: Attribute(a, a, builtin=True) for a in self.builtins.all()}
        out.update(self._index("attributes"))
        return out

    def model_type(self, mt_id: str) -> ModelType:
        for mt in self.model_types:
            if mt.id == mt_id:
                return mt
        raise SCMError("UNKNOWN_TYPE", f"model type {mt_id!r} not in metamodel {self.id!r}")

    def object_type(self, t: str) -> ObjectType:
        try:
            return self.object_types[t]
        except KeyError:
            raise SCMError("UNKNOWN_TYPE", f"object type {t!r} not in metamodel {self.id!r}") from None

    def supertypes(self, t: str) -> frozenset[str]:
        """Reflexive-transitive supertypes of ``t`` (cycle-safe)."""
        memo = self._memo.setdefault("supertypes", {})
        if t not in memo:
            parents = defaultdict(set)
            for a, b in self.inheritance:
                parents[a].add(b)
            seen = {t}
            stack = [t]
            while stack:
                for p in parents[stack.pop()]:
                    if p not in seen:
                        seen.add(p)
                        stack.append(p)
            memo[t] = frozenset(seen)
        return memo[t]

    def kind_of(self, t: str) -> str:
        return self.object_type(t).kind

    def card(self, attr: str) -> Card:
        return self.card_map.get(attr, Card())

    def model_types_of(self, t: str) -> list[str]:
        return [mt.id for mt in self.model_types if any(o.id == t for o in mt.object_types)]


def attach_builtins(mm: Metamodel) -> Metamodel:
    """Return ``mm`` with domain/range/card entries for every builtin attribute.

    Existing range/card entries of builtins are kept; domains are recomputed
    so the universal sets cover every object type.
    """
    domain = dict(mm.domain_map)
    ranges = dict(mm.range_map)
    cards = dict(mm.card_map)
    types = mm.object_types.values()
    defaults = BuiltinAttributeSets().by_set()
    for set_name, ids in mm.builtins.by_set().items():
        kinds = BUILTIN_KINDS[set_name]
        members = frozenset(t.id for t in types if kinds is None or t.kind in kinds)
        for pos, attr in enumerate(ids):
            default_id = defaults[set_name][min(pos, len(defaults[set_name]) - 1)]
            rng, card = BUILTIN_SIGNATURES.get(attr) or BUILTIN_SIGNATURES[default_id]
            domain[attr] = members
            ranges.setdefault(attr, rng)
            cards.setdefault(attr, card)
    return replace(mm, domain_map=domain, range_map=ranges, card_map=cards)


def make_metamodel(id: str, model_types: Sequence[ModelType],
                   inheritance: Iterable[tuple[str, str]] = (),
                   attributes: Mapping[str, tuple[Iterable[str], str, Card]] | None = None,
                   builtins: BuiltinAttributeSets | None = None) -> Metamodel:
    """Assemble a metamodel with builtin attributes auto-attached.

    ``attributes`` maps each user attribute id to ``(domain, range, card)``.
    """
    attributes = attributes or {}
    mm = Metamodel(
        id, tuple(model_types), frozenset(inheritance),
        {a: frozenset(d) for a, (d, _, _) in attributes.items()},
        {a: r for a, (_, r, _) in attributes.items()},
        {a: c for a, (_, _, c) in attributes.items()},
        builtins or BuiltinAttributeSets(),
    )
    return attach_builtins(mm)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Violation:
    code: str
    location: str
    message: str = ""


def _codes(report: Iterable[Violation]) -> list[str]:
    return [v.code for v in report]


# ---------------------------------------------------------------------------
# Metamodel validation and type queries
# ---------------------------------------------------------------------------

def validate_metamodel(mm: Metamodel) -> list[Violation]:
    """Check the metamodel invariants; an empty list means well-formed.

    Codes: INHERITANCE_CYCLE, DANGLING_DOMAIN, DANGLING_RANGE, BAD_CARD,
    KIND_CONFLICT, MISSING_BUILTIN, DUPLICATE_ID.
    """
    if "report" in mm._memo:
        return list(mm._memo["report"])
    out: list[Violation] = []

    seen: dict[str, str] = {}
    for mt in mm.model_types:
        for kind, elems in (("model type", (mt,)), ("object type", mt.object_types),
                            ("data type", mt.data_types)):
            for e in elems:
                if e.id in seen or (kind == "data type" and e.id in BUILTIN_DATA_TYPES):
                    out.append(Violation("DUPLICATE_ID", e.id, f"{kind} id {e.id!r} is not unique"))
                seen.setdefault(e.id, kind)
        for a in mt.attributes:
            if a.id in seen or a.id in mm.builtins.all():
                out.append(Violation("DUPLICATE_ID", a.id, f"attribute id {a.id!r} is not unique"))
            seen.setdefault(a.id, "attribute")
    types = mm.object_types
    for d in (dt for mt in mm.model_types for dt in mt.data_types):
        if d.kind not in DATA_KINDS:
            out.append(Violation("DANGLING_RANGE", d.id, f"unknown data kind {d.kind!r}"))
        elif d.kind == "enumeration" and (not d.values or len(set(d.values)) != len(d.values)):
            out.append(Violation("DANGLING_RANGE", d.id, "enumeration needs distinct values"))

    # inheritance
    for a, b in sorted(mm.inheritance):
        for t in (a, b):
            if t not in types:
                out.append(Violation("DANGLING_DOMAIN", f"inheritance:{a}<{b}",
                                     f"unknown object type {t!r}"))
    cyclic = sorted(t for t in types if any(
        s != t and t in mm.supertypes(s) for s in mm.supertypes(t)))
    if cyclic:
        out.append(Violation("INHERITANCE_CYCLE", ",".join(cyclic),
                             "inheritance contains a cycle among " + ", ".join(cyclic)))
    for a, b in sorted(mm.inheritance):
        if a in types and b in types and not _kinds_compatible(types[a], types[b]):
            out.append(Violation("KIND_CONFLICT", f"inheritance:{a}<{b}",
                                 f"{types[a].kind} type cannot specialise {types[b].kind} type"))

    # kinds and endpoint rules
    for t in sorted(types.values(), key=lambda t: t.id):
        out.extend(_kind_violations(t))

    # attribute maps
    attrs = mm.attributes
    for aid in sorted(set(attrs) | set(mm.domain_map) | set(mm.range_map) | set(mm.card_map)):
        if aid not in attrs:
            out.append(Violation("DANGLING_DOMAIN", aid, f"map entry for undeclared attribute {aid!r}"))
            continue
        builtin = attrs[aid].builtin
        dom = mm.domain_map.get(aid)
        if dom is None:
            out.append(Violation("MISSING_BUILTIN" if builtin else "DANGLING_DOMAIN", aid,
                                 "attribute has no domain entry"))
        else:
            for t in sorted(dom - types.keys()):
                out.append(Violation("DANGLING_DOMAIN", aid, f"domain names unknown object type {t!r}"))
        rng = mm.range_map.get(aid)
        if rng is None:
            out.append(Violation("MISSING_BUILTIN" if builtin else "DANGLING_RANGE", aid,
                                 "attribute has no range entry"))
        elif rng not in mm.data_types and rng not in types and rng not in {m.id for m in mm.model_types}:
            out.append(Violation("DANGLING_RANGE", aid, f"range target {rng!r} does not resolve"))
        card = mm.card_map.get(aid)
        if card is None:
            out.append(Violation("MISSING_BUILTIN" if builtin else "BAD_CARD", aid,
                                 "attribute has no card entry"))
        elif card.min < 0 or (card.max is not None and card.max < card.min):
            out.append(Violation("BAD_CARD", aid, f"card ({card.min}, {card.max}) is not min <= max"))

    # builtin coverage
    for set_name, ids in mm.builtins.by_set().items():
        kinds = BUILTIN_KINDS[set_name]
        expected = {t.id for t in types.values() if kinds is None or t.kind in kinds}
        for aid in ids:
            dom = mm.domain_map.get(aid)
            if dom is None:
                continue
            missing = sorted(expected - dom)
            if missing:
                out.append(Violation("MISSING_BUILTIN", aid,
                                     f"{set_name} attribute missing on {', '.join(missing)}"))
            stray = sorted(t for t in dom - expected if t in types)
            if stray:
                out.append(Violation("KIND_CONFLICT", aid,
                                     f"{set_name} attribute attached to {', '.join(stray)}"))
    if len(set(mm.builtins.all())) != len(mm.builtins.all()):
        out.append(Violation("DUPLICATE_ID", "builtins", "builtin attribute sets overlap"))

    out = sorted(set(out))
    mm._memo["report"] = tuple(out)
    return list(out)


def _kinds_compatible(sub: ObjectType, sup: ObjectType) -> bool:
    if sub.kind == sup.kind:
        return True
    return sub.realm is not None and sub.realm == sup.realm == "virtual" and sup.kind == "virtual"


def _kind_violations(t: ObjectType) -> list[Violation]:
    out = []
    if t.kind not in OBJECT_KINDS:
        return [Violation("KIND_CONFLICT", t.id, f"unknown kind {t.kind!r}")]
    spec = t.endpoints
    if t.kind in RELATIONAL_KINDS:
        if spec is None or not spec.source or not spec.target:
            return [Violation("KIND_CONFLICT", t.id, f"{t.kind} type needs endpoint rules")]
        bad = sorted((spec.source | spec.target) - ENDPOINT_TOKENS)
        if bad:
            out.append(Violation("KIND_CONFLICT", t.id, f"unknown endpoint kinds {bad}"))
        if t.kind == "anchor":
            if not spec.source <= VIRTUAL_KINDS | {"model"}:
                out.append(Violation("KIND_CONFLICT", t.id, "anchor sources must be virtual or MODEL"))
            if not spec.target <= REAL_KINDS | {"poi"}:
                out.append(Violation("KIND_CONFLICT", t.id, "anchor targets must be real or a point of interest"))
        else:
            if {"model", "poi"} & (spec.source | spec.target):
                out.append(Violation("KIND_CONFLICT", t.id, "only anchors may use MODEL or points of interest"))
    elif spec is not None:
        out.append(Violation("KIND_CONFLICT", t.id, f"{t.kind} type cannot declare endpoints"))
    return out


def _require_type(mm: Metamodel, t: str) -> ObjectType:
    return mm.object_type(t)


def subtype_of(mm: Metamodel, a: str, b: str) -> bool:
    _require_type(mm, a)
    _require_type(mm, b)
    return b in mm.supertypes(a)


def effective_attributes(mm: Metamodel, t: str) -> tuple[str, ...]:
    """Attribute ids usable on objects of type ``t``, sorted by id."""
    _require_type(mm, t)
    memo = mm._memo.setdefault("effective", {})
    if t not in memo:
        sup = mm.supertypes(t)
        attrs = {a for a, dom in mm.domain_map.items() if dom & sup}
        attrs.update(mm.builtins.universal())
        memo[t] = tuple(sorted(attrs))
    return memo[t]


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

@dataclass
class ObjectInstance:
    uuid: str
    object_type: str
    values: dict[str, list] = field(default_factory=dict)


@dataclass
class ModelInstance:
    id: str
    model_type: str
    objects: dict[str, ObjectInstance] = field(default_factory=dict)
    linked_models: dict[str, str] = field(default_factory=dict)
    """Other model ids this model may reference, mapped to their model type."""

    def get(self, uuid: str) -> ObjectInstance:
        try:
            return self.objects[uuid]
        except KeyError:
            raise SCMError("UNKNOWN_OBJECT", f"no object {uuid!r} in model {self.id!r}") from None

    def first(self, uuid: str, attr: str, default=None):
        vals = self.get(uuid).values.get(attr) or []
        return vals[0] if vals else default


def _in_model_type(mm: Metamodel, model: ModelInstance, t: str) -> bool:
    mt = mm.model_type(model.model_type)
    own = {o.id for o in mt.object_types}
    return bool(mm.supertypes(t) & own)


def new_uuid() -> str:
    return str(uuidlib.uuid4())


def create_object(model: ModelInstance, mm: Metamodel, t: str, *, source: str | None = None,
                  target: str | FramedPose | None = None, uuid: str | None = None) -> ObjectInstance:
    """Add an object of type ``t`` with a fresh version-4 UUID.

    Relational types need ``source`` and ``target``; anchors may use
    :data:`MODEL` as source and a :class:`FramedPose` as target. Endpoint
    kinds are checked by :func:`validate_model`, not here. ``uuid`` lets
    document loaders and generators supply identities.
    """
    ot = mm.object_type(t)
    if not _in_model_type(mm, model, t):
        raise SCMError("UNKNOWN_TYPE", f"{t!r} does not belong to model type {model.model_type!r}")
    relational = ot.kind in RELATIONAL_KINDS
    if relational and (source is None or target is None):
        raise SCMError("KIND_MISMATCH", f"{ot.kind} type {t!r} needs source and target")
    if not relational and (source is not None or target is not None):
        raise SCMError("KIND_MISMATCH", f"{ot.kind} type {t!r} takes no endpoints")
    uid = uuid or new_uuid()
    if uid in model.objects:
        raise SCMError("DUPLICATE_UUID", f"uuid {uid} already used")
    obj = ObjectInstance(uid, t, {mm.builtins.uuid: [uid]})
    if relational:
        src_attr, tgt_attr = mm.builtins.endpoint_attrs
        obj.values[src_attr] = [source]
        if isinstance(target, FramedPose):
            obj.values[mm.builtins.anchor_attrs[2]] = [target]
        else:
            obj.values[tgt_attr] = [target]
    model.objects[uid] = obj
    return obj


def set_value(model: ModelInstance, mm: Metamodel, uuid: str, attr: str, values: Sequence) -> ModelInstance:
    obj = model.get(uuid)
    if attr == mm.builtins.uuid or attr not in effective_attributes(mm, obj.object_type):
        raise SCMError("UNKNOWN_ATTRIBUTE", f"{attr!r} cannot be set on {obj.object_type!r}")
    values = list(values)
    for v in values:
        problem = value_problem(mm, mm.range_map.get(attr), v)
        if problem:
            raise SCMError("RANGE_TYPE_MISMATCH", f"{attr}: {problem}", attribute=attr)
    obj.values[attr] = values
    return model


def delete_object(model: ModelInstance, uuid: str) -> ModelInstance:
    """Remove an object; references to it are left dangling, never cascaded."""
    model.get(uuid)
    del model.objects[uuid]
    return model


def iterate_objects(model: ModelInstance, mm: Metamodel, type_filter: str | None = None,
                    include_subtypes: bool = False) -> list[ObjectInstance]:
    if type_filter is not None:
        mm.object_type(type_filter)
    out = []
    for uid in sorted(model.objects):
        obj = model.objects[uid]
        if type_filter is None or obj.object_type == type_filter or (
                include_subtypes and obj.object_type in mm.object_types
                and type_filter in mm.supertypes(obj.object_type)):
            out.append(obj)
    return out


def objects_of_kind(model: ModelInstance, mm: Metamodel, kinds: Iterable[str]) -> list[ObjectInstance]:
    kinds = frozenset(kinds)
    return [o for o in iterate_objects(model, mm)
            if o.object_type in mm.object_types and mm.kind_of(o.object_type) in kinds]


# ---------------------------------------------------------------------------
# Value typing
# ---------------------------------------------------------------------------

def _finite_triple(v) -> bool:
    return (isinstance(v, (tuple, list)) and len(v) == 3
            and all(_is_number(c) and math.isfinite(c) for c in v))


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def value_problem(mm: Metamodel, range_target: str | None, v: Any) -> str | None:
    """Why ``v`` cannot be a value of ``range_target``; None if it can.

    Object- and model-typed ranges only check the reference shape here;
    resolution happens in :func:`validate_model`.
    """
    if range_target is None:
        return "attribute has no range"
    if range_target in mm.data_types:
        return _data_problem(mm.data_types[range_target], v)
    if range_target in mm.object_types or range_target in {m.id for m in mm.model_types}:
        return None if isinstance(v, str) else f"{v!r} is not a reference"
    return f"range {range_target!r} does not resolve"


def _data_problem(dt: DataType, v: Any) -> str | None:
    k = dt.kind
    ok = {
        "text": lambda: isinstance(v, str),
        "integer": lambda: isinstance(v, int) and not isinstance(v, bool),
        "real-number": lambda: _is_number(v) and math.isfinite(v),
        "boolean": lambda: isinstance(v, bool),
        "enumeration": lambda: isinstance(v, str) and v in dt.values,
        "timestamp": lambda: isinstance(v, int) and not isinstance(v, bool),
        "duration": lambda: isinstance(v, int) and not isinstance(v, bool) and v >= 0,
        "coordinate-triple": lambda: isinstance(v, CoordinateValue),
        "rotation": lambda: _is_unit_quaternion(v),
        "extent-box": lambda: isinstance(v, ExtentBox),
        "field-spec": lambda: isinstance(v, FieldSpec),
        "pose": lambda: isinstance(v, Pose),
        "frame-pose": lambda: isinstance(v, FramedPose),
        "reference": lambda: isinstance(v, str),
    }[k]()
    return None if ok else f"{v!r} is not a {dt.id}"


def _is_unit_quaternion(v) -> bool:
    return (isinstance(v, tuple) and len(v) == 4 and all(_is_number(c) for c in v)
            and abs(math.sqrt(sum(c * c for c in v)) - 1.0) <= 1e-9)


@dataclass(frozen=True)
class ExtentBox:
    """Box around ``center`` in the owning object's local frame."""

    center: tuple[float, float, float]
    half_sizes: tuple[float, float, float]

    def __post_init__(self):
        if not (_finite_triple(self.center) and _finite_triple(self.half_sizes)):
            raise SCMError("INVALID_EXTENT", "extent needs finite triples")
        if not all(h > 0 for h in self.half_sizes):
            raise SCMError("INVALID_EXTENT", f"half sizes {self.half_sizes} must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "half_sizes", tuple(float(c) for c in self.half_sizes))


# ---------------------------------------------------------------------------
# Model conformance
# ---------------------------------------------------------------------------

def validate_model(model: ModelInstance, mm: Metamodel) -> list[Violation]:
    """Check ``model`` against ``mm``; an empty list means conformant.

    Codes: UNKNOWN_TYPE, UNKNOWN_ATTRIBUTE, RANGE_TYPE_MISMATCH,
    MISSING_VALUE, CARD_VIOLATION, ENDPOINT_KIND, DANGLING_REFERENCE,
    DUPLICATE_UUID, UUID_MISMATCH, SELF_RELATION, INVALID_CONDITION.
    Raises INVALID_METAMODEL if ``mm`` itself is malformed.
    """
    if validate_metamodel(mm):
        raise SCMError("INVALID_METAMODEL", f"metamodel {mm.id!r} has violations")
    b = mm.builtins
    out: list[Violation] = []
    types = mm.object_types
    model_ids = {model.id: model.model_type, **model.linked_models}

    identities: dict[str, list[str]] = defaultdict(list)
    for key, obj in model.objects.items():
        vals = obj.values.get(b.uuid, [])
        if len(vals) == 1 and isinstance(vals[0], str):
            identities[vals[0]].append(key)
    duplicated = {u for u, keys in identities.items() if len(keys) > 1}

    for key in sorted(model.objects):
        obj = model.objects[key]
        loc = key
        if obj.object_type not in types or not _in_model_type(mm, model, obj.object_type):
            out.append(Violation("UNKNOWN_TYPE", loc,
                                 f"type {obj.object_type!r} not in model type {model.model_type!r}"))
            continue
        ot = types[obj.object_type]
        allowed = set(effective_attributes(mm, ot.id))
        for attr in sorted(obj.values):
            if attr not in allowed:
                out.append(Violation("UNKNOWN_ATTRIBUTE", f"{loc}.{attr}",
                                     f"{attr!r} is not an attribute of {ot.id!r}"))
        for attr in sorted(allowed):
            vals = obj.values.get(attr, [])
            card = mm.card(attr)
            if len(vals) < card.min:
                out.append(Violation("MISSING_VALUE", f"{loc}.{attr}",
                                     f"{attr!r} needs at least {card.min} value(s), has {len(vals)}"))
            elif not card.admits(len(vals)):
                out.append(Violation("CARD_VIOLATION", f"{loc}.{attr}",
                                     f"{attr!r} allows at most {card.max} value(s), has {len(vals)}"))
            rng = mm.range_map.get(attr)
            for v in vals:
                problem = value_problem(mm, rng, v)
                if problem is None:
                    problem = _reference_problem(mm, model, rng, v, model_ids)
                    if problem is not None:
                        code, msg = problem
                        out.append(Violation(code, f"{loc}.{attr}", msg))
                        continue
                if problem:
                    out.append(Violation("RANGE_TYPE_MISMATCH", f"{loc}.{attr}", problem))
        ident = obj.values.get(b.uuid, [])
        if len(ident) == 1:
            u = ident[0]
            if u in duplicated:
                if key == min(identities[u]):
                    out.append(Violation("DUPLICATE_UUID", ",".join(sorted(identities[u])),
                                         f"uuid {u} is used by several objects"))
            elif not isinstance(u, str) or not _UUID_RE.match(u):
                out.append(Violation("RANGE_TYPE_MISMATCH", f"{loc}.{b.uuid}", f"{u!r} is not a UUID"))
            elif u != key:
                out.append(Violation("UUID_MISMATCH", loc, f"object stored under {key} carries uuid {u}"))
        for attr in b.transform:
            if mm.range_map.get(attr) == "real-number":
                if any(_is_number(s) and s <= 0 for s in obj.values.get(attr, [])):
                    out.append(Violation("RANGE_TYPE_MISMATCH", f"{loc}.{attr}", "scale must be positive"))
        if ot.kind in RELATIONAL_KINDS:
            out.extend(_endpoint_violations(mm, model, obj, ot))
    return sorted(out)


def _reference_problem(mm: Metamodel, model: ModelInstance, rng: str | None, v: Any,
                       model_ids: Mapping[str, str]) -> tuple[str, str] | None:
    if rng in mm.object_types:
        target = model.objects.get(v)
        if target is None:
            return "DANGLING_REFERENCE", f"reference {v!r} does not resolve"
        if target.object_type not in mm.object_types or rng not in mm.supertypes(target.object_type):
            return "RANGE_TYPE_MISMATCH", f"{v!r} is a {target.object_type}, not a {rng}"
    elif rng is not None and rng not in mm.data_types:  # model-type range
        if v not in model_ids:
            return "DANGLING_REFERENCE", f"model {v!r} is not declared"
        if model_ids[v] != rng:
            return "RANGE_TYPE_MISMATCH", f"model {v!r} is a {model_ids[v]}, not a {rng}"
    return None


def _endpoint_violations(mm: Metamodel, model: ModelInstance, obj: ObjectInstance,
                         ot: ObjectType) -> list[Violation]:
    b = mm.builtins
    src_attr, tgt_attr = b.endpoint_attrs
    cond_attr, _, pose_attr = b.anchor_attrs
    spec = ot.endpoints
    out = []
    loc = obj.uuid

    def check(attr: str, allowed: frozenset[str], ref) -> None:
        if not isinstance(ref, str):
            return
        if ref == MODEL:
            if "model" not in allowed:
                out.append(Violation("ENDPOINT_KIND", f"{loc}.{attr}", "MODEL is not a permitted endpoint"))
            return
        other = model.objects.get(ref)
        if other is None:
            out.append(Violation("DANGLING_REFERENCE", f"{loc}.{attr}", f"reference {ref!r} does not resolve"))
            return
        if other.object_type not in mm.object_types:
            return
        kind = mm.kind_of(other.object_type)
        if kind not in allowed and not ("*" in allowed and kind not in RELATIONAL_KINDS):
            out.append(Violation("ENDPOINT_KIND", f"{loc}.{attr}",
                                 f"{kind} object {ref} is not a permitted {attr} of {ot.id}"))

    for ref in obj.values.get(src_attr, []):
        check(src_attr, spec.source, ref)
    targets = obj.values.get(tgt_attr, [])
    for ref in targets:
        check(tgt_attr, spec.target, ref)
    if ot.kind == "anchor":
        poses = obj.values.get(pose_attr, [])
        if len(targets) + len(poses) != 1:
            out.append(Violation("ENDPOINT_KIND", f"{loc}.{tgt_attr}",
                                 "anchor needs exactly one target object or point of interest"))
        elif poses and "poi" not in spec.target:
            out.append(Violation("ENDPOINT_KIND", f"{loc}.{pose_attr}", "points of interest not permitted"))
        for c in obj.values.get(cond_attr, []):
            if isinstance(c, str):
                try:
                    parse_condition(c)
                except ParseError as exc:
                    out.append(Violation("INVALID_CONDITION", f"{loc}.{cond_attr}", exc.message))
    else:
        if not targets:
            out.append(Violation("MISSING_VALUE", f"{loc}.{tgt_attr}", f"{ot.kind} needs a target"))
    if ot.kind == "temporal-relation":
        rel = obj.values.get(b.temporal_attrs[0], [])
        src = obj.values.get(src_attr, [])
        if src and src == targets and rel and rel[0] != "equals":
            out.append(Violation("SELF_RELATION", loc, f"an event cannot be {rel[0]} itself"))
    return out


def report_codes(report: Iterable[Violation]) -> list[str]:
    return _codes(report)

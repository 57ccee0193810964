"""Canonical JSON documents for metamodels, models, frame trees and scenes.

Every document is an object with ``format_version`` ("1") and exactly one
of ``metamodel``, ``model``, ``frames`` or ``scene``. Canonical text has
sorted keys, entity arrays sorted by id/uuid, numbers with at most 12
significant digits, two-space indentation and a trailing newline, so
serializing the same value twice is byte-identical.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
import math
import re
from dataclasses import dataclass
from typing import Any, Union

from .anchoring import Placement
from .errors import ParseError, SCMError
from .fields import FieldSpec
from .geometry import CoordinateValue, FramedPose, FrameTree, Pose
from .kernel import (
    Attribute, BuiltinAttributeSets, Card, DataType, EndpointSpec, ExtentBox, Metamodel,
    ModelInstance, ModelType, ObjectInstance, ObjectType,
)

FORMAT_VERSION = "1"
DOCUMENT_KINDS = ("metamodel", "model", "frames", "scene")


@dataclass(frozen=True)
class Scene:
    placements: tuple[Placement, ...]


Document = Union[Metamodel, ModelInstance, FrameTree, Scene]


# ---------------------------------------------------------------------------
# Canonical text
# ---------------------------------------------------------------------------

def _number(x: float | int) -> str:
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        raise SCMError("UNSERIALIZABLE", f"non-finite number {x}")
    text = format(x, ".12g")
    return "0" if text == "-0" else text


def canonical_json(data: Any, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if data is None:
        return "null"
    if isinstance(data, bool):
        return "true" if data else "false"
    if isinstance(data, (int, float)):
        return _number(data)
    if isinstance(data, str):
        return json.dumps(data, ensure_ascii=False)
    if isinstance(data, dict):
        if not data:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {canonical_json(data[k], indent + 1)}"
                 for k in sorted(data)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(data, (list, tuple)):
        if not data:
            return "[]"
        return "[\n" + ",\n".join(pad + canonical_json(v, indent + 1) for v in data) + "\n" + end + "]"
    raise SCMError("UNSERIALIZABLE", f"cannot serialize {type(data).__name__}")


# ---------------------------------------------------------------------------
# Value encoding
# ---------------------------------------------------------------------------

def _pose(p: Pose) -> dict:
    return {"rotation": list(p.rotation), "translation": list(p.translation), "scale": p.scale}


def _field(f: FieldSpec) -> dict:
    out = {"kind": f.kind, "frame": f.frame, "value_unit": f.value_unit}
    if f.kind == "analytic":
        out["expression"] = f.expression
    else:
        out.update(bounds=[list(b) for b in f.bounds], counts=list(f.counts),
                   samples=list(f.samples), interpolation=f.interpolation)
    return out


def encode_value(v: Any) -> Any:
    if isinstance(v, (bool, int, float, str)):
        return v
    if isinstance(v, CoordinateValue):
        return {"frame": v.frame, "xyz": list(v.position)}
    if isinstance(v, tuple) and len(v) == 4:
        return {"quat": list(v)}
    if isinstance(v, ExtentBox):
        return {"center": list(v.center), "half_sizes": list(v.half_sizes)}
    if isinstance(v, Pose):
        return _pose(v)
    if isinstance(v, FramedPose):
        return {"frame": v.frame, "pose": _pose(v.pose)}
    if isinstance(v, FieldSpec):
        return {"field": _field(v)}
    raise SCMError("UNSERIALIZABLE", f"cannot encode value {v!r}")


def _metamodel(mm: Metamodel) -> dict:
    def ot(t: ObjectType) -> dict:
        d = {"id": t.id, "name": t.name, "kind": t.kind}
        if t.endpoints is not None:
            d["endpoints"] = {"source": sorted(t.endpoints.source), "target": sorted(t.endpoints.target)}
        return d

    b = mm.builtins
    return {
        "id": mm.id,
        "builtins": {k: (b.uuid if k == "uuid" else list(v)) for k, v in b.by_set().items()},
        "model_types": [{
            "id": mt.id,
            "object_types": [ot(t) for t in mt.object_types],
            "data_types": [{"id": d.id, "kind": d.kind, "values": list(d.values)} for d in mt.data_types],
            "attributes": [{"id": a.id, "name": a.name, "builtin": a.builtin} for a in mt.attributes],
        } for mt in mm.model_types],
        "inheritance": [list(p) for p in sorted(mm.inheritance)],
        "domain": {a: sorted(d) for a, d in mm.domain_map.items()},
        "range": dict(mm.range_map),
        "card": {a: [c.min, c.max] for a, c in mm.card_map.items()},
    }


def _model(m: ModelInstance) -> dict:
    return {
        "id": m.id,
        "model_type": m.model_type,
        "linked_models": dict(m.linked_models),
        "objects": [{
            "uuid": key,
            "type": o.object_type,
            "values": {a: [encode_value(v) for v in vals] for a, vals in o.values.items()},
        } for key, o in sorted(m.objects.items())],
    }


def _frames(t: FrameTree) -> list:
    return [{"id": f, "parent": t.frames[f][0], "pose": _pose(t.frames[f][1])} for f in t.ids()]


def _scene(s: Scene) -> dict:
    return {"placements": [{
        "source": p.source, "anchor": p.anchor, "pose": _pose(p.pose),
        "vizrep": {a: [encode_value(v) for v in vals] for a, vals in p.vizrep.items()},
    } for p in sorted(s.placements, key=lambda p: (p.source, p.anchor))]}


def to_data(value: Document) -> dict:
    if isinstance(value, Metamodel):
        body = ("metamodel", _metamodel(value))
    elif isinstance(value, ModelInstance):
        body = ("model", _model(value))
    elif isinstance(value, FrameTree):
        body = ("frames", _frames(value))
    elif isinstance(value, Scene):
        body = ("scene", _scene(value))
    else:
        raise SCMError("UNSERIALIZABLE", f"cannot serialize {type(value).__name__}")
    return {"format_version": FORMAT_VERSION, body[0]: body[1]}


def serialize_document(value: Document) -> str:
    """Canonical UTF-8 text of a metamodel, model, frame tree or scene."""
    return canonical_json(to_data(value)) + "\n"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _Obj(dict):
    """dict remembering the offset of its opening brace."""

    offset = 0


class _Arr(list):
    offset = 0


def _decoder(text: str) -> json.JSONDecoder:
    dec = json.JSONDecoder()

    def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
        start = s_and_end[1] - 1
        pairs, end = json.decoder.JSONObject(s_and_end, strict, scan_once, None, list, memo)
        obj = _Obj()
        obj.offset = start
        for k, v in pairs:
            if k in obj:
                raise ParseError.at(f"duplicate key {k!r}", text, _repeated_key(text, start, end, k))
            obj[k] = v
        return obj, end

    def parse_array(s_and_end, scan_once):
        start = s_and_end[1] - 1
        values, end = json.decoder.JSONArray(s_and_end, scan_once)
        arr = _Arr(values)
        arr.offset = start
        return arr, end

    dec.parse_object = parse_object
    dec.parse_array = parse_array
    dec.scan_once = json.scanner.py_make_scanner(dec)
    return dec


_STRING_RE = re.compile(r'"(?:[^"\\]|\\.)*"')


def _repeated_key(text: str, start: int, end: int, key: str) -> int:
    """Offset of the second occurrence of ``key`` among the object's own keys."""
    depth, seen, i = 0, 0, start
    while i < end:
        c = text[i]
        if c == '"':
            m = _STRING_RE.match(text, i)
            j = m.end()
            while j < end and text[j] in " \t\r\n":
                j += 1
            if depth == 1 and j < end and text[j] == ":" and json.loads(m.group()) == key:
                seen += 1
                if seen == 2:
                    return i
            i = m.end()
            continue
        if c in "{[":
            depth += 1
        elif c in "}]":
            depth -= 1
        i += 1
    return start


class _Reader:
    """Typed access to decoded JSON with positioned errors."""

    def __init__(self, text: str):
        self.text = text

    def fail(self, node: Any, message: str) -> ParseError:
        return ParseError.at(message, self.text, getattr(node, "offset", 0))

    def obj(self, node, what: str) -> _Obj:
        if not isinstance(node, dict):
            raise self.fail(node, f"{what} must be an object")
        return node

    def arr(self, node, what: str) -> _Arr:
        if not isinstance(node, list):
            raise self.fail(node, f"{what} must be an array")
        return node

    def key(self, node: _Obj, key: str, kind, what: str, default=...):
        if key not in node:
            if default is not ...:
                return default
            raise self.fail(node, f"{what} is missing {key!r}")
        v = node[key]
        if kind is float:
            ok = isinstance(v, (int, float)) and not isinstance(v, bool)
        elif kind is int:
            ok = isinstance(v, int) and not isinstance(v, bool)
        else:
            ok = isinstance(v, kind)
        if not ok:
            raise self.fail(node, f"{what}.{key} has the wrong type")
        return v

    def triple(self, node, what: str) -> tuple[float, float, float]:
        arr = self.arr(node, what)
        if len(arr) != 3 or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in arr):
            raise self.fail(arr, f"{what} must be three numbers")
        return tuple(float(c) for c in arr)

    def numbers(self, node, what: str, n: int | None = None) -> tuple:
        arr = self.arr(node, what)
        if (n is not None and len(arr) != n) or not all(
                isinstance(c, (int, float)) and not isinstance(c, bool) for c in arr):
            raise self.fail(arr, f"{what} must be {n or 'a list of'} numbers")
        return tuple(arr)

    def strings(self, node, what: str) -> list[str]:
        arr = self.arr(node, what)
        if not all(isinstance(s, str) for s in arr):
            raise self.fail(arr, f"{what} must contain only text")
        return list(arr)

    def pose(self, node, what: str) -> Pose:
        node = self.obj(node, what)
        try:
            return Pose(tuple(float(c) for c in self.numbers(node.get("rotation"), f"{what}.rotation", 4)),
                        self.triple(node.get("translation"), f"{what}.translation"),
                        float(self.key(node, "scale", float, what)))
        except SCMError as exc:
            if isinstance(exc, ParseError):
                raise
            raise self.fail(node, exc.message) from exc

    def field(self, node) -> FieldSpec:
        node = self.obj(node, "field")
        kind = self.key(node, "kind", str, "field")
        try:
            if kind == "analytic":
                return FieldSpec("analytic", frame=self.key(node, "frame", str, "field"),
                                 value_unit=self.key(node, "value_unit", str, "field", ""),
                                 expression=self.key(node, "expression", str, "field"))
            bounds = self.arr(node.get("bounds"), "field.bounds")
            if len(bounds) != 2:
                raise self.fail(bounds, "field.bounds must hold a min and a max corner")
            return FieldSpec("grid", frame=self.key(node, "frame", str, "field"),
                             value_unit=self.key(node, "value_unit", str, "field", ""),
                             bounds=(self.triple(bounds[0], "bounds"), self.triple(bounds[1], "bounds")),
                             counts=tuple(self.numbers(node.get("counts"), "field.counts", 3)),
                             samples=tuple(self.numbers(node.get("samples"), "field.samples")),
                             interpolation=self.key(node, "interpolation", str, "field", "trilinear"))
        except ParseError:
            raise
        except SCMError as exc:
            raise self.fail(node, exc.message) from exc

    def value(self, node) -> Any:
        if isinstance(node, (bool, int, float, str)):
            return node
        if not isinstance(node, dict):
            raise self.fail(node, "attribute values must be scalars or tagged objects")
        keys = set(node)
        try:
            if keys == {"frame", "xyz"}:
                return CoordinateValue(self.key(node, "frame", str, "coordinate"),
                                       self.triple(node["xyz"], "xyz"))
            if keys == {"quat"}:
                return tuple(float(c) for c in self.numbers(node["quat"], "quat", 4))
            if keys == {"center", "half_sizes"}:
                return ExtentBox(self.triple(node["center"], "center"),
                                 self.triple(node["half_sizes"], "half_sizes"))
            if keys == {"rotation", "translation", "scale"}:
                return self.pose(node, "pose")
            if keys == {"frame", "pose"}:
                return FramedPose(self.key(node, "frame", str, "pose"), self.pose(node["pose"], "pose"))
            if keys == {"field"}:
                return self.field(node["field"])
        except ParseError:
            raise
        except SCMError as exc:
            raise self.fail(node, exc.message) from exc
        raise self.fail(node, f"unrecognised value with keys {sorted(keys)}")

    # -- documents -----------------------------------------------------------

    def metamodel(self, node) -> Metamodel:
        node = self.obj(node, "metamodel")
        model_types = []
        for mt in self.arr(self.key(node, "model_types", list, "metamodel"), "model_types"):
            mt = self.obj(mt, "model type")
            ots = []
            for t in self.arr(self.key(mt, "object_types", list, "model type", []), "object_types"):
                t = self.obj(t, "object type")
                ep = None
                if "endpoints" in t:
                    e = self.obj(t["endpoints"], "endpoints")
                    ep = EndpointSpec(frozenset(self.strings(self.key(e, "source", list, "endpoints"), "source")),
                                      frozenset(self.strings(self.key(e, "target", list, "endpoints"), "target")))
                ots.append(ObjectType(self.key(t, "id", str, "object type"),
                                      self.key(t, "name", str, "object type"),
                                      self.key(t, "kind", str, "object type"), ep))
            dts = []
            for d in self.arr(self.key(mt, "data_types", list, "model type", []), "data_types"):
                d = self.obj(d, "data type")
                dts.append(DataType(self.key(d, "id", str, "data type"), self.key(d, "kind", str, "data type"),
                                    tuple(self.strings(self.key(d, "values", list, "data type", []), "values"))))
            attrs = []
            for a in self.arr(self.key(mt, "attributes", list, "model type", []), "attributes"):
                a = self.obj(a, "attribute")
                attrs.append(Attribute(self.key(a, "id", str, "attribute"), self.key(a, "name", str, "attribute"),
                                       self.key(a, "builtin", bool, "attribute", False)))
            model_types.append(ModelType(self.key(mt, "id", str, "model type"), tuple(ots), tuple(dts), tuple(attrs)))
        inheritance = []
        for pair in self.arr(self.key(node, "inheritance", list, "metamodel", []), "inheritance"):
            pair = self.strings(pair, "inheritance pair")
            if len(pair) != 2:
                raise self.fail(node, "inheritance pairs need two object type ids")
            inheritance.append(tuple(pair))
        domain = {a: frozenset(self.strings(d, f"domain.{a}"))
                  for a, d in self.obj(self.key(node, "domain", dict, "metamodel", {}), "domain").items()}
        ranges = self.obj(self.key(node, "range", dict, "metamodel", {}), "range")
        for a, r in ranges.items():
            if not isinstance(r, str):
                raise self.fail(ranges, f"range of {a!r} must be an id")
        cards = {}
        card_node = self.obj(self.key(node, "card", dict, "metamodel", {}), "card")
        for a, c in card_node.items():
            c = self.arr(c, f"card.{a}")
            if (len(c) != 2 or not isinstance(c[0], int) or isinstance(c[0], bool)
                    or not (c[1] is None or (isinstance(c[1], int) and not isinstance(c[1], bool)))):
                raise self.fail(c, f"card of {a!r} must be [min, max|null]")
            cards[a] = Card(c[0], c[1])
        builtins = BuiltinAttributeSets()
        if "builtins" in node:
            bnode = self.obj(node["builtins"], "builtins")
            kwargs = {}
            for name in BuiltinAttributeSets().by_set():
                if name in bnode:
                    kwargs[name] = (self.key(bnode, name, str, "builtins") if name == "uuid"
                                    else tuple(self.strings(bnode[name], f"builtins.{name}")))
            builtins = BuiltinAttributeSets(**kwargs)
        return Metamodel(self.key(node, "id", str, "metamodel"), tuple(model_types),
                         frozenset(inheritance), domain, dict(ranges), cards, builtins)

    def model(self, node) -> ModelInstance:
        node = self.obj(node, "model")
        linked = self.obj(self.key(node, "linked_models", dict, "model", {}), "linked_models")
        m = ModelInstance(self.key(node, "id", str, "model"), self.key(node, "model_type", str, "model"),
                          {}, {k: v for k, v in linked.items()})
        for o in self.arr(self.key(node, "objects", list, "model"), "objects"):
            o = self.obj(o, "object")
            uid = self.key(o, "uuid", str, "object")
            if uid in m.objects:
                raise self.fail(o, f"duplicate object uuid {uid}")
            values = {}
            for attr, vals in self.obj(self.key(o, "values", dict, "object", {}), "values").items():
                values[attr] = [self.value(v) for v in self.arr(vals, f"values.{attr}")]
            m.objects[uid] = ObjectInstance(uid, self.key(o, "type", str, "object"), values)
        return m

    def frames(self, node) -> FrameTree:
        entries = []
        for f in self.arr(node, "frames"):
            f = self.obj(f, "frame")
            entries.append((self.key(f, "id", str, "frame"), self.key(f, "parent", str, "frame"),
                            self.pose(f.get("pose"), "frame.pose")))
        try:
            return FrameTree.from_frames(entries)
        except SCMError as exc:
            raise self.fail(node, exc.message) from exc

    def scene(self, node) -> Scene:
        node = self.obj(node, "scene")
        out = []
        for p in self.arr(self.key(node, "placements", list, "scene"), "placements"):
            p = self.obj(p, "placement")
            viz = {a: tuple(self.value(v) for v in self.arr(vals, f"vizrep.{a}"))
                   for a, vals in self.obj(self.key(p, "vizrep", dict, "placement", {}), "vizrep").items()}
            out.append(Placement(self.key(p, "source", str, "placement"), self.key(p, "anchor", str, "placement"),
                                 self.pose(p.get("pose"), "placement.pose"), viz))
        return Scene(tuple(sorted(out, key=lambda p: (p.source, p.anchor))))


def load_json(text: str) -> Any:
    """Decode JSON, turning syntax errors into :class:`ParseError`."""
    try:
        return _decoder(text).decode(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, exc.pos) from None
    except RecursionError:
        raise ParseError.at("document nested too deeply", text, 0) from None


def parse_document(text: str) -> Document:
    """Parse canonical or hand-written document text.

    Raises :class:`ParseError` (code PARSE_ERROR or UNSUPPORTED_VERSION)
    with a 1-based line and column. Semantic checks are left to
    ``validate_metamodel`` and ``validate_model``.
    """
    data = load_json(text)
    r = _Reader(text)
    root = r.obj(data, "document")
    version = root.get("format_version")
    if version is None:
        raise r.fail(root, "document is missing 'format_version'")
    if version != FORMAT_VERSION:
        raise ParseError.at(f"unsupported format_version {version!r}", text, root.offset,
                            code="UNSUPPORTED_VERSION")
    kinds = [k for k in DOCUMENT_KINDS if k in root]
    extra = set(root) - set(DOCUMENT_KINDS) - {"format_version"}
    if len(kinds) != 1 or extra:
        raise r.fail(root, f"document needs exactly one of {', '.join(DOCUMENT_KINDS)}")
    return getattr(r, kinds[0])(root[kinds[0]])

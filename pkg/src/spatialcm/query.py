"""Contact, containment, radius search and network shortest paths.

Contact and containment work on world-frame axis-aligned boxes. A rotated
extent is enclosed by the AABB of its eight corners, so contact can be
reported slightly early for rotated boxes; objects without an extent are
points.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import defaultdict

import numpy as np

from .anchoring import local_pose, world_pose
from .errors import SCMError
from .geometry import CoordinateValue, FrameTree, resolve_position
from .kernel import Metamodel, ModelInstance, effective_attributes, objects_of_kind

Box = tuple[np.ndarray, np.ndarray]  # (min corner, max corner)


def world_aabb(model: ModelInstance, mm: Metamodel, tree: FrameTree, uuid: str) -> Box:
    pose = world_pose(model, mm, tree, uuid)
    extent = model.first(uuid, mm.builtins.vizrep[0])
    if extent is None:
        p = np.asarray(pose.translation)
        return p, p.copy()
    c, h = np.asarray(extent.center), np.asarray(extent.half_sizes)
    corners = np.array([pose.apply(c + h * np.array(s)) for s in itertools.product((-1, 1), repeat=3)])
    return corners.min(axis=0), corners.max(axis=0)


def box_gap(a: Box, b: Box) -> float:
    """Euclidean distance between two AABBs (0 when they touch or overlap)."""
    gaps = np.maximum(0.0, np.maximum(a[0] - b[1], b[0] - a[1]))
    return float(np.sqrt(np.sum(gaps * gaps)))


def box_inside(a: Box, b: Box) -> bool:
    return bool(np.all(b[0] <= a[0]) and np.all(a[1] <= b[1]))


def is_at(model: ModelInstance, mm: Metamodel, tree: FrameTree, a: str, b: str,
          tolerance: float = 0.0) -> bool:
    """Whether ``a`` and ``b`` are within ``tolerance`` meters of contact."""
    if tolerance < 0:
        raise SCMError("INVALID_ARGUMENT", "tolerance must be non-negative")
    return box_gap(world_aabb(model, mm, tree, a), world_aabb(model, mm, tree, b)) <= tolerance


def is_in(model: ModelInstance, mm: Metamodel, tree: FrameTree, a: str, b: str) -> bool:
    """Whether ``a`` lies inside ``b``'s extent (boundary included)."""
    model.get(a)
    if model.first(b, mm.builtins.vizrep[0]) is None:
        raise SCMError("NO_EXTENT", f"object {b} has no extent")
    return box_inside(world_aabb(model, mm, tree, a), world_aabb(model, mm, tree, b))


def within_radius(model: ModelInstance, mm: Metamodel, tree: FrameTree, center: CoordinateValue,
                  r: float) -> list[str]:
    """Uuids of positioned objects within ``r`` meters of ``center``, sorted."""
    if r < 0:
        raise SCMError("INVALID_ARGUMENT", "radius must be non-negative")
    c = np.asarray(resolve_position(tree, center))
    out = []
    for uid in sorted(model.objects):
        if local_pose(model, mm, model.objects[uid]) is None:
            continue
        p = np.asarray(world_pose(model, mm, tree, uid).translation)
        if float(np.linalg.norm(p - c)) <= r:
            out.append(uid)
    return out


def object_distance(model: ModelInstance, mm: Metamodel, tree: FrameTree, a: str, b: str) -> float:
    pa = np.asarray(world_pose(model, mm, tree, a).translation)
    pb = np.asarray(world_pose(model, mm, tree, b).translation)
    return float(np.linalg.norm(pa - pb))


def network(model: ModelInstance, mm: Metamodel, weight: str = "euclidean",
            tree: FrameTree | None = None, directed: bool = False) -> dict[str, dict[str, float]]:
    """Adjacency ``node -> neighbour -> weight`` (parallel edges keep the cheapest)."""
    src_attr, tgt_attr = mm.builtins.endpoint_attrs
    nodes = {o.uuid for o in objects_of_kind(model, mm, {"node"})}
    adj: dict[str, dict[str, float]] = {n: {} for n in nodes}
    for edge in objects_of_kind(model, mm, {"edge"}):
        u, v = edge.values[src_attr][0], edge.values[tgt_attr][0]
        if u not in nodes or v not in nodes:
            raise SCMError("DANGLING_REFERENCE", f"edge {edge.uuid} does not join two nodes")
        if weight == "euclidean":
            w = object_distance(model, mm, tree or FrameTree(), u, v)
        else:
            if weight not in effective_attributes(mm, edge.object_type):
                raise SCMError("UNKNOWN_ATTRIBUTE", f"edge type {edge.object_type} has no {weight!r}")
            vals = edge.values.get(weight) or []
            if len(vals) != 1:
                raise SCMError("MISSING_VALUE", f"edge {edge.uuid} needs one {weight!r} value")
            w = float(vals[0])
        if not math.isfinite(w):
            raise SCMError("NEGATIVE_WEIGHT", f"edge {edge.uuid} has weight {w}")
        if w < 0:
            raise SCMError("NEGATIVE_WEIGHT", f"edge {edge.uuid} has weight {w}")
        for a, b in ((u, v),) if directed else ((u, v), (v, u)):
            if b not in adj[a] or w < adj[a][b]:
                adj[a][b] = w
    return adj


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def shortest_path(model: ModelInstance, mm: Metamodel, source: str, target: str,
                  weight: str = "euclidean", tree: FrameTree | None = None,
                  directed: bool = False) -> tuple[list[str], float] | None:
    """Minimum-weight node path from ``source`` to ``target``, or None.

    Among equally short paths the lexicographically smallest uuid sequence
    wins. ``weight`` is an edge attribute id or ``"euclidean"`` (distance
    between the joined nodes' positions).
    """
    for n in (source, target):
        if mm.kind_of(model.get(n).object_type) != "node":
            raise SCMError("KIND_MISMATCH", f"object {n} is not a network node")
    adj = network(model, mm, weight, tree, directed)
    reverse: dict[str, dict[str, float]] = defaultdict(dict)
    for u, nbrs in adj.items():
        for v, w in nbrs.items():
            reverse[v][u] = w

    # distances to target
    dist = {target: 0.0}
    heap = [(0.0, target)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in reverse[u].items():
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    if source not in dist:
        return None

    # lexicographically first walk along tight edges
    path = [source]
    on_path = {source}

    def extend(u: str) -> bool:
        if u == target:
            return True
        for v in sorted(adj[u]):
            if v in on_path or v not in dist or not _close(dist[u], adj[u][v] + dist[v]):
                continue
            path.append(v)
            on_path.add(v)
            if extend(v):
                return True
            path.pop()
            on_path.discard(v)
        return False

    extend(source)
    length = sum(adj[u][v] for u, v in zip(path, path[1:]))
    return path, length

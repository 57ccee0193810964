"""Rigid poses with uniform scale, rotation conversions and frame trees.

Quaternions are ``(w, x, y, z)`` tuples, canonicalised to unit norm with
``w >= 0``. A :class:`Pose` maps local points ``p`` to ``scale * R p + t``;
``compose(a, b)`` applies ``b`` first, matching ``matrix(a) @ matrix(b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SCMError

WORLD = "world"

Quaternion = tuple[float, float, float, float]
Vec3 = tuple[float, float, float]


def _canonical(q: Sequence[float]) -> Quaternion:
    w, x, y, z = (float(c) for c in q)
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if not math.isfinite(n) or n < 1e-12:
        raise SCMError("NOT_A_ROTATION", f"quaternion {tuple(q)} has no direction")
    w, x, y, z = w / n, x / n, y / n, z / n
    if w < 0 or (w == 0 and (x, y, z) < (0.0, 0.0, 0.0)):
        w, x, y, z = -w, -x, -y, -z
    return (w + 0.0, x + 0.0, y + 0.0, z + 0.0)


def quat_multiply(a: Sequence[float], b: Sequence[float]) -> Quaternion:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def quat_to_matrix(q: Sequence[float]) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def _matrix_to_quat(m: np.ndarray) -> Quaternion:
    # Shepperd: branch on the largest diagonal term for stability.
    trace = m[0, 0] + m[1, 1] + m[2, 2]
    if trace > 0:
        s = 2.0 * math.sqrt(1.0 + trace)
        q = (0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
        q = ((m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
    elif m[1, 1] > m[2, 2]:
        s = 2.0 * math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
        q = ((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s)
    else:
        s = 2.0 * math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
        q = ((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s)
    return _canonical(q)


def euler_xyz_to_quat(angles: Sequence[float]) -> Quaternion:
    """Intrinsic X-Y-Z Euler angles in radians: ``R = Rx(a) Ry(b) Rz(c)``."""
    a, b, c = angles
    qx = (math.cos(a / 2), math.sin(a / 2), 0.0, 0.0)
    qy = (math.cos(b / 2), 0.0, math.sin(b / 2), 0.0)
    qz = (math.cos(c / 2), 0.0, 0.0, math.sin(c / 2))
    return _canonical(quat_multiply(quat_multiply(qx, qy), qz))


def normalize_rotation(rotation, representation: str | None = None) -> Quaternion:
    """Convert a quaternion, XYZ Euler triple or 3x3 matrix to a unit quaternion.

    The representation is inferred from the shape (4 -> quaternion,
    3 -> Euler angles, 3x3 -> matrix) unless ``representation`` is given.
    Matrices must be orthonormal with determinant +1 within 1e-6.
    """
    arr = np.asarray(rotation, dtype=float)
    kind = representation or {(4,): "quaternion", (3,): "euler", (3, 3): "matrix"}.get(arr.shape)
    if kind == "quaternion" and arr.shape == (4,):
        return _canonical(arr)
    if kind == "euler" and arr.shape == (3,):
        return euler_xyz_to_quat(arr)
    if kind == "matrix" and arr.shape == (3, 3):
        if not np.all(np.isfinite(arr)):
            raise SCMError("NOT_A_ROTATION", "matrix has non-finite entries")
        if np.max(np.abs(arr @ arr.T - np.eye(3))) > 1e-6 or abs(np.linalg.det(arr) - 1.0) > 1e-6:
            raise SCMError("NOT_A_ROTATION", "matrix is not orthonormal with determinant +1")
        return _matrix_to_quat(arr)
    raise SCMError("NOT_A_ROTATION", f"cannot read rotation of shape {arr.shape}")


@dataclass(frozen=True)
class Pose:
    rotation: Quaternion = (1.0, 0.0, 0.0, 0.0)
    translation: Vec3 = (0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        q = tuple(float(c) for c in self.rotation)
        if len(q) != 4 or abs(math.sqrt(sum(c * c for c in q)) - 1.0) > 1e-9:
            raise SCMError("NOT_A_ROTATION", f"rotation {q} is not a unit quaternion")
        t = tuple(float(c) for c in self.translation)
        if len(t) != 3 or not all(math.isfinite(c) for c in t):
            raise SCMError("INVALID_POSE", f"translation {t} is not a finite triple")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise SCMError("INVALID_POSE", f"scale {self.scale} must be positive")
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Pose":
        m = np.asarray(m, dtype=float)
        linear = m[:3, :3]
        scale = float(np.cbrt(np.linalg.det(linear)))
        return cls(normalize_rotation(linear / scale, "matrix"), tuple(m[:3, 3]), scale)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.scale * quat_to_matrix(self.rotation)
        m[:3, 3] = self.translation
        return m

    def apply(self, point: Sequence[float]) -> Vec3:
        p = self.scale * (quat_to_matrix(self.rotation) @ np.asarray(point, dtype=float))
        return tuple(float(c) for c in p + np.asarray(self.translation))


IDENTITY = Pose()


def compose(a: Pose, b: Pose) -> Pose:
    """The pose applying ``b`` then ``a``."""
    t = np.asarray(a.translation) + a.scale * (quat_to_matrix(a.rotation) @ np.asarray(b.translation))
    return Pose(_canonical(quat_multiply(a.rotation, b.rotation)), tuple(t), a.scale * b.scale)


def invert(p: Pose) -> Pose:
    w, x, y, z = p.rotation
    conj = (w, -x, -y, -z)
    t = -(quat_to_matrix(conj) @ np.asarray(p.translation)) / p.scale
    return Pose(_canonical(conj), tuple(t), 1.0 / p.scale)


@dataclass(frozen=True)
class CoordinateValue:
    """A position in meters expressed in a named frame."""

    frame: str
    position: Vec3

    def __post_init__(self):
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 3 or not all(math.isfinite(c) for c in pos):
            raise SCMError("INVALID_COORDINATE", f"position {self.position} is not a finite triple")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class FramedPose:
    """A pose relative to a named frame, e.g. a point of interest."""

    frame: str
    pose: Pose = IDENTITY


@dataclass(frozen=True)
class FrameTree:
    """Rooted hierarchy of frames; ``frames`` maps id -> (parent, pose in parent).

    The root ``"world"`` is implicit. Trees are immutable:
    :func:`register_frame` returns a new tree.
    """

    frames: Mapping[str, tuple[str, Pose]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "frames", dict(self.frames))
        object.__setattr__(self, "_cache", {WORLD: IDENTITY})
        if WORLD in self.frames:
            raise SCMError("DUPLICATE_FRAME", "the world frame is implicit")
        for fid in self.frames:
            seen = {fid}
            cur = fid
            while cur != WORLD:
                parent = self.frames[cur][0]
                if parent != WORLD and parent not in self.frames:
                    raise SCMError("UNKNOWN_PARENT", f"frame {cur!r} has unknown parent {parent!r}")
                if parent in seen:
                    raise SCMError("CYCLE", f"frame {fid!r} does not reach the world frame")
                seen.add(parent)
                cur = parent

    @classmethod
    def from_frames(cls, frames: Iterable[tuple[str, str, Pose]]) -> "FrameTree":
        """Build a tree from ``(id, parent, pose)`` triples in any order."""
        table: dict[str, tuple[str, Pose]] = {}
        for fid, parent, pose in frames:
            if fid in table or fid == WORLD:
                raise SCMError("DUPLICATE_FRAME", f"frame {fid!r} declared twice")
            table[fid] = (parent, pose)
        return cls(table)

    def __contains__(self, frame: str) -> bool:
        return frame == WORLD or frame in self.frames

    def ids(self) -> list[str]:
        return sorted(self.frames)

    def parent(self, frame: str) -> str | None:
        self._check(frame)
        return None if frame == WORLD else self.frames[frame][0]

    def chain(self, frame: str) -> list[str]:
        """Frames from ``frame`` up to and including the world frame."""
        self._check(frame)
        out = [frame]
        while out[-1] != WORLD:
            out.append(self.frames[out[-1]][0])
        return out

    def world_pose(self, frame: str) -> Pose:
        """Pose of ``frame`` expressed in the world frame."""
        cache = self._cache
        if frame not in cache:
            self._check(frame)
            parent, pose = self.frames[frame]
            cache[frame] = compose(self.world_pose(parent), pose)
        return cache[frame]

    def relative_pose(self, source: str, target: str) -> Pose:
        """Pose mapping coordinates in ``source`` to coordinates in ``target``.

        Walks the unique tree path: up from ``source`` to the common ancestor,
        then down to ``target``.
        """
        up = self.chain(source)
        down = self.chain(target)
        common = next(f for f in up if f in set(down))
        to_common = IDENTITY
        for f in up[:up.index(common)]:
            to_common = compose(self.frames[f][1], to_common)
        from_common = IDENTITY
        for f in down[:down.index(common)]:
            from_common = compose(self.frames[f][1], from_common)
        return compose(invert(from_common), to_common)

    def _check(self, frame: str) -> None:
        if frame not in self:
            raise SCMError("UNKNOWN_FRAME", f"frame {frame!r} is not registered")


def register_frame(tree: FrameTree, frame_id: str, parent: str, pose: Pose) -> FrameTree:
    if frame_id in tree:
        raise SCMError("DUPLICATE_FRAME", f"frame {frame_id!r} already registered")
    if parent not in tree:
        raise SCMError("UNKNOWN_PARENT", f"parent frame {parent!r} is not registered")
    frames = dict(tree.frames)
    frames[frame_id] = (parent, pose)
    return FrameTree(frames)


def resolve_position(tree: FrameTree, value: CoordinateValue, target: str = WORLD) -> Vec3:
    return tree.relative_pose(value.frame, target).apply(value.position)


def distance(tree: FrameTree, a: CoordinateValue, b: CoordinateValue) -> float:
    pa = np.asarray(resolve_position(tree, a))
    pb = np.asarray(resolve_position(tree, b))
    return float(np.linalg.norm(pa - pb))

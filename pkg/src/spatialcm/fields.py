"""Scalar fields: functions from positions to real values.

A field is either an analytic expression over ``x``, ``y``, ``z`` or a
regular grid of samples with trilinear interpolation. Grid samples are
stored flat in x-fastest order: ``index = i + nx * (j + ny * k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import SCMError
from .expressions import evaluate_arithmetic, parse_arithmetic
from .geometry import WORLD, CoordinateValue, FrameTree, resolve_position

_SNAP = 1e-9


@dataclass(frozen=True)
class FieldSpec:
    kind: str  # "analytic" | "grid"
    frame: str = WORLD
    value_unit: str = ""
    expression: str | None = None
    bounds: tuple[tuple[float, float, float], tuple[float, float, float]] | None = None
    counts: tuple[int, int, int] | None = None
    samples: tuple[float, ...] | None = None
    interpolation: str = "trilinear"

    def __post_init__(self):
        if self.kind == "analytic":
            if not isinstance(self.expression, str):
                raise SCMError("INVALID_FIELD", "analytic field needs an expression")
            object.__setattr__(self, "_ast", parse_arithmetic(self.expression))
        elif self.kind == "grid":
            _check_grid(self.bounds, self.counts, self.samples)
            object.__setattr__(self, "bounds", tuple(tuple(float(c) for c in b) for b in self.bounds))
            object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))
            object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
            if self.interpolation != "trilinear":
                raise SCMError("INVALID_FIELD", f"unsupported interpolation {self.interpolation!r}")
        else:
            raise SCMError("INVALID_FIELD", f"unknown field kind {self.kind!r}")


def _check_grid(bounds, counts, samples) -> None:
    if bounds is None or counts is None or samples is None:
        raise SCMError("INVALID_FIELD", "grid field needs bounds, counts and samples")
    lo, hi = bounds
    if len(lo) != 3 or len(hi) != 3 or not all(a < b for a, b in zip(lo, hi)):
        raise SCMError("DEGENERATE_BOUNDS", f"bounds {bounds} need min < max on every axis")
    if len(counts) != 3 or any(int(n) != n or n < 2 for n in counts):
        raise SCMError("SHAPE_MISMATCH", f"counts {counts} must be integers >= 2")
    if len(samples) != counts[0] * counts[1] * counts[2]:
        raise SCMError("SHAPE_MISMATCH",
                       f"{len(samples)} samples for a {counts[0]}x{counts[1]}x{counts[2]} grid")
    if not all(math.isfinite(s) for s in samples):
        raise SCMError("SHAPE_MISMATCH", "samples must be finite")


def analytic_field(expression: str, frame: str = WORLD, value_unit: str = "") -> FieldSpec:
    return FieldSpec("analytic", frame=frame, value_unit=value_unit, expression=expression)


def field_from_grid(bounds: Sequence[Sequence[float]], counts: Sequence[int],
                    samples: Sequence[float], frame: str = WORLD,
                    value_unit: str = "") -> FieldSpec:
    """Build a grid field; raises SHAPE_MISMATCH or DEGENERATE_BOUNDS."""
    return FieldSpec("grid", frame=frame, value_unit=value_unit,
                     bounds=tuple(tuple(b) for b in bounds), counts=tuple(counts),
                     samples=tuple(samples))


def lattice_point(spec: FieldSpec, i: int, j: int, k: int) -> tuple[float, float, float]:
    lo, hi = spec.bounds
    return tuple(hi[a] if idx == spec.counts[a] - 1 else lo[a] + idx * (hi[a] - lo[a]) / (spec.counts[a] - 1)
                 for a, idx in enumerate((i, j, k)))


def sample_field(spec: FieldSpec, bounds, counts, tree: FrameTree | None = None) -> FieldSpec:
    """Sample any field on a regular grid in the field's own frame."""
    tree = tree or FrameTree()
    nx, ny, nz = counts
    frame_grid = FieldSpec("grid", frame=spec.frame, bounds=tuple(tuple(b) for b in bounds),
                           counts=tuple(counts), samples=(0.0,) * (nx * ny * nz))
    samples = [
        evaluate_field(spec, tree, CoordinateValue(spec.frame, lattice_point(frame_grid, i, j, k)))
        for k in range(nz) for j in range(ny) for i in range(nx)
    ]
    return field_from_grid(bounds, counts, samples, spec.frame, spec.value_unit)


def evaluate_field(spec: FieldSpec, tree: FrameTree, at: CoordinateValue) -> float:
    x, y, z = resolve_position(tree, at, spec.frame)
    if spec.kind == "analytic":
        return evaluate_arithmetic(spec._ast, {"x": x, "y": y, "z": z})
    return _trilinear(spec, (x, y, z))


def _trilinear(spec: FieldSpec, p) -> float:
    lo, hi = spec.bounds
    cell = []
    for a in range(3):
        n = spec.counts[a]
        t = (p[a] - lo[a]) / (hi[a] - lo[a]) * (n - 1)
        if not -_SNAP <= t <= n - 1 + _SNAP:
            raise SCMError("OUT_OF_BOUNDS", f"{p} lies outside grid bounds {spec.bounds}")
        if abs(t - round(t)) < _SNAP:
            t = float(round(t))
        i0 = min(int(math.floor(t)), n - 2)
        cell.append((i0, t - i0))
    (i, fx), (j, fy), (k, fz) = cell
    nx, ny = spec.counts[0], spec.counts[1]
    s = spec.samples
    total = 0.0
    for dk, wz in ((0, 1.0 - fz), (1, fz)):
        for dj, wy in ((0, 1.0 - fy), (1, fy)):
            for di, wx in ((0, 1.0 - fx), (1, fx)):
                w = wx * wy * wz
                if w:
                    total += w * s[(i + di) + nx * ((j + dj) + ny * (k + dk))]
    return total

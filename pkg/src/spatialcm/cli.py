"""``scm`` command line.

Exit status: 0 success, 1 violations or a failed operation, 2 usage
error, 3 unreadable document. Results go to stdout as canonical
documents; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .anchoring import LEVEL_NAMES, classify_anchoring_level, resolve_scene, world_pose
from .docio import FORMAT_VERSION, Scene, canonical_json, load_json, parse_document, serialize_document
from .errors import ParseError, SCMError
from .geometry import WORLD, CoordinateValue, FrameTree
from .kernel import Metamodel, ModelInstance, validate_metamodel, validate_model
from .query import is_at, is_in, object_distance, shortest_path, within_radius
from .temporal import event_interval, when

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3
QUERY_OPS = ("is-at", "is-in", "distance", "within-radius", "shortest-path", "when")


class _Usage(Exception):
    pass


def _read(path: str, expected: type):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = parse_document(text)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc.reason}", exc.line, exc.column, exc.offset, exc.code) from None
    if not isinstance(doc, expected):
        raise _Usage(f"{path} does not hold a {expected.__name__} document")
    return doc


def _frames(path: str | None) -> FrameTree:
    return FrameTree() if path is None else _read(path, FrameTree)


def _context(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None
    data = load_json(text)
    if not isinstance(data, dict) or not all(
            isinstance(v, (bool, int, float, str)) for v in data.values()):
        raise ParseError.at("context must be a flat object of numbers, text and booleans", text, 0)
    return dict(data)


def _emit(body: dict) -> None:
    sys.stdout.write(canonical_json({"format_version": FORMAT_VERSION, **body}) + "\n")


def _report(violations) -> dict:
    return {"report": {"violations": [
        {"code": v.code, "location": v.location, "message": v.message} for v in violations]}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scm", description="Spatial conceptual modeling engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-metamodel", help="check a metamodel document")
    p.add_argument("metamodel")

    for name, help_text in (("validate-model", "check a model against its metamodel"),
                            ("classify-level", "report the anchoring level (0-4)")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("model")
        p.add_argument("--metamodel", required=True)

    p = sub.add_parser("query", help="run a spatial or temporal query")
    p.add_argument("model")
    p.add_argument("--metamodel", required=True)
    p.add_argument("--op", required=True, choices=QUERY_OPS)
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--radius", type=float)
    p.add_argument("--weight", default="euclidean")
    p.add_argument("--frames")

    p = sub.add_parser("resolve-scene", help="place anchored content in the world frame")
    p.add_argument("model")
    p.add_argument("--metamodel", required=True)
    p.add_argument("--context")
    p.add_argument("--frames")
    p.add_argument("--out")
    return parser


def _query(args, model: ModelInstance, mm: Metamodel) -> dict:
    def need(*names):
        missing = [n for n in names if getattr(args, n) is None]
        if missing:
            raise _Usage(f"--op {args.op} needs " + ", ".join("--" + n for n in missing))

    tree = _frames(args.frames)
    if args.op == "is-at":
        need("a", "b")
        return {"result": is_at(model, mm, tree, args.a, args.b, args.tol)}
    if args.op == "is-in":
        need("a", "b")
        return {"result": is_in(model, mm, tree, args.a, args.b)}
    if args.op == "distance":
        need("a", "b")
        return {"result": object_distance(model, mm, tree, args.a, args.b)}
    if args.op == "within-radius":
        need("a", "radius")
        center = CoordinateValue(WORLD, world_pose(model, mm, tree, args.a).translation)
        return {"result": within_radius(model, mm, tree, center, args.radius)}
    if args.op == "shortest-path":
        need("a", "b")
        found = shortest_path(model, mm, args.a, args.b, args.weight, tree)
        if found is None:
            return {"result": None, "status": "NO_PATH"}
        return {"result": {"path": found[0], "length": found[1]}}
    need("a")
    return {"result": when(event_interval(model, mm, args.a))}


def run_command(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "validate-metamodel":
            report = validate_metamodel(_read(args.metamodel, Metamodel))
            _emit(_report(report))
            return EXIT_VIOLATIONS if report else EXIT_OK
        mm = _read(args.metamodel, Metamodel)
        model = _read(args.model, ModelInstance)
        if args.command == "validate-model":
            mm_report = validate_metamodel(mm)
            report = mm_report or validate_model(model, mm)
            _emit(_report(report))
            return EXIT_VIOLATIONS if report else EXIT_OK
        if args.command == "classify-level":
            level = classify_anchoring_level(model, mm)
            _emit({"result": {"level": level, "designation": LEVEL_NAMES[level]}})
            return EXIT_OK
        if args.command == "query":
            _emit(_query(args, model, mm))
            return EXIT_OK
        scene = Scene(tuple(resolve_scene(model, mm, _frames(args.frames), _context(args.context))))
        text = serialize_document(scene)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except _Usage as exc:
        print(f"scm: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"scm: {exc.code}: {exc.message}", file=sys.stderr)
        return EXIT_PARSE
    except SCMError as exc:
        print(f"scm: {exc.code}: {exc.message}", file=sys.stderr)
        for v in exc.details.get("violations", ()):
            print(f"  {v.code} {v.location}: {v.message}", file=sys.stderr)
        return EXIT_VIOLATIONS


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()

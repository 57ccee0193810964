"""Spatial conceptual modeling: metamodels with location, field, object,
network and event concepts, anchoring of model content in the real world,
and spatial/temporal queries."""

from .anchoring import (
    LEVEL_NAMES, Anchor, Placement, anchors, classify_anchoring_level, create_anchor,
    resolve_scene, world_pose,
)
from .docio import Scene, parse_document, serialize_document
from .errors import ParseError, SCMError
from .expressions import evaluate_condition, parse_condition
from .fields import FieldSpec, analytic_field, evaluate_field, field_from_grid, sample_field
from .geometry import (
    IDENTITY, WORLD, CoordinateValue, FramedPose, FrameTree, Pose, compose, distance, invert,
    normalize_rotation, register_frame, resolve_position,
)
from .kernel import (
    MODEL, Attribute, BuiltinAttributeSets, Card, DataType, EndpointSpec, ExtentBox, Metamodel,
    ModelInstance, ModelType, ObjectInstance, ObjectType, Violation, attach_builtins,
    create_object, delete_object, effective_attributes, iterate_objects, make_metamodel,
    object_type, set_value, subtype_of, validate_metamodel, validate_model,
)
from .query import is_at, is_in, shortest_path, within_radius
from .temporal import EventInterval, check_temporal_consistency, infer_relation, when

__version__ = "0.1.0"

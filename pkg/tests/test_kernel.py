import random
import uuid as uuidlib
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from spatialcm import samples
from spatialcm.errors import SCMError
from spatialcm.geometry import CoordinateValue, FramedPose, Pose
from spatialcm.kernel import (
    MODEL, Attribute, BuiltinAttributeSets, Card, ExtentBox, ModelInstance, ModelType,
    create_object, delete_object, effective_attributes, iterate_objects, make_metamodel,
    object_type, report_codes, set_value, subtype_of, validate_metamodel, validate_model,
)

from .generators import coverage_metamodel, random_model

UNIVERSAL = {"uuid", "position", "rotation", "scale", "extent", "glyph", "lod"}


@pytest.fixture(scope="module")
def mm():
    return coverage_metamodel()


def _codes(report):
    return report_codes(report)


def small_mm(inheritance=(), attributes=None, types=None):
    types = types or (object_type("A", "virtual"), object_type("B", "virtual"),
                      object_type("C", "virtual"), object_type("D", "virtual"))
    attrs = attributes or {}
    mt = ModelType("mt", tuple(types), (), tuple(Attribute(a, a) for a in attrs))
    return make_metamodel("small", (mt,), inheritance, attrs)


class TestMetamodel:
    def test_workshop_is_well_formed(self):
        assert validate_metamodel(samples.workshop_metamodel()) == []

    def test_two_cycle(self):
        mm = small_mm([("A", "B"), ("B", "A")])
        assert _codes(validate_metamodel(mm)) == ["INHERITANCE_CYCLE"]

    def test_long_cycle(self):
        mm = small_mm([("A", "B"), ("B", "C"), ("C", "A")])
        assert _codes(validate_metamodel(mm)) == ["INHERITANCE_CYCLE"]

    def test_dangling_domain(self):
        mm = small_mm(attributes={"x": (["A", "Nope"], "text", Card())})
        report = validate_metamodel(mm)
        assert _codes(report) == ["DANGLING_DOMAIN"]
        assert report[0].location == "x"

    def test_dangling_range(self):
        mm = small_mm(attributes={"x": (["A"], "Nope", Card())})
        assert _codes(validate_metamodel(mm)) == ["DANGLING_RANGE"]

    def test_bad_card(self):
        mm = small_mm(attributes={"x": (["A"], "text", Card(3, 1))})
        assert _codes(validate_metamodel(mm)) == ["BAD_CARD"]

    def test_missing_builtin(self):
        mm = small_mm()
        domain = dict(mm.domain_map)
        domain["position"] = frozenset({"A", "B"})
        broken = replace(mm, domain_map=domain)
        report = validate_metamodel(broken)
        assert _codes(report) == ["MISSING_BUILTIN"]
        assert "C" in report[0].message and "D" in report[0].message

    def test_kind_conflict_in_inheritance(self):
        types = (object_type("A", "real"), object_type("B", "virtual"))
        assert _codes(validate_metamodel(small_mm([("A", "B")], types=types))) == ["KIND_CONFLICT"]

    def test_specialised_virtual_kinds_may_extend_virtual(self):
        types = (object_type("Grid", "node"), object_type("Base", "virtual"))
        assert validate_metamodel(small_mm([("Grid", "Base")], types=types)) == []

    def test_anchor_endpoint_rules(self):
        from spatialcm.kernel import EndpointSpec
        bad = object_type("Pin", "anchor", endpoints=EndpointSpec({"real"}, {"real"}))
        report = validate_metamodel(small_mm(types=(object_type("A", "virtual"), bad)))
        assert _codes(report) == ["KIND_CONFLICT"]

    def test_duplicate_ids(self):
        mt1 = ModelType("one", (object_type("A", "virtual"),))
        mt2 = ModelType("two", (object_type("A", "real"),))
        report = validate_metamodel(make_metamodel("dup", (mt1, mt2)))
        assert "DUPLICATE_ID" in _codes(report)

    def test_builtins_can_be_renamed(self):
        mm = make_metamodel("renamed", (ModelType("mt", (object_type("A", "virtual"),)),),
                            builtins=BuiltinAttributeSets(uuid="id", coord=("xyz",)))
        assert validate_metamodel(mm) == []
        assert "xyz" in effective_attributes(mm, "A") and "id" in effective_attributes(mm, "A")


class TestTypeQueries:
    def test_subtype_reflexive(self):
        assert subtype_of(small_mm(), "A", "A")

    def test_subtype_transitive(self):
        mm = small_mm([("A", "B"), ("B", "C")])
        assert subtype_of(mm, "A", "C")
        assert not subtype_of(mm, "C", "A")

    def test_unrelated(self):
        assert not subtype_of(small_mm([("A", "B")]), "A", "D")

    def test_unknown_type(self):
        with pytest.raises(SCMError) as exc:
            subtype_of(small_mm(), "A", "Zed")
        assert exc.value.code == "UNKNOWN_TYPE"

    def test_plain_type_gets_exactly_the_universal_builtins(self):
        assert set(effective_attributes(small_mm(), "A")) == UNIVERSAL

    def test_inherited_attribute(self):
        mm = small_mm([("A", "B")], {"capacity": (["B"], "integer", Card(0, 1))})
        assert "capacity" in effective_attributes(mm, "A")
        assert "capacity" not in effective_attributes(mm, "C")

    def test_field_type_gets_field_attrs(self, mm):
        assert set(effective_attributes(mm, "Heat")) == UNIVERSAL | {"field"}

    def test_effective_attributes_sorted(self, mm):
        for t in mm.object_types:
            attrs = effective_attributes(mm, t)
            assert list(attrs) == sorted(attrs)

    def test_monotone_under_inheritance(self, mm):
        assert set(effective_attributes(mm, "Thing")) <= set(effective_attributes(mm, "Gadget"))


@st.composite
def dags(draw):
    n = draw(st.integers(2, 7))
    names = [f"T{i}" for i in range(n)]
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=12))
    # edges only from higher to lower index keeps the order acyclic
    edges = {(names[max(a, b)], names[min(a, b)]) for a, b in pairs if a != b}
    return names, edges


@given(dags())
@settings(max_examples=60, deadline=None)
def test_subtype_closure_properties(dag):
    names, edges = dag
    mm = small_mm(edges, types=tuple(object_type(n, "virtual") for n in names))
    assert validate_metamodel(mm) == []
    # brute-force closure by repeated relaxation
    closure = {(n, n) for n in names} | set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c, d in list(closure):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    for a in names:
        for b in names:
            assert subtype_of(mm, a, b) == ((a, b) in closure)
            if a != b:
                assert not (subtype_of(mm, a, b) and subtype_of(mm, b, a))


class TestInstances:
    def test_create_assigns_uuid4(self, mm):
        model = ModelInstance("m", "coverage")
        a = create_object(model, mm, "Thing")
        b = create_object(model, mm, "Thing")
        assert a.uuid != b.uuid
        assert uuidlib.UUID(a.uuid).version == 4
        assert a.values["uuid"] == [a.uuid]
        assert validate_model(model, mm) == []

    def test_create_unknown_type(self, mm):
        with pytest.raises(SCMError) as exc:
            create_object(ModelInstance("m", "coverage"), mm, "Nope")
        assert exc.value.code == "UNKNOWN_TYPE"

    def test_relational_needs_endpoints(self, mm):
        with pytest.raises(SCMError) as exc:
            create_object(ModelInstance("m", "coverage"), mm, "Link")
        assert exc.value.code == "KIND_MISMATCH"

    def test_set_coordinate(self, mm):
        model = ModelInstance("m", "coverage")
        u = create_object(model, mm, "Thing").uuid
        set_value(model, mm, u, "position", [CoordinateValue("world", (1, 2, 3))])
        assert model.first(u, "position").position == (1.0, 2.0, 3.0)

    def test_set_wrong_type(self, mm):
        model = ModelInstance("m", "coverage")
        u = create_object(model, mm, "Thing").uuid
        with pytest.raises(SCMError) as exc:
            set_value(model, mm, u, "count", ["three"])
        assert exc.value.code == "RANGE_TYPE_MISMATCH"

    def test_uuid_is_immutable(self, mm):
        model = ModelInstance("m", "coverage")
        u = create_object(model, mm, "Thing").uuid
        with pytest.raises(SCMError) as exc:
            set_value(model, mm, u, "uuid", [str(uuidlib.uuid4())])
        assert exc.value.code == "UNKNOWN_ATTRIBUTE"

    def test_set_attribute_outside_domain(self, mm):
        model = ModelInstance("m", "coverage")
        u = create_object(model, mm, "Fixture").uuid
        with pytest.raises(SCMError) as exc:
            set_value(model, mm, u, "weight", [1.0])
        assert exc.value.code == "UNKNOWN_ATTRIBUTE"

    def test_set_on_unknown_object(self, mm):
        with pytest.raises(SCMError) as exc:
            set_value(ModelInstance("m", "coverage"), mm, "missing", "label", ["x"])
        assert exc.value.code == "UNKNOWN_OBJECT"

    def test_card_checked_at_validation_only(self, mm):
        model = ModelInstance("m", "coverage")
        u = create_object(model, mm, "Thing").uuid
        set_value(model, mm, u, "label", ["a", "b", "c"])
        report = validate_model(model, mm)
        assert _codes(report) == ["CARD_VIOLATION"]
        assert report[0].location == f"{u}.label"

    def test_missing_required_value(self, mm):
        model = ModelInstance("m", "coverage")
        a = create_object(model, mm, "Hub").uuid
        b = create_object(model, mm, "Hub").uuid
        link = create_object(model, mm, "Link", source=a, target=b).uuid
        report = validate_model(model, mm)
        assert _codes(report) == ["MISSING_VALUE"]
        assert report[0].location == f"{link}.cost"

    def test_delete_does_not_cascade(self, mm):
        model = ModelInstance("m", "coverage")
        thing = create_object(model, mm, "Thing").uuid
        fixture = create_object(model, mm, "Fixture").uuid
        anchor = create_object(model, mm, "Pin", source=thing, target=fixture).uuid
        delete_object(model, fixture)
        assert fixture not in model.objects
        report = validate_model(model, mm)
        assert _codes(report) == ["DANGLING_REFERENCE"]
        assert report[0].location == f"{anchor}.target"

    def test_delete_unknown(self, mm):
        with pytest.raises(SCMError) as exc:
            delete_object(ModelInstance("m", "coverage"), "nope")
        assert exc.value.code == "UNKNOWN_OBJECT"

    def test_anchor_to_virtual_target(self, mm):
        model = ModelInstance("m", "coverage")
        a = create_object(model, mm, "Thing").uuid
        b = create_object(model, mm, "Thing").uuid
        create_object(model, mm, "Pin", source=a, target=b)
        assert _codes(validate_model(model, mm)) == ["ENDPOINT_KIND"]

    def test_model_anchor_to_poi(self, mm):
        model = ModelInstance("m", "coverage")
        create_object(model, mm, "Pin", source=MODEL, target=FramedPose("world", Pose()))
        assert validate_model(model, mm) == []

    def test_invalid_metamodel_precondition(self):
        mm = small_mm([("A", "B"), ("B", "A")])
        with pytest.raises(SCMError) as exc:
            validate_model(ModelInstance("m", "mt"), mm)
        assert exc.value.code == "INVALID_METAMODEL"

    def test_model_type_reference(self):
        mm = samples.workshop_metamodel()
        model = samples.machine_operation(0, mm)
        step = iterate_objects(model, mm, "Step")[0].uuid
        set_value(model, mm, step, "documented_in", ["enterprise-architecture"])
        assert _codes(validate_model(model, mm)) == ["DANGLING_REFERENCE"]
        model.linked_models["enterprise-architecture"] = "architecture"
        assert validate_model(model, mm) == []

    def test_nonpositive_scale(self, mm):
        model = ModelInstance("m", "coverage")
        u = create_object(model, mm, "Thing").uuid
        set_value(model, mm, u, "scale", [0.0])
        assert _codes(validate_model(model, mm)) == ["RANGE_TYPE_MISMATCH"]

    def test_extent_rejects_non_positive_half_sizes(self):
        with pytest.raises(SCMError):
            ExtentBox((0, 0, 0), (1, 0, 1))


class TestIteration:
    def test_all_sorted(self, mm):
        model = random_model(random.Random(3), mm)
        objs = iterate_objects(model, mm)
        assert [o.uuid for o in objs] == sorted(model.objects)

    def test_subtype_filter(self, mm):
        model = ModelInstance("m", "coverage")
        t = create_object(model, mm, "Thing").uuid
        g = create_object(model, mm, "Gadget").uuid
        assert [o.uuid for o in iterate_objects(model, mm, "Thing")] == [t]
        assert {o.uuid for o in iterate_objects(model, mm, "Thing", include_subtypes=True)} == {t, g}

    def test_empty(self, mm):
        assert iterate_objects(ModelInstance("m", "coverage"), mm) == []

    def test_unknown_filter(self, mm):
        with pytest.raises(SCMError) as exc:
            iterate_objects(ModelInstance("m", "coverage"), mm, "Nope")
        assert exc.value.code == "UNKNOWN_TYPE"


@given(st.integers(0, 10_000))
@settings(max_examples=80, deadline=None)
def test_constructive_soundness(seed):
    mm = coverage_metamodel()
    model = random_model(random.Random(seed), mm)
    assert validate_model(model, mm) == []
    for obj in model.objects.values():
        assert obj.values["uuid"] == [obj.uuid]

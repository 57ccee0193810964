import pytest

from spatialcm.errors import ParseError, SCMError
from spatialcm.expressions import (
    And, Compare, Literal, Not, Or, Var, evaluate_condition, parse_arithmetic, parse_condition,
)


def test_server_room_condition():
    assert evaluate_condition("user_zone == 'serverroom'", {"user_zone": "serverroom"})
    assert not evaluate_condition("user_zone == 'serverroom'", {"user_zone": "office"})


def test_literals_only():
    assert evaluate_condition("true and not false", {})


def test_precedence():
    # and binds tighter than or; not binds tighter than and
    assert parse_condition("a or b and c") == Or(Var("a"), And(Var("b"), Var("c")))
    assert parse_condition("not a and b") == And(Not(Var("a")), Var("b"))
    assert parse_condition("(a or b) and c") == And(Or(Var("a"), Var("b")), Var("c"))


def test_comparison_ast():
    assert parse_condition("speed >= -2.5") == Compare(">=", Var("speed"), Literal(-2.5))


def test_whitespace_insensitive():
    assert parse_condition("  a==1\n and\tb ") == parse_condition("a == 1 and b")


@pytest.mark.parametrize("text,context,expected", [
    ("speed > 2", {"speed": 3}, True),
    ("speed > 2", {"speed": 2}, False),
    ("speed <= 2.5", {"speed": 2.5}, True),
    ("n != 3", {"n": 3.0}, False),
    ("mode == 'a' or mode == 'b'", {"mode": "b"}, True),
    ("flag == true", {"flag": True}, True),
    ("not (x < 1 or x > 5)", {"x": 3}, True),
    ("1 < 2", {}, True),
])
def test_evaluation(text, context, expected):
    assert evaluate_condition(text, context) is expected


def test_unknown_variable():
    with pytest.raises(SCMError) as exc:
        evaluate_condition("user_zone == 'x'", {})
    assert exc.value.code == "UNKNOWN_VARIABLE"
    assert exc.value.details["variable"] == "user_zone"


def test_missing_variable_is_not_false():
    with pytest.raises(SCMError):
        evaluate_condition("not ghost", {})


def test_short_circuit_skips_missing_variable():
    assert evaluate_condition("true or ghost", {})
    assert not evaluate_condition("false and ghost", {})


@pytest.mark.parametrize("text,context", [
    ("zone < 'b'", {"zone": "a"}),
    ("x == 'a'", {"x": 1}),
    ("flag > false", {"flag": True}),
    ("speed", {"speed": 3}),
    ("name and true", {"name": "x"}),
])
def test_type_errors(text, context):
    with pytest.raises(SCMError) as exc:
        evaluate_condition(text, context)
    assert exc.value.code == "TYPE_ERROR"


def test_only_context_is_consulted():
    ctx = {"a": True}
    evaluate_condition("a and not false", ctx)
    assert ctx == {"a": True}


@pytest.mark.parametrize("text,offset", [
    ("user_zone ==", 12),
    ("", 0),
    ("a and", 5),
    ("(a or b", 7),
    ("a == 'open", 5),
    ("a # b", 2),
    ("A == 1", 0),
    ("a b", 2),
    ("3x > 1", 1),
])
def test_parse_errors(text, offset):
    with pytest.raises(ParseError) as exc:
        parse_condition(text)
    assert exc.value.offset == offset
    assert exc.value.line == 1 and exc.value.column == offset + 1


def test_parse_error_line_column():
    with pytest.raises(ParseError) as exc:
        parse_condition("a and\n  (b or")
    assert (exc.value.line, exc.value.column) == (2, 8)


def test_arithmetic():
    from spatialcm.expressions import evaluate_arithmetic
    node = parse_arithmetic("-x^2 + 2 * (y - 1) / 4")
    assert evaluate_arithmetic(node, {"x": 3, "y": 5}) == -7.0
    assert evaluate_arithmetic(parse_arithmetic("2 ^ 3 ^ 2"), {}) == 512.0


def test_arithmetic_unknown_function():
    with pytest.raises(ParseError) as exc:
        parse_arithmetic("1 + foo(x)")
    assert exc.value.offset == 4

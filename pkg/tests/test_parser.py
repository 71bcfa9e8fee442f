"""Grammar-level tests: token shapes, precedence, spans, failure modes."""

import pytest

from csx.ast import (
    Binary,
    BoolLit,
    IntLit,
    Proj,
    Ref,
    Unary,
)
from csx.parser import ParseError, parse


def parse_one_constraint(body: str):
    spec = parse("type T { [" + body + "] }", filename="t")
    (t,) = spec.type_defs
    (c,) = t.constraints
    return c


def test_minimal_type():
    spec = parse("type Sheet { w: int h: int [w > 0] }", filename="t")
    (t,) = spec.type_defs
    assert t.name == "Sheet"
    assert [(p.name, p.type) for p in t.def_props] == [("w", "int"), ("h", "int")]
    assert len(t.constraints) == 1


def test_type_with_derived_and_nested_sort():
    spec = parse(
        """
        type Stack {
          sheet: Sheet
          n: int
          derived t = sheet.t * n
        }
        """,
        filename="t",
    )
    (t,) = spec.type_defs
    assert t.def_props[0].type == "Sheet"
    (d,) = t.derived_props
    assert d.name == "t"
    assert d.body == Binary("*", Proj(Ref("sheet"), "t"), Ref("n"))


def test_action_members():
    spec = parse(
        """
        action Trim(in: Sheet, out: Sheet) {
          parameter t: int
          parameter deep: bool
          [t >= 0]
        }
        """,
        filename="t",
    )
    (a,) = spec.action_defs
    assert [(l.name, l.type) for l in a.loc_params] == [
        ("in", "Sheet"),
        ("out", "Sheet"),
    ]
    assert [(p.name, p.type) for p in a.params] == [("t", "int"), ("deep", "bool")]


def test_device_members():
    spec = parse(
        """
        device D {
          location a: Sheet
          location b: Sheet
          component c = Trim(a, b) { [t == 1] }
          derived gap = a.w - b.w
          [a.w > b.w]
        }
        """,
        filename="t",
    )
    (d,) = spec.device_defs
    assert [l.name for l in d.locations] == ["a", "b"]
    (c,) = d.components
    assert c.action == "Trim"
    assert [arg.name for arg in c.loc_args] == ["a", "b"]
    assert len(c.constraints) == 1
    assert d.derived_props[0].name == "gap"


def test_scenario_members():
    spec = parse(
        """
        scenario s for D {
          a.w = 2970
          flag = true
          off = -40
          [a.h > 0]
          objective minimize a.w
          expect [c.t == 70]
        }
        """,
        filename="t",
    )
    (s,) = spec.scenario_defs
    assert s.device == "D"
    assert [(b.path, b.value) for b in s.bindings] == [
        (("a", "w"), 2970),
        (("flag",), True),
        (("off",), -40),
    ]
    assert s.objective.sense == "minimize"
    assert len(s.extra_constraints) == 1
    # parser leaves expectation context empty; desugar fills it in
    (e,) = s.expectations
    assert e.bindings == () and e.objective is None


def test_mul_binds_tighter_than_add():
    c = parse_one_constraint("1 + 2 * 3 == 7")
    assert c.left == Binary("+", IntLit(1), Binary("*", IntLit(2), IntLit(3)))


def test_and_binds_tighter_than_or():
    c = parse_one_constraint("true and false or true")
    assert c == Binary(
        "or", Binary("and", BoolLit(True), BoolLit(False)), BoolLit(True)
    )


def test_implies_is_right_associative():
    c = parse_one_constraint("true implies false implies true")
    assert c == Binary(
        "implies", BoolLit(True), Binary("implies", BoolLit(False), BoolLit(True))
    )


def test_subtraction_is_left_associative():
    c = parse_one_constraint("10 - 3 - 2 == 5")
    assert c.left == Binary("-", Binary("-", IntLit(10), IntLit(3)), IntLit(2))


def test_comparisons_do_not_chain():
    with pytest.raises(ParseError):
        parse("type T { [1 < 2 < 3] }", filename="t")


def test_negative_literal_folds():
    c = parse_one_constraint("0 < -5")
    assert c.right == IntLit(-5)


def test_unary_minus_on_ref_stays_unary():
    c = parse_one_constraint("-x < 0")
    assert c.left == Unary("neg", Ref("x"))


def test_not_and_projection_chain():
    c = parse_one_constraint("not a.b.c")
    assert c == Unary("not", Proj(Proj(Ref("a"), "b"), "c"))


def test_parenthesized_grouping():
    c = parse_one_constraint("(1 + 2) * 3 == 9")
    assert c.left == Binary("*", Binary("+", IntLit(1), IntLit(2)), IntLit(3))


def test_comments_are_skipped():
    spec = parse(
        "// leading note\ntype T { // trailing\n w: int // unit: 0.1mm\n }\n",
        filename="t",
    )
    assert spec.type_defs[0].def_props[0].name == "w"


def test_in_is_a_plain_identifier():
    spec = parse("action A(in: S) { [in.w > 0] }", filename="t")
    assert spec.action_defs[0].loc_params[0].name == "in"


def test_reserved_word_rejected_as_name():
    with pytest.raises(ParseError):
        parse("type derived { }", filename="t")


def test_spans_point_into_the_source():
    spec = parse("type A { }\n\ntype B { w: int }\n", filename="f.csx")
    a, b = spec.type_defs
    assert a.span.file == "f.csx"
    assert a.span.line == 1
    assert b.span.line == 3
    assert b.def_props[0].span.line == 3


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse("type T {\n  w int\n}", filename="bad.csx")
    (d,) = exc.value.diagnostics
    assert "bad.csx" in d.render()
    assert d.span.line == 2


def test_unterminated_block():
    with pytest.raises(ParseError):
        parse("device D { location a: S", filename="t")


def test_stray_character():
    with pytest.raises(ParseError):
        parse("type T { w: int $ }", filename="t")


def test_empty_source_is_an_empty_spec():
    spec = parse("", filename="t")
    assert spec.definitions() == []

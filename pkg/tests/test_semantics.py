"""Name binding and sort checking: resolutions, taint, diagnostics."""

import pytest

from csx.ast import Binary, Proj, Ref
from csx.desugar import desugar
from csx.parser import parse
from csx.semantics import (
    PathError,
    ResolvedComponent,
    ResolvedLocation,
    ResolvedParam,
    ResolvedProp,
    analyze,
    resolve_path,
    type_expr,
)


def run(src):
    return analyze(desugar(parse(src, filename="t")))


def messages(res):
    return [d.message for d in res.diagnostics]


def test_clean_spec_has_no_diagnostics(trim_result):
    assert trim_result.ok
    assert trim_result.diagnostics == []
    assert trim_result.tainted == frozenset()


def test_sorts_of_member_expressions(trim_ts):
    trim = next(a for a in trim_ts.spec.action_defs if a.name == "Trim")
    # [out.w == in.w - t] : the comparison is bool, both sides int
    eq = trim.constraints[1]
    assert trim_ts.sort_of(eq) == "bool"
    assert trim_ts.sort_of(eq.left) == "int"
    assert trim_ts.sort_of(eq.right) == "int"


def test_resolutions_record_owners(trim_ts):
    trim = next(a for a in trim_ts.spec.action_defs if a.name == "Trim")
    eq = trim.constraints[1]  # out.w == in.w - t
    out_w = eq.left
    r = trim_ts.resolution_of(out_w)
    assert isinstance(r, ResolvedProp)
    assert (r.owner, r.name, r.sort) == ("Sheet", "w", "int")
    t_ref = eq.right.right
    rp = trim_ts.resolution_of(t_ref)
    assert isinstance(rp, ResolvedParam)
    assert (rp.action, rp.name, rp.sort) == ("Trim", "t", "int")


def test_device_scope_resolutions(trim_ts):
    (dev,) = trim_ts.spec.device_defs
    sc = next(s for s in trim_ts.spec.scenario_defs)
    # expectation [c.t == 70]: c resolves to the component, c.t to its param
    proj = sc.expectations[0].expr.left
    base_res = trim_ts.resolution_of(proj.base)
    assert isinstance(base_res, ResolvedComponent)
    assert base_res.action == "Trim"
    assert trim_ts.sort_of(proj) == "int"


def test_renaming_maps_loc_params_to_locations(trim_ts):
    r = trim_ts.renaming_of("D", "c")
    assert r == {"in": "a", "out": "b"}


def test_resolve_path_walks_types_and_components(binder_ts):
    parts, sort = resolve_path(binder_ts, "PerfectBinder", ("blockIn", "sheet", "w"))
    assert parts == ("blockIn", "sheet", "w")
    assert sort == "int"
    parts, sort = resolve_path(binder_ts, "PerfectBinder", ("mill", "depth"))
    assert parts == ("mill", "depth")
    assert sort == "int"


def test_resolve_path_rejects_non_leaves(binder_ts):
    with pytest.raises(PathError):
        resolve_path(binder_ts, "PerfectBinder", ("blockIn", "sheet"))
    with pytest.raises(PathError):
        resolve_path(binder_ts, "PerfectBinder", ("blockIn", "nope"))
    with pytest.raises(PathError):
        resolve_path(binder_ts, "PerfectBinder", ("ghost",))


def test_resolve_path_rejects_derived(binder_ts):
    # derived values are computed, not free leaves one can bind
    with pytest.raises(PathError):
        resolve_path(binder_ts, "PerfectBinder", ("milled", "t"))


def test_type_expr_types_adhoc_device_expressions(trim_ts):
    e = parse_one_expr("a.w - b.w")
    sort, diags = type_expr(trim_ts, "D", e)
    assert diags == []
    assert sort == "int"
    resolved = trim_ts.resolution_of(e.left.base)
    assert isinstance(resolved, ResolvedLocation)


def parse_one_expr(text):
    spec = parse("type X { [" + text + "] }", filename="e")
    return spec.type_defs[0].constraints[0]


def test_type_expr_unknown_name(trim_ts):
    e = parse_one_expr("ghost > 0")
    sort, diags = type_expr(trim_ts, "D", e)
    assert any("ghost" in d.message for d in diags)


def test_type_expr_unknown_device(trim_ts):
    e = parse_one_expr("1 + 1")
    sort, diags = type_expr(trim_ts, "Nope", e)
    assert diags


def test_unknown_type_taints_owner():
    res = run("type T { s: Missing }")
    assert not res.ok
    assert "unknown type 'Missing'" in messages(res)
    assert ("type", "T") in res.tainted


def test_duplicate_definitions():
    res = run("type T { w: int }\ntype T { h: int }")
    assert any("duplicate type 'T'" in m for m in messages(res))


def test_duplicate_member():
    res = run("type T { w: int w: bool }")
    assert any("duplicate property" in m for m in messages(res))


def test_constraint_must_be_bool():
    res = run("type T { w: int [w + 1] }")
    assert any("constraint must be bool, got int" in m for m in messages(res))


def test_unresolved_reference():
    res = run("type T { [q > 0] }")
    assert any("unresolved name 'q'" in m for m in messages(res))


def test_projection_off_primitive():
    res = run("type T { w: int [w.h > 0] }")
    assert any("cannot project 'h' off int" in m for m in messages(res))


def test_arith_on_bool_operand():
    res = run("type T { f: bool [f + 1 > 0] }")
    assert any("must be int, got bool and int" in m for m in messages(res))


def test_component_arity_mismatch():
    res = run(
        "type S { w: int }\n"
        "action A(a: S, b: S) {}\n"
        "device D { location x: S component c = A(x) }"
    )
    assert any("takes 2 location(s)" in m for m in messages(res))
    assert ("device", "D") in res.tainted


def test_unknown_action():
    res = run("type S { w: int }\ndevice D { location x: S component c = B(x) }")
    assert any("unknown action 'B'" in m for m in messages(res))


def test_param_may_not_shadow_loc_param():
    res = run("type S { w: int }\naction A(in: S) { parameter in: int }")
    assert any("duplicate member of action 'A'" in m for m in messages(res))


def test_scenario_unknown_device():
    res = run("scenario s for Nope { expect [true] }")
    assert any("unknown device 'Nope'" in m for m in messages(res))
    assert ("scenario", "s") in res.tainted


def test_scenario_binding_path_checked():
    res = run(
        "type S { w: int }\ndevice D { location x: S }\n"
        "scenario s for D { x.q = 1 expect [true] }"
    )
    assert any("no defining property 'q'" in m for m in messages(res))


def test_scenario_binding_value_sort_checked():
    res = run(
        "type S { w: int }\ndevice D { location x: S }\n"
        "scenario s for D { x.w = true }"
    )
    assert any("sort int, got a bool literal" in m for m in messages(res))


def test_objective_must_be_int():
    res = run(
        "type S { w: int }\ndevice D { location x: S }\n"
        "scenario s for D { objective minimize x.w > 0 }"
    )
    assert any("objective expression must be int" in m for m in messages(res))


def test_type_property_cycle():
    res = run("type A { b: B }\ntype B { a: A }")
    assert any("property cycle" in m for m in messages(res))
    assert ("type", "A") in res.tainted and ("type", "B") in res.tainted


def test_derived_reference_cycle():
    res = run("type T { derived a = b derived b = a }")
    assert any("reference cycle" in m for m in messages(res))


def test_taint_is_per_definition():
    # one broken type does not taint an unrelated clean one
    res = run("type Bad { s: Missing }\ntype Good { w: int [w > 0] }")
    assert ("type", "Bad") in res.tainted
    assert res.clean("type", "Good")


def test_diagnostics_render_with_position():
    res = run("type T {\n  s: Missing\n}")
    (d,) = res.diagnostics
    assert d.render().startswith("t:2:")

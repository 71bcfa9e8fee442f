"""Exploration engine: scenario runs, configuration queries, caching."""

import pytest

from csx.ast import Objective
from csx.desugar import desugar
from csx.explore import (
    EmptySpace,
    ExplorationEngine,
    Exhausted,
    Found,
    Inhabitance,
    Job,
    PathError,
    analyze_workspace,
    job_of_scenario,
    load_workspace,
    lower_job,
)
from csx.parser import ParseError, parse
from csx.semantics import analyze, type_expr
from csx.solver import Budget, DomainBox


def typed_expr(ts, device, text):
    spec = parse("type X { [" + text + "] }", filename="q")
    e = spec.type_defs[0].constraints[0]
    sort, diags = type_expr(ts, device, e)
    assert not diags, diags
    return e


# --- scenarios over the bundled specs ---------------------------------------


def test_trim_scenario_passes(trim_ts):
    engine = ExplorationEngine()
    report = engine.run_scenario(trim_ts, "narrowCut")
    assert report.status == "passed"
    assert report.passed
    texts = {e.text: e for e in report.expectations}
    assert texts["c.t == 70"].passed is True
    assert texts["b.h == 2100"].passed is True


def test_binder_derivation_scenario(binder_ts):
    report = ExplorationEngine().run_scenario(binder_ts, "deriveCover")
    assert report.status == "passed"
    flat = dict(report.configuration.flat)
    assert flat["mill_depth"] == 40
    assert flat["prepared_c1"] == 2100
    assert flat["prepared_c2"] == 2202
    assert flat["coverIn_w"] == 4302


def test_binder_optimization_scenario(binder_ts):
    report = ExplorationEngine().run_scenario(binder_ts, "largestBook")
    assert report.status == "passed"
    assert report.objective == 2_763_980_800
    flat = dict(report.configuration.flat)
    assert flat["blockIn_n"] == 250
    assert (flat["out_w"], flat["out_h"], flat["out_t"]) == (3374, 3200, 256)


def test_booklet_derivation_scenario(booklet_ts):
    report = ExplorationEngine().run_scenario(booklet_ts, "deriveBooklet")
    assert report.status == "passed"
    flat = dict(report.configuration.flat)
    assert flat["rotate_turned"] is False
    assert flat["trim_face"] == 85
    assert flat["trim_top"] == 50 and flat["trim_bottom"] == 50


def test_booklet_optimization_scenario(booklet_ts):
    report = ExplorationEngine().run_scenario(booklet_ts, "thriftyBooklet")
    assert report.status == "passed"
    assert report.objective == 0  # zero waste is attainable


def test_unknown_scenario_raises(trim_ts):
    with pytest.raises(PathError):
        ExplorationEngine().run_scenario(trim_ts, "nope")


# --- expectation judgement ---------------------------------------------------


def test_witness_dependent_flag(trim_ts):
    # the flag is syntactic: it marks expectations that mention leaves the
    # scenario did not pin, even ones propagation happens to force
    report = ExplorationEngine().run_scenario(trim_ts, "narrowCut")
    by_text = {e.text: e for e in report.expectations}
    assert by_text["c.t == 70"].witness_dependent is True
    assert by_text["b.h == 2100"].witness_dependent is True  # b.h is free too


def test_witness_dependent_when_leaf_is_free():
    src = """
    type S { w: int [w > 0] }
    device D { location a: S }
    scenario s for D { expect [a.w == 1] }
    """
    res = analyze(desugar(parse(src, filename="t")))
    ts = res.typed
    report = ExplorationEngine(box=DomainBox(int_lo=1, int_hi=9)).run_scenario(
        ts, "s"
    )
    (e,) = report.expectations
    assert e.witness_dependent is True
    assert e.passed is True  # the smallest witness happens to satisfy it
    assert e.values == {"a_w": 1}


def test_failed_expectation_reports_values(trim_ts):
    src = """
    type S { w: int [w > 0] }
    device D { location a: S }
    scenario s for D { a.w = 3 expect [a.w == 4] }
    """
    res = analyze(desugar(parse(src, filename="t")))
    report = ExplorationEngine().run_scenario(res.typed, "s")
    assert report.status == "failed"
    (e,) = report.expectations
    assert e.passed is False
    assert e.witness_dependent is False  # every leaf it mentions is pinned
    assert e.values == {"a_w": 3}


def test_empty_scenario_reports_no_witness():
    src = """
    type S { w: int [w > 0] }
    device D { location a: S }
    scenario s for D { a.w = 3 [a.w == 4] expect [a.w == 3] }
    """
    res = analyze(desugar(parse(src, filename="t")))
    report = ExplorationEngine().run_scenario(res.typed, "s")
    assert report.status == "empty"
    (e,) = report.expectations
    assert e.passed is None
    assert "no witness" in e.message


# --- configuration queries ----------------------------------------------------


def test_find_configuration_with_bindings(trim_ts):
    job = Job(
        "D",
        bindings=((("a", "w"), 2972), (("a", "h"), 2100), (("b", "w"), 2970)),
    )
    out = ExplorationEngine().find_configuration(trim_ts, job)
    assert isinstance(out, Found)
    assert out.configuration.flat_dict()["c_t"] == 2


def test_find_configuration_extra_constraint(trim_ts):
    job = Job("D", extra_constraints=(typed_expr(trim_ts, "D", "c.t == 5"),))
    out = ExplorationEngine(box=DomainBox(int_lo=1, int_hi=9)).find_configuration(
        trim_ts, job
    )
    assert isinstance(out, Found)
    assert out.configuration.flat_dict()["c_t"] == 5


def test_find_configuration_objective(trim_ts):
    sense_expr = typed_expr(trim_ts, "D", "a.w > 0")  # warm the resolver
    spec = parse("type X { [a.w == 0] }", filename="q")
    obj_expr = spec.type_defs[0].constraints[0].left
    type_expr(trim_ts, "D", obj_expr)
    job = Job("D", objective=Objective("maximize", obj_expr))
    out = ExplorationEngine(box=DomainBox(int_lo=1, int_hi=7)).find_configuration(
        trim_ts, job
    )
    assert isinstance(out, Found)
    assert out.objective == 7


def test_find_configuration_empty(trim_ts):
    job = Job("D", bindings=((("a", "w"), 5), (("b", "w"), 9)))
    out = ExplorationEngine(box=DomainBox(int_lo=1, int_hi=9)).find_configuration(
        trim_ts, job
    )
    assert isinstance(out, EmptySpace)


def test_find_configuration_exhausted(binder_ts):
    job = job_of_scenario(
        next(s for s in binder_ts.spec.scenario_defs if s.name == "largestBook")
    )
    out = ExplorationEngine().find_configuration(
        binder_ts, job, budget=Budget(max_nodes=3)
    )
    assert isinstance(out, Exhausted)


def test_lower_job_rejects_bad_paths(trim_ts):
    with pytest.raises(PathError):
        lower_job(trim_ts, Job("D", bindings=((("a", "zz"), 1),)))
    with pytest.raises(PathError):
        lower_job(trim_ts, Job("D", bindings=((("a", "w"), True),)))


def test_job_of_scenario_carries_context(binder_ts):
    sc = next(s for s in binder_ts.spec.scenario_defs if s.name == "largestBook")
    job = job_of_scenario(sc)
    assert job.device == "PerfectBinder"
    assert job.objective.sense == "maximize"
    assert ((("blockIn", "sheet", "t"), 1)) in job.bindings


# --- inhabitance ---------------------------------------------------------------


def test_inhabitance_of_bundled_defs(trim_ts):
    eng = ExplorationEngine()
    assert eng.check_inhabitance(trim_ts, "type", "Sheet") is Inhabitance.INHABITED
    assert eng.check_inhabitance(trim_ts, "action", "Trim") is Inhabitance.INHABITED
    assert eng.check_inhabitance(trim_ts, "device", "D") is Inhabitance.INHABITED


def test_uninhabited_type_detected():
    res = analyze(desugar(parse("type U { i: int [i != i] }", filename="t")))
    eng = ExplorationEngine()
    got = eng.check_inhabitance(res.typed, "type", "U")
    assert got is Inhabitance.UNINHABITED


def test_unknown_inhabitance_under_tiny_budget(binder_ts):
    eng = ExplorationEngine()
    got = eng.check_inhabitance(
        binder_ts, "device", "PerfectBinder", budget=Budget(max_nodes=1)
    )
    assert got is Inhabitance.UNKNOWN


# --- caching -------------------------------------------------------------------


def test_repeat_queries_hit_memory_cache(trim_ts):
    eng = ExplorationEngine()
    job = Job("D", bindings=((("a", "w"), 2972), (("b", "w"), 2970)))
    first = eng.find_configuration(trim_ts, job)
    calls = eng.solver_calls
    second = eng.find_configuration(trim_ts, job)
    assert eng.solver_calls == calls
    assert eng.cache_hits >= 1
    assert second.configuration.flat == first.configuration.flat


def test_box_and_budget_are_part_of_the_key(trim_ts):
    eng = ExplorationEngine()
    job = Job("D", bindings=((("a", "w"), 2972),))
    eng.find_configuration(trim_ts, job, box=DomainBox(int_lo=0, int_hi=5000))
    calls = eng.solver_calls
    eng.find_configuration(trim_ts, job, box=DomainBox(int_lo=1, int_hi=5000))
    assert eng.solver_calls == calls + 1


def test_disk_cache_survives_engine_restart(tmp_path, trim_ts):
    job = Job("D", bindings=((("a", "w"), 2972), (("b", "w"), 2970)))
    one = ExplorationEngine(cache_dir=tmp_path)
    one.find_configuration(trim_ts, job)
    one.check_inhabitance(trim_ts, "device", "D")
    assert one.solver_calls > 0
    two = ExplorationEngine(cache_dir=tmp_path)
    out = two.find_configuration(trim_ts, job)
    two.check_inhabitance(trim_ts, "device", "D")
    assert two.solver_calls == 0
    assert isinstance(out, Found)


def test_source_change_misses_cache(tmp_path):
    src = "type S { w: int [w > 0] }\ndevice D { location a: S }"
    changed = src.replace("w > 0", "w > 1")
    one = ExplorationEngine(cache_dir=tmp_path)
    res1 = analyze(desugar(parse(src, filename="t")))
    one.find_configuration(res1.typed, Job("D"))
    two = ExplorationEngine(cache_dir=tmp_path)
    res2 = analyze(desugar(parse(changed, filename="t")))
    two.find_configuration(res2.typed, Job("D"))
    assert two.solver_calls == 1  # different constraints, different key


# --- workspaces -----------------------------------------------------------------


def test_load_workspace_merges_files():
    files = {
        "types.csx": "type S { w: int [w > 0] }",
        "dev.csx": "device D { location a: S }",
    }
    res = load_workspace(files)
    assert res.ok
    assert res.typed.devices_by_name.keys() == {"D"}


def test_load_workspace_propagates_parse_errors():
    with pytest.raises(ParseError):
        load_workspace({"bad.csx": "type {"})


def test_analyze_workspace_full_report(tmp_path):
    files = {
        "t.csx": (
            "type S { w: int [w > 0] }\n"
            "device D { location a: S }\n"
            "scenario s for D { a.w = 2 expect [a.w == 2] }"
        )
    }
    eng = ExplorationEngine(cache_dir=tmp_path)
    report = analyze_workspace(files, engine=eng)
    assert report.ok
    assert report.inhabitance[("type", "S")] is Inhabitance.INHABITED
    assert report.inhabitance[("device", "D")] is Inhabitance.INHABITED
    (sc,) = report.scenarios
    assert sc.passed
    # a second pass over the same workspace is answered from cache
    again = analyze_workspace(files, engine=ExplorationEngine(cache_dir=tmp_path))
    assert again.solver_calls == 0


def test_analyze_workspace_skips_tainted_defs():
    files = {"t.csx": "type Bad { s: Missing }\ntype Good { w: int [w > 0] }"}
    report = analyze_workspace(files)
    assert not report.ok
    assert ("type", "Bad") not in report.inhabitance
    assert report.inhabitance[("type", "Good")] is Inhabitance.INHABITED

"""Configuration-space exploration over device specs.

Everything here asks one of three questions and packages the answer:

  * inhabitance: does a definition admit any model at all inside a box,
  * configuration search: given a device, fixed leaf values, extra
    constraints and an optional objective, find one model,
  * scenarios: run a spec's own scenario blocks and judge their
    expectations against the witness.

Answers are cached in two tiers, an in-process dictionary and an
optional on-disk directory, keyed by content: structural fingerprints of
the definition and its dependency closure plus every search parameter.
Editing any involved definition changes the key; repeating a query on an
unchanged workspace is answered without invoking the solver (the engine
counts solver invocations so callers can verify exactly that).  A lock
per key keeps concurrent identical queries down to one solver run.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from csx.ast import (
    Expr,
    Objective,
    PRIMITIVE_SORTS,
    Spec,
    fingerprint,
    structural,
)
from csx.desugar import desugar
from csx.interp import eval_expr, lift, satisfies
from csx.lower import (
    leaf_vars,
    lower_action_inhabitance,
    lower_device,
    lower_expr,
    lower_type_inhabitance,
    qualified_name,
)
from csx.model import ConstraintModel, FBinary, FBool, FInt, FVar, flat_vars
from csx.parser import parse
from csx.printer import format_expr
from csx.semantics import (
    AnalysisResult,
    PathError,
    TypedSpec,
    analyze,
    resolve_path,
)
from csx.solver import Budget, DomainBox, Stats, check_sat, optimize


class Inhabitance(Enum):
    INHABITED = "inhabited"
    UNINHABITED = "uninhabited"
    UNKNOWN = "unknown"


@dataclass
class Job:
    """One configuration query: fix some leaves, add constraints, and
    optionally optimize.  Binding paths are source-level dotted paths."""

    device: str
    bindings: tuple[tuple[tuple[str, ...], int | bool], ...] = ()
    extra_constraints: tuple[Expr, ...] = ()
    objective: Objective | None = None


@dataclass
class Configuration:
    """A witness in both shapes: ordered flat assignment and value tree."""

    flat: tuple[tuple[str, int | bool], ...]
    value: dict

    @classmethod
    def from_assignment(cls, ts: TypedSpec, device: str, assignment: dict):
        ordered = tuple(
            (qualified_name(parts), assignment[qualified_name(parts)])
            for parts, _ in leaf_vars(ts, device)
        )
        return cls(ordered, lift(ts, device, dict(ordered)))

    def flat_dict(self) -> dict:
        return dict(self.flat)

    def render_flat(self) -> str:
        return "\n".join(f"{k} = {_show(v)}" for k, v in self.flat)

    def render_tree(self) -> str:
        lines: list[str] = []

        def walk(d: dict, depth: int):
            pad = "  " * depth
            for k, v in d.items():
                if isinstance(v, dict):
                    lines.append(f"{pad}{k}")
                    walk(v, depth + 1)
                else:
                    lines.append(f"{pad}{k} = {_show(v)}")

        walk(self.value, 0)
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {"flat": dict(self.flat), "tree": self.value}


def _show(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


@dataclass
class Found:
    configuration: Configuration
    objective: int | None = None
    stats: Stats | None = field(default=None, compare=False)


@dataclass
class EmptySpace:
    stats: Stats | None = field(default=None, compare=False)


@dataclass
class Exhausted:
    """Budget ran out; carries the best incumbent when one was found."""

    configuration: Configuration | None = None
    objective: int | None = None
    stats: Stats | None = field(default=None, compare=False)


@dataclass
class ExpectationResult:
    text: str
    passed: bool | None
    witness_dependent: bool = False
    values: dict[str, int | bool] = field(default_factory=dict)
    message: str = ""

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "passed": self.passed,
            "witness_dependent": self.witness_dependent,
            "values": self.values,
            "message": self.message,
        }


@dataclass
class ScenarioReport:
    scenario: str
    device: str
    status: str  # "passed" | "failed" | "empty" | "exhausted"
    objective: int | None = None
    configuration: Configuration | None = None
    expectations: list[ExpectationResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "device": self.device,
            "status": self.status,
            "objective": self.objective,
            "configuration": (
                None
                if self.configuration is None
                else self.configuration.to_json()
            ),
            "expectations": [e.to_json() for e in self.expectations],
        }


# --- cache -------------------------------------------------------------------


class _Cache:
    """Two tiers: process memory in front of an optional directory of
    one JSON file per key.  Values must be JSON-serializable."""

    def __init__(self, directory: str | Path | None = None):
        self._mem: dict[str, object] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)

    def lock_for(self, key: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def get(self, key: str):
        with self._guard:
            if key in self._mem:
                return self._mem[key]
        if self.directory is not None:
            path = self.directory / f"{key}.json"
            try:
                value = json.loads(path.read_text())
            except (OSError, ValueError):
                return None
            with self._guard:
                self._mem[key] = value
            return value
        return None

    def put(self, key: str, value):
        with self._guard:
            self._mem[key] = value
        if self.directory is not None:
            path = self.directory / f"{key}.json"
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps(value))
            tmp.replace(path)


def _dependency_closure(ts: TypedSpec, kind: str, name: str):
    seen: set[tuple[str, str]] = set()
    stack = [(kind, name)]
    while stack:
        k, n = stack.pop()
        if (k, n) in seen:
            continue
        seen.add((k, n))
        if k == "type":
            td = ts.types_by_name.get(n)
            if td is not None:
                stack.extend(
                    ("type", p.type)
                    for p in td.def_props
                    if p.type not in PRIMITIVE_SORTS
                )
        elif k == "action":
            ad = ts.actions_by_name.get(n)
            if ad is not None:
                stack.extend(("type", lp.type) for lp in ad.loc_params)
        elif k == "device":
            dd = ts.devices_by_name.get(n)
            if dd is not None:
                stack.extend(("type", loc.type) for loc in dd.locations)
                stack.extend(("action", c.action) for c in dd.components)
        elif k == "scenario":
            sc = ts.scenarios_by_name.get(n)
            if sc is not None:
                stack.append(("device", sc.device))
    return sorted(seen)


def _closure_fingerprints(ts: TypedSpec, kind: str, name: str):
    tables = {
        "type": ts.types_by_name,
        "action": ts.actions_by_name,
        "device": ts.devices_by_name,
        "scenario": ts.scenarios_by_name,
    }
    out = []
    for k, n in _dependency_closure(ts, kind, name):
        node = tables[k].get(n)
        out.append([k, n, fingerprint(node) if node is not None else "missing"])
    return out


# --- outcome (de)serialization ------------------------------------------------


def _encode_outcome(out) -> dict:
    if isinstance(out, Found):
        return {
            "status": "found",
            "flat": out.configuration.flat_dict(),
            "objective": out.objective,
        }
    if isinstance(out, EmptySpace):
        return {"status": "empty"}
    return {
        "status": "exhausted",
        "flat": (
            None
            if out.configuration is None
            else out.configuration.flat_dict()
        ),
        "objective": out.objective,
    }


def _decode_outcome(ts: TypedSpec, device: str, payload: dict):
    status = payload["status"]
    if status == "empty":
        return EmptySpace()
    flat = payload.get("flat")
    cfg = (
        Configuration.from_assignment(ts, device, flat)
        if flat is not None
        else None
    )
    if status == "found":
        return Found(cfg, payload.get("objective"))
    return Exhausted(cfg, payload.get("objective"))


# --- the engine ----------------------------------------------------------------


def lower_job(ts: TypedSpec, job: Job) -> ConstraintModel:
    """Lower a device plus a job's bindings, extra constraints and
    objective into one flat model.  Raises PathError when a binding path
    does not resolve to a leaf of the right sort."""
    base = lower_device(ts, job.device)
    constraints = list(base.constraints)
    for path, value in job.bindings:
        parts, sort = resolve_path(ts, job.device, tuple(path))
        want = "bool" if isinstance(value, bool) else "int"
        if sort != want:
            raise PathError(
                f"{'.'.join(path)} is {sort}, given a {want} value",
                tuple(path),
            )
        lit = FBool(value) if isinstance(value, bool) else FInt(value)
        constraints.append(FBinary("==", FVar(qualified_name(parts)), lit))
    for e in job.extra_constraints:
        constraints.append(lower_expr(ts, e))
    objective = None
    if job.objective is not None:
        objective = (job.objective.sense, lower_expr(ts, job.objective.expr))
    model = ConstraintModel(base.vars, tuple(constraints), objective)
    model.validate()
    return model


def job_of_scenario(sc) -> Job:
    """The solver job a scenario denotes."""
    return Job(
        sc.device,
        tuple((b.path, b.value) for b in sc.bindings),
        tuple(sc.extra_constraints),
        sc.objective,
    )


class ExplorationEngine:
    """Runs solver-backed queries with caching and call counting."""

    def __init__(
        self,
        cache_dir: str | Path | None = None,
        box: DomainBox | None = None,
        budget: Budget | None = None,
    ):
        self.cache = _Cache(cache_dir)
        self.box = box if box is not None else DomainBox()
        self.budget = budget if budget is not None else Budget()
        self.solver_calls = 0
        self.cache_hits = 0
        self._count_guard = threading.Lock()

    def _count_solve(self):
        with self._count_guard:
            self.solver_calls += 1

    def _key(self, query: str, ts: TypedSpec, kind: str, name: str, extra: dict):
        payload = {
            "query": query,
            "target": [kind, name],
            "defs": _closure_fingerprints(ts, kind, name),
        }
        payload.update(extra)
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def _params(self, box: DomainBox, budget: Budget) -> dict:
        lo, hi, overrides = box.key()
        return {
            "box": [lo, hi, [[n, list(b)] for n, b in overrides]],
            "budget": [budget.max_nodes, budget.max_ms],
        }

    # --- inhabitance -----------------------------------------------------

    def check_inhabitance(
        self,
        ts: TypedSpec,
        kind: str,
        name: str,
        box: DomainBox | None = None,
        budget: Budget | None = None,
    ) -> Inhabitance:
        box = box if box is not None else self.box
        budget = budget if budget is not None else self.budget
        key = self._key("inhabit", ts, kind, name, self._params(box, budget))
        cached = self.cache.get(key)
        if cached is not None:
            self.cache_hits += 1
            return Inhabitance(cached["verdict"])
        with self.cache.lock_for(key):
            cached = self.cache.get(key)
            if cached is not None:
                self.cache_hits += 1
                return Inhabitance(cached["verdict"])
            verdict = self._compute_inhabitance(ts, kind, name, box, budget)
            self.cache.put(key, {"verdict": verdict.value})
            return verdict

    def _compute_inhabitance(self, ts, kind, name, box, budget) -> Inhabitance:
        if kind == "type":
            model = lower_type_inhabitance(ts, name)
        elif kind == "action":
            model = lower_action_inhabitance(ts, name)
        elif kind == "device":
            model = lower_device(ts, name)
        else:
            raise ValueError(f"no inhabitance question for {kind!r}")
        self._count_solve()
        res = check_sat(model, box, budget)
        if res.status == "sat":
            return Inhabitance.INHABITED
        if res.status == "unsat":
            return Inhabitance.UNINHABITED
        return Inhabitance.UNKNOWN

    # --- configuration search ---------------------------------------------

    def find_configuration(
        self,
        ts: TypedSpec,
        job: Job,
        box: DomainBox | None = None,
        budget: Budget | None = None,
    ):
        box = box if box is not None else self.box
        budget = budget if budget is not None else self.budget
        binds = []
        for path, value in job.bindings:
            parts, sort = resolve_path(ts, job.device, tuple(path))
            want = "bool" if isinstance(value, bool) else "int"
            if sort != want:
                raise PathError(
                    f"{'.'.join(path)} is {sort}, given a {want} value",
                    tuple(path),
                )
            binds.append((parts, value))
        extra = {
            "bindings": sorted(
                ["_".join(parts), value] for parts, value in binds
            ),
            "extra": sorted(repr(structural(e)) for e in job.extra_constraints),
            "objective": (
                None
                if job.objective is None
                else [job.objective.sense, repr(structural(job.objective.expr))]
            ),
        }
        extra.update(self._params(box, budget))
        key = self._key("solve", ts, "device", job.device, extra)
        cached = self.cache.get(key)
        if cached is not None:
            self.cache_hits += 1
            return _decode_outcome(ts, job.device, cached)
        with self.cache.lock_for(key):
            cached = self.cache.get(key)
            if cached is not None:
                self.cache_hits += 1
                return _decode_outcome(ts, job.device, cached)
            outcome = self._solve_job(ts, job, box, budget)
            self.cache.put(key, _encode_outcome(outcome))
            return outcome

    def _solve_job(self, ts, job, box, budget):
        model = lower_job(ts, job)
        self._count_solve()
        res = (
            optimize(model, box, budget)
            if model.objective is not None
            else check_sat(model, box, budget)
        )
        if res.status in ("sat", "opt"):
            cfg = Configuration.from_assignment(ts, job.device, res.assignment)
            if not satisfies(ts, cfg.value, job.device):
                raise RuntimeError(
                    "internal error: witness rejected by direct evaluation"
                )
            return Found(cfg, res.objective, res.stats)
        if res.status == "unsat":
            return EmptySpace(res.stats)
        cfg = (
            Configuration.from_assignment(ts, job.device, res.assignment)
            if res.assignment is not None
            else None
        )
        return Exhausted(cfg, res.objective, res.stats)

    # --- scenarios ------------------------------------------------------------

    def run_scenario(
        self,
        ts: TypedSpec,
        name: str,
        box: DomainBox | None = None,
        budget: Budget | None = None,
    ) -> ScenarioReport:
        sc = ts.scenarios_by_name.get(name)
        if sc is None:
            raise PathError(f"unknown scenario {name!r}", (name,))
        job = job_of_scenario(sc)
        outcome = self.find_configuration(ts, job, box, budget)
        bound = {
            qualified_name(resolve_path(ts, sc.device, b.path)[0])
            for b in sc.bindings
        }
        expectations = []
        if isinstance(outcome, Found):
            cfg = outcome.configuration
            flat = cfg.flat_dict()
            for exp in sc.expectations:
                lowered = lower_expr(ts, exp.expr)
                used = flat_vars(lowered)
                values = {v: flat[v] for v in used if v in flat}
                got = eval_expr(ts, exp.expr, cfg.value, device=sc.device)
                expectations.append(
                    ExpectationResult(
                        text=format_expr(exp.expr),
                        passed=bool(got),
                        witness_dependent=not set(used) <= bound,
                        values=values,
                    )
                )
            status = (
                "passed" if all(e.passed for e in expectations) else "failed"
            )
            return ScenarioReport(
                sc.name, sc.device, status, outcome.objective, cfg, expectations
            )
        for exp in sc.expectations:
            expectations.append(
                ExpectationResult(
                    text=format_expr(exp.expr),
                    passed=None,
                    message="no witness to judge against",
                )
            )
        if isinstance(outcome, EmptySpace):
            return ScenarioReport(
                sc.name, sc.device, "empty", None, None, expectations
            )
        return ScenarioReport(
            sc.name,
            sc.device,
            "exhausted",
            outcome.objective,
            outcome.configuration,
            expectations,
        )


# --- workspace-level analysis ---------------------------------------------------


@dataclass
class WorkspaceReport:
    result: AnalysisResult
    inhabitance: dict[tuple[str, str], Inhabitance] = field(default_factory=dict)
    scenarios: list[ScenarioReport] = field(default_factory=list)
    solver_calls: int = 0

    @property
    def ok(self) -> bool:
        return self.result.ok and not any(
            v is Inhabitance.UNINHABITED for v in self.inhabitance.values()
        )


def load_workspace(files: dict[str, str]) -> AnalysisResult:
    """Parse and analyze a set of named sources as one workspace."""
    specs = [parse(text, filename) for filename, text in files.items()]
    merged = Spec(
        tuple(t for s in specs for t in s.type_defs),
        tuple(a for s in specs for a in s.action_defs),
        tuple(d for s in specs for d in s.device_defs),
        tuple(sc for s in specs for sc in s.scenario_defs),
    )
    return analyze(desugar(merged))


def analyze_workspace(
    files: dict[str, str],
    engine: ExplorationEngine | None = None,
    box: DomainBox | None = None,
    budget: Budget | None = None,
    run_scenarios: bool = True,
) -> WorkspaceReport:
    """Full front-to-back pass over a workspace: parse, analyze, check
    inhabitance of every clean definition, and run clean scenarios."""
    engine = engine if engine is not None else ExplorationEngine()
    result = load_workspace(files)
    report = WorkspaceReport(result)
    ts = result.typed
    for kind, node in result.typed.spec.definitions():
        if kind == "scenario":
            continue
        if not result.clean(kind, node.name):
            continue
        report.inhabitance[(kind, node.name)] = engine.check_inhabitance(
            ts, kind, node.name, box, budget
        )
    if run_scenarios:
        for kind, node in result.typed.spec.definitions():
            if kind != "scenario" or not result.clean(kind, node.name):
                continue
            report.scenarios.append(
                engine.run_scenario(ts, node.name, box, budget)
            )
    report.solver_calls = engine.solver_calls
    return report


# --- module-level conveniences ----------------------------------------------------


def check_inhabitance(
    ts: TypedSpec,
    kind: str,
    name: str,
    box: DomainBox | None = None,
    budget: Budget | None = None,
    engine: ExplorationEngine | None = None,
) -> Inhabitance:
    engine = engine if engine is not None else ExplorationEngine()
    return engine.check_inhabitance(ts, kind, name, box, budget)


def find_configuration(
    ts: TypedSpec,
    job: Job,
    box: DomainBox | None = None,
    budget: Budget | None = None,
    engine: ExplorationEngine | None = None,
):
    engine = engine if engine is not None else ExplorationEngine()
    return engine.find_configuration(ts, job, box, budget)


def run_scenario(
    ts: TypedSpec,
    name: str,
    box: DomainBox | None = None,
    budget: Budget | None = None,
    engine: ExplorationEngine | None = None,
) -> ScenarioReport:
    engine = engine if engine is not None else ExplorationEngine()
    return engine.run_scenario(ts, name, box, budget)

"""HTTP face of the toolchain.

A workspace is a named set of spec sources kept server side; every write
bumps its revision so clients can detect they are acting on stale state.
Solving, inhabitance and scenario runs share one exploration engine, so
repeated queries on unchanged definitions are answered from cache.

Routes:

  PUT  /workspace                     create or replace a workspace
  GET  /workspace/{id}                summary, diagnostics, inhabitance
  GET  /workspace/{id}/devices       device schemas for building forms
  GET  /workspace/{id}/scenarios     scenario listing
  POST /workspace/{id}/scenarios/{name}/run
  POST /workspace/{id}/solve         find a configuration
  POST /workspace/{id}/eval          evaluate an expression on a witness
  GET  /workspace/{id}/export/{device}  flat model as text
"""

from __future__ import annotations

import threading
from typing import Union

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, StrictBool, StrictInt

from csx.ast import Objective
from csx.explore import (
    EmptySpace,
    ExplorationEngine,
    Found,
    Job,
)
from csx.interp import MissingBinding, eval_expr
from csx.lower import leaf_vars, lower_device, qualified_name, render_model
from csx.parser import ParseError, parse_expression
from csx.semantics import INVALID, PathError, type_expr
from csx.solver import Budget, DomainBox

Value = Union[StrictBool, StrictInt]


class PutWorkspaceRequest(BaseModel):
    files: dict[str, str]
    id: str | None = None


class BindingIn(BaseModel):
    path: str
    value: Value


class ObjectiveIn(BaseModel):
    sense: str
    expr: str


class SolveRequest(BaseModel):
    device: str
    bindings: list[BindingIn] = []
    constraints: list[str] = []
    objective: ObjectiveIn | None = None
    intMin: int | None = None
    intMax: int | None = None
    budgetNodes: int | None = None
    budgetMs: int | None = None
    revision: int | None = None


class EvalRequest(BaseModel):
    device: str
    expr: str
    flat: dict[str, Value] | None = None
    revision: int | None = None


class _Workspace:
    def __init__(self, wid: str, files: dict[str, str], result):
        self.id = wid
        self.files = files
        self.revision = 1
        self.result = result
        self.last_found: dict[str, dict] = {}


def _summary(ws: _Workspace, engine: ExplorationEngine) -> dict:
    result = ws.result
    definitions = []
    for kind, node in result.typed.spec.definitions():
        if kind == "scenario":
            continue
        if result.clean(kind, node.name):
            verdict = engine.check_inhabitance(
                result.typed, kind, node.name
            ).value
        else:
            verdict = "skipped"
        definitions.append(
            {"kind": kind, "name": node.name, "inhabitance": verdict}
        )
    return {
        "id": ws.id,
        "revision": ws.revision,
        "ok": result.ok,
        "diagnostics": [d.render() for d in result.diagnostics],
        "definitions": definitions,
        "scenarios": [
            {"name": sc.name, "device": sc.device}
            for sc in result.typed.spec.scenario_defs
        ],
    }


def create_app(cache_dir=None) -> FastAPI:
    app = FastAPI(title="csx", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    engine = ExplorationEngine(cache_dir)
    workspaces: dict[str, _Workspace] = {}
    guard = threading.Lock()
    counter = iter(range(1, 1_000_000_000))

    def fail(status: int, message: str, **extra):
        # every error body has the same shape: {"message": ..., ...}
        raise HTTPException(status, detail={"message": message, **extra})

    def get_ws(wid: str) -> _Workspace:
        with guard:
            ws = workspaces.get(wid)
        if ws is None:
            fail(404, f"unknown workspace {wid!r}")
        return ws

    def check_revision(ws: _Workspace, revision: int | None):
        if revision is not None and revision != ws.revision:
            fail(
                409,
                f"workspace {ws.id!r} is at revision {ws.revision},"
                f" request was for {revision}",
            )

    @app.put("/workspace")
    def put_workspace(body: PutWorkspaceRequest):
        from csx.explore import load_workspace

        try:
            result = load_workspace(body.files)
        except ParseError as exc:
            raise HTTPException(
                400,
                detail={
                    "message": "parse failed",
                    "diagnostics": [d.render() for d in exc.diagnostics],
                },
            )
        with guard:
            if body.id is not None and body.id in workspaces:
                ws = workspaces[body.id]
                ws.files = body.files
                ws.result = result
                ws.revision += 1
                ws.last_found.clear()
            else:
                wid = body.id if body.id is not None else f"w{next(counter)}"
                ws = _Workspace(wid, body.files, result)
                workspaces[wid] = ws
        return _summary(ws, engine)

    @app.get("/workspace/{wid}")
    def get_workspace(wid: str):
        return _summary(get_ws(wid), engine)

    @app.get("/workspace/{wid}/devices")
    def get_devices(wid: str):
        ws = get_ws(wid)
        ts = ws.result.typed
        devices = []
        for kind, node in ts.spec.definitions():
            if kind != "device":
                continue
            if not ws.result.clean("device", node.name):
                devices.append({"name": node.name, "tainted": True})
                continue
            leaves = [
                {
                    "name": qualified_name(parts),
                    "path": list(parts),
                    "sort": sort,
                }
                for parts, sort in leaf_vars(ts, node.name)
            ]
            actions = ts.actions_by_name
            devices.append(
                {
                    "name": node.name,
                    "tainted": False,
                    "locations": [
                        {"name": loc.name, "type": loc.type}
                        for loc in node.locations
                    ],
                    "components": [
                        {
                            "name": c.name,
                            "action": c.action,
                            "params": [
                                {"name": p.name, "sort": p.type}
                                for p in actions[c.action].params
                            ],
                        }
                        for c in node.components
                    ],
                    "leaves": leaves,
                }
            )
        return {"revision": ws.revision, "devices": devices}

    @app.get("/workspace/{wid}/scenarios")
    def get_scenarios(wid: str):
        ws = get_ws(wid)
        return {
            "revision": ws.revision,
            "scenarios": [
                {"name": sc.name, "device": sc.device}
                for sc in ws.result.typed.spec.scenario_defs
            ],
        }

    @app.post("/workspace/{wid}/scenarios/{name}/run")
    def run_scenario(wid: str, name: str):
        ws = get_ws(wid)
        ts = ws.result.typed
        if name not in ts.scenarios_by_name:
            fail(404, f"unknown scenario {name!r}")
        if not ws.result.clean("scenario", name):
            fail(422, f"scenario {name!r} has errors")
        report = engine.run_scenario(ts, name)
        return {"revision": ws.revision, "report": report.to_json()}

    @app.post("/workspace/{wid}/solve")
    def solve(wid: str, body: SolveRequest):
        ws = get_ws(wid)
        check_revision(ws, body.revision)
        ts = ws.result.typed
        if body.device not in ts.devices_by_name:
            fail(404, f"unknown device {body.device!r}")
        if not ws.result.clean("device", body.device):
            fail(422, f"device {body.device!r} has errors")
        try:
            bindings = tuple(
                (tuple(b.path.split(".")), b.value) for b in body.bindings
            )
            constraints = []
            for raw in body.constraints:
                expr = parse_expression(raw)
                sort, diags = type_expr(ts, body.device, expr)
                if diags or sort != "bool":
                    fail(
                        422,
                        "; ".join(d.message for d in diags)
                        or f"constraint must be bool, got {sort}",
                    )
                constraints.append(expr)
            objective = None
            if body.objective is not None:
                if body.objective.sense not in ("minimize", "maximize"):
                    fail(422, f"bad objective sense {body.objective.sense!r}")
                expr = parse_expression(body.objective.expr)
                sort, diags = type_expr(ts, body.device, expr)
                if diags or sort != "int":
                    fail(
                        422,
                        "; ".join(d.message for d in diags)
                        or f"objective must be int, got {sort}",
                    )
                objective = Objective(body.objective.sense, expr)
        except ParseError as exc:
            fail(422, "; ".join(d.render() for d in exc.diagnostics))
        box = DomainBox()
        if body.intMin is not None:
            box.int_lo = body.intMin
        if body.intMax is not None:
            box.int_hi = body.intMax
        budget = Budget()
        if body.budgetNodes is not None:
            budget.max_nodes = body.budgetNodes
        if body.budgetMs is not None:
            budget.max_ms = body.budgetMs
        job = Job(body.device, bindings, tuple(constraints), objective)
        try:
            outcome = engine.find_configuration(ts, job, box, budget)
        except PathError as exc:
            fail(422, str(exc))
        if isinstance(outcome, Found):
            ws.last_found[body.device] = outcome.configuration.flat_dict()
            return {
                "revision": ws.revision,
                "status": "found",
                "objective": outcome.objective,
                "configuration": outcome.configuration.to_json(),
            }
        if isinstance(outcome, EmptySpace):
            return {
                "revision": ws.revision,
                "status": "empty",
                "objective": None,
                "configuration": None,
            }
        return {
            "revision": ws.revision,
            "status": "exhausted",
            "objective": outcome.objective,
            "configuration": (
                outcome.configuration.to_json()
                if outcome.configuration is not None
                else None
            ),
        }

    def partial_tree(ts, device: str, flat: dict) -> dict:
        """Value tree from whatever leaves are present.  Parameterless
        components still appear so projections onto them resolve."""
        root: dict = {}
        for parts, _sort in leaf_vars(ts, device):
            name = qualified_name(parts)
            if name not in flat:
                continue
            node = root
            for seg in parts[:-1]:
                node = node.setdefault(seg, {})
            node[parts[-1]] = flat[name]
        for comp in ts.devices_by_name[device].components:
            root.setdefault(comp.name, {})
        return root

    @app.post("/workspace/{wid}/eval")
    def eval_endpoint(wid: str, body: EvalRequest):
        ws = get_ws(wid)
        check_revision(ws, body.revision)
        ts = ws.result.typed
        if body.device not in ts.devices_by_name:
            fail(404, f"unknown device {body.device!r}")
        try:
            expr = parse_expression(body.expr)
        except ParseError as exc:
            fail(422, "; ".join(d.render() for d in exc.diagnostics))
        sort, diags = type_expr(ts, body.device, expr)
        if diags or sort is INVALID:
            fail(
                422,
                "; ".join(d.message for d in diags) or "expression is invalid",
            )
        if sort not in ("int", "bool"):
            fail(422, f"expression is not primitive: {sort}")
        flat = body.flat if body.flat is not None else ws.last_found.get(body.device)
        root = partial_tree(ts, body.device, dict(flat)) if flat else {}
        try:
            value = eval_expr(ts, expr, root, device=body.device)
        except MissingBinding as exc:
            if flat is None:
                fail(
                    422,
                    "no configuration to evaluate against; solve first",
                )
            fail(422, str(exc))
        return {"revision": ws.revision, "value": value, "sort": sort}

    @app.get("/workspace/{wid}/export/{device}", response_class=PlainTextResponse)
    def export(wid: str, device: str):
        ws = get_ws(wid)
        ts = ws.result.typed
        if device not in ts.devices_by_name:
            raise HTTPException(404, f"unknown device {device!r}")
        if not ws.result.clean("device", device):
            raise HTTPException(422, f"device {device!r} has errors")
        return render_model(lower_device(ts, device))

    return app

"""Command line front end.

Subcommands:

  check    parse, analyze and decide inhabitance of every definition
  test     run scenario blocks and judge their expectations
  solve    find one device configuration under ad hoc bindings
  inhabit  inhabitance of a single definition or all of them
  export   print a device's flat constraint model
  bench    time translation vs solving separately
  serve    start the HTTP service

Results go to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 spec problems or failed scenarios, 2 usage problems (bad paths,
unknown devices, unreadable files), 3 empty space, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from csx.ast import Objective
from csx.explore import (
    EmptySpace,
    ExplorationEngine,
    Found,
    Inhabitance,
    Job,
    analyze_workspace,
    job_of_scenario,
    load_workspace,
    lower_job,
)
from csx.lower import lower_device, render_model
from csx.parser import ParseError, parse_expression
from csx.semantics import PathError, type_expr
from csx.solver import Budget, DomainBox, check_sat, optimize

DEFAULT_CACHE_DIR = ".csx-cache"


def _read_files(paths: list[str]) -> dict[str, str]:
    files: dict[str, str] = {}
    for p in paths:
        files[p] = Path(p).read_text()
    return files


def _box(args) -> DomainBox:
    box = DomainBox()
    if args.int_min is not None:
        box.int_lo = args.int_min
    if args.int_max is not None:
        box.int_hi = args.int_max
    return box


def _budget(args) -> Budget:
    budget = Budget()
    if args.budget_nodes is not None:
        budget.max_nodes = args.budget_nodes
    if args.budget_ms is not None:
        budget.max_ms = args.budget_ms
    elif os.environ.get("CSX_BUDGET_MS"):
        budget.max_ms = int(os.environ["CSX_BUDGET_MS"])
    return budget


def _engine(args) -> ExplorationEngine:
    cache_dir = None if args.no_cache else args.cache_dir
    return ExplorationEngine(cache_dir, _box(args), _budget(args))


def _load(args):
    """Read and analyze the workspace; print diagnostics as they are."""
    files = _read_files(args.files)
    result = load_workspace(files)
    for d in result.diagnostics:
        print(d.render(), file=sys.stderr)
    return result


def _parse_set(text: str) -> tuple[tuple[str, ...], int | bool]:
    if "=" not in text:
        raise ValueError(f"--set needs path=value, got {text!r}")
    raw_path, raw_value = text.split("=", 1)
    path = tuple(seg.strip() for seg in raw_path.strip().split("."))
    raw_value = raw_value.strip()
    if raw_value == "true":
        return path, True
    if raw_value == "false":
        return path, False
    try:
        return path, int(raw_value)
    except ValueError:
        raise ValueError(f"value {raw_value!r} is not an int, true or false")


def _parse_objective(ts, device: str, text: str) -> Objective:
    if ":" not in text:
        raise ValueError("--objective needs sense:expression")
    sense, raw = text.split(":", 1)
    sense = sense.strip()
    if sense not in ("minimize", "maximize"):
        raise ValueError(f"objective sense must be minimize or maximize, got {sense!r}")
    expr = parse_expression(raw)
    sort, diags = type_expr(ts, device, expr)
    if diags:
        raise ValueError("; ".join(d.message for d in diags))
    if sort != "int":
        raise ValueError(f"objective must be int, got {sort}")
    return Objective(sense, expr)


def _parse_constraint(ts, device: str, text: str):
    expr = parse_expression(text)
    sort, diags = type_expr(ts, device, expr)
    if diags:
        raise ValueError("; ".join(d.message for d in diags))
    if sort != "bool":
        raise ValueError(f"constraint must be bool, got {sort}")
    return expr


# --- subcommands ------------------------------------------------------------


def cmd_check(args) -> int:
    engine = _engine(args)
    files = _read_files(args.files)
    report = analyze_workspace(
        files, engine, run_scenarios=False
    )
    result = report.result
    for d in result.diagnostics:
        print(d.render(), file=sys.stderr)
    rows = []
    for kind, node in result.typed.spec.definitions():
        if kind == "scenario":
            continue
        if (kind, node.name) in report.inhabitance:
            verdict = report.inhabitance[(kind, node.name)].value
        else:
            verdict = "skipped"
        rows.append((kind, node.name, verdict))
    if args.json:
        print(
            json.dumps(
                {
                    "ok": report.ok,
                    "diagnostics": [d.render() for d in result.diagnostics],
                    "definitions": [
                        {"kind": k, "name": n, "inhabitance": v}
                        for k, n, v in rows
                    ],
                    "solverCalls": report.solver_calls,
                },
                indent=2,
            )
        )
    else:
        for kind, name, verdict in rows:
            print(f"{kind} {name}: {verdict}")
        print(f"solver calls: {report.solver_calls}")
    return 0 if report.ok else 1


def cmd_test(args) -> int:
    engine = _engine(args)
    result = _load(args)
    if not result.ok:
        return 1
    ts = result.typed
    names = args.scenario or [
        node.name
        for kind, node in ts.spec.definitions()
        if kind == "scenario"
    ]
    reports = []
    for name in names:
        if name not in ts.scenarios_by_name:
            print(f"unknown scenario {name!r}", file=sys.stderr)
            return 2
        reports.append(engine.run_scenario(ts, name))
    if args.json:
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        for r in reports:
            print(f"scenario {r.scenario}: {r.status}")
            if r.objective is not None:
                print(f"  objective = {r.objective}")
            for e in r.expectations:
                mark = {True: "pass", False: "FAIL", None: "----"}[e.passed]
                print(f"  {mark}  {e.text}")
        passed = sum(r.passed for r in reports)
        print(f"{passed} of {len(reports)} scenarios passed")
    return 0 if all(r.passed for r in reports) else 1


def cmd_solve(args) -> int:
    engine = _engine(args)
    result = _load(args)
    if not result.ok:
        return 1
    ts = result.typed
    if args.device not in ts.devices_by_name:
        print(f"unknown device {args.device!r}", file=sys.stderr)
        return 2
    try:
        bindings = tuple(_parse_set(s) for s in args.set or [])
        objective = (
            _parse_objective(ts, args.device, args.objective)
            if args.objective
            else None
        )
        constraints = tuple(
            _parse_constraint(ts, args.device, c) for c in args.constraint or []
        )
    except (ValueError, ParseError) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    job = Job(args.device, bindings, constraints, objective)
    try:
        outcome = engine.find_configuration(ts, job)
    except PathError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if isinstance(outcome, Found):
        cfg = outcome.configuration
        if args.format == "json":
            print(
                json.dumps(
                    {
                        "status": "found",
                        "objective": outcome.objective,
                        "configuration": cfg.to_json(),
                    },
                    indent=2,
                )
            )
        else:
            if outcome.objective is not None:
                print(f"objective = {outcome.objective}")
            print(
                cfg.render_tree() if args.format == "tree" else cfg.render_flat()
            )
        return 0
    if isinstance(outcome, EmptySpace):
        if args.format == "json":
            print(json.dumps({"status": "empty"}, indent=2))
        else:
            print("no configuration exists within the box", file=sys.stderr)
        return 3
    if args.format == "json":
        print(
            json.dumps(
                {
                    "status": "exhausted",
                    "objective": outcome.objective,
                    "configuration": (
                        outcome.configuration.to_json()
                        if outcome.configuration is not None
                        else None
                    ),
                },
                indent=2,
            )
        )
    else:
        print("search budget exhausted before an answer", file=sys.stderr)
        if outcome.configuration is not None:
            if outcome.objective is not None:
                print(f"best found objective = {outcome.objective}")
            print(outcome.configuration.render_flat())
    return 4


def cmd_inhabit(args) -> int:
    engine = _engine(args)
    result = _load(args)
    if not result.ok and args.name is None:
        return 1
    ts = result.typed
    targets = []
    if args.name is not None:
        kind = args.kind
        if kind is None:
            for k, table in (
                ("type", ts.types_by_name),
                ("action", ts.actions_by_name),
                ("device", ts.devices_by_name),
            ):
                if args.name in table:
                    kind = k
                    break
        if kind is None:
            print(f"unknown definition {args.name!r}", file=sys.stderr)
            return 2
        targets.append((kind, args.name))
    else:
        targets = [
            (kind, node.name)
            for kind, node in ts.spec.definitions()
            if kind != "scenario" and result.clean(kind, node.name)
        ]
    verdicts = []
    for kind, name in targets:
        v = engine.check_inhabitance(ts, kind, name)
        verdicts.append(v)
        print(f"{kind} {name}: {v.value}")
    if any(v is Inhabitance.UNINHABITED for v in verdicts):
        return 1
    if any(v is Inhabitance.UNKNOWN for v in verdicts):
        return 4
    return 0


def cmd_export(args) -> int:
    result = _load(args)
    if not result.ok:
        return 1
    ts = result.typed
    if args.device not in ts.devices_by_name:
        print(f"unknown device {args.device!r}", file=sys.stderr)
        return 2
    model = lower_device(ts, args.device)
    if args.objective:
        try:
            obj = _parse_objective(ts, args.device, args.objective)
        except (ValueError, ParseError) as exc:
            print(str(exc), file=sys.stderr)
            return 2
        from csx.lower import lower_expr
        from csx.model import ConstraintModel

        model = ConstraintModel(
            model.vars, model.constraints, (obj.sense, lower_expr(ts, obj.expr))
        )
    print(
        f"{args.device}: {len(model.vars)} variables,"
        f" {len(model.constraints)} constraints",
        file=sys.stderr,
    )
    text = render_model(model)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    result = _load(args)
    if not result.ok:
        return 1
    ts = result.typed
    box = _box(args)
    budget = _budget(args)
    names = args.scenario or [
        node.name
        for kind, node in ts.spec.definitions()
        if kind == "scenario"
    ]
    rows = []
    for name in names:
        if name not in ts.scenarios_by_name:
            print(f"unknown scenario {name!r}", file=sys.stderr)
            return 2
        sc = ts.scenarios_by_name[name]
        job = job_of_scenario(sc)
        translation: list[int] = []
        solving: list[int] = []
        for _ in range(args.iterations):
            t0 = time.perf_counter_ns()
            model = lower_job(ts, job)
            t1 = time.perf_counter_ns()
            if model.objective is not None:
                optimize(model, box, budget)
            else:
                check_sat(model, box, budget)
            t2 = time.perf_counter_ns()
            translation.append(t1 - t0)
            solving.append(t2 - t1)
        rows.append(
            {
                "scenario": name,
                "device": sc.device,
                "iterations": args.iterations,
                "translation_ns": translation,
                "translation_mean_ns": sum(translation) // len(translation),
                "solving_ns": solving,
                "solving_mean_ns": sum(solving) // len(solving),
            }
        )
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        for r in rows:
            print(
                f"scenario {r['scenario']} (device {r['device']},"
                f" {r['iterations']} iterations)"
            )
            print(f"  {'iter':>4}  {'translation_ns':>14}  {'solving_ns':>12}")
            pairs = zip(r["translation_ns"], r["solving_ns"])
            for i, (t, s) in enumerate(pairs, start=1):
                print(f"  {i:>4}  {t:>14}  {s:>12}")
            print(
                f"  {'mean':>4}  {r['translation_mean_ns']:>14}"
                f"  {r['solving_mean_ns']:>12}"
            )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from csx.service import create_app

    cache_dir = None if args.no_cache else args.cache_dir
    app = create_app(cache_dir=cache_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# --- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="csx",
        description="Check, explore and serve device configuration specs.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--int-min", type=int, default=None)
    common.add_argument("--int-max", type=int, default=None)
    common.add_argument("--budget-nodes", type=int, default=None)
    common.add_argument("--budget-ms", type=int, default=None)
    common.add_argument("--cache-dir", default=DEFAULT_CACHE_DIR)
    common.add_argument("--no-cache", action="store_true")
    common.add_argument(
        "--seed",
        type=int,
        default=None,
        help="seed for generated workloads; every current command is"
        " deterministic, the flag is accepted for script compatibility",
    )

    files = argparse.ArgumentParser(add_help=False)
    files.add_argument("files", nargs="+", help="spec files (.csx)")

    p = sub.add_parser("check", parents=[common, files])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("test", parents=[common, files])
    p.add_argument("--scenario", action="append")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("solve", parents=[common, files])
    p.add_argument("--device", required=True)
    p.add_argument("--set", action="append", metavar="PATH=VALUE")
    p.add_argument("--constraint", action="append", metavar="EXPR")
    p.add_argument("--objective", metavar="SENSE:EXPR")
    p.add_argument("--format", choices=("flat", "tree", "json"), default="flat")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("inhabit", parents=[common, files])
    p.add_argument("--kind", choices=("type", "action", "device"))
    p.add_argument("--name")
    p.set_defaults(func=cmd_inhabit)

    p = sub.add_parser("export", parents=[common, files])
    p.add_argument("--device", required=True)
    p.add_argument("--objective", metavar="SENSE:EXPR")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("bench", parents=[common, files])
    p.add_argument("--scenario", action="append")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", parents=[common])
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    p.set_defaults(func=cmd_serve)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(d.render(), file=sys.stderr)
        return 2
    except OSError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

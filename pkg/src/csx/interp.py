"""Reference evaluator for device specs.

This module gives constraints their meaning directly, without the flat
model or the solver: a candidate configuration is a nested record (plain
dicts at aggregate positions, ints and bools at the leaves) and
`satisfies` decides whether it is a model of a device.  It is the
ground truth the lowering pipeline is tested against: lowering a device
and evaluating the flat constraints must agree with `satisfies` on every
well-formed configuration.

`enumerate_configurations` walks an entire boxed space and yields every
model in lexicographic leaf order.  That is only feasible for small
boxes, which is exactly its job: an exhaustive oracle.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Union

from csx.ast import (
    Binary,
    BoolLit,
    DeviceDef,
    Expr,
    IntLit,
    Proj,
    Ref,
    Unary,
)
from csx.lower import leaf_vars, qualified_name
from csx.semantics import (
    CompSort,
    ResolvedComponent,
    ResolvedDerived,
    ResolvedLocParam,
    ResolvedLocation,
    ResolvedParam,
    ResolvedProp,
    TypedSpec,
)
from csx.solver import DomainBox

ModelValue = Union[int, bool, dict]


class MissingBinding(Exception):
    """A configuration value lacks a field an evaluation needs."""

    def __init__(self, message: str, path: tuple[str, ...] = ()):
        super().__init__(message)
        self.path = path


class SpaceTooLarge(Exception):
    """Exhaustive enumeration would exceed the configured cap."""


# --- expression evaluation ---------------------------------------------------


def eval_expr(
    ts: TypedSpec,
    e: Expr,
    root: dict,
    local: dict | None = None,
    renaming: dict[str, str] | None = None,
    device: str | None = None,
):
    """Evaluate a resolved expression against a configuration value.

    `root` is the device-level record; `local` layers component
    parameters or type properties over it for bare references, and
    `renaming` maps action location parameters to the device locations a
    component wired them to.  Logical operators short-circuit.
    """
    r = renaming or {}
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Unary):
        v = eval_expr(ts, e.operand, root, local, r, device)
        return -v if e.op == "neg" else (not v)
    if isinstance(e, Binary):
        if e.op in ("and", "or", "implies"):
            a = eval_expr(ts, e.left, root, local, r, device)
            if e.op == "and":
                return bool(a) and bool(
                    eval_expr(ts, e.right, root, local, r, device)
                )
            if e.op == "or":
                return bool(a) or bool(
                    eval_expr(ts, e.right, root, local, r, device)
                )
            return (not a) or bool(eval_expr(ts, e.right, root, local, r, device))
        a = eval_expr(ts, e.left, root, local, r, device)
        b = eval_expr(ts, e.right, root, local, r, device)
        op = e.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise MissingBinding(f"unknown operator {op!r}")
    if isinstance(e, Ref):
        res = ts.resolution_of(e)
        if isinstance(res, (ResolvedProp, ResolvedParam)):
            if local is None or res.name not in local:
                raise MissingBinding(f"no value for {res.name!r}", (res.name,))
            return local[res.name]
        if isinstance(res, ResolvedLocParam):
            loc = r.get(res.name, res.name)
            if loc not in root:
                raise MissingBinding(f"no value for location {loc!r}", (loc,))
            return root[loc]
        if isinstance(res, ResolvedLocation):
            if res.name not in root:
                raise MissingBinding(f"no value for location {res.name!r}", (res.name,))
            return root[res.name]
        if isinstance(res, ResolvedComponent):
            if res.name not in root:
                raise MissingBinding(
                    f"no value for component {res.name!r}", (res.name,)
                )
            return root[res.name]
        if isinstance(res, ResolvedDerived):
            return eval_expr(ts, res.body, root, local, r, device)
        raise MissingBinding(f"unresolved reference {e.name!r}")
    if isinstance(e, Proj):
        res = ts.resolution_of(e)
        base = eval_expr(ts, e.base, root, local, r, device)
        if not isinstance(base, dict):
            raise MissingBinding(f"projection {e.name!r} off a non-record value")
        if isinstance(res, (ResolvedProp, ResolvedParam)):
            if e.name not in base:
                raise MissingBinding(f"no value for {e.name!r}", (e.name,))
            return base[e.name]
        if isinstance(res, ResolvedDerived):
            if res.owner_kind == "action":
                # the body lives in the component's action scope, so its
                # location parameters follow that component's wiring
                comp = ts.resolution_of(e.base)
                if isinstance(comp, ResolvedComponent) and device is not None:
                    r2 = ts.renaming_of(device, comp.name)
                else:
                    r2 = {}
                return eval_expr(ts, res.body, root, base, r2, device)
            return eval_expr(ts, res.body, root, base, {}, device)
        raise MissingBinding(f"unresolved projection {e.name!r}")
    raise MissingBinding(f"cannot evaluate {type(e).__name__}")


# --- configuration structure --------------------------------------------------


def _check_type_value(ts: TypedSpec, tname: str, v: ModelValue, path: tuple) -> bool:
    """Structural + domain check, then the type's own constraints."""
    td = ts.types_by_name.get(tname)
    if td is None:
        raise MissingBinding(f"unknown type {tname!r}", path)
    if not isinstance(v, dict):
        raise MissingBinding(f"{'.'.join(path)} must be a record", path)
    expected = {p.name for p in td.def_props}
    for name in expected - v.keys():
        raise MissingBinding(f"{'.'.join(path + (name,))} is missing", path + (name,))
    for name in v.keys() - expected:
        raise MissingBinding(
            f"{'.'.join(path + (name,))} is not a property of {tname}",
            path + (name,),
        )
    for p in td.def_props:
        pv = v[p.name]
        if p.type == "int":
            if type(pv) is not int:
                return False
        elif p.type == "bool":
            if type(pv) is not bool:
                return False
        else:
            if not _check_type_value(ts, p.type, pv, path + (p.name,)):
                return False
    return all(
        bool(eval_expr(ts, c, v, local=v)) for c in td.constraints
    )


def satisfies(ts: TypedSpec, value: dict, device: str) -> bool:
    """True when the nested record is a model of the device: every leaf
    in its sort's domain and every constraint (type, action, component,
    device) true.  Structural gaps raise MissingBinding."""
    dd = ts.devices_by_name.get(device)
    if dd is None:
        raise MissingBinding(f"unknown device {device!r}")
    if not isinstance(value, dict):
        raise MissingBinding("a device configuration must be a record")
    loc_names = {loc.name for loc in dd.locations}
    comp_names = {c.name for c in dd.components}
    for name in (loc_names | comp_names) - value.keys():
        raise MissingBinding(f"{name} is missing", (name,))
    for name in value.keys() - (loc_names | comp_names):
        raise MissingBinding(f"{name} is not part of device {device}", (name,))

    for loc in dd.locations:
        if not _check_type_value(ts, loc.type, value[loc.name], (loc.name,)):
            return False

    for comp in dd.components:
        cv = value[comp.name]
        ad = ts.actions_by_name.get(comp.action)
        if ad is None:
            raise MissingBinding(f"unknown action {comp.action!r}", (comp.name,))
        if not isinstance(cv, dict):
            raise MissingBinding(f"{comp.name} must be a record", (comp.name,))
        expected = {p.name for p in ad.params}
        for name in expected - cv.keys():
            raise MissingBinding(
                f"{comp.name}.{name} is missing", (comp.name, name)
            )
        for name in cv.keys() - expected:
            raise MissingBinding(
                f"{comp.name}.{name} is not a parameter of {ad.name}",
                (comp.name, name),
            )
        for p in ad.params:
            pv = cv[p.name]
            if p.type == "int" and type(pv) is not int:
                return False
            if p.type == "bool" and type(pv) is not bool:
                return False
        renaming = ts.renaming_of(dd.name, comp.name)
        for c in ad.constraints:
            if not bool(
                eval_expr(ts, c, value, local=cv, renaming=renaming, device=device)
            ):
                return False
        for c in comp.constraints:
            if not bool(eval_expr(ts, c, value, local=cv, device=device)):
                return False

    return all(
        bool(eval_expr(ts, c, value, device=device)) for c in dd.constraints
    )


# --- lifting between flat assignments and nested records ----------------------


def lift(ts: TypedSpec, device: str, flat: dict) -> dict:
    """Build the nested record a flat variable assignment denotes.  The
    record mirrors the device's full structure: a component with no
    parameters still appears, as an empty record."""
    dd = ts.devices_by_name.get(device)
    if dd is None:
        raise MissingBinding(f"unknown device {device!r}")

    def leaf(parts: tuple[str, ...]):
        name = qualified_name(parts)
        if name not in flat:
            raise MissingBinding(f"assignment is missing {name!r}", parts)
        return flat[name]

    def lift_type(tname: str, prefix: tuple[str, ...]) -> dict:
        td = ts.types_by_name.get(tname)
        if td is None:
            raise MissingBinding(f"unknown type {tname!r}", prefix)
        out: dict = {}
        for p in td.def_props:
            if p.type in ("int", "bool"):
                out[p.name] = leaf(prefix + (p.name,))
            else:
                out[p.name] = lift_type(p.type, prefix + (p.name,))
        return out

    value: dict = {}
    for loc in dd.locations:
        value[loc.name] = lift_type(loc.type, (loc.name,))
    for comp in dd.components:
        ad = ts.actions_by_name.get(comp.action)
        if ad is None:
            raise MissingBinding(f"unknown action {comp.action!r}", (comp.name,))
        value[comp.name] = {p.name: leaf((comp.name, p.name)) for p in ad.params}
    return value


def flatten(ts: TypedSpec, device: str, value: dict) -> dict:
    """Inverse of lift: read every leaf out of a nested record."""
    flat: dict = {}
    for parts, _sort in leaf_vars(ts, device):
        d: ModelValue = value
        for seg in parts:
            if not isinstance(d, dict) or seg not in d:
                raise MissingBinding(
                    f"configuration is missing {'.'.join(parts)}", parts
                )
            d = d[seg]
        flat[qualified_name(parts)] = d
    return flat


# --- exhaustive enumeration ----------------------------------------------------


def enumerate_configurations(
    ts: TypedSpec,
    device: str,
    box: DomainBox | None = None,
    cap: int = 10_000_000,
) -> Iterator[dict]:
    """Yield every model of the device within the box, in lexicographic
    order of the declaration-ordered leaves.  Raises SpaceTooLarge when
    the raw space (before constraints) exceeds the cap."""
    box = box if box is not None else DomainBox()
    leaves = leaf_vars(ts, device)
    domains: list[tuple] = []
    total = 1
    for parts, sort in leaves:
        lo, hi = box.bounds(qualified_name(parts), sort)
        if sort == "bool":
            domains.append((False, True))
        else:
            if hi < lo:
                return
            domains.append(tuple(range(lo, hi + 1)))
        total *= len(domains[-1])
        if total > cap:
            raise SpaceTooLarge(
                f"{device} has more than {cap} raw configurations in this box"
            )
    names = [qualified_name(parts) for parts, _ in leaves]
    for combo in itertools.product(*domains):
        value = lift(ts, device, dict(zip(names, combo)))
        if satisfies(ts, value, device):
            yield value

"""Lowering CSX devices to flat constraint models.

The naming scheme is compositional: a variable's name is the underscore
join of the declaration path that reaches it.  A location "a" of a type
with an int property "w" becomes "a_w"; a parameter "t" of component "c"
becomes "c_t"; nesting just extends the path.  Because identifiers cannot
contain underscores, the join is injective and solutions map back to the
nested value they came from.

Reference lowering, for a constraint seen in namespace ns with location
renaming r:

  * defining properties and parameters become the namespace-qualified
    variable name;
  * location references resolve at device level: through r when the
    reference is an action's location parameter, directly otherwise;
  * derived properties inline their body at the reference site, in the
    namespace of whatever the reference was projected from;
  * projection appends "_segment" to the lowered base name.

Inhabitance models reuse the same rules with synthetic namespaces built
from the reserved word "inhab", which no user identifier can collide
with.
"""

from __future__ import annotations

from csx.ast import (
    Binary,
    BoolLit,
    Expr,
    IntLit,
    Proj,
    Ref,
    Unary,
)
from csx.model import ConstraintModel, FBinary, FBool, FInt, FUnary, FVar, FlatExpr
from csx.semantics import (
    ResolvedComponent,
    ResolvedDerived,
    ResolvedLocParam,
    ResolvedLocation,
    ResolvedParam,
    ResolvedProp,
    TypedSpec,
)

INHAB = "inhab"


class LowerError(Exception):
    """Internal error: lowering was asked to process an unresolved or
    ill-typed tree.  Run analysis first and lower only clean definitions."""


def qualified_name(parts) -> str:
    parts = tuple(parts)
    if not parts:
        raise LowerError("empty name path")
    return "_".join(parts)


# --- reference paths -------------------------------------------------------


def _component_renaming(ts: TypedSpec, res: ResolvedComponent) -> dict[str, str]:
    try:
        return ts.renaming_of(res.device, res.name)
    except KeyError:
        raise LowerError(
            f"no renaming for component {res.name!r} of {res.device!r}"
        ) from None


def _path_of(ts: TypedSpec, e: Expr, ns: tuple[str, ...], r: dict[str, str]):
    """Lower a reference chain to its name parts.  Returns (parts, renaming)
    where the renaming applies to derived bodies inlined at this base."""
    res = ts.resolution_of(e)
    if isinstance(e, Ref):
        if res is None:
            raise LowerError(f"unresolved reference {e.name!r}")
        if isinstance(res, (ResolvedProp, ResolvedParam)):
            return ns + (e.name,), r
        if isinstance(res, ResolvedLocParam):
            return (r.get(e.name, e.name),), {}
        if isinstance(res, ResolvedLocation):
            return (e.name,), {}
        if isinstance(res, ResolvedComponent):
            return (res.name,), _component_renaming(ts, res)
        if isinstance(res, ResolvedDerived):
            return _path_of(ts, res.body, ns, r)
        raise LowerError(f"reference {e.name!r} resolved to {res!r}")
    if isinstance(e, Proj):
        base_parts, base_r = _path_of(ts, e.base, ns, r)
        if isinstance(res, (ResolvedProp, ResolvedParam)):
            return base_parts + (e.name,), base_r
        if isinstance(res, ResolvedDerived):
            return _path_of(ts, res.body, base_parts, base_r)
        raise LowerError(f"projection {e.name!r} resolved to {res!r}")
    raise LowerError(f"{e!r} is not a reference chain")


def lower_expr(
    ts: TypedSpec, e: Expr, ns: tuple[str, ...] = (), r: dict[str, str] | None = None
) -> FlatExpr:
    """Lower one expression under namespace ns and location renaming r."""
    if r is None:
        r = {}
    if isinstance(e, IntLit):
        return FInt(e.value)
    if isinstance(e, BoolLit):
        return FBool(e.value)
    if isinstance(e, Unary):
        return FUnary(e.op, lower_expr(ts, e.operand, ns, r))
    if isinstance(e, Binary):
        return FBinary(
            e.op, lower_expr(ts, e.left, ns, r), lower_expr(ts, e.right, ns, r)
        )
    if isinstance(e, (Ref, Proj)):
        res = ts.resolution_of(e)
        if isinstance(res, ResolvedDerived):
            if isinstance(e, Ref):
                # bare derived reference: inline in the current context
                return lower_expr(ts, res.body, ns, r)
            base_parts, base_r = _path_of(ts, e.base, ns, r)
            return lower_expr(ts, res.body, base_parts, base_r)
        parts, _ = _path_of(ts, e, ns, r)
        return FVar(qualified_name(parts))
    raise LowerError(f"cannot lower {e!r}")


# --- device structure ------------------------------------------------------


def _type_leaves(ts: TypedSpec, type_name: str, ns: tuple[str, ...], out: list):
    td = ts.types_by_name.get(type_name)
    if td is None:
        raise LowerError(f"unknown type {type_name!r}")
    for p in td.def_props:
        if p.type in ("int", "bool"):
            out.append((ns + (p.name,), p.type))
        else:
            _type_leaves(ts, p.type, ns + (p.name,), out)


def leaf_vars(ts: TypedSpec, device: str) -> list[tuple[tuple[str, ...], str]]:
    """The (name parts, sort) of every variable a device lowers to, in
    declaration order: locations depth first, then component parameters."""
    dd = ts.devices_by_name.get(device)
    if dd is None:
        raise LowerError(f"unknown device {device!r}")
    out: list[tuple[tuple[str, ...], str]] = []
    for loc in dd.locations:
        _type_leaves(ts, loc.type, (loc.name,), out)
    for comp in dd.components:
        ad = ts.actions_by_name.get(comp.action)
        if ad is None:
            raise LowerError(f"unknown action {comp.action!r}")
        for p in ad.params:
            out.append(((comp.name, p.name), p.type))
    return out


def _emit_type(ts: TypedSpec, type_name: str, ns, vars_out, cons_out):
    td = ts.types_by_name.get(type_name)
    if td is None:
        raise LowerError(f"unknown type {type_name!r}")
    for p in td.def_props:
        if p.type in ("int", "bool"):
            vars_out.append((qualified_name(ns + (p.name,)), p.type))
        else:
            _emit_type(ts, p.type, ns + (p.name,), vars_out, cons_out)
    for c in td.constraints:
        cons_out.append(lower_expr(ts, c, ns, {}))


def lower_device(ts: TypedSpec, device: str) -> ConstraintModel:
    """Lower a device to its flat constraint model.

    Deterministic: equal inputs produce identical models, constraint
    order included.
    """
    dd = ts.devices_by_name.get(device)
    if dd is None:
        raise LowerError(f"unknown device {device!r}")
    vars_out: list[tuple[str, str]] = []
    cons_out: list[FlatExpr] = []
    for loc in dd.locations:
        _emit_type(ts, loc.type, (loc.name,), vars_out, cons_out)
    for comp in dd.components:
        ad = ts.actions_by_name.get(comp.action)
        if ad is None:
            raise LowerError(f"unknown action {comp.action!r}")
        for p in ad.params:
            vars_out.append((qualified_name((comp.name, p.name)), p.type))
        renaming = ts.renaming_of(device, comp.name)
        for c in ad.constraints:
            cons_out.append(lower_expr(ts, c, (comp.name,), renaming))
        for c in comp.constraints:
            cons_out.append(lower_expr(ts, c, (comp.name,), {}))
    for c in dd.constraints:
        cons_out.append(lower_expr(ts, c, (), {}))
    return ConstraintModel(tuple(vars_out), tuple(cons_out))


def lower_type_inhabitance(ts: TypedSpec, type_name: str) -> ConstraintModel:
    """Model whose satisfiability decides whether any value of the type
    exists: one synthetic location of the type."""
    if type_name not in ts.types_by_name:
        raise LowerError(f"unknown type {type_name!r}")
    vars_out: list[tuple[str, str]] = []
    cons_out: list[FlatExpr] = []
    _emit_type(ts, type_name, (INHAB,), vars_out, cons_out)
    return ConstraintModel(tuple(vars_out), tuple(cons_out))


def lower_action_inhabitance(ts: TypedSpec, action: str) -> ConstraintModel:
    """Model whose satisfiability decides whether the action admits any
    assignment: each location parameter expands under its own name, the
    parameters live under a synthetic component, and the action
    constraints apply under the identity renaming."""
    ad = ts.actions_by_name.get(action)
    if ad is None:
        raise LowerError(f"unknown action {action!r}")
    vars_out: list[tuple[str, str]] = []
    cons_out: list[FlatExpr] = []
    for lp in ad.loc_params:
        _emit_type(ts, lp.type, (lp.name,), vars_out, cons_out)
    for p in ad.params:
        vars_out.append((qualified_name((INHAB, p.name)), p.type))
    identity = {lp.name: lp.name for lp in ad.loc_params}
    for c in ad.constraints:
        cons_out.append(lower_expr(ts, c, (INHAB,), identity))
    return ConstraintModel(tuple(vars_out), tuple(cons_out))


def lower_device_inhabitance(ts: TypedSpec, device: str) -> ConstraintModel:
    return lower_device(ts, device)


# --- rendering -------------------------------------------------------------


def render_model(model: ConstraintModel, dialect: str = "interchange") -> str:
    """Serialize a model.

    "interchange" is a small, conventional constraint-modelling text:
    var/constraint/solve statements, one per line, expressions fully
    parenthesized.  "debug" is a labelled dump for humans.
    """
    from csx.model import render_flat

    if dialect == "interchange":
        lines = [f"var {sort} : {name};" for name, sort in model.vars]
        lines += [f"constraint {render_flat(c)};" for c in model.constraints]
        if model.objective is None:
            lines.append("solve satisfy;")
        else:
            sense, e = model.objective
            lines.append(f"solve {sense} {render_flat(e)};")
        return "\n".join(lines) + "\n"
    if dialect == "debug":
        lines = [f"model: {len(model.vars)} vars, {len(model.constraints)} constraints"]
        lines += [f"  var  {name}: {sort}" for name, sort in model.vars]
        lines += [f"  con  {render_flat(c)}" for c in model.constraints]
        if model.objective is not None:
            lines.append(f"  goal {model.objective[0]} {render_flat(model.objective[1])}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown dialect {dialect!r}")

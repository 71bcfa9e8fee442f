"""Pretty printer for CSX trees.

The output reparses to a tree that compares equal to the input
(equality ignores spans).  Member groups print in declaration order
within their group; the parser accepts interleaved members, so the
printed grouping is a normal form, not a loss of information.
"""

from __future__ import annotations

from csx.ast import (
    ActionDef,
    Binary,
    Binding,
    BoolLit,
    ComponentDef,
    DeviceDef,
    Expr,
    IntLit,
    Proj,
    Ref,
    ScenarioDef,
    Spec,
    TypeDef,
    Unary,
)

_PREC = {
    "implies": 1,
    "or": 2,
    "and": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6,
}
_UNARY_PREC = 7
_ATOM_PREC = 8


def format_expr(e: Expr) -> str:
    return _fmt(e, 0)


def _fmt(e: Expr, ctx: int) -> str:
    if isinstance(e, IntLit):
        # a negative literal needs parens under unary minus or a projection
        if e.value < 0 and ctx >= _UNARY_PREC:
            return f"({e.value})"
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Proj):
        return f"{_fmt(e.base, _ATOM_PREC)}.{e.name}"
    if isinstance(e, Unary):
        sym = "-" if e.op == "neg" else "not "
        body = f"{sym}{_fmt(e.operand, _UNARY_PREC)}"
        return f"({body})" if ctx > _UNARY_PREC else body
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        if e.op == "implies":
            left = _fmt(e.left, prec + 1)
            right = _fmt(e.right, prec)
        elif prec == 4:  # comparisons do not associate
            left = _fmt(e.left, prec + 1)
            right = _fmt(e.right, prec + 1)
        else:
            left = _fmt(e.left, prec)
            right = _fmt(e.right, prec + 1)
        body = f"{left} {e.op} {right}"
        return f"({body})" if ctx > prec else body
    raise TypeError(f"not an expression node: {e!r}")


def _lit(v: int | bool) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _type_lines(t: TypeDef, out: list[str]):
    out.append(f"type {t.name} {{")
    for p in t.def_props:
        out.append(f"  {p.name}: {p.type}")
    for d in t.derived_props:
        out.append(f"  derived {d.name} = {format_expr(d.body)}")
    for c in t.constraints:
        out.append(f"  [{format_expr(c)}]")
    out.append("}")


def _action_lines(a: ActionDef, out: list[str]):
    sig = ", ".join(f"{lp.name}: {lp.type}" for lp in a.loc_params)
    out.append(f"action {a.name}({sig}) {{")
    for p in a.params:
        out.append(f"  parameter {p.name}: {p.type}")
    for d in a.derived_props:
        out.append(f"  derived {d.name} = {format_expr(d.body)}")
    for c in a.constraints:
        out.append(f"  [{format_expr(c)}]")
    out.append("}")


def _component_lines(c: ComponentDef, out: list[str]):
    args = ", ".join(a.name for a in c.loc_args)
    head = f"  component {c.name} = {c.action}({args})"
    if not c.constraints:
        out.append(head)
        return
    out.append(head + " {")
    for e in c.constraints:
        out.append(f"    [{format_expr(e)}]")
    out.append("  }")


def _device_lines(d: DeviceDef, out: list[str]):
    out.append(f"device {d.name} {{")
    for loc in d.locations:
        out.append(f"  location {loc.name}: {loc.type}")
    for comp in d.components:
        _component_lines(comp, out)
    for dp in d.derived_props:
        out.append(f"  derived {dp.name} = {format_expr(dp.body)}")
    for c in d.constraints:
        out.append(f"  [{format_expr(c)}]")
    out.append("}")


def _scenario_lines(s: ScenarioDef, out: list[str]):
    out.append(f"scenario {s.name} for {s.device} {{")
    for b in s.bindings:
        out.append(f"  {'.'.join(b.path)} = {_lit(b.value)}")
    if s.objective is not None:
        out.append(f"  objective {s.objective.sense} {format_expr(s.objective.expr)}")
    for c in s.extra_constraints:
        out.append(f"  [{format_expr(c)}]")
    for e in s.expectations:
        out.append(f"  expect [{format_expr(e.expr)}]")
    out.append("}")


def pretty_print(spec: Spec) -> str:
    """Render a Spec as CSX source.  parse(pretty_print(s)) == s for every
    tree the parser can produce."""
    blocks: list[str] = []
    for kind, node in spec.definitions():
        lines: list[str] = []
        if kind == "type":
            _type_lines(node, lines)
        elif kind == "action":
            _action_lines(node, lines)
        elif kind == "device":
            _device_lines(node, lines)
        else:
            _scenario_lines(node, lines)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")

"""Flat constraint models: the target of lowering.

A ConstraintModel is a list of typed variables plus boolean constraint
expressions over them, and optionally an objective.  Variable names are
the underscore-joined qualified names produced by lowering.
"""

from __future__ import annotations

from dataclasses import dataclass


class MalformedModel(Exception):
    pass


class FlatExpr:
    __slots__ = ()


@dataclass(frozen=True)
class FVar(FlatExpr):
    name: str


@dataclass(frozen=True)
class FInt(FlatExpr):
    value: int


@dataclass(frozen=True)
class FBool(FlatExpr):
    value: bool


@dataclass(frozen=True)
class FUnary(FlatExpr):
    op: str  # "neg" | "not"
    operand: FlatExpr


@dataclass(frozen=True)
class FBinary(FlatExpr):
    op: str
    left: FlatExpr
    right: FlatExpr


def flat_vars(e: FlatExpr):
    """Variable names referenced by a flat expression, in first-use order."""
    out: list[str] = []
    seen: set[str] = set()

    def walk(n: FlatExpr):
        if isinstance(n, FVar):
            if n.name not in seen:
                seen.add(n.name)
                out.append(n.name)
        elif isinstance(n, FUnary):
            walk(n.operand)
        elif isinstance(n, FBinary):
            walk(n.left)
            walk(n.right)

    walk(e)
    return out


_RENDER_OPS = {
    "and": "/\\",
    "or": "\\/",
    "implies": "->",
}


def render_flat(e: FlatExpr) -> str:
    """Fully parenthesized text for one flat expression, in conventional
    constraint-modelling syntax."""
    if isinstance(e, FVar):
        return e.name
    if isinstance(e, FInt):
        return str(e.value)
    if isinstance(e, FBool):
        return "true" if e.value else "false"
    if isinstance(e, FUnary):
        if e.op == "neg":
            return f"(-{render_flat(e.operand)})"
        return f"(not {render_flat(e.operand)})"
    if isinstance(e, FBinary):
        op = _RENDER_OPS.get(e.op, e.op)
        return f"({render_flat(e.left)} {op} {render_flat(e.right)})"
    raise TypeError(f"not a flat expression: {e!r}")


@dataclass(frozen=True)
class ConstraintModel:
    """Variables appear in declaration order; constraint order is the
    deterministic emission order of lowering."""

    vars: tuple[tuple[str, str], ...]  # (name, "int" | "bool")
    constraints: tuple[FlatExpr, ...]
    objective: tuple[str, FlatExpr] | None = None  # ("minimize"|"maximize", e)

    def var_names(self) -> list[str]:
        return [name for name, _ in self.vars]

    def sorts(self) -> dict[str, str]:
        return dict(self.vars)

    def validate(self):
        """Raise MalformedModel on duplicate or unknown variables."""
        names = set()
        for name, sort in self.vars:
            if name in names:
                raise MalformedModel(f"duplicate variable {name!r}")
            if sort not in ("int", "bool"):
                raise MalformedModel(f"variable {name!r} has sort {sort!r}")
            names.add(name)
        exprs = list(self.constraints)
        if self.objective is not None:
            exprs.append(self.objective[1])
        for e in exprs:
            for v in flat_vars(e):
                if v not in names:
                    raise MalformedModel(f"undeclared variable {v!r}")

"""Abstract syntax for CSX specifications.

All nodes are frozen dataclasses.  Equality is structural and ignores
source spans, so a tree that survives a pretty-print / reparse cycle
compares equal to the original.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, fields

RESERVED_WORDS = frozenset({
    "type", "action", "device", "component", "location", "parameter",
    "derived", "scenario", "objective", "minimize", "maximize", "expect",
    "for", "int", "bool", "true", "false", "and", "or", "implies", "not",
    "self", "inhab",
})

PRIMITIVE_SORTS = ("int", "bool")

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("and", "or", "implies")
BINARY_OPS = ARITH_OPS + CMP_OPS + LOGIC_OPS
UNARY_OPS = ("neg", "not")

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


def is_valid_ident(name: str) -> bool:
    """True for names the grammar accepts.

    Identifiers start with a letter and continue with letters or digits.
    Underscores are excluded on purpose: lowered constraint variables join
    name parts with "_", and underscore-free parts keep that join
    injective.  Reserved words are refused, including "inhab", which the
    toolchain uses for synthetic inhabitance variables.
    """
    return bool(_IDENT_RE.match(name)) and name not in RESERVED_WORDS


@dataclass(frozen=True)
class Span:
    """Half-open byte range [start, end) in a named source file.

    line/col are 1-based and refer to the start offset.  Spans never
    participate in node equality.
    """

    file: str
    start: int
    end: int
    line: int = 0
    col: int = 0

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")


NO_SPAN = Span("<none>", 0, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Span = _span()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Span = _span()


@dataclass(frozen=True)
class Ref(Expr):
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Proj(Expr):
    base: Expr
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "neg" | "not"
    operand: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # one of BINARY_OPS
    left: Expr
    right: Expr
    span: Span = _span()


@dataclass(frozen=True)
class DefProp:
    """Defining property of a type: name plus a sort, which is either a
    primitive ("int"/"bool") or the name of another type."""

    name: str
    type: str
    span: Span = _span()


@dataclass(frozen=True)
class DerivedProp:
    name: str
    body: Expr
    span: Span = _span()


@dataclass(frozen=True)
class TypeDef:
    name: str
    def_props: tuple[DefProp, ...]
    derived_props: tuple[DerivedProp, ...]
    constraints: tuple[Expr, ...]
    span: Span = _span()


@dataclass(frozen=True)
class LocParam:
    """Location parameter of an action; its sort is always a type name."""

    name: str
    type: str
    span: Span = _span()


@dataclass(frozen=True)
class Param:
    """Configurable action parameter; sort is primitive."""

    name: str
    type: str
    span: Span = _span()


@dataclass(frozen=True)
class ActionDef:
    name: str
    loc_params: tuple[LocParam, ...]
    params: tuple[Param, ...]
    derived_props: tuple[DerivedProp, ...]
    constraints: tuple[Expr, ...]
    span: Span = _span()


@dataclass(frozen=True)
class Location:
    name: str
    type: str
    span: Span = _span()


@dataclass(frozen=True)
class ArgRef:
    """A location argument in a component instantiation."""

    name: str
    span: Span = _span()


@dataclass(frozen=True)
class ComponentDef:
    name: str
    action: str
    loc_args: tuple[ArgRef, ...]
    constraints: tuple[Expr, ...]
    span: Span = _span()


@dataclass(frozen=True)
class DeviceDef:
    name: str
    locations: tuple[Location, ...]
    components: tuple[ComponentDef, ...]
    derived_props: tuple[DerivedProp, ...]
    constraints: tuple[Expr, ...]
    span: Span = _span()


@dataclass(frozen=True)
class Binding:
    """Scenario binding: a dotted path fixed to a literal value."""

    path: tuple[str, ...]
    value: int | bool
    span: Span = _span()


@dataclass(frozen=True)
class Objective:
    sense: str  # "minimize" | "maximize"
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Expectation:
    """One expected property of a scenario's outcome.

    The parser leaves the context fields empty; desugaring copies the
    scenario's bindings, extra constraints and objective into every
    expectation so each one carries its full evaluation context.
    """

    expr: Expr
    bindings: tuple[Binding, ...] = ()
    extra: tuple[Expr, ...] = ()
    objective: Objective | None = None
    span: Span = _span()


@dataclass(frozen=True)
class ScenarioDef:
    name: str
    device: str
    bindings: tuple[Binding, ...]
    extra_constraints: tuple[Expr, ...]
    objective: Objective | None
    expectations: tuple[Expectation, ...]
    span: Span = _span()


@dataclass(frozen=True)
class Spec:
    type_defs: tuple[TypeDef, ...] = ()
    action_defs: tuple[ActionDef, ...] = ()
    device_defs: tuple[DeviceDef, ...] = ()
    scenario_defs: tuple[ScenarioDef, ...] = ()
    span: Span = _span()

    def definitions(self):
        """All top-level definitions as (kind, node) pairs, in source order."""
        tagged = (
            [("type", d) for d in self.type_defs]
            + [("action", d) for d in self.action_defs]
            + [("device", d) for d in self.device_defs]
            + [("scenario", d) for d in self.scenario_defs]
        )
        tagged.sort(key=lambda kd: (kd[1].span.file, kd[1].span.start))
        return tagged


def structural(node):
    """Span-free nested-tuple image of a node, usable as a stable key."""
    if node is None or isinstance(node, (bool, int, str)):
        return node
    if isinstance(node, tuple):
        return tuple(structural(x) for x in node)
    vals = tuple(
        structural(getattr(node, f.name)) for f in fields(node) if f.compare
    )
    return (type(node).__name__,) + vals


def fingerprint(node) -> str:
    """Content hash of a node, ignoring spans.  Two trees fingerprint
    equal exactly when they compare equal."""
    return hashlib.sha256(repr(structural(node)).encode("utf-8")).hexdigest()

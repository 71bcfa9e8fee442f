"""Name binding and type checking for CSX specifications.

analyze() walks a desugared Spec and produces a TypedSpec: lookup tables
for the top-level definitions, a resolution for every reference node, and
a sort for every expression node.  Scope rules:

  * type members see that type's defining and derived properties;
  * action members see the action's location parameters, parameters and
    derived properties;
  * a component's own constraints see the device's locations and the
    component's own parameters, bare or qualified through the component
    name or "self";
  * device constraints and derived properties see locations, components
    (whose parameters are reached by projection) and device-level derived
    properties;
  * scenario members live in the target device's scope.

Analysis never stops at the first problem: it accumulates diagnostics and
marks the definitions they belong to (plus everything depending on those)
as tainted, so downstream stages can still work on the clean ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from csx.ast import (
    ActionDef,
    Binary,
    BoolLit,
    DeviceDef,
    Expr,
    IntLit,
    NO_SPAN,
    PRIMITIVE_SORTS,
    Proj,
    Ref,
    ScenarioDef,
    Span,
    Spec,
    TypeDef,
    Unary,
    is_valid_ident,
)

INVALID = "<invalid>"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: Span = NO_SPAN

    def render(self) -> str:
        return (
            f"{self.span.file}:{self.span.line}:{self.span.col}:"
            f" {self.severity}: {self.message}"
        )


class PathError(Exception):
    """A dotted configuration path that does not name a primitive leaf."""

    def __init__(self, message: str, path: tuple[str, ...] = ()):
        self.path = path
        super().__init__(message)


# --- resolutions ----------------------------------------------------------


@dataclass(frozen=True)
class ResolvedProp:
    owner: str  # type name
    name: str
    sort: str


@dataclass(frozen=True)
class ResolvedParam:
    action: str
    name: str
    sort: str


@dataclass(frozen=True)
class ResolvedLocParam:
    action: str
    name: str
    type: str


@dataclass(frozen=True)
class ResolvedLocation:
    device: str
    name: str
    type: str


@dataclass(frozen=True)
class ResolvedComponent:
    device: str
    name: str
    action: str


@dataclass(frozen=True)
class ResolvedDerived:
    owner_kind: str  # "type" | "action" | "device"
    owner: str
    name: str
    body: Expr
    sort: object  # str or CompSort


@dataclass(frozen=True)
class CompSort:
    """Pseudo-sort of a reference to a component; only projection applies."""

    action: str


Resolution = (
    ResolvedProp
    | ResolvedParam
    | ResolvedLocParam
    | ResolvedLocation
    | ResolvedComponent
    | ResolvedDerived
)


class TypedSpec:
    """A spec plus everything analysis learned about it."""

    def __init__(self, spec: Spec):
        self.spec = spec
        self.types_by_name: dict[str, TypeDef] = {}
        self.actions_by_name: dict[str, ActionDef] = {}
        self.devices_by_name: dict[str, DeviceDef] = {}
        self.scenarios_by_name: dict[str, ScenarioDef] = {}
        self._res: dict[int, Resolution] = {}
        self._sorts: dict[int, object] = {}
        self._renamings: dict[tuple[str, str], dict[str, str]] = {}

    def resolution_of(self, node: Expr) -> Resolution | None:
        return self._res.get(id(node))

    def sort_of(self, node: Expr):
        return self._sorts.get(id(node), INVALID)

    def renaming_of(self, device: str, component: str) -> dict[str, str]:
        """Location-parameter to location-argument map of one component."""
        return self._renamings[(device, component)]


@dataclass
class AnalysisResult:
    typed: TypedSpec
    diagnostics: list[Diagnostic] = field(default_factory=list)
    tainted: frozenset[tuple[str, str]] = frozenset()

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def clean(self, kind: str, name: str) -> bool:
        return (kind, name) not in self.tainted


# --- cycle checks ---------------------------------------------------------


def _cycles(graph: dict[str, set[str]]) -> list[list[str]]:
    """Strongly connected components that contain a cycle, each sorted."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    out: list[list[str]] = []

    def strongconnect(v: str):
        # iterative Tarjan; graphs here are small but recursion limits bite
        work = [(v, iter(sorted(graph.get(v, ()))))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in graph:
                    continue
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(graph.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                if len(scc) > 1 or node in graph.get(node, ()):
                    out.append(sorted(scc))

    for v in sorted(graph):
        if v not in index:
            strongconnect(v)
    return out


def check_type_cycles(spec: Spec) -> list[Diagnostic]:
    """Reject recursive type nesting.  Each cycle is reported once, with
    the participating type names."""
    by_name = {t.name: t for t in spec.type_defs}
    graph = {
        t.name: {p.type for p in t.def_props if p.type in by_name}
        for t in spec.type_defs
    }
    diags = []
    for scc in _cycles(graph):
        span = by_name[scc[0]].span
        diags.append(Diagnostic(
            "error", "types form a property cycle: " + ", ".join(scc), span
        ))
    return diags


def _bare_refs(e: Expr, acc: set[str]):
    if isinstance(e, Ref):
        acc.add(e.name)
    elif isinstance(e, Proj):
        _bare_refs(e.base, acc)
    elif isinstance(e, Unary):
        _bare_refs(e.operand, acc)
    elif isinstance(e, Binary):
        _bare_refs(e.left, acc)
        _bare_refs(e.right, acc)


def check_derived_cycles(spec: Spec) -> list[Diagnostic]:
    """Reject derived properties that reference themselves, directly or
    through other derived properties of the same definition."""
    diags = []
    owners = (
        [("type", t) for t in spec.type_defs]
        + [("action", a) for a in spec.action_defs]
        + [("device", d) for d in spec.device_defs]
    )
    for _kind, owner in owners:
        names = {d.name for d in owner.derived_props}
        graph: dict[str, set[str]] = {}
        for d in owner.derived_props:
            refs: set[str] = set()
            _bare_refs(d.body, refs)
            graph[d.name] = refs & names
        for scc in _cycles(graph):
            diags.append(Diagnostic(
                "error",
                f"derived properties of {owner.name} form a reference cycle: "
                + ", ".join(scc),
                owner.span,
            ))
    return diags


# --- the analyzer ---------------------------------------------------------


class _Analyzer:
    def __init__(self, spec: Spec, ts: TypedSpec | None = None):
        self.spec = spec
        self.ts = ts if ts is not None else TypedSpec(spec)
        self.diags: list[Diagnostic] = []
        self.tainted: set[tuple[str, str]] = set()
        self.current: tuple[str, str] | None = None
        self._derived_memo: dict[tuple[str, str, str], object] = {}
        self._derived_busy: set[tuple[str, str, str]] = set()

    def error(self, message: str, span: Span):
        self.diags.append(Diagnostic("error", message, span))
        if self.current is not None:
            self.tainted.add(self.current)

    # --- helpers ---------------------------------------------------------

    def _record(self, node: Expr, res: Resolution | None, sort) -> object:
        if res is not None:
            self.ts._res[id(node)] = res
        self.ts._sorts[id(node)] = sort
        return sort

    def _check_name(self, name: str, what: str, span: Span):
        if not is_valid_ident(name):
            self.error(f"invalid {what} name {name!r}", span)

    def _unique(self, pairs, what: str):
        seen: dict[str, Span] = {}
        for name, span in pairs:
            if name in seen:
                self.error(f"duplicate {what} {name!r}", span)
            else:
                seen[name] = span

    # --- collection ------------------------------------------------------

    def collect(self):
        s = self.spec
        for kind, table, defs in (
            ("type", self.ts.types_by_name, s.type_defs),
            ("action", self.ts.actions_by_name, s.action_defs),
            ("device", self.ts.devices_by_name, s.device_defs),
            ("scenario", self.ts.scenarios_by_name, s.scenario_defs),
        ):
            for d in defs:
                self.current = (kind, d.name)
                self._check_name(d.name, kind, d.span)
                if d.name in table:
                    self.error(f"duplicate {kind} {d.name!r}", d.span)
                else:
                    table[d.name] = d
        self.current = None

    # --- derived property sorts ------------------------------------------

    def derived_sort(self, owner_kind: str, owner, dp):
        key = (owner_kind, owner.name, dp.name)
        if key in self._derived_memo:
            return self._derived_memo[key]
        if key in self._derived_busy:
            return INVALID  # cycle; reported by check_derived_cycles
        self._derived_busy.add(key)
        scope = {
            "type": self._type_scope,
            "action": self._action_scope,
            "device": self._device_scope,
        }[owner_kind](owner)
        sort = self.visit(dp.body, scope)
        self._derived_busy.discard(key)
        self._derived_memo[key] = sort
        return sort

    # --- scopes: name -> Resolution | None --------------------------------

    def _type_scope(self, td: TypeDef):
        def look(name: str):
            for p in td.def_props:
                if p.name == name:
                    return ResolvedProp(td.name, name, p.type)
            for d in td.derived_props:
                if d.name == name:
                    return ResolvedDerived(
                        "type", td.name, name, d.body,
                        self.derived_sort("type", td, d),
                    )
            return None
        return look

    def _action_scope(self, ad: ActionDef):
        def look(name: str):
            for lp in ad.loc_params:
                if lp.name == name:
                    return ResolvedLocParam(ad.name, name, lp.type)
            for p in ad.params:
                if p.name == name:
                    return ResolvedParam(ad.name, name, p.type)
            for d in ad.derived_props:
                if d.name == name:
                    return ResolvedDerived(
                        "action", ad.name, name, d.body,
                        self.derived_sort("action", ad, d),
                    )
            return None
        return look

    def _component_scope(self, dd: DeviceDef, comp, ad: ActionDef | None):
        def look(name: str):
            if ad is not None:
                for p in ad.params:
                    if p.name == name:
                        return ResolvedParam(ad.name, name, p.type)
            for loc in dd.locations:
                if loc.name == name:
                    return ResolvedLocation(dd.name, name, loc.type)
            if name in (comp.name, "self"):
                return ResolvedComponent(dd.name, comp.name, comp.action)
            return None
        return look

    def _device_scope(self, dd: DeviceDef):
        def look(name: str):
            for loc in dd.locations:
                if loc.name == name:
                    return ResolvedLocation(dd.name, name, loc.type)
            for c in dd.components:
                if c.name == name:
                    return ResolvedComponent(dd.name, c.name, c.action)
            for d in dd.derived_props:
                if d.name == name:
                    return ResolvedDerived(
                        "device", dd.name, name, d.body,
                        self.derived_sort("device", dd, d),
                    )
            return None
        return look

    # --- expression typing -------------------------------------------------

    def _sort_name(self, sort) -> str:
        if isinstance(sort, CompSort):
            return f"component of action {sort.action}"
        return str(sort)

    def visit(self, e: Expr, scope) -> object:
        if isinstance(e, IntLit):
            return self._record(e, None, "int")
        if isinstance(e, BoolLit):
            return self._record(e, None, "bool")
        if isinstance(e, Ref):
            res = scope(e.name)
            if res is None:
                self.error(f"unresolved name {e.name!r}", e.span)
                return self._record(e, None, INVALID)
            sort = self._res_sort(res)
            return self._record(e, res, sort)
        if isinstance(e, Proj):
            bsort = self.visit(e.base, scope)
            if bsort == INVALID:
                return self._record(e, None, INVALID)
            if bsort in PRIMITIVE_SORTS:
                self.error(f"cannot project {e.name!r} off {bsort}", e.span)
                return self._record(e, None, INVALID)
            if isinstance(bsort, CompSort):
                ad = self.ts.actions_by_name.get(bsort.action)
                if ad is None:
                    return self._record(e, None, INVALID)
                for p in ad.params:
                    if p.name == e.name:
                        res = ResolvedParam(ad.name, p.name, p.type)
                        return self._record(e, res, p.type)
                for d in ad.derived_props:
                    if d.name == e.name:
                        res = ResolvedDerived(
                            "action", ad.name, d.name, d.body,
                            self.derived_sort("action", ad, d),
                        )
                        return self._record(e, res, res.sort)
                self.error(
                    f"action {ad.name!r} has no parameter or derived"
                    f" property {e.name!r}",
                    e.span,
                )
                return self._record(e, None, INVALID)
            td = self.ts.types_by_name.get(bsort)
            if td is None:
                return self._record(e, None, INVALID)
            look = self._type_scope(td)
            res = look(e.name)
            if res is None:
                self.error(f"type {td.name!r} has no property {e.name!r}", e.span)
                return self._record(e, None, INVALID)
            return self._record(e, res, self._res_sort(res))
        if isinstance(e, Unary):
            osort = self.visit(e.operand, scope)
            want = "int" if e.op == "neg" else "bool"
            if osort not in (want, INVALID):
                self.error(
                    f"operand of {e.op} must be {want},"
                    f" got {self._sort_name(osort)}",
                    e.span,
                )
                return self._record(e, None, INVALID)
            return self._record(e, None, want if osort == want else INVALID)
        if isinstance(e, Binary):
            ls = self.visit(e.left, scope)
            rs = self.visit(e.right, scope)
            return self._record(e, None, self._binary_sort(e, ls, rs))
        raise TypeError(f"not an expression node: {e!r}")

    def _res_sort(self, res: Resolution):
        if isinstance(res, ResolvedProp):
            return res.sort
        if isinstance(res, ResolvedParam):
            return res.sort
        if isinstance(res, ResolvedLocParam):
            return res.type
        if isinstance(res, ResolvedLocation):
            return res.type
        if isinstance(res, ResolvedComponent):
            return CompSort(res.action)
        if isinstance(res, ResolvedDerived):
            return res.sort
        raise TypeError(res)

    def _binary_sort(self, e: Binary, ls, rs):
        if INVALID in (ls, rs):
            return INVALID
        op = e.op
        if op in ("+", "-", "*"):
            if ls == rs == "int":
                return "int"
            self.error(
                f"operands of {op} must be int, got {self._sort_name(ls)}"
                f" and {self._sort_name(rs)}",
                e.span,
            )
            return INVALID
        if op in ("<", "<=", ">", ">="):
            if ls == rs == "int":
                return "bool"
            self.error(
                f"operands of {op} must be int, got {self._sort_name(ls)}"
                f" and {self._sort_name(rs)}",
                e.span,
            )
            return INVALID
        if op in ("==", "!="):
            if ls == rs and ls in PRIMITIVE_SORTS:
                return "bool"
            self.error(
                f"operands of {op} must both be int or both bool,"
                f" got {self._sort_name(ls)} and {self._sort_name(rs)}",
                e.span,
            )
            return INVALID
        if op in ("and", "or", "implies"):
            if ls == rs == "bool":
                return "bool"
            self.error(
                f"operands of {op} must be bool, got {self._sort_name(ls)}"
                f" and {self._sort_name(rs)}",
                e.span,
            )
            return INVALID
        raise ValueError(f"unknown operator {op!r}")

    def _require(self, e: Expr, scope, want: str, what: str):
        sort = self.visit(e, scope)
        if sort not in (want, INVALID):
            self.error(
                f"{what} must be {want}, got {self._sort_name(sort)}", e.span
            )

    # --- definitions -------------------------------------------------------

    def check_types(self):
        for td in self.spec.type_defs:
            self.current = ("type", td.name)
            members = (
                [(p.name, p.span) for p in td.def_props]
                + [(d.name, d.span) for d in td.derived_props]
            )
            self._unique(members, f"property of type {td.name!r}")
            for p in td.def_props:
                self._check_name(p.name, "property", p.span)
                if p.type not in PRIMITIVE_SORTS and p.type not in self.ts.types_by_name:
                    self.error(f"unknown type {p.type!r}", p.span)
            scope = self._type_scope(td)
            for d in td.derived_props:
                self._check_name(d.name, "derived property", d.span)
                self.derived_sort("type", td, d)
            for c in td.constraints:
                self._require(c, scope, "bool", "constraint")
        self.current = None

    def check_actions(self):
        for ad in self.spec.action_defs:
            self.current = ("action", ad.name)
            members = (
                [(lp.name, lp.span) for lp in ad.loc_params]
                + [(p.name, p.span) for p in ad.params]
                + [(d.name, d.span) for d in ad.derived_props]
            )
            self._unique(members, f"member of action {ad.name!r}")
            for lp in ad.loc_params:
                self._check_name(lp.name, "location parameter", lp.span)
                if lp.type not in self.ts.types_by_name:
                    self.error(f"unknown type {lp.type!r}", lp.span)
            for p in ad.params:
                self._check_name(p.name, "parameter", p.span)
            scope = self._action_scope(ad)
            for d in ad.derived_props:
                self._check_name(d.name, "derived property", d.span)
                self.derived_sort("action", ad, d)
            for c in ad.constraints:
                self._require(c, scope, "bool", "constraint")
        self.current = None

    def check_devices(self):
        for dd in self.spec.device_defs:
            self.current = ("device", dd.name)
            members = (
                [(loc.name, loc.span) for loc in dd.locations]
                + [(c.name, c.span) for c in dd.components]
                + [(d.name, d.span) for d in dd.derived_props]
            )
            self._unique(members, f"member of device {dd.name!r}")
            loc_types: dict[str, str] = {}
            for loc in dd.locations:
                self._check_name(loc.name, "location", loc.span)
                if loc.type not in self.ts.types_by_name:
                    self.error(f"unknown type {loc.type!r}", loc.span)
                loc_types[loc.name] = loc.type
            loc_names = set(loc_types)
            for comp in dd.components:
                self._check_name(comp.name, "component", comp.span)
                ad = self.ts.actions_by_name.get(comp.action)
                if ad is None:
                    self.error(f"unknown action {comp.action!r}", comp.span)
                    self.ts._renamings[(dd.name, comp.name)] = {}
                    continue
                if len(comp.loc_args) != len(ad.loc_params):
                    self.error(
                        f"action {ad.name!r} takes {len(ad.loc_params)}"
                        f" location(s), component {comp.name!r} passes"
                        f" {len(comp.loc_args)}",
                        comp.span,
                    )
                    self.ts._renamings[(dd.name, comp.name)] = {}
                    continue
                renaming: dict[str, str] = {}
                for lp, arg in zip(ad.loc_params, comp.loc_args):
                    if arg.name not in loc_names:
                        self.error(
                            f"component argument {arg.name!r} is not a"
                            f" location of device {dd.name!r}",
                            arg.span,
                        )
                        continue
                    if loc_types.get(arg.name) != lp.type:
                        self.error(
                            f"location {arg.name!r} has type"
                            f" {loc_types.get(arg.name)!r} but"
                            f" {ad.name}.{lp.name} needs {lp.type!r}",
                            arg.span,
                        )
                    renaming[lp.name] = arg.name
                self.ts._renamings[(dd.name, comp.name)] = renaming
                for p in ad.params:
                    if p.name in loc_names:
                        self.error(
                            f"parameter {p.name!r} of action {ad.name!r}"
                            f" shadows a location of device {dd.name!r}",
                            comp.span,
                        )
                cscope = self._component_scope(dd, comp, ad)
                for c in comp.constraints:
                    self._require(c, cscope, "bool", "constraint")
            scope = self._device_scope(dd)
            for d in dd.derived_props:
                self._check_name(d.name, "derived property", d.span)
                self.derived_sort("device", dd, d)
            for c in dd.constraints:
                self._require(c, scope, "bool", "constraint")
        self.current = None

    def check_scenarios(self):
        for sc in self.spec.scenario_defs:
            self.current = ("scenario", sc.name)
            dd = self.ts.devices_by_name.get(sc.device)
            if dd is None:
                self.error(f"unknown device {sc.device!r}", sc.span)
                continue
            scope = self._device_scope(dd)
            for b in sc.bindings:
                try:
                    _, sort = resolve_path(self.ts, dd.name, b.path)
                except PathError as exc:
                    self.error(str(exc), b.span)
                    continue
                want = "bool" if isinstance(b.value, bool) else "int"
                if sort != want:
                    self.error(
                        f"binding {'.'.join(b.path)} has sort {sort},"
                        f" got a {want} literal",
                        b.span,
                    )
            for c in sc.extra_constraints:
                self._require(c, scope, "bool", "constraint")
            if sc.objective is not None:
                self._require(
                    sc.objective.expr, scope, "int", "objective expression"
                )
            for ex in sc.expectations:
                self._require(ex.expr, scope, "bool", "expectation")
        self.current = None

    # --- tainting ----------------------------------------------------------

    def close_taint(self):
        deps: dict[tuple[str, str], set[tuple[str, str]]] = {}
        for td in self.spec.type_defs:
            deps[("type", td.name)] = {
                ("type", p.type)
                for p in td.def_props
                if p.type not in PRIMITIVE_SORTS
            }
        for ad in self.spec.action_defs:
            deps[("action", ad.name)] = {
                ("type", lp.type) for lp in ad.loc_params
            }
        for dd in self.spec.device_defs:
            deps[("device", dd.name)] = {
                ("type", loc.type) for loc in dd.locations
            } | {("action", c.action) for c in dd.components}
        for sc in self.spec.scenario_defs:
            deps[("scenario", sc.name)] = {("device", sc.device)}
        changed = True
        while changed:
            changed = False
            for key, ds in deps.items():
                if key in self.tainted:
                    continue
                if any(d in self.tainted for d in ds if d in deps or d in self.tainted):
                    self.tainted.add(key)
                    changed = True


def analyze(spec: Spec) -> AnalysisResult:
    """Resolve names, type expressions and validate wiring.

    Total: always returns a result; a spec with problems yields at least
    one error diagnostic, and the definitions involved (plus dependents)
    are marked tainted.  Untainted definitions are safe to lower.
    """
    a = _Analyzer(spec)
    a.collect()
    cyc = check_type_cycles(spec)
    a.diags.extend(cyc)
    # taint members of type cycles explicitly
    by_name = {t.name: t for t in spec.type_defs}
    graph = {
        t.name: {p.type for p in t.def_props if p.type in by_name}
        for t in spec.type_defs
    }
    for scc in _cycles(graph):
        for name in scc:
            a.tainted.add(("type", name))
    a.check_types()
    a.check_actions()
    a.check_devices()
    a.check_scenarios()
    dcyc = check_derived_cycles(spec)
    a.diags.extend(dcyc)
    for owner_kind, owner in (
        [("type", t) for t in spec.type_defs]
        + [("action", x) for x in spec.action_defs]
        + [("device", d) for d in spec.device_defs]
    ):
        names = {d.name for d in owner.derived_props}
        g: dict[str, set[str]] = {}
        for d in owner.derived_props:
            refs: set[str] = set()
            _bare_refs(d.body, refs)
            g[d.name] = refs & names
        if _cycles(g):
            a.tainted.add((owner_kind, owner.name))
    a.close_taint()
    a.diags.sort(key=lambda d: (d.span.file, d.span.start))
    return AnalysisResult(a.ts, a.diags, frozenset(a.tainted))


def resolve_path(ts: TypedSpec, device: str, path: tuple[str, ...]):
    """Resolve a dotted path rooted at a location or component of a device
    down to a primitive leaf.  Returns (name parts, sort), where joining
    the parts with "_" gives the lowered variable name."""
    dd = ts.devices_by_name.get(device)
    if dd is None:
        raise PathError(f"unknown device {device!r}", path)
    if not path:
        raise PathError("empty path", path)
    head, rest = path[0], path[1:]
    for comp in dd.components:
        if comp.name == head:
            ad = ts.actions_by_name.get(comp.action)
            if ad is None:
                raise PathError(f"component {head!r} has unknown action", path)
            if len(rest) != 1:
                raise PathError(
                    f"path through component {head!r} must name exactly one"
                    " parameter",
                    path,
                )
            for p in ad.params:
                if p.name == rest[0]:
                    return (head, rest[0]), p.type
            raise PathError(
                f"action {ad.name!r} has no parameter {rest[0]!r}", path
            )
    for loc in dd.locations:
        if loc.name == head:
            parts = [head]
            tname = loc.type
            for seg in rest:
                td = ts.types_by_name.get(tname)
                if td is None:
                    raise PathError(f"unknown type {tname!r}", path)
                for p in td.def_props:
                    if p.name == seg:
                        parts.append(seg)
                        tname = p.type
                        break
                else:
                    raise PathError(
                        f"type {tname!r} has no defining property {seg!r}",
                        path,
                    )
            if tname in PRIMITIVE_SORTS:
                return tuple(parts), tname
            raise PathError(
                f"path {'.'.join(path)} stops at composite type {tname!r};"
                " bind its properties instead",
                path,
            )
    raise PathError(
        f"{head!r} is not a location or component of device {device!r}", path
    )


def type_expr(ts: TypedSpec, device: str, e: Expr) -> tuple[object, list[Diagnostic]]:
    """Resolve and type a standalone expression in a device's scope.

    Used for ad hoc objectives and probes that arrive after analysis.
    Resolutions are recorded into the typed spec, so a clean expression
    can be lowered or evaluated exactly like one from the source text.
    Returns (sort, diagnostics); the sort is INVALID when binding fails.
    """
    dd = ts.devices_by_name.get(device)
    if dd is None:
        return INVALID, [
            Diagnostic("error", f"unknown device {device!r}", NO_SPAN)
        ]
    a = _Analyzer(ts.spec, ts=ts)
    sort = a.visit(e, a._device_scope(dd))
    return sort, a.diags

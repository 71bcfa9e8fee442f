"""Embedded finite-domain solver for flat constraint models.

The solver is interval based.  Each integer variable carries a bound
interval (booleans are 0/1 intervals internally); propagation runs a
forward/backward bound pass per constraint tree to a fixpoint, then
search branches on the first unfixed variable in declaration order.
Small domains are enumerated in ascending order; large ones are split in
half, lower half first, which visits candidate assignments in the same
ascending order while keeping the tree logarithmic.  The first solution
found is therefore the lexicographically smallest one under declaration
order, and the whole procedure is deterministic: equal (model, box,
budget) inputs produce equal results, witnesses included.

Optimization is branch and bound: after an initial solution the solver
restarts from the root with a strengthened objective bound, halving the
remaining objective window each round, until the window closes or the
budget runs out.  Every verdict of "optimal" is backed by an exhausted
search at the final bound; every returned witness is re-checked by plain
evaluation before it leaves the solver.

Propagation never removes a value that participates in a satisfying
assignment, so "unsat" means the search space was exhausted, not merely
that heuristics gave up.  When budgets (node count or wall time) expire
the verdict is "exhausted", carrying the best incumbent if any.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from csx.model import (
    ConstraintModel,
    FBinary,
    FBool,
    FInt,
    FUnary,
    FVar,
    FlatExpr,
    MalformedModel,
)

DEFAULT_INT_LO = -1_000_000
DEFAULT_INT_HI = 1_000_000

_SPLIT_THRESHOLD = 8
_TIME_CHECK_MASK = 0xFF

_NEGATED = {
    "==": "!=",
    "!=": "==",
    "<": ">=",
    "<=": ">",
    ">": "<=",
    ">=": "<",
}


@dataclass
class DomainBox:
    """Per-variable bound intervals; ints default to the box-wide bounds,
    booleans are always {false, true}."""

    int_lo: int = DEFAULT_INT_LO
    int_hi: int = DEFAULT_INT_HI
    overrides: dict[str, tuple[int, int]] = field(default_factory=dict)

    def bounds(self, name: str, sort: str) -> tuple[int, int]:
        if sort == "bool":
            return (0, 1)
        return self.overrides.get(name, (self.int_lo, self.int_hi))

    def key(self):
        return (self.int_lo, self.int_hi, tuple(sorted(self.overrides.items())))


@dataclass
class Budget:
    max_nodes: int = 10_000_000
    max_ms: int = 10_000


@dataclass
class Stats:
    nodes: int = 0
    propagations: int = 0
    wall_ms: float = 0.0


@dataclass
class SolveResult:
    status: str  # "sat" | "opt" | "unsat" | "exhausted"
    assignment: dict[str, int | bool] | None = None
    objective: int | None = None
    stats: Stats = field(default_factory=Stats, compare=False)


class _BudgetExceeded(Exception):
    pass


class _Conflict(Exception):
    pass


# --- plain evaluation -------------------------------------------------------


def _eval_flat(e: FlatExpr, env: dict) -> int | bool:
    if isinstance(e, FVar):
        return env[e.name]
    if isinstance(e, FInt):
        return e.value
    if isinstance(e, FBool):
        return e.value
    if isinstance(e, FUnary):
        v = _eval_flat(e.operand, env)
        return -v if e.op == "neg" else (not v)
    if isinstance(e, FBinary):
        a = _eval_flat(e.left, env)
        b = _eval_flat(e.right, env)
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
        # logical operators are strict here: both sides always evaluate
        if op == "and":
            return bool(a) and bool(b)
        if op == "or":
            return bool(a) or bool(b)
        if op == "implies":
            return (not a) or bool(b)
        raise MalformedModel(f"unknown operator {op!r}")
    raise MalformedModel(f"not a flat expression: {e!r}")


def evaluate(model: ConstraintModel, assignment: dict) -> bool:
    """True when the assignment satisfies every constraint.  The
    assignment must cover exactly the model's variables with values of
    the right sort."""
    model.validate()
    names = set()
    for name, sort in model.vars:
        names.add(name)
        if name not in assignment:
            raise MalformedModel(f"assignment missing variable {name!r}")
        v = assignment[name]
        if sort == "int" and type(v) is not int:
            raise MalformedModel(f"variable {name!r} needs an int value")
        if sort == "bool" and type(v) is not bool:
            raise MalformedModel(f"variable {name!r} needs a bool value")
    extra = set(assignment) - names
    if extra:
        raise MalformedModel(f"assignment has unknown variables {sorted(extra)}")
    return all(bool(_eval_flat(c, assignment)) for c in model.constraints)


# --- simplification ---------------------------------------------------------


def simplify(e: FlatExpr) -> FlatExpr:
    """Constant folding plus comparisons of structurally identical sides.
    Semantics preserving for every assignment."""
    if isinstance(e, FUnary):
        o = simplify(e.operand)
        if e.op == "neg" and isinstance(o, FInt):
            return FInt(-o.value)
        if e.op == "not" and isinstance(o, FBool):
            return FBool(not o.value)
        return FUnary(e.op, o)
    if isinstance(e, FBinary):
        a = simplify(e.left)
        b = simplify(e.right)
        const_a = isinstance(a, (FInt, FBool))
        const_b = isinstance(b, (FInt, FBool))
        if const_a and const_b:
            v = _eval_flat(FBinary(e.op, a, b), {})
            return FBool(v) if isinstance(v, bool) else FInt(v)
        if e.op in ("==", "<=", ">=") and a == b:
            return FBool(True)
        if e.op in ("!=", "<", ">") and a == b:
            return FBool(False)
        if e.op == "and":
            if const_a:
                return b if a.value else FBool(False)
            if const_b:
                return a if b.value else FBool(False)
        if e.op == "or":
            if const_a:
                return FBool(True) if a.value else b
            if const_b:
                return FBool(True) if b.value else a
        if e.op == "implies":
            if const_a:
                return b if a.value else FBool(True)
            if const_b:
                return FBool(True) if b.value else FUnary("not", a)
        return FBinary(e.op, a, b)
    return e


# --- compiled constraint nodes ----------------------------------------------


class _Node:
    __slots__ = ("kind", "op", "a", "b", "vidx", "cv", "fl", "fh")

    def __init__(self, kind, op=None, a=None, b=None, vidx=-1, cv=0):
        self.kind = kind  # "var" | "const" | "un" | "bin"
        self.op = op
        self.a = a
        self.b = b
        self.vidx = vidx
        self.cv = cv
        self.fl = 0
        self.fh = 0


def _compile(e: FlatExpr, index: dict[str, int]) -> _Node:
    if isinstance(e, FVar):
        return _Node("var", vidx=index[e.name])
    if isinstance(e, FInt):
        return _Node("const", cv=e.value)
    if isinstance(e, FBool):
        return _Node("const", cv=1 if e.value else 0)
    if isinstance(e, FUnary):
        return _Node("un", op=e.op, a=_compile(e.operand, index))
    if isinstance(e, FBinary):
        return _Node(
            "bin", op=e.op, a=_compile(e.left, index), b=_compile(e.right, index)
        )
    raise MalformedModel(f"not a flat expression: {e!r}")


def _div_part(zl, zh, yl, yh):
    qs = (Fraction(zl, yl), Fraction(zl, yh), Fraction(zh, yl), Fraction(zh, yh))
    return (math.ceil(min(qs)), math.floor(max(qs)))


def _div_bounds(zl, zh, yl, yh):
    """Integer hull of { x : x*y in [zl,zh] for some y in [yl,yh] }.
    Returns None when no tightening is sound, "empty" on contradiction."""
    if yl == 0 and yh == 0:
        return None if zl <= 0 <= zh else "empty"
    if yl <= 0 <= yh:
        if zl <= 0 <= zh:
            return None
        parts = []
        if yl <= -1:
            parts.append(_div_part(zl, zh, yl, -1))
        if yh >= 1:
            parts.append(_div_part(zl, zh, 1, yh))
        return (min(p[0] for p in parts), max(p[1] for p in parts))
    return _div_part(zl, zh, yl, yh)


class _Engine:
    """Domains plus compiled constraints; one solve's working state."""

    def __init__(self, model: ConstraintModel, box: DomainBox):
        self.names = [name for name, _ in model.vars]
        self.sorts = [sort for _, sort in model.vars]
        self.index = {name: i for i, name in enumerate(self.names)}
        self.lo: list[int] = []
        self.hi: list[int] = []
        for name, sort in model.vars:
            l, h = box.bounds(name, sort)
            self.lo.append(l)
            self.hi.append(h)
        self.roots: list[_Node] = []
        self.watch: dict[int, list[int]] = {i: [] for i in range(len(self.names))}
        self.trivially_false = False
        for c in model.constraints:
            s = simplify(c)
            if isinstance(s, FBool):
                if not s.value:
                    self.trivially_false = True
                continue
            cidx = len(self.roots)
            self.roots.append(_compile(s, self.index))
            for v in self._node_vars(self.roots[-1]):
                self.watch[v].append(cidx)
        self._changed: set[int] = set()

    @staticmethod
    def _node_vars(n: _Node) -> set[int]:
        out: set[int] = set()
        stack = [n]
        while stack:
            x = stack.pop()
            if x.kind == "var":
                out.add(x.vidx)
            elif x.kind == "un":
                stack.append(x.a)
            elif x.kind == "bin":
                stack.append(x.a)
                stack.append(x.b)
        return out

    # --- forward interval evaluation ------------------------------------

    def _forward(self, n: _Node):
        if n.kind == "var":
            n.fl = self.lo[n.vidx]
            n.fh = self.hi[n.vidx]
            return
        if n.kind == "const":
            n.fl = n.fh = n.cv
            return
        if n.kind == "un":
            self._forward(n.a)
            if n.op == "neg":
                n.fl, n.fh = -n.a.fh, -n.a.fl
            else:
                n.fl, n.fh = 1 - n.a.fh, 1 - n.a.fl
            return
        self._forward(n.a)
        self._forward(n.b)
        al, ah, bl, bh = n.a.fl, n.a.fh, n.b.fl, n.b.fh
        op = n.op
        if op == "+":
            n.fl, n.fh = al + bl, ah + bh
        elif op == "-":
            n.fl, n.fh = al - bh, ah - bl
        elif op == "*":
            p = (al * bl, al * bh, ah * bl, ah * bh)
            n.fl, n.fh = min(p), max(p)
        elif op == "==":
            if ah < bl or bh < al:
                n.fl = n.fh = 0
            elif al == ah == bl == bh:
                n.fl = n.fh = 1
            else:
                n.fl, n.fh = 0, 1
        elif op == "!=":
            if ah < bl or bh < al:
                n.fl = n.fh = 1
            elif al == ah == bl == bh:
                n.fl = n.fh = 0
            else:
                n.fl, n.fh = 0, 1
        elif op == "<":
            if ah < bl:
                n.fl = n.fh = 1
            elif al >= bh:
                n.fl = n.fh = 0
            else:
                n.fl, n.fh = 0, 1
        elif op == "<=":
            if ah <= bl:
                n.fl = n.fh = 1
            elif al > bh:
                n.fl = n.fh = 0
            else:
                n.fl, n.fh = 0, 1
        elif op == ">":
            if al > bh:
                n.fl = n.fh = 1
            elif ah <= bl:
                n.fl = n.fh = 0
            else:
                n.fl, n.fh = 0, 1
        elif op == ">=":
            if al >= bh:
                n.fl = n.fh = 1
            elif ah < bl:
                n.fl = n.fh = 0
            else:
                n.fl, n.fh = 0, 1
        elif op == "and":
            n.fl, n.fh = min(al, bl), min(ah, bh)
        elif op == "or":
            n.fl, n.fh = max(al, bl), max(ah, bh)
        elif op == "implies":
            n.fl, n.fh = max(1 - ah, bl), max(1 - al, bh)
        else:
            raise MalformedModel(f"unknown operator {op!r}")

    # --- backward demand propagation -------------------------------------

    def _backward(self, n: _Node, dl: int, dh: int):
        if dl < n.fl:
            dl = n.fl
        if dh > n.fh:
            dh = n.fh
        if dl > dh:
            raise _Conflict
        if n.kind == "var":
            i = n.vidx
            if dl > self.lo[i] or dh < self.hi[i]:
                self.lo[i] = max(self.lo[i], dl)
                self.hi[i] = min(self.hi[i], dh)
                self._changed.add(i)
            return
        if n.kind == "const":
            return
        if n.kind == "un":
            if n.op == "neg":
                self._backward(n.a, -dh, -dl)
            else:
                self._backward(n.a, 1 - dh, 1 - dl)
            return
        a, b = n.a, n.b
        op = n.op
        if op == "+":
            self._backward(a, dl - b.fh, dh - b.fl)
            self._backward(b, dl - a.fh, dh - a.fl)
            return
        if op == "-":
            self._backward(a, dl + b.fl, dh + b.fh)
            self._backward(b, a.fl - dh, a.fh - dl)
            return
        if op == "*":
            xa = _div_bounds(dl, dh, b.fl, b.fh)
            if xa == "empty":
                raise _Conflict
            if xa is not None:
                self._backward(a, xa[0], xa[1])
            xb = _div_bounds(dl, dh, a.fl, a.fh)
            if xb == "empty":
                raise _Conflict
            if xb is not None:
                self._backward(b, xb[0], xb[1])
            return
        if op in ("==", "!=", "<", "<=", ">", ">="):
            if dl == dh:
                want = bool(dl)
                self._relation(op if want else _NEGATED[op], a, b)
            return
        if op == "and":
            if dl == 1:
                self._backward(a, 1, 1)
                self._backward(b, 1, 1)
            elif dh == 0:
                if a.fl == 1:
                    self._backward(b, 0, 0)
                elif b.fl == 1:
                    self._backward(a, 0, 0)
            return
        if op == "or":
            if dh == 0:
                self._backward(a, 0, 0)
                self._backward(b, 0, 0)
            elif dl == 1:
                if a.fh == 0:
                    self._backward(b, 1, 1)
                elif b.fh == 0:
                    self._backward(a, 1, 1)
            return
        if op == "implies":
            if dh == 0:
                self._backward(a, 1, 1)
                self._backward(b, 0, 0)
            elif dl == 1:
                if a.fl == 1:
                    self._backward(b, 1, 1)
                elif b.fh == 0:
                    self._backward(a, 0, 0)
            return
        raise MalformedModel(f"unknown operator {op!r}")

    def _relation(self, op: str, a: _Node, b: _Node):
        if op == "==":
            lo = max(a.fl, b.fl)
            hi = min(a.fh, b.fh)
            self._backward(a, lo, hi)
            self._backward(b, lo, hi)
        elif op == "!=":
            if a.fl == a.fh:
                v = a.fl
                if b.fl == v and b.fh == v:
                    raise _Conflict
                if b.fl == v:
                    self._backward(b, v + 1, b.fh)
                elif b.fh == v:
                    self._backward(b, b.fl, v - 1)
            elif b.fl == b.fh:
                v = b.fl
                if a.fl == v:
                    self._backward(a, v + 1, a.fh)
                elif a.fh == v:
                    self._backward(a, a.fl, v - 1)
        elif op == "<":
            self._backward(a, a.fl, b.fh - 1)
            self._backward(b, a.fl + 1, b.fh)
        elif op == "<=":
            self._backward(a, a.fl, b.fh)
            self._backward(b, a.fl, b.fh)
        elif op == ">":
            self._backward(a, b.fl + 1, a.fh)
            self._backward(b, b.fl, a.fh - 1)
        elif op == ">=":
            self._backward(a, b.fl, a.fh)
            self._backward(b, b.fl, a.fh)

    # --- fixpoint ---------------------------------------------------------

    def propagate(self, dirty: set[int] | None, ctx: "_Ctx") -> bool:
        """Run constraint revision to a fixpoint (or a deterministic cap).
        Returns False on a domain wipeout."""
        if self.trivially_false:
            return False
        if dirty is None:
            queue = deque(range(len(self.roots)))
            queued = set(queue)
        else:
            queue = deque()
            queued = set()
            for v in dirty:
                for c in self.watch.get(v, ()):
                    if c not in queued:
                        queued.add(c)
                        queue.append(c)
        cap = 40 * len(self.roots) + 400
        spins = 0
        while queue:
            spins += 1
            if spins > cap:
                break  # sound: stop early, search picks up the slack
            cidx = queue.popleft()
            queued.discard(cidx)
            root = self.roots[cidx]
            ctx.revision_tick()
            self._changed.clear()
            try:
                self._forward(root)
                self._backward(root, 1, 1)
            except _Conflict:
                return False
            for v in self._changed:
                if self.lo[v] > self.hi[v]:
                    return False
                for c in self.watch.get(v, ()):
                    if c not in queued:
                        queued.add(c)
                        queue.append(c)
        return True

    def snapshot(self):
        return self.lo[:], self.hi[:]

    def restore(self, snap):
        self.lo, self.hi = snap[0][:], snap[1][:]

    def assignment(self) -> dict[str, int | bool]:
        out: dict[str, int | bool] = {}
        for i, name in enumerate(self.names):
            v = self.lo[i]
            out[name] = bool(v) if self.sorts[i] == "bool" else v
        return out


class _Ctx:
    """Budget accounting shared across the searches of one solve call."""

    def __init__(self, budget: Budget):
        self.budget = budget
        self.stats = Stats()
        self.t0 = time.perf_counter()
        self.deadline = self.t0 + budget.max_ms / 1000.0

    def tick(self):
        self.stats.nodes += 1
        if self.stats.nodes > self.budget.max_nodes:
            raise _BudgetExceeded
        if (self.stats.nodes & _TIME_CHECK_MASK) == 0:
            if time.perf_counter() > self.deadline:
                raise _BudgetExceeded

    def revision_tick(self):
        # propagation dominates wall time on tightly constrained models,
        # so the deadline must be polled here too, not only per node
        self.stats.propagations += 1
        if (self.stats.propagations & _TIME_CHECK_MASK) == 0:
            if time.perf_counter() > self.deadline:
                raise _BudgetExceeded

    def finish(self):
        self.stats.wall_ms = (time.perf_counter() - self.t0) * 1000.0


def _search(model: ConstraintModel, box: DomainBox, ctx: _Ctx):
    """First solution in ascending declaration-order, or None if the
    space is exhausted.  Raises _BudgetExceeded."""
    eng = _Engine(model, box)
    for i in range(len(eng.lo)):
        if eng.lo[i] > eng.hi[i]:
            return None
    if not eng.propagate(None, ctx):
        return None
    stack = [eng.snapshot()]
    nvars = len(eng.names)
    while stack:
        ctx.tick()
        snap = stack.pop()
        eng.restore(snap)
        pick = -1
        for i in range(nvars):
            if eng.lo[i] < eng.hi[i]:
                pick = i
                break
        if pick < 0:
            cand = eng.assignment()
            if evaluate(model, cand):
                return cand
            continue  # capped propagation can leave false leaves
        lo, hi = eng.lo[pick], eng.hi[pick]
        if hi - lo + 1 > _SPLIT_THRESHOLD:
            mid = lo + (hi - lo) // 2
            branches = ((lo, mid), (mid + 1, hi))
        else:
            branches = ((lo, lo), (lo + 1, hi))
        base = eng.snapshot()
        for blo, bhi in reversed(branches):
            eng.restore(base)
            eng.lo[pick], eng.hi[pick] = blo, bhi
            if eng.propagate({pick}, ctx):
                stack.append(eng.snapshot())
    return None


def _root_objective_bounds(model: ConstraintModel, box: DomainBox, ctx: _Ctx):
    sense, obj = model.objective
    eng = _Engine(model, box)
    eng.propagate(None, ctx)
    node = _compile(simplify(obj), eng.index)

    def forward(n: _Node):
        eng._forward(n)
        return n.fl, n.fh

    return forward(node)


def check_sat(
    model: ConstraintModel,
    box: DomainBox | None = None,
    budget: Budget | None = None,
) -> SolveResult:
    """Decide satisfiability within the box.  "sat" results carry the
    lexicographically smallest witness; "unsat" means exhaustive."""
    model.validate()
    box = box if box is not None else DomainBox()
    ctx = _Ctx(budget if budget is not None else Budget())
    try:
        sol = _search(model, box, ctx)
    except _BudgetExceeded:
        ctx.finish()
        return SolveResult("exhausted", None, None, ctx.stats)
    ctx.finish()
    if sol is None:
        return SolveResult("unsat", None, None, ctx.stats)
    assert evaluate(model, sol), "solver returned a bad witness"
    return SolveResult("sat", sol, None, ctx.stats)


def optimize(
    model: ConstraintModel,
    box: DomainBox | None = None,
    budget: Budget | None = None,
) -> SolveResult:
    """Optimize the model's objective by branch and bound: repeated
    searches from the root, each with the objective window halved."""
    model.validate()
    if model.objective is None:
        raise MalformedModel("optimize needs a model with an objective")
    box = box if box is not None else DomainBox()
    ctx = _Ctx(budget if budget is not None else Budget())
    sense, obj = model.objective
    if sense not in ("minimize", "maximize"):
        raise MalformedModel(f"unknown objective sense {sense!r}")

    def with_bound(op: str, value: int) -> ConstraintModel:
        return ConstraintModel(
            model.vars,
            model.constraints + (FBinary(op, obj, FInt(value)),),
            None,
        )

    incumbent = None
    best = None
    try:
        sol = _search(model, box, ctx)
        if sol is None:
            ctx.finish()
            return SolveResult("unsat", None, None, ctx.stats)
        incumbent = sol
        best = _eval_flat(obj, sol)
        olo, ohi = _root_objective_bounds(model, box, ctx)
        if sense == "maximize":
            lo, hi = best, max(best, ohi)
            while lo < hi:
                target = lo + (hi - lo + 1) // 2
                probe = _search(with_bound(">=", target), box, ctx)
                if probe is None:
                    hi = target - 1
                else:
                    incumbent = probe
                    lo = _eval_flat(obj, probe)
            best = lo
        else:
            lo, hi = min(best, olo), best
            while lo < hi:
                target = hi - (hi - lo + 1) // 2
                probe = _search(with_bound("<=", target), box, ctx)
                if probe is None:
                    lo = target + 1
                else:
                    incumbent = probe
                    hi = _eval_flat(obj, probe)
            best = hi
    except _BudgetExceeded:
        ctx.finish()
        return SolveResult("exhausted", incumbent, best, ctx.stats)
    ctx.finish()
    assert evaluate(model, incumbent), "solver returned a bad witness"
    return SolveResult("opt", incumbent, best, ctx.stats)

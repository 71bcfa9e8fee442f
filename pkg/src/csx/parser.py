"""Lexer and recursive-descent parser for CSX source text.

The grammar, in rough EBNF (see README for the full version):

    spec        := (typedef | actiondef | devicedef | scenariodef)*
    typedef     := "type" IDENT "{" typemember* "}"
    typemember  := IDENT ":" sort | "derived" IDENT "=" expr | "[" expr "]"
    actiondef   := "action" IDENT "(" [locparams] ")" "{" actionmember* "}"
    locparams   := IDENT ":" IDENT ("," IDENT ":" IDENT)*
    actionmember:= "parameter" IDENT ":" ("int"|"bool")
                 | "derived" IDENT "=" expr | "[" expr "]"
    devicedef   := "device" IDENT "{" devicemember* "}"
    devicemember:= "location" IDENT ":" IDENT
                 | "component" IDENT "=" IDENT "(" [args] ")" ["{" ("[" expr "]")* "}"]
                 | "derived" IDENT "=" expr | "[" expr "]"
    scenariodef := "scenario" IDENT "for" IDENT "{" scenariomember* "}"
    scenariomember := path "=" literal
                 | "objective" ("minimize"|"maximize") expr
                 | "expect" "[" expr "]" | "[" expr "]"

Expressions use conventional precedence; "implies" is right associative
and binds loosest, comparisons do not associate.  Unary minus applied to
an integer literal is folded into a negative literal, so the parser's
output trees never contain neg-of-literal nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

from csx.ast import (
    ActionDef,
    ArgRef,
    Binary,
    Binding,
    BoolLit,
    ComponentDef,
    DefProp,
    DerivedProp,
    DeviceDef,
    Expectation,
    Expr,
    IntLit,
    LocParam,
    Location,
    Objective,
    Param,
    Proj,
    Ref,
    RESERVED_WORDS,
    ScenarioDef,
    Span,
    Spec,
    TypeDef,
    Unary,
)

_SYMBOLS = (
    "==", "!=", "<=", ">=",
    "{", "}", "(", ")", "[", "]", ",", ".", ":", "=", "<", ">", "+", "-", "*",
)

_KEYWORDS = RESERVED_WORDS


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "kw" | "sym" | "eof"
    value: str
    span: Span


@dataclass(frozen=True)
class ParseDiagnostic:
    message: str
    span: Span
    expected: tuple[str, ...] = ()

    def render(self) -> str:
        return f"{self.span.file}:{self.span.line}:{self.span.col}: error: {self.message}"


class ParseError(Exception):
    """Raised when source text does not parse.  Carries one diagnostic
    per failure (the parser stops at the first syntax error per file)."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.render() for d in self.diagnostics))


def tokenize(text: str, filename: str) -> list[Token]:
    tokens = []
    i = 0
    line = 1
    linestart = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            linestart = i
            continue
        if c in " \t\r":
            i += 1
            continue
        if c == "/" and text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        col = i - linestart + 1
        if c.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            word = text[i:j]
            span = Span(filename, i, j, line, col)
            kind = "kw" if word in _KEYWORDS else "ident"
            tokens.append(Token(kind, word, span))
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], Span(filename, i, j, line, col)))
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(
                    Token("sym", sym, Span(filename, i, i + len(sym), line, col))
                )
                i += len(sym)
                break
        else:
            span = Span(filename, i, i + 1, line, col)
            raise ParseError([ParseDiagnostic(f"stray character {c!r}", span)])
    tokens.append(Token("eof", "", Span(filename, n, n, line, n - linestart + 1)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at_sym(self, sym: str) -> bool:
        return self.cur.kind == "sym" and self.cur.value == sym

    def at_kw(self, word: str) -> bool:
        return self.cur.kind == "kw" and self.cur.value == word

    def eat_sym(self, sym: str) -> Token:
        if not self.at_sym(sym):
            self.fail(f"expected {sym!r}", (sym,))
        return self.advance()

    def eat_kw(self, word: str) -> Token:
        if not self.at_kw(word):
            self.fail(f"expected keyword {word!r}", (word,))
        return self.advance()

    def eat_ident(self, what: str = "identifier") -> Token:
        if self.cur.kind != "ident":
            if self.cur.kind == "kw":
                self.fail(
                    f"expected {what}, got reserved word {self.cur.value!r}",
                    ("identifier",),
                )
            self.fail(f"expected {what}", ("identifier",))
        return self.advance()

    def fail(self, message: str, expected: tuple[str, ...] = ()):
        tok = self.cur
        got = tok.value if tok.kind != "eof" else "end of input"
        raise ParseError(
            [ParseDiagnostic(f"{message}, got {got!r}", tok.span, expected)]
        )

    def span_from(self, start: Span) -> Span:
        end = self.tokens[self.pos - 1].span if self.pos else start
        return Span(start.file, start.start, end.end, start.line, start.col)

    # --- top level -------------------------------------------------------

    def parse_spec(self) -> Spec:
        start = self.cur.span
        types, actions, devices, scenarios = [], [], [], []
        while self.cur.kind != "eof":
            if self.at_kw("type"):
                types.append(self.parse_typedef())
            elif self.at_kw("action"):
                actions.append(self.parse_actiondef())
            elif self.at_kw("device"):
                devices.append(self.parse_devicedef())
            elif self.at_kw("scenario"):
                scenarios.append(self.parse_scenariodef())
            else:
                self.fail(
                    "expected a definition",
                    ("type", "action", "device", "scenario"),
                )
        return Spec(
            tuple(types), tuple(actions), tuple(devices), tuple(scenarios),
            self.span_from(start),
        )

    def parse_sort(self) -> str:
        if self.at_kw("int") or self.at_kw("bool"):
            return self.advance().value
        return self.eat_ident("sort").value

    def parse_typedef(self) -> TypeDef:
        start = self.eat_kw("type").span
        name = self.eat_ident("type name").value
        self.eat_sym("{")
        props, derived, constraints = [], [], []
        while not self.at_sym("}"):
            if self.at_sym("["):
                constraints.append(self.parse_bracketed())
            elif self.at_kw("derived"):
                derived.append(self.parse_derived())
            elif self.cur.kind == "ident":
                pstart = self.cur.span
                pname = self.advance().value
                self.eat_sym(":")
                sort = self.parse_sort()
                props.append(DefProp(pname, sort, self.span_from(pstart)))
            else:
                self.fail(
                    "expected a property, derived property, constraint or '}'",
                    ("identifier", "derived", "[", "}"),
                )
        self.eat_sym("}")
        return TypeDef(
            name, tuple(props), tuple(derived), tuple(constraints),
            self.span_from(start),
        )

    def parse_derived(self) -> DerivedProp:
        start = self.eat_kw("derived").span
        name = self.eat_ident("derived property name").value
        self.eat_sym("=")
        body = self.parse_expr()
        return DerivedProp(name, body, self.span_from(start))

    def parse_bracketed(self) -> Expr:
        self.eat_sym("[")
        e = self.parse_expr()
        self.eat_sym("]")
        return e

    def parse_actiondef(self) -> ActionDef:
        start = self.eat_kw("action").span
        name = self.eat_ident("action name").value
        self.eat_sym("(")
        loc_params = []
        if not self.at_sym(")"):
            while True:
                lstart = self.cur.span
                lname = self.eat_ident("location parameter name").value
                self.eat_sym(":")
                ltype = self.eat_ident("type name").value
                loc_params.append(LocParam(lname, ltype, self.span_from(lstart)))
                if self.at_sym(","):
                    self.advance()
                else:
                    break
        self.eat_sym(")")
        self.eat_sym("{")
        params, derived, constraints = [], [], []
        while not self.at_sym("}"):
            if self.at_sym("["):
                constraints.append(self.parse_bracketed())
            elif self.at_kw("parameter"):
                pstart = self.advance().span
                pname = self.eat_ident("parameter name").value
                self.eat_sym(":")
                if self.at_kw("int") or self.at_kw("bool"):
                    sort = self.advance().value
                else:
                    self.fail("parameter sort must be int or bool", ("int", "bool"))
                params.append(Param(pname, sort, self.span_from(pstart)))
            elif self.at_kw("derived"):
                derived.append(self.parse_derived())
            else:
                self.fail(
                    "expected a parameter, derived property, constraint or '}'",
                    ("parameter", "derived", "[", "}"),
                )
        self.eat_sym("}")
        return ActionDef(
            name, tuple(loc_params), tuple(params), tuple(derived),
            tuple(constraints), self.span_from(start),
        )

    def parse_devicedef(self) -> DeviceDef:
        start = self.eat_kw("device").span
        name = self.eat_ident("device name").value
        self.eat_sym("{")
        locations, components, derived, constraints = [], [], [], []
        while not self.at_sym("}"):
            if self.at_sym("["):
                constraints.append(self.parse_bracketed())
            elif self.at_kw("location"):
                lstart = self.advance().span
                lname = self.eat_ident("location name").value
                self.eat_sym(":")
                ltype = self.eat_ident("type name").value
                locations.append(Location(lname, ltype, self.span_from(lstart)))
            elif self.at_kw("component"):
                components.append(self.parse_component())
            elif self.at_kw("derived"):
                derived.append(self.parse_derived())
            else:
                self.fail(
                    "expected a location, component, derived property,"
                    " constraint or '}'",
                    ("location", "component", "derived", "[", "}"),
                )
        self.eat_sym("}")
        return DeviceDef(
            name, tuple(locations), tuple(components), tuple(derived),
            tuple(constraints), self.span_from(start),
        )

    def parse_component(self) -> ComponentDef:
        start = self.eat_kw("component").span
        name = self.eat_ident("component name").value
        self.eat_sym("=")
        action = self.eat_ident("action name").value
        self.eat_sym("(")
        args = []
        if not self.at_sym(")"):
            while True:
                atok = self.eat_ident("location argument")
                args.append(ArgRef(atok.value, atok.span))
                if self.at_sym(","):
                    self.advance()
                else:
                    break
        self.eat_sym(")")
        constraints = []
        if self.at_sym("{"):
            self.advance()
            while not self.at_sym("}"):
                if self.at_sym("["):
                    constraints.append(self.parse_bracketed())
                else:
                    self.fail("expected a constraint or '}'", ("[", "}"))
            self.eat_sym("}")
        return ComponentDef(
            name, action, tuple(args), tuple(constraints), self.span_from(start)
        )

    def parse_scenariodef(self) -> ScenarioDef:
        start = self.eat_kw("scenario").span
        name = self.eat_ident("scenario name").value
        self.eat_kw("for")
        device = self.eat_ident("device name").value
        self.eat_sym("{")
        bindings, extra, expectations = [], [], []
        objective = None
        while not self.at_sym("}"):
            if self.at_sym("["):
                extra.append(self.parse_bracketed())
            elif self.at_kw("expect"):
                estart = self.advance().span
                e = self.parse_bracketed()
                expectations.append(Expectation(e, span=self.span_from(estart)))
            elif self.at_kw("objective"):
                ostart = self.advance().span
                if self.at_kw("minimize") or self.at_kw("maximize"):
                    sense = self.advance().value
                else:
                    self.fail(
                        "expected minimize or maximize", ("minimize", "maximize")
                    )
                e = self.parse_expr()
                if objective is not None:
                    raise ParseError([ParseDiagnostic(
                        "scenario has more than one objective",
                        self.span_from(ostart),
                    )])
                objective = Objective(sense, e, self.span_from(ostart))
            elif self.cur.kind == "ident":
                bindings.append(self.parse_binding())
            else:
                self.fail(
                    "expected a binding, objective, expectation,"
                    " constraint or '}'",
                    ("identifier", "objective", "expect", "[", "}"),
                )
        self.eat_sym("}")
        return ScenarioDef(
            name, device, tuple(bindings), tuple(extra), objective,
            tuple(expectations), self.span_from(start),
        )

    def parse_binding(self) -> Binding:
        start = self.cur.span
        parts = [self.eat_ident("binding path").value]
        while self.at_sym("."):
            self.advance()
            parts.append(self.eat_ident("path segment").value)
        self.eat_sym("=")
        value = self.parse_literal()
        return Binding(tuple(parts), value, self.span_from(start))

    def parse_literal(self) -> int | bool:
        if self.at_kw("true"):
            self.advance()
            return True
        if self.at_kw("false"):
            self.advance()
            return False
        neg = False
        if self.at_sym("-"):
            self.advance()
            neg = True
        if self.cur.kind != "int":
            self.fail("expected a literal", ("integer", "true", "false"))
        v = int(self.advance().value)
        return -v if neg else v

    # --- expressions ------------------------------------------------------

    def parse_expr(self) -> Expr:
        return self.parse_implies()

    def parse_implies(self) -> Expr:
        left = self.parse_or()
        if self.at_kw("implies"):
            start = left.span
            self.advance()
            right = self.parse_implies()  # right associative
            return Binary("implies", left, right, self.span_from(start))
        return left

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.at_kw("or"):
            self.advance()
            rhs = self.parse_and()
            e = Binary("or", e, rhs, self.span_from(e.span))
        return e

    def parse_and(self) -> Expr:
        e = self.parse_cmp()
        while self.at_kw("and"):
            self.advance()
            rhs = self.parse_cmp()
            e = Binary("and", e, rhs, self.span_from(e.span))
        return e

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        if self.cur.kind == "sym" and self.cur.value in ("==", "!=", "<", "<=", ">", ">="):
            op = self.advance().value
            rhs = self.parse_add()
            return Binary(op, e, rhs, self.span_from(e.span))
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.cur.kind == "sym" and self.cur.value in ("+", "-"):
            op = self.advance().value
            rhs = self.parse_mul()
            e = Binary(op, e, rhs, self.span_from(e.span))
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.at_sym("*"):
            self.advance()
            rhs = self.parse_unary()
            e = Binary("*", e, rhs, self.span_from(e.span))
        return e

    def parse_unary(self) -> Expr:
        if self.at_sym("-"):
            start = self.advance().span
            operand = self.parse_unary()
            span = self.span_from(start)
            if isinstance(operand, IntLit):
                # fold so "-5" is a literal; keeps printing round trips exact
                return IntLit(-operand.value, span)
            return Unary("neg", operand, span)
        if self.at_kw("not"):
            start = self.advance().span
            operand = self.parse_unary()
            return Unary("not", operand, self.span_from(start))
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while self.at_sym("."):
            self.advance()
            name = self.eat_ident("property name").value
            e = Proj(e, name, self.span_from(e.span))
        return e

    def parse_primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.value), tok.span)
        if self.at_kw("true"):
            self.advance()
            return BoolLit(True, tok.span)
        if self.at_kw("false"):
            self.advance()
            return BoolLit(False, tok.span)
        if self.at_kw("self"):
            self.advance()
            return Ref("self", tok.span)
        if tok.kind == "ident":
            self.advance()
            return Ref(tok.value, tok.span)
        if self.at_sym("("):
            self.advance()
            e = self.parse_expr()
            self.eat_sym(")")
            return e
        self.fail(
            "expected an expression",
            ("integer", "true", "false", "identifier", "(", "-", "not"),
        )


def parse(text: str, filename: str = "<string>") -> Spec:
    """Parse CSX source text into a Spec.

    Raises ParseError carrying a diagnostic with a span and the set of
    tokens that would have been accepted at the failure point.
    """
    parser = _Parser(tokenize(text, filename))
    return parser.parse_spec()


def parse_expression(text: str, filename: str = "<expr>") -> Expr:
    """Parse a standalone expression (used by the CLI objective flag and
    the evaluation service endpoint)."""
    parser = _Parser(tokenize(text, filename))
    e = parser.parse_expr()
    if parser.cur.kind != "eof":
        parser.fail("unexpected trailing input")
    return e


def parse_path(text: str) -> tuple[str, ...]:
    """Parse a dotted configuration path such as "blockIn.sheet.w"."""
    parts = tuple(p.strip() for p in text.split("."))
    for p in parts:
        if not p or not (p[0].isalpha() and p.isalnum()) or p in RESERVED_WORDS:
            raise ValueError(f"invalid path segment {p!r} in {text!r}")
    return parts

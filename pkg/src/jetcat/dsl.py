"""Text DSL for PDE systems, operators, and sections.

Grammar (line oriented, ``#`` starts a comment)::

    file    := header block*
    header  := "base" ident+ NL "fiber" ident* NL "order" int NL
    block   := "eq" expr NL
             | "solve" jetcoord "=" expr NL
             | "op" ident ":" expr NL
             | "section" ident "=" expr NL
    expr    := rational | ident | jetcoord
             | expr ("+"|"-"|"*") expr | expr "^" int | "-" expr | "(" expr ")"
    jetcoord:= fiber-ident "_" base-ident+        (e.g. u_xt; u_xt == u_tx)

Every parse error carries a source span.  Printing produces canonical text
(terms in canonical order) whose reparse is equal to the original parse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from jetcat.errors import ParseError
from jetcat.jets import JetSpaceDescriptor
from jetcat.poly import MultiIndex, Polynomial, Variable, poly_to_str


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    offset: int
    length: int

    def __str__(self):
        return "%d:%d" % (self.line, self.column)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: SourceSpan

    def __str__(self):
        return "%s: %s: %s" % (self.span, self.severity, self.message)


@dataclass
class SystemFile:
    """Parsed DSL file: jet-space declaration plus equation, solved-form,
    operator, and section blocks."""

    base_names: tuple
    fiber_names: tuple
    order: int
    equations: list = field(default_factory=list)
    solved: dict = field(default_factory=dict)
    operators: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)
    name: str = ""

    @property
    def space(self):
        return JetSpaceDescriptor(self.base_names, self.fiber_names, self.order)

    def system(self):
        from jetcat.pde import PdeSystem

        return PdeSystem(self.space, self.equations)

    def operator(self, name):
        from jetcat.operators import FormalDiffOperator

        if name not in self.operators:
            raise KeyError("no operator %r in the file (have: %s)" % (name, sorted(self.operators)))
        return FormalDiffOperator.plain(self.space, ("v",), [self.operators[name]])

    def section(self, name):
        """A named scalar section (DSL sections are one expression each;
        systems with several fibers take one named section per fiber)."""
        from jetcat.jets import PolySection

        if name not in self.sections:
            raise KeyError("no section %r in the file (have: %s)" % (name, sorted(self.sections)))
        return PolySection([self.sections[name]])

    def __eq__(self, other):
        if not isinstance(other, SystemFile):
            return NotImplemented
        return (
            self.base_names == other.base_names
            and self.fiber_names == other.fiber_names
            and self.order == other.order
            and self.equations == other.equations
            and self.solved == other.solved
            and self.operators == other.operators
            and self.sections == other.sections
        )


# -- lexer ---------------------------------------------------------------------


_OPS = "+-*^()=:"


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | number | op | end
    text: str
    span: SourceSpan


def _lex_line(text, line_no, line_offset, diagnostics):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        start = i
        if ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == "/":
                j = i + 1
                while j < n and text[j].isdigit():
                    j += 1
                if j == i + 1:
                    diagnostics.append(Diagnostic(
                        "error", "malformed rational: missing denominator",
                        SourceSpan(line_no, start + 1, line_offset + start, j - start),
                    ))
                    return None
                i = j
            tokens.append(_Token("number", text[start:i],
                                 SourceSpan(line_no, start + 1, line_offset + start, i - start)))
            continue
        if ch.isalpha() or ch == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(_Token("ident", text[start:i],
                                 SourceSpan(line_no, start + 1, line_offset + start, i - start)))
            continue
        if ch in _OPS:
            tokens.append(_Token("op", ch,
                                 SourceSpan(line_no, start + 1, line_offset + start, 1)))
            i += 1
            continue
        diagnostics.append(Diagnostic(
            "error", "unexpected character %r" % ch,
            SourceSpan(line_no, start + 1, line_offset + start, 1),
        ))
        return None
    tokens.append(_Token("end", "", SourceSpan(line_no, n + 1, line_offset + n, 0)))
    return tokens


# -- identifier resolution -------------------------------------------------------


def _split_subscript(word, base_names):
    """Greedy longest-match split of a jet subscript into base names."""
    out = []
    i = 0
    ordered = sorted(base_names, key=len, reverse=True)
    while i < len(word):
        for nm in ordered:
            if word.startswith(nm, i):
                out.append(base_names.index(nm))
                i += len(nm)
                break
        else:
            return None
    return out


class _ExprParser:
    def __init__(self, tokens, ctx, diagnostics):
        self.tokens = tokens
        self.pos = 0
        self.ctx = ctx
        self.diagnostics = diagnostics

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def error(self, message, span):
        self.diagnostics.append(Diagnostic("error", message, span))
        raise _Bail()

    def parse(self):
        p = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.error("unexpected trailing input", tok.span)
        return p

    def expr(self):
        left = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.take()
                right = self.term()
                left = left + right if tok.text == "+" else left - right
            else:
                return left

    def term(self):
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text == "*":
                self.take()
                left = left * self.unary()
            else:
                return left

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.take()
            exp = self.take()
            if exp.kind != "number" or "/" in exp.text:
                self.error("exponent must be a non-negative integer", exp.span)
            return base ** int(exp.text)
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "number":
            return Polynomial.constant(Fraction(tok.text))
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            close = self.take()
            if close.kind != "op" or close.text != ")":
                self.error("expected ')'", close.span)
            return inner
        if tok.kind == "ident":
            return Polynomial.variable(self.resolve(tok))
        self.error("expected a number, identifier, or '('", tok.span)

    def resolve(self, tok):
        name = tok.text
        base_names, fiber_names, order = self.ctx
        if name in base_names:
            return Variable.base(base_names.index(name))
        if name in fiber_names:
            return Variable.jet(fiber_names.index(name), MultiIndex.zero(len(base_names)))
        head, sep, sub = name.partition("_")
        if sep and head in fiber_names and sub:
            dirs = _split_subscript(sub, base_names)
            if dirs is None:
                self.error(
                    "cannot read jet subscript %r as base coordinates %s"
                    % (sub, list(base_names)), tok.span,
                )
            entries = [0] * len(base_names)
            for d in dirs:
                entries[d] += 1
            idx = MultiIndex(entries)
            if idx.degree > order:
                self.error(
                    "jet coordinate %s has order %d, above the declared order %d"
                    % (name, idx.degree, order), tok.span,
                )
            return Variable.jet(fiber_names.index(head), idx)
        self.error("unknown identifier %r" % name, tok.span)


class _Bail(Exception):
    pass


# -- file parser -----------------------------------------------------------------


def _logical_lines(text):
    offset = 0
    for line_no, raw in enumerate(text.split("\n"), start=1):
        yield line_no, offset, raw
        offset += len(raw) + 1


def parse_system(text, name="") -> SystemFile:
    """Parse DSL text; raises ParseError carrying span diagnostics."""
    diagnostics = []
    header = {"base": None, "fiber": None, "order": None}
    blocks = []
    for line_no, offset, raw in _logical_lines(text):
        tokens = _lex_line(raw, line_no, offset, diagnostics)
        if tokens is None:
            continue
        if tokens[0].kind == "end":
            continue
        head = tokens[0]
        if head.kind != "ident":
            diagnostics.append(Diagnostic("error", "expected a keyword to start the line", head.span))
            continue
        blocks.append((head, tokens))

    def fail_if_errors():
        if diagnostics:
            raise ParseError(diagnostics)

    idx = 0
    # header: base, fiber, order (in this order)
    expected = ["base", "fiber", "order"]
    for want in expected:
        if idx >= len(blocks) or blocks[idx][0].text != want:
            span = blocks[idx][0].span if idx < len(blocks) else SourceSpan(1, 1, 0, 0)
            diagnostics.append(Diagnostic(
                "error", "missing or out-of-place header line %r" % want, span
            ))
            fail_if_errors()
        head, tokens = blocks[idx]
        idx += 1
        body = tokens[1:-1]
        if want == "order":
            if len(body) != 1 or body[0].kind != "number" or "/" in body[0].text:
                diagnostics.append(Diagnostic(
                    "error", "order takes a single non-negative integer", head.span
                ))
            else:
                header["order"] = int(body[0].text)
        else:
            names = []
            for tok in body:
                if tok.kind != "ident" or "_" in tok.text:
                    diagnostics.append(Diagnostic(
                        "error", "%s names must be identifiers without underscores" % want,
                        tok.span,
                    ))
                elif tok.text in names:
                    diagnostics.append(Diagnostic("error", "duplicate name %r" % tok.text, tok.span))
                else:
                    names.append(tok.text)
            if want == "base" and not names:
                diagnostics.append(Diagnostic("error", "need at least one base coordinate", head.span))
            header[want] = tuple(names)
    fail_if_errors()

    sf = SystemFile(
        base_names=header["base"], fiber_names=header["fiber"], order=header["order"],
        name=name,
    )
    ctx = (sf.base_names, sf.fiber_names, sf.order)

    for head, tokens in blocks[idx:]:
        body = tokens[1:]
        try:
            if head.text == "eq":
                sf.equations.append(_ExprParser(body, ctx, diagnostics).parse())
            elif head.text == "solve":
                if body[0].kind != "ident":
                    raise _bail_with(diagnostics, "solve expects a jet coordinate", body[0].span)
                lhs_var = _ExprParser(body, ctx, diagnostics).resolve(body[0])
                if not lhs_var.is_jet:
                    raise _bail_with(diagnostics, "solve target must be a jet coordinate", body[0].span)
                if len(body) < 2 or body[1].text != "=":
                    span = body[1].span if len(body) > 1 else body[0].span
                    raise _bail_with(diagnostics, "solve expects '='", span)
                rhs = _ExprParser(body[2:], ctx, diagnostics).parse()
                key = (lhs_var.fiber, lhs_var.index)
                if key in sf.solved:
                    raise _bail_with(diagnostics, "duplicate solve target", body[0].span)
                sf.solved[key] = rhs
            elif head.text == "op":
                if body[0].kind != "ident":
                    raise _bail_with(diagnostics, "op expects a name", body[0].span)
                if len(body) < 2 or body[1].text != ":":
                    raise _bail_with(diagnostics, "op expects ':'", body[0].span)
                opname = body[0].text
                if opname in sf.operators:
                    raise _bail_with(diagnostics, "duplicate operator %r" % opname, body[0].span)
                sf.operators[opname] = _ExprParser(body[2:], ctx, diagnostics).parse()
            elif head.text == "section":
                if body[0].kind != "ident":
                    raise _bail_with(diagnostics, "section expects a name", body[0].span)
                if len(body) < 2 or body[1].text != "=":
                    raise _bail_with(diagnostics, "section expects '='", body[0].span)
                secname = body[0].text
                if secname in sf.sections:
                    raise _bail_with(diagnostics, "duplicate section %r" % secname, body[0].span)
                expr = _ExprParser(body[2:], ctx, diagnostics).parse()
                if any(not v.is_base for v in expr.variables()):
                    raise _bail_with(
                        diagnostics, "sections may use base variables only", body[0].span
                    )
                sf.sections[secname] = expr
            else:
                diagnostics.append(Diagnostic(
                    "error", "unknown block keyword %r" % head.text, head.span
                ))
        except _Bail:
            pass
    fail_if_errors()
    return sf


def _bail_with(diagnostics, message, span):
    diagnostics.append(Diagnostic("error", message, span))
    return _Bail()


def try_parse(text, name=""):
    """Non-raising variant: (SystemFile or None, diagnostics)."""
    try:
        return parse_system(text, name), []
    except ParseError as exc:
        return None, exc.diagnostics


# -- printer ---------------------------------------------------------------------


def render_expr(sf: SystemFile, p: Polynomial) -> str:
    return poly_to_str(p, sf.base_names, sf.fiber_names)


def format_system(sf: SystemFile) -> str:
    """Canonical text whose reparse equals the original parse."""
    lines = [
        "base %s" % " ".join(sf.base_names),
        "fiber %s" % " ".join(sf.fiber_names),
        "order %d" % sf.order,
    ]
    for eq in sf.equations:
        lines.append("eq %s" % render_expr(sf, eq))
    for (a, idx) in sorted(sf.solved, key=lambda key: Variable.jet(*key)):
        lines.append(
            "solve %s = %s"
            % (Variable.jet(a, idx).name(sf.base_names, sf.fiber_names),
               render_expr(sf, sf.solved[(a, idx)]))
        )
    for nm in sorted(sf.operators):
        lines.append("op %s: %s" % (nm, render_expr(sf, sf.operators[nm])))
    for nm in sorted(sf.sections):
        lines.append("section %s = %s" % (nm, render_expr(sf, sf.sections[nm])))
    return "\n".join(lines) + "\n"

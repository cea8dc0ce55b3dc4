"""DSL parsing, diagnostics, and the print/parse round trip."""

import os

import pytest

from jetcat.dsl import format_system, parse_system, render_expr, try_parse
from jetcat.errors import ParseError
from jetcat.poly import MultiIndex, Polynomial

from conftest import CORPUS, load_corpus

HEAT_TEXT = """\
base x t
fiber u
order 2
eq u_t - u_xx
"""


def diag_of(text):
    with pytest.raises(ParseError) as err:
        parse_system(text)
    return err.value.diagnostics[0]


class TestParsing:
    def test_heat_file(self):
        sf = parse_system(HEAT_TEXT, "heat")
        system = sf.system()
        assert system.order == 2
        assert system.space.base_names == ("x", "t")
        expected = Polynomial.jet_var(0, (0, 1)) - Polynomial.jet_var(0, (2, 0))
        assert system.equations == (expected,)

    def test_mixed_partials_normalize_at_parse_time(self):
        sf = parse_system("base x t\nfiber u\norder 2\neq u_xt - u_tx\n")
        assert sf.equations[0] == Polynomial.zero()

    def test_rationals_and_powers(self):
        sf = parse_system("base x\nfiber u\norder 0\nsection s = 3/4*x^2 - 1\n")
        x = Polynomial.base_var(0)
        from jetcat.poly import rat

        assert sf.sections["s"] == rat(3, 4) * x ** 2 - 1

    def test_unary_minus_and_parens(self):
        sf = parse_system("base x\nfiber u\norder 1\neq -(u_x - u)*2\n")
        u = Polynomial.jet_var(0, (0,))
        ux = Polynomial.jet_var(0, (1,))
        assert sf.equations[0] == -2 * (ux - u)

    def test_solve_block(self):
        sf = load_corpus("heat.pde")
        assert sf.solved == {(0, MultiIndex((0, 1))): Polynomial.jet_var(0, (2, 0))}

    def test_operator_and_section_accessors(self):
        sf = load_corpus("heat.pde")
        assert sf.operator("ddx").component(0) == Polynomial.jet_var(0, (1, 0))
        assert sf.section("cubic").components[0] == Polynomial.base_var(0) ** 3

    def test_multichar_base_names(self):
        sf = parse_system("base xa xb\nfiber u\norder 2\neq u_xaxb\n")
        assert sf.equations[0] == Polynomial.jet_var(0, (1, 1))


class TestDiagnostics:
    def test_order_violation_points_at_token(self):
        d = diag_of("base x t\nfiber u\norder 2\neq u_xxx\n")
        assert "order 3" in d.message and d.span.line == 4 and d.span.column == 4

    def test_empty_file(self):
        d = diag_of("")
        assert "base" in d.message

    def test_unknown_identifier(self):
        d = diag_of("base x\nfiber u\norder 1\neq q + u\n")
        assert "unknown identifier 'q'" in d.message

    def test_malformed_rational(self):
        d = diag_of("base x\nfiber u\norder 1\neq 5/ * u\n")
        assert "malformed rational" in d.message

    def test_unknown_subscript(self):
        d = diag_of("base x\nfiber u\norder 1\neq u_y\n")
        assert "subscript" in d.message

    def test_header_out_of_order(self):
        d = diag_of("fiber u\nbase x\norder 1\n")
        assert "header" in d.message

    def test_every_diagnostic_has_a_span(self):
        _, diags = try_parse("base x\nfiber u\norder 1\neq )\neq u_yy\n")
        assert diags and all(d.span.line >= 1 and d.span.column >= 1 for d in diags)

    def test_try_parse_success(self):
        sf, diags = try_parse(HEAT_TEXT)
        assert sf is not None and diags == []


class TestRoundTrip:
    @pytest.mark.parametrize("name", sorted(
        f for f in os.listdir(CORPUS) if f.endswith(".pde")
    ))
    def test_corpus_round_trip(self, name):
        sf = load_corpus(name)
        printed = format_system(sf)
        again = parse_system(printed, sf.name)
        assert again == sf
        # printing is a fixed point on canonical text
        assert format_system(again) == printed

    def test_render_expr_is_dsl_syntax(self):
        sf = load_corpus("heat.pde")
        text = render_expr(sf, sf.operators["adv"])
        assert text == "u*u_x"

"""Differential operators: application, prolongation, co-Kleisli laws."""

import random

import pytest

from jetcat.errors import FiberMismatchError, OrderBudgetError
from jetcat.jets import JetSpaceDescriptor, PolySection, jet_prolong_section
from jetcat.laws import random_operator, random_section
from jetcat.operators import (
    FormalDiffOperator,
    kleisli_compose,
    op_apply,
    op_prolong,
    substitute_operator,
)
from jetcat.poly import MultiIndex, Polynomial

X = Polynomial.base_var(0)
SP1 = JetSpaceDescriptor(("x",), ("u",), 2)


def plain(space, expr, target="v"):
    return FormalDiffOperator.plain(space, (target,), [expr])


class TestApply:
    def test_derivative_operator(self):
        d = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)))
        assert op_apply(d, PolySection([X ** 3])).components[0] == 3 * X ** 2

    def test_transport_term(self):
        d = plain(SP1.with_order(1), Polynomial.jet_var(0, (0,)) * Polynomial.jet_var(0, (1,)))
        assert op_apply(d, PolySection([X ** 3])).components[0] == 3 * X ** 5

    def test_identity(self):
        ident = FormalDiffOperator.identity(SP1.with_order(0))
        sec = PolySection([X ** 4 - X])
        assert op_apply(ident, sec) == sec

    def test_fiber_mismatch(self):
        d = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)))
        with pytest.raises(FiberMismatchError):
            op_apply(d, PolySection([X, X]))


class TestProlong:
    def test_prolong_once(self):
        d = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)))
        p = op_prolong(d, 1)
        assert p.components[(0, MultiIndex((0,)))] == Polynomial.jet_var(0, (1,))
        assert p.components[(0, MultiIndex((1,)))] == Polynomial.jet_var(0, (2,))

    def test_leibniz(self):
        d = plain(SP1.with_order(0), Polynomial.jet_var(0, (0,)) ** 2)
        p = op_prolong(d, 1)
        assert p.components[(0, MultiIndex((1,)))] == (
            2 * Polynomial.jet_var(0, (0,)) * Polynomial.jet_var(0, (1,))
        )

    def test_characterization(self):
        # applying p^l D equals prolonging the application, for l <= 3
        rng = random.Random(17)
        space = JetSpaceDescriptor(("x", "t"), ("u",), 2)
        for _ in range(8):
            d = random_operator(rng, space, ("v",), max_degree=2)
            sec = random_section(rng, 2, 1, 3)
            for l in range(4):
                lhs = op_apply(op_prolong(d, l), sec)
                rhs = jet_prolong_section(
                    op_apply(d, sec), l, space.base_names
                )
                if l == 0:
                    assert lhs.components[0] == rhs.components[(0, MultiIndex((0, 0)))]
                else:
                    assert lhs.components == rhs.components

    def test_source_order_grows_exactly(self):
        d = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)))
        assert op_prolong(d, 2).source.order == 3


class TestKleisli:
    def test_double_derivative(self):
        d1 = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)))
        d2 = FormalDiffOperator.plain(
            JetSpaceDescriptor(("x",), ("v",), 1), ("w",), [Polynomial.jet_var(0, (1,))]
        )
        c = kleisli_compose(d2, d1)
        assert c.component(0) == Polynomial.jet_var(0, (2,))

    def test_transport_after_derivative(self):
        d1 = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)))
        d2 = FormalDiffOperator.plain(
            JetSpaceDescriptor(("x",), ("v",), 1), ("w",),
            [Polynomial.jet_var(0, (0,)) * Polynomial.jet_var(0, (1,))],
        )
        c = kleisli_compose(d2, d1)
        assert c.component(0) == Polynomial.jet_var(0, (1,)) * Polynomial.jet_var(0, (2,))
        applied = op_apply(c, PolySection([X ** 3]))
        assert applied.components[0] == 18 * X ** 3

    def test_identity_units(self):
        d = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)) + Polynomial.jet_var(0, (0,)) ** 2)
        unit_right = FormalDiffOperator.identity(SP1.with_order(0))
        unit_left = FormalDiffOperator.identity(JetSpaceDescriptor(("x",), ("v",), 0))
        assert kleisli_compose(d, unit_right).components == d.components
        assert kleisli_compose(unit_left, d).components == d.components

    def test_functoriality_on_random_operators(self):
        rng = random.Random(23)
        src = JetSpaceDescriptor(("x",), ("u",), 2)
        mid = JetSpaceDescriptor(("x",), ("v",), 2)
        for _ in range(10):
            d1 = random_operator(rng, src, ("v",), max_degree=2)
            d2 = random_operator(rng, mid.with_order(rng.randint(0, 2)), ("w",), max_degree=2)
            comp = kleisli_compose(d2, d1)
            for _ in range(3):
                sec = random_section(rng, 1, 1, 3)
                assert op_apply(comp, sec) == op_apply(d2, op_apply(d1, sec))

    def test_associativity(self):
        rng = random.Random(31)
        a_space = JetSpaceDescriptor(("x",), ("u",), 1)
        b_space = JetSpaceDescriptor(("x",), ("v",), 1)
        c_space = JetSpaceDescriptor(("x",), ("w",), 1)
        for _ in range(8):
            d1 = random_operator(rng, a_space, ("v",), max_degree=2)
            d2 = random_operator(rng, b_space, ("w",), max_degree=2)
            d3 = random_operator(rng, c_space, ("z",), max_degree=2)
            left = kleisli_compose(d3, kleisli_compose(d2, d1))
            right = kleisli_compose(kleisli_compose(d3, d2), d1)
            assert left.components == right.components

    def test_prolongation_monoidal_over_composition(self):
        # p^l (D2 . D1) equals the plain substitution of p^{l+ord2} D1
        # into p^l D2, at every finite order within budget
        rng = random.Random(41)
        src = JetSpaceDescriptor(("x", "t"), ("u",), 1)
        mid = JetSpaceDescriptor(("x", "t"), ("v",), 1)
        for _ in range(5):
            d1 = random_operator(rng, src, ("v",), max_degree=2)
            d2 = random_operator(rng, mid, ("w",), max_degree=2)
            comp = kleisli_compose(d2, d1)
            for l in range(3):
                lhs = op_prolong(comp, l)
                rhs = substitute_operator(
                    op_prolong(d2, l), op_prolong(d1, l + d2.order)
                )
                assert lhs.components == rhs.components

    def test_fiber_mismatch(self):
        d1 = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)), target="v")
        d3 = FormalDiffOperator.plain(
            JetSpaceDescriptor(("x",), ("w",), 1), ("z",), [Polynomial.jet_var(0, (1,))]
        )
        with pytest.raises(FiberMismatchError):
            kleisli_compose(d3, d1)

    def test_budget_error(self):
        d1 = plain(SP1.with_order(1), Polynomial.jet_var(0, (1,)))
        d2 = FormalDiffOperator.plain(
            JetSpaceDescriptor(("x",), ("v",), 2), ("w",), [Polynomial.jet_var(0, (2,))]
        )
        with pytest.raises(OrderBudgetError):
            kleisli_compose(d2, d1, budget=2)
        assert kleisli_compose(d2, d1, budget=3).order == 3


class TestStructure:
    def test_minimal_order_trimming(self):
        # declared order 2 but only u_x appears: stored order is 1
        d = plain(SP1, Polynomial.jet_var(0, (1,)))
        assert d.order == 1

    def test_linearity_detection(self):
        lin = plain(SP1, Polynomial.jet_var(0, (1,)) + X * Polynomial.jet_var(0, (0,)))
        nonlin = plain(SP1, Polynomial.jet_var(0, (0,)) * Polynomial.jet_var(0, (1,)))
        assert lin.is_linear() and not nonlin.is_linear()

    def test_rejects_eps(self):
        with pytest.raises(ValueError):
            plain(SP1, Polynomial.eps_var(0))

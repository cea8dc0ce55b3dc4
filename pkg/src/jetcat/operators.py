"""Formal (generally nonlinear) differential operators between trivial
bundles, represented by their jet-coordinate components, together with
prolongation and co-Kleisli composition.

An operator with target order 0 is a plain differential operator
J^k E -> F; ``op_prolong`` raises the target order, giving the finite
prolongations whose components are iterated total derivatives.  Composition
substitutes the prolongation of the first operator into the second, and
applying a composite to a section agrees with applying the factors in turn.
"""

from __future__ import annotations

from jetcat.errors import FiberMismatchError, OrderBudgetError
from jetcat.jets import (
    JetSection,
    JetSpaceDescriptor,
    PolySection,
    base_chart,
    jet_prolong_section,
    total_derivative,
)
from jetcat.poly import MultiIndex, Polynomial, Variable, multi_indices


class FormalDiffOperator:
    """A tuple of jet-coordinate polynomials J^k E -> J^l F.

    ``source`` is trimmed to the minimal order actually used by the
    components, so composition order-accounting is tight.  ``components``
    maps each target coordinate (b, J), |J| <= target.order, to a polynomial
    in source jet coordinates and base variables.
    """

    __slots__ = ("source", "target", "components")

    def __init__(self, source: JetSpaceDescriptor, target: JetSpaceDescriptor, components):
        if source.base_names != target.base_names:
            raise FiberMismatchError("source and target must share the base chart")
        comps = {}
        used_order = 0
        for b in range(target.fiber_dim):
            for idx in multi_indices(source.base_dim, target.order):
                key = (b, idx)
                if key not in components:
                    raise ValueError("missing operator component for %r" % (key,))
                p = components[key]
                for v in p.variables():
                    if v.is_eps:
                        raise ValueError("operator components cannot contain eps variables")
                    if v.is_jet:
                        if v.fiber >= source.fiber_dim or v.base_dim != source.base_dim:
                            raise FiberMismatchError(
                                "component variable %r not licensed by the source space" % (v,)
                            )
                        if v.order > source.order:
                            raise OrderBudgetError(
                                "component variable %r exceeds source order %d"
                                % (v, source.order)
                            )
                        used_order = max(used_order, v.order)
                comps[key] = p
        self.source = source.with_order(used_order)
        self.target = target
        self.components = comps

    # -- constructors --------------------------------------------------------

    @classmethod
    def plain(cls, source: JetSpaceDescriptor, target_fibers, components):
        """Operator into a plain bundle (target order 0), one polynomial per
        target fiber."""
        target = JetSpaceDescriptor(source.base_names, tuple(target_fibers), 0)
        m = source.base_dim
        zero = MultiIndex.zero(m)
        comp_map = {(b, zero): p for b, p in enumerate(components)}
        return cls(source, target, comp_map)

    @classmethod
    def identity(cls, space: JetSpaceDescriptor):
        """The order-0 identity operator u^b -> u^b."""
        comps = [Polynomial.jet_var(b, MultiIndex.zero(space.base_dim))
                 for b in range(space.fiber_dim)]
        return cls.plain(space.with_order(0), space.fiber_names, comps)

    # -- basic structure -----------------------------------------------------

    @property
    def order(self):
        return self.source.order

    def is_linear(self):
        """Jointly degree <= 1 in the jet variables (base-variable
        coefficients allowed)."""
        return all(
            p.degree_in(lambda v: v.is_jet) <= 1 for p in self.components.values()
        )

    def component(self, b, index=None):
        if index is None:
            index = MultiIndex.zero(self.source.base_dim)
        return self.components[(b, MultiIndex(index))]

    def __eq__(self, other):
        if not isinstance(other, FormalDiffOperator):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.components == other.components
        )

    def __repr__(self):
        body = "; ".join(
            "%s -> %s"
            % (
                Variable.jet(b, idx).name(self.target.base_names, self.target.fiber_names),
                self.source.render(p),
            )
            for (b, idx), p in sorted(self.components.items(), key=lambda kv: kv[0])
        )
        return "FormalDiffOperator(%s)" % body


def op_apply(op: FormalDiffOperator, section: PolySection):
    """Apply to a section: substitute u^a_I -> d^I sigma^a.

    Returns a ``PolySection`` for plain operators and a ``JetSection`` when
    the target carries jet order (prolonged operators).
    """
    if section.fiber_dim != op.source.fiber_dim:
        raise FiberMismatchError(
            "section has %d components, operator source has %d fibers"
            % (section.fiber_dim, op.source.fiber_dim)
        )
    prolonged = jet_prolong_section(section, op.source.order, op.source.base_names)
    mapping = {}
    for (a, idx), p in prolonged.components.items():
        mapping[Variable.jet(a, idx)] = p
    results = {key: p.substitute(mapping) for key, p in op.components.items()}
    if op.target.order == 0:
        zero = MultiIndex.zero(op.source.base_dim)
        return PolySection([results[(b, zero)] for b in range(op.target.fiber_dim)])
    return JetSection(
        op.target.fiber_names, op.target.order, base_chart(op.source.base_names), results
    )


def op_prolong(op: FormalDiffOperator, extra: int) -> FormalDiffOperator:
    """Finite prolongation: the component for target coordinate v^b_J is the
    iterated total derivative D_J of the order-0 component; the source order
    grows by exactly ``extra``."""
    if op.target.order != 0:
        raise OrderBudgetError("op_prolong expects a plain (target order 0) operator")
    if extra < 0:
        raise ValueError("prolongation order must be >= 0")
    m = op.source.base_dim
    zero = MultiIndex.zero(m)
    comps = {}
    for b in range(op.target.fiber_dim):
        derivs = {zero: op.components[(b, zero)]}
        comps[(b, zero)] = derivs[zero]
        for deg in range(1, extra + 1):
            for idx in multi_indices(m, deg, deg):
                j = next(d for d in range(m) if idx[d] > 0)
                g = total_derivative(derivs[idx - MultiIndex.unit(j, m)], j, base_dim=m)
                derivs[idx] = g
                comps[(b, idx)] = g
    source = op.source.with_order(op.source.order + extra)
    target = op.target.with_order(extra)
    return FormalDiffOperator(source, target, comps)


def substitute_operator(outer: FormalDiffOperator, inner: FormalDiffOperator) -> FormalDiffOperator:
    """Plain substitution of ``inner``'s components for ``outer``'s source
    jet coordinates (no prolongation performed here).  ``inner``'s target
    must license every source coordinate of ``outer``."""
    if outer.source.fiber_names != inner.target.fiber_names:
        raise FiberMismatchError(
            "outer source fibers %r do not match inner target fibers %r"
            % (outer.source.fiber_names, inner.target.fiber_names)
        )
    if outer.source.order > inner.target.order:
        raise OrderBudgetError(
            "outer operator reads source order %d but inner target carries only %d"
            % (outer.source.order, inner.target.order)
        )
    mapping = {
        Variable.jet(b, idx): inner.components[(b, idx)]
        for (b, idx) in inner.components
    }
    comps = {key: p.substitute(mapping) for key, p in outer.components.items()}
    return FormalDiffOperator(inner.source, outer.target, comps)


def kleisli_compose(second: FormalDiffOperator, first: FormalDiffOperator,
                    budget=None) -> FormalDiffOperator:
    """Co-Kleisli composite: substitute the prolongation of ``first`` into
    ``second``.  Applying the composite to a section equals applying the
    factors in turn, and the resulting order is at most the sum of orders.
    """
    if second.target.order != 0 and first.target.order != 0:
        raise OrderBudgetError("kleisli_compose expects plain operators")
    if first.target.fiber_names != second.source.fiber_names:
        raise FiberMismatchError(
            "cannot compose: intermediate fibers %r vs %r"
            % (first.target.fiber_names, second.source.fiber_names)
        )
    needed = first.order + second.order
    if budget is not None and budget < needed:
        raise OrderBudgetError(
            "composition needs order budget %d, given %d" % (needed, budget)
        )
    prolonged = op_prolong(first, second.source.order)
    return substitute_operator(second, prolonged)

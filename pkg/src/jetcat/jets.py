"""Truncated jet bundles over a trivial bundle R^m x F -> R^m.

Conventions
-----------
* The jet coordinate ``u^a_I`` stores the raw partial derivative (no 1/I!
  factor).  All factorials live in the Taylor-family adjunction maps
  (``jet_to_family`` / ``family_to_jet``), which makes the comonad coproduct
  the pure index addition ``(u^a_J)_I = u^a_{I+J}``.
* Infinite order is a working-order budget: every operation that consumes
  order validates it and raises ``OrderBudgetError`` instead of silently
  truncating.
* Everything here is pure and immutable; law-check sampling may run
  per-sample in parallel with order-independent results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from jetcat.errors import DimensionMismatchError, OrderBudgetError
from jetcat.poly import (
    MultiIndex,
    Polynomial,
    Variable,
    WeilAlgebraDescriptor,
    multi_indices,
    weil_reduce,
)

_ONE = Fraction(1)


@dataclass(frozen=True)
class JetSpaceDescriptor:
    """Shape of the truncated jet bundle J^k(R^m x F -> R^m).

    Coordinates are the pairs (fiber a, multi-index I) with |I| <= order;
    there are ``fiber_dim * C(m+k, k)`` of them.
    """

    base_names: tuple
    fiber_names: tuple
    order: int

    def __post_init__(self):
        object.__setattr__(self, "base_names", tuple(self.base_names))
        object.__setattr__(self, "fiber_names", tuple(self.fiber_names))
        if self.order < 0:
            raise ValueError("jet order must be >= 0")
        if not self.base_names:
            raise ValueError("need at least one base coordinate")

    @property
    def base_dim(self):
        return len(self.base_names)

    @property
    def fiber_dim(self):
        return len(self.fiber_names)

    def coordinate_count(self):
        m, k = self.base_dim, self.order
        return self.fiber_dim * math.comb(m + k, k)

    def coordinates(self, max_order=None, min_order=0):
        """(a, I) pairs in canonical order (fiber-major, degree ascending)."""
        top = self.order if max_order is None else max_order
        out = []
        for a in range(self.fiber_dim):
            for idx in multi_indices(self.base_dim, top, min_order):
                out.append((a, idx))
        return out

    def jet_variable(self, a, index):
        index = MultiIndex(index)
        if not 0 <= a < self.fiber_dim:
            raise DimensionMismatchError("fiber index %d out of range" % a)
        if len(index) != self.base_dim:
            raise DimensionMismatchError(
                "multi-index %r has wrong length for base dim %d" % (index, self.base_dim)
            )
        if index.degree > self.order:
            raise OrderBudgetError(
                "coordinate u^%d_%r exceeds declared order %d" % (a, tuple(index), self.order)
            )
        return Variable.jet(a, index)

    def with_order(self, order):
        return JetSpaceDescriptor(self.base_names, self.fiber_names, order)

    def licenses(self, p: Polynomial):
        """True iff every variable of p is a base or jet coordinate of this space."""
        for v in p.variables():
            if v.is_base:
                if v.base_index >= self.base_dim:
                    return False
            elif v.is_jet:
                if v.fiber >= self.fiber_dim or v.base_dim != self.base_dim:
                    return False
                if v.order > self.order:
                    return False
            else:
                return False
        return True

    def coordinate_name(self, a, index):
        return Variable.jet(a, MultiIndex(index)).name(self.base_names, self.fiber_names)

    def render(self, p: Polynomial):
        from jetcat.poly import poly_to_str

        return poly_to_str(p, self.base_names, self.fiber_names)


def base_chart(base_names):
    """The trivial bundle Sigma -> Sigma (no fiber coordinates)."""
    return JetSpaceDescriptor(tuple(base_names), (), 0)


class JetPoint:
    """A rational point of a truncated jet space: base point plus one value
    per jet coordinate (raw-derivative convention)."""

    __slots__ = ("descriptor", "base", "coords")

    def __init__(self, descriptor, base, coords):
        if len(base) != descriptor.base_dim:
            raise DimensionMismatchError("base point has wrong dimension")
        self.descriptor = descriptor
        self.base = tuple(b if type(b) is Fraction else Fraction(b) for b in base)
        full = {}
        for a, idx in descriptor.coordinates():
            key = (a, idx)
            if key not in coords:
                raise ValueError(
                    "incomplete jet point: missing %s" % descriptor.coordinate_name(a, idx)
                )
            val = coords[key]
            full[key] = val if type(val) is Fraction else Fraction(val)
        self.coords = full

    @property
    def order(self):
        return self.descriptor.order

    def value(self, a, index):
        return self.coords[(a, MultiIndex(index))]

    def assignment(self):
        """Variable -> value mapping (base and jet variables), for evaluate()."""
        out = {Variable.base(i): b for i, b in enumerate(self.base)}
        for (a, idx), val in self.coords.items():
            out[Variable.jet(a, idx)] = val
        return out

    def truncate(self, order):
        if order > self.order:
            raise OrderBudgetError("cannot truncate order-%d point to %d" % (self.order, order))
        desc = self.descriptor.with_order(order)
        kept = {k: v for k, v in self.coords.items() if k[1].degree <= order}
        return JetPoint(desc, self.base, kept)

    def __eq__(self, other):
        if not isinstance(other, JetPoint):
            return NotImplemented
        return (
            self.descriptor == other.descriptor
            and self.base == other.base
            and self.coords == other.coords
        )

    def __repr__(self):
        names = ", ".join(
            "%s=%s" % (self.descriptor.coordinate_name(a, i), v)
            for (a, i), v in sorted(self.coords.items(), key=lambda kv: Variable.jet(*kv[0]))
        )
        return "JetPoint(at %s: %s)" % (self.base, names)


class PolySection:
    """A polynomial section of the trivial bundle: one base-variable
    polynomial per fiber coordinate."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(components)
        for p in comps:
            if any(not v.is_base for v in p.variables()):
                raise ValueError("section components must contain only base variables")
        self.components = comps

    @property
    def fiber_dim(self):
        return len(self.components)

    def __eq__(self, other):
        if not isinstance(other, PolySection):
            return NotImplemented
        return self.components == other.components

    def __repr__(self):
        return "PolySection(%s)" % (", ".join(repr(c) for c in self.components),)


class JetSection:
    """A parameterized family of jets: one polynomial (in parameter
    variables) per target jet coordinate (a, I), |I| <= order."""

    __slots__ = ("target_fibers", "order", "params", "components")

    def __init__(self, target_fibers, order, params, components):
        self.target_fibers = tuple(target_fibers)
        self.order = int(order)
        self.params = params
        comps = {}
        for a in range(len(self.target_fibers)):
            for idx in multi_indices(params.base_dim, self.order):
                key = (a, idx)
                if key not in components:
                    raise ValueError("incomplete jet section: missing (%d, %r)" % (a, tuple(idx)))
                comps[key] = components[key]
        self.components = comps

    def at(self, x0):
        """Evaluate at a base point (parameters must be a plain base chart)."""
        if self.params.fiber_dim:
            raise ValueError("pointwise evaluation needs a base-chart parameter space")
        assignment = {Variable.base(i): Fraction(v) for i, v in enumerate(x0)}
        desc = JetSpaceDescriptor(self.params.base_names, self.target_fibers, self.order)
        coords = {key: p.evaluate(assignment) for key, p in self.components.items()}
        return JetPoint(desc, [Fraction(v) for v in x0], coords)

    def __eq__(self, other):
        if not isinstance(other, JetSection):
            return NotImplemented
        return (
            self.target_fibers == other.target_fibers
            and self.order == other.order
            and self.params == other.params
            and self.components == other.components
        )

    def __repr__(self):
        return "JetSection(order=%d, fibers=%r)" % (self.order, self.target_fibers)


class TaylorFamily:
    """A family of truncated Taylor expansions: for each target fiber, a
    polynomial in parameter variables and the base-disk generators eps_j
    (one per base direction), with total eps-degree <= order."""

    __slots__ = ("target_fibers", "order", "space", "components")

    def __init__(self, target_fibers, order, space, components):
        self.target_fibers = tuple(target_fibers)
        self.order = int(order)
        self.space = space
        comps = tuple(components)
        if len(comps) != len(self.target_fibers):
            raise ValueError("one component per target fiber required")
        for p in comps:
            if p.eps_degree() > self.order:
                raise OrderBudgetError("family component exceeds eps order %d" % self.order)
            for v in p.variables():
                if v.is_eps and v.eps_index >= space.base_dim:
                    raise DimensionMismatchError(
                        "eps generator %d has no matching base direction" % v.eps_index
                    )
        self.components = comps

    def weil(self):
        return WeilAlgebraDescriptor(self.space.base_dim, self.order)

    def __eq__(self, other):
        if not isinstance(other, TaylorFamily):
            return NotImplemented
        return (
            self.target_fibers == other.target_fibers
            and self.order == other.order
            and self.space == other.space
            and self.components == other.components
        )

    def __repr__(self):
        return "TaylorFamily(order=%d, fibers=%r)" % (self.order, self.target_fibers)


class IteratedJetPoint:
    """A point of J^k(J^l(E)): values for ((u^a_J)_I), |I| <= outer_order,
    |J| <= inner_order."""

    __slots__ = ("descriptor", "outer_order", "inner_order", "base", "coords")

    def __init__(self, descriptor, outer_order, inner_order, base, coords):
        self.descriptor = descriptor
        self.outer_order = int(outer_order)
        self.inner_order = int(inner_order)
        self.base = tuple(b if type(b) is Fraction else Fraction(b) for b in base)
        m = descriptor.base_dim
        full = {}
        for a in range(descriptor.fiber_dim):
            for inner in multi_indices(m, self.inner_order):
                for outer in multi_indices(m, self.outer_order):
                    key = (a, inner, outer)
                    if key not in coords:
                        raise ValueError("incomplete iterated jet point: missing %r" % (key,))
                    val = coords[key]
                    full[key] = val if type(val) is Fraction else Fraction(val)
        self.coords = full

    def value(self, a, inner, outer):
        return self.coords[(a, MultiIndex(inner), MultiIndex(outer))]

    def outer_counit(self):
        """Order-0 outer slice: a JetPoint of the inner order."""
        desc = self.descriptor.with_order(self.inner_order)
        zero = MultiIndex.zero(self.descriptor.base_dim)
        coords = {
            (a, inner): val for (a, inner, outer), val in self.coords.items() if outer == zero
        }
        return JetPoint(desc, self.base, coords)

    def inner_counit(self):
        """Order-0 inner slice: a JetPoint of the outer order."""
        desc = self.descriptor.with_order(self.outer_order)
        zero = MultiIndex.zero(self.descriptor.base_dim)
        coords = {
            (a, outer): val for (a, inner, outer), val in self.coords.items() if inner == zero
        }
        return JetPoint(desc, self.base, coords)

    def __eq__(self, other):
        if not isinstance(other, IteratedJetPoint):
            return NotImplemented
        return (
            self.descriptor == other.descriptor
            and self.outer_order == other.outer_order
            and self.inner_order == other.inner_order
            and self.base == other.base
            and self.coords == other.coords
        )

    def __repr__(self):
        return "IteratedJetPoint(outer=%d, inner=%d)" % (self.outer_order, self.inner_order)


# -- prolongation and total derivatives ---------------------------------------


def jet_prolong_section(section: PolySection, order, base_names=None) -> JetSection:
    """The jet prolongation as a polynomial jet section: (a, I) -> d^I sigma^a."""
    if base_names is None:
        dims = set()
        for p in section.components:
            for v in p.variables():
                dims.add(v.base_index)
        m = (max(dims) + 1) if dims else 1
        base_names = tuple("x%d" % (i + 1) for i in range(m))
    params = base_chart(base_names)
    m = params.base_dim
    comps = {}
    for a, p in enumerate(section.components):
        derivs = {MultiIndex.zero(m): p}
        comps[(a, MultiIndex.zero(m))] = p
        for deg in range(1, order + 1):
            for idx in multi_indices(m, deg, deg):
                j = next(d for d in range(m) if idx[d] > 0)
                g = derivs[idx - MultiIndex.unit(j, m)].partial(Variable.base(j))
                derivs[idx] = g
                comps[(a, idx)] = g
    fibers = tuple("u" if len(section.components) == 1 else "u%d" % (a + 1)
                   for a in range(len(section.components)))
    return JetSection(fibers, order, params, comps)


def jet_prolong(section: PolySection, order, x0, base_names=None) -> JetPoint:
    """The k-jet of a polynomial section at a base point: u^a_I = (d^I sigma^a)(x0)."""
    return jet_prolong_section(section, order, base_names).at(x0)


def total_derivative(expr: Polynomial, direction, base_dim=None) -> Polynomial:
    """Total derivative D_i = d/dx_i + sum u^a_{I+e_i} d/du^a_I.

    Raises the jet order of ``expr`` by exactly one.  The base dimension is
    inferred from the jet variables present (``base_dim`` covers the case of
    jet-free expressions in higher-dimensional bases).
    """
    m = expr.base_dim_hint()
    if m is None:
        m = base_dim if base_dim is not None else direction + 1
    if not 0 <= direction < m:
        raise DimensionMismatchError("direction %d out of range for base dim %d" % (direction, m))
    out = expr.partial(Variable.base(direction))
    unit = MultiIndex.unit(direction, m)
    for v in expr.jet_variables():
        dv = expr.partial(v)
        if dv:
            out = out + Polynomial.variable(v.shifted(unit)) * dv
    return out


def iterated_total_derivative(expr: Polynomial, index, base_dim=None) -> Polynomial:
    """D_I = product of D_i per multi-index entry (order of application
    is immaterial: mixed total derivatives commute)."""
    index = MultiIndex(index)
    out = expr
    for d, e in enumerate(index):
        for _ in range(e):
            out = total_derivative(out, d, base_dim=base_dim or len(index))
    return out


# -- comonad structure maps ----------------------------------------------------


def counit(theta: JetPoint):
    """Forget all derivative data: (base point, fiber values)."""
    zero = MultiIndex.zero(theta.descriptor.base_dim)
    return theta.base, {a: theta.coords[(a, zero)] for a in range(theta.descriptor.fiber_dim)}


def coproduct(theta: JetPoint, outer_order, inner_order) -> IteratedJetPoint:
    """Split an order-(k+l) jet into a k-jet of l-jets: (u^a_J)_I = u^a_{I+J}."""
    k, l = int(outer_order), int(inner_order)
    if k < 0 or l < 0:
        raise ValueError("split orders must be non-negative")
    if theta.order < k + l:
        raise OrderBudgetError(
            "coproduct split (%d,%d) needs order >= %d, point has %d"
            % (k, l, k + l, theta.order)
        )
    m = theta.descriptor.base_dim
    coords = {}
    for a in range(theta.descriptor.fiber_dim):
        for inner in multi_indices(m, l):
            for outer in multi_indices(m, k):
                coords[(a, inner, outer)] = theta.coords[(a, inner + outer)]
    return IteratedJetPoint(theta.descriptor, k, l, theta.base, coords)


# -- the Taylor-family adjunction ----------------------------------------------


def _eps_mono_to_index(mono, m, layer=0):
    entries = [0] * m
    for v, e in mono:
        if not v.is_eps or v.layer != layer:
            raise ValueError("unexpected eps layer in family component")
        entries[v.eps_index] += e
    return MultiIndex(entries)


def jet_to_family(section: JetSection) -> TaylorFamily:
    """Adjunct in the jet-to-Taylor direction: F^a = sum (1/I!) u^a_I eps^I."""
    m = section.params.base_dim
    comps = []
    for a in range(len(section.target_fibers)):
        total = Polynomial.zero()
        for idx in multi_indices(m, section.order):
            piece = section.components[(a, idx)]
            if not piece:
                continue
            eps = Polynomial.one()
            for d in range(m):
                if idx[d]:
                    eps = eps * Polynomial.variable(Variable.eps(d), idx[d])
            total = total + piece * eps * Fraction(1, idx.factorial())
        comps.append(total)
    return TaylorFamily(section.target_fibers, section.order, section.params, comps)


def family_to_jet(family: TaylorFamily) -> JetSection:
    """Adjunct in the Taylor-to-jet direction: u^a_I = I! [eps^I] F^a.

    Mutually inverse with ``jet_to_family``.
    """
    m = family.space.base_dim
    comps = {}
    for a, comp in enumerate(family.components):
        buckets = comp.eps_decompose()
        seen = {}
        for eps_mono, coeff in buckets.items():
            idx = _eps_mono_to_index(eps_mono, m)
            seen[idx] = coeff * idx.factorial()
        for idx in multi_indices(m, family.order):
            comps[(a, idx)] = seen.get(idx, Polynomial.zero())
    return JetSection(family.target_fibers, family.order, family.space, comps)


# -- displacement along the base (used by the holonomicity test) ---------------


def jet_shift(p: Polynomial, order, space: JetSpaceDescriptor, layer=0) -> Polynomial:
    """Displace a jet-space function along the base by nilpotent eps:

        sum_{|K| <= order} (1/K!) (D_K p) eps^K   (eps in the given layer).

    Base variables shift as x -> x + eps; jet variables through their own
    derivative structure u^a_J -> sum (1/K!) u^a_{J+K} eps^K.  Needs jet
    order budget: max jet order of p plus ``order`` must fit in ``space``.
    """
    m = space.base_dim
    if p.jet_variables():
        need = p.max_jet_order() + order
        if need > space.order:
            raise OrderBudgetError(
                "jet_shift needs order %d but the parameter space has %d" % (need, space.order)
            )
    out = dict(p.terms)
    derivs = {MultiIndex.zero(m): p}
    from jetcat import _kernel

    for deg in range(1, order + 1):
        for idx in multi_indices(m, deg, deg):
            j = next(d for d in range(m) if idx[d] > 0)
            g = total_derivative(derivs[idx - MultiIndex.unit(j, m)], j, base_dim=m)
            derivs[idx] = g
            if not g:
                continue
            coeff = Fraction(1, idx.factorial())
            eps_mono = tuple((Variable.eps(d, layer), idx[d]) for d in range(m) if idx[d])
            scaled = _kernel.scale_terms(g.terms, coeff)
            out = _kernel.add_terms(
                out, {_kernel.mono_mul(mn, eps_mono): c for mn, c in scaled.items()}
            )
    return Polynomial(out, _canonical=True)


def holonomic_check(family: TaylorFamily, order=None) -> bool:
    """Symmetry of the two-layer expansion: displacing the parameter point
    and expanding agrees with expanding the undisplaced family by the sum of
    both infinitesimals.  Families of the form jet_to_family(prolongation)
    pass; families whose eps-coefficients are not the derivatives of their
    own order-0 part fail."""
    k = family.order if order is None else int(order)
    w = WeilAlgebraDescriptor(family.space.base_dim, k)
    relabel = {
        v: Polynomial.variable(Variable.eps(v.eps_index, 1))
        for comp in family.components
        for v in comp.variables()
        if v.is_eps
    }
    for comp in family.components:
        f1 = comp.substitute(relabel)
        lhs = weil_reduce(jet_shift(f1, k, family.space, layer=2), w)
        f0 = comp.set_eps_zero()
        rhs = weil_reduce(
            jet_shift(jet_shift(f0, k, family.space, layer=1), k, family.space, layer=2), w
        )
        if lhs != rhs:
            return False
    return True

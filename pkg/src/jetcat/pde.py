"""PDE systems as loci in truncated jet spaces: prolongation towers,
formal-integrability verdicts, solved-form jet coalgebras, the coalgebra
law suite (counit, coaction, Beck), and products/equalizers of systems.

Verdict semantics
-----------------
``integrable_up_to`` certifies that prolonging to the working order and
projecting back produces no new constraints of order <= the system order;
it never claims order-infinity integrability.  For linear systems the
check is exact (row reduction over the rational-function field in the base
variables).  For polynomial nonlinear systems a bounded-degree Macaulay
span is searched; exhausting the bound without a certificate reports
``unknown``, never a wrong verdict.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from jetcat import linalg
from jetcat.errors import (
    CyclicSolvedFormError,
    DimensionMismatchError,
    FiberMismatchError,
    IntegrabilityError,
    OrderBudgetError,
)
from jetcat.jets import (
    JetPoint,
    JetSpaceDescriptor,
    iterated_total_derivative,
    total_derivative,
)
from jetcat.linalg import AFFINE
from jetcat.operators import FormalDiffOperator, op_prolong
from jetcat.poly import MultiIndex, Polynomial, Variable, multi_indices


class PdeSystem:
    """A finite list of polynomial equations F_alpha = 0 in the jet
    coordinates of a descriptor.  The zero locus is the equation object;
    membership of a jet point is decided by exact evaluation."""

    __slots__ = ("space", "equations")

    def __init__(self, space: JetSpaceDescriptor, equations):
        eqs = tuple(p for p in equations)
        for p in eqs:
            if not space.licenses(p):
                raise OrderBudgetError(
                    "equation %s is not licensed by the declared jet space" % space.render(p)
                )
        self.space = space
        self.equations = eqs

    @property
    def order(self):
        return self.space.order

    def is_linear(self):
        return all(p.degree_in(lambda v: v.is_jet) <= 1 for p in self.equations)

    def contains(self, theta: JetPoint) -> bool:
        """Exact membership of a jet point in the zero locus."""
        assignment = theta.assignment()
        return all(p.evaluate(assignment) == 0 for p in self.equations)

    def __eq__(self, other):
        if not isinstance(other, PdeSystem):
            return NotImplemented
        return self.space == other.space and self.equations == other.equations

    def __repr__(self):
        return "PdeSystem(order=%d, equations=[%s])" % (
            self.order,
            "; ".join(self.space.render(p) for p in self.equations),
        )


class ProlongedSystem:
    """The differential-consequence tower of a system up to a working order:
    step s holds the one-higher total derivatives {D_I F_alpha : |I| = s}."""

    __slots__ = ("base", "working_order", "steps")

    def __init__(self, base: PdeSystem, working_order: int, steps):
        self.base = base
        self.working_order = int(working_order)
        self.steps = tuple(tuple(s) for s in steps)

    @property
    def space(self):
        return self.base.space.with_order(self.working_order)

    def equations_up_to(self, step=None):
        if step is None:
            step = len(self.steps) - 1
        out = []
        for s in range(min(step, len(self.steps) - 1) + 1):
            out.extend(self.steps[s])
        return out

    def equations_of_jet_order(self, max_order):
        """All tower equations whose jet order is <= max_order."""
        return [p for p in self.equations_up_to() if p.max_jet_order() <= max_order]

    def tower_sizes(self):
        sizes = []
        total = 0
        for s in self.steps:
            total += len(s)
            sizes.append(total)
        return sizes

    def __repr__(self):
        return "ProlongedSystem(K=%d, sizes=%r)" % (self.working_order, self.tower_sizes())


def pde_prolong(system: PdeSystem, working_order: int) -> ProlongedSystem:
    """Populate the tower by iterated total derivatives up to the working
    order.  Step 0 is the base equation list."""
    k = system.order
    if working_order < k:
        raise OrderBudgetError(
            "working order %d below the system order %d" % (working_order, k)
        )
    m = system.space.base_dim
    steps = [list(system.equations)]
    # previous[(alpha, I)] = D_I F_alpha
    previous = {(i, MultiIndex.zero(m)): p for i, p in enumerate(system.equations)}
    for s in range(1, working_order - k + 1):
        layer = {}
        new_eqs = []
        for alpha in range(len(system.equations)):
            for idx in multi_indices(m, s, s):
                j = next(d for d in range(m) if idx[d] > 0)
                g = total_derivative(previous[(alpha, idx - MultiIndex.unit(j, m))], j, base_dim=m)
                layer[(alpha, idx)] = g
                new_eqs.append(g)
        previous.update(layer)
        steps.append(new_eqs)
    return ProlongedSystem(system, working_order, steps)


@dataclass(frozen=True)
class IntegrabilityVerdict:
    """Outcome of the finite-order integrability check."""

    status: str  # integrable_up_to | obstructed | inconsistent | unknown
    working_order: int
    method: str  # linear-exact | macaulay-bounded
    obstructions: tuple = ()
    witnesses: tuple = ()
    reason: Optional[str] = None
    tower_sizes: tuple = ()

    def ok(self):
        return self.status == "integrable_up_to"


def _linear_rows(polys):
    return [linalg.linear_decompose(p) for p in polys]


def _check_linear(prolonged: ProlongedSystem) -> IntegrabilityVerdict:
    k = prolonged.base.order
    rows = [r for r in _linear_rows(prolonged.equations_up_to()) if r]
    high_cols = sorted(
        {c for r in rows for c in r if c != AFFINE and c.order > k},
        key=linalg._column_sort_key,
    )
    _, survivors = linalg.eliminate(rows, high_cols)
    base_rows = [r for r in _linear_rows(prolonged.base.equations) if r]
    base_echelon = linalg.echelonize(base_rows)
    obstructions = []
    witnesses = []
    for row in survivors:
        if all(key == AFFINE for key in row):
            # a jet-free consequence: the locus is (generically) empty
            witnesses.append(linalg.row_to_polynomial(row).primitive())
            continue
        residual = linalg.reduce_row(row, base_echelon)
        if not residual:
            continue
        poly = linalg.row_to_polynomial(residual).primitive()
        if all(key == AFFINE for key in residual):
            witnesses.append(poly)
        else:
            obstructions.append(poly)
    witnesses = list(dict.fromkeys(witnesses))
    obstructions = list(dict.fromkeys(obstructions))
    sizes = tuple(prolonged.tower_sizes())
    if witnesses:
        return IntegrabilityVerdict(
            "inconsistent", prolonged.working_order, "linear-exact",
            tuple(obstructions), tuple(witnesses), None, sizes,
        )
    if obstructions:
        return IntegrabilityVerdict(
            "obstructed", prolonged.working_order, "linear-exact",
            tuple(obstructions), (), None, sizes,
        )
    return IntegrabilityVerdict(
        "integrable_up_to", prolonged.working_order, "linear-exact", (), (), None, sizes,
    )


def _check_macaulay(prolonged: ProlongedSystem, degree_bound, row_cap=60000):
    k = prolonged.base.order
    space = prolonged.base.space
    tower = [p for p in prolonged.equations_up_to() if p]
    variables = set()
    for p in tower:
        variables.update(p.variables())
    for i in range(space.base_dim):
        variables.add(Variable.base(i))

    def is_high(mono):
        return any(v.is_jet and v.order > k for v, _ in mono)

    rows = linalg.macaulay_rows(tower, degree_bound, variables)
    if len(rows) > row_cap:
        return IntegrabilityVerdict(
            "unknown", prolonged.working_order, "macaulay-bounded", (), (),
            "macaulay span at degree %d exceeds the row budget" % degree_bound,
            tuple(prolonged.tower_sizes()),
        )
    survivors = linalg.macaulay_eliminate(rows, is_high)
    base_rows = linalg.macaulay_rows(list(prolonged.base.equations), degree_bound, variables)
    base_span = linalg.macaulay_eliminate(base_rows, lambda m: False)
    obstructions = []
    witnesses = []
    for row in survivors:
        as_poly = Polynomial(dict(row)).primitive()
        if not as_poly.jet_variables():
            # a jet-free consequence certifies (generic) emptiness directly
            witnesses.append(as_poly)
            continue
        residual = linalg.macaulay_reduce(row, base_span)
        if not residual:
            continue
        poly = Polynomial(residual).primitive()
        if not poly.jet_variables():
            witnesses.append(poly)
        else:
            obstructions.append(poly)
    sizes = tuple(prolonged.tower_sizes())
    # dedupe while keeping order
    obstructions = tuple(dict.fromkeys(obstructions))
    witnesses = tuple(dict.fromkeys(witnesses))
    if witnesses:
        return IntegrabilityVerdict(
            "inconsistent", prolonged.working_order, "macaulay-bounded",
            obstructions, witnesses, None, sizes,
        )
    if obstructions:
        return IntegrabilityVerdict(
            "obstructed", prolonged.working_order, "macaulay-bounded",
            obstructions, (), None, sizes,
        )
    return IntegrabilityVerdict(
        "unknown", prolonged.working_order, "macaulay-bounded", (), (),
        "no consequence found within degree bound %d" % degree_bound, sizes,
    )


def check_integrability(system: PdeSystem, working_order: int,
                        macaulay_degree=None) -> IntegrabilityVerdict:
    """Prolong to the working order and look for new order-<=k constraints.

    Linear systems get the exact verdict; nonlinear ones the bounded
    Macaulay oracle (default degree bound: twice the maximal equation
    degree)."""
    prolonged = pde_prolong(system, working_order)
    if not system.equations:
        return IntegrabilityVerdict(
            "integrable_up_to", working_order, "linear-exact", (), (), None,
            tuple(prolonged.tower_sizes()),
        )
    if system.is_linear():
        return _check_linear(prolonged)
    if macaulay_degree is None:
        macaulay_degree = 2 * max(p.total_degree() for p in system.equations)
    return _check_macaulay(prolonged, macaulay_degree)


# -- parametric points and the solved-form coalgebra ---------------------------


class ParametricPoint:
    """A rational point of the (truncated) equation locus, presented by its
    parametric jet coordinates.  Values are generated deterministically from
    a seed on demand, so the evaluation order never matters."""

    __slots__ = ("coalgebra", "seed", "base", "_cache")

    def __init__(self, coalgebra, seed, base=None):
        self.coalgebra = coalgebra
        self.seed = str(seed)
        m = coalgebra.system.space.base_dim
        if base is None:
            base = tuple(_seeded_rational("%s|base|%d" % (self.seed, i)) for i in range(m))
        self.base = tuple(Fraction(b) for b in base)
        self._cache = {}

    def value(self, a, index):
        key = (a, MultiIndex(index))
        if self.coalgebra.is_principal(*key):
            raise ValueError("coordinate %r is principal, not parametric" % (key,))
        if key not in self._cache:
            self._cache[key] = _seeded_rational(
                "%s|%d|%s" % (self.seed, a, ",".join(map(str, key[1])))
            )
        return self._cache[key]

    def assignment_for(self, poly: Polynomial):
        out = {}
        for v in poly.variables():
            if v.is_base:
                out[v] = self.base[v.base_index]
            elif v.is_jet:
                out[v] = self.value(v.fiber, v.index)
            else:
                raise ValueError("unexpected eps variable in a coaction value")
        return out

    def evaluate(self, poly: Polynomial):
        return poly.evaluate(self.assignment_for(poly))


def _seeded_rational(token):
    rng = random.Random(token)
    return Fraction(rng.randint(-6, 6), rng.choice((1, 1, 1, 2, 3)))


class CoalgebraStructure:
    """The coaction of a solved-form system: every jet coordinate reduces to
    a polynomial in parametric coordinates by exhaustive substitution of
    total derivatives of the solved expressions.

    ``solved_form`` maps a principal leader (fiber, multi-index) to its
    right-hand side; the principal coordinates are exactly the derivatives
    of the leaders, and the parametric ones are everything else."""

    __slots__ = ("system", "working_order", "solved_form", "leaders",
                 "nf_order_limit", "_nf", "_overrides", "_in_progress")

    def __init__(self, system: PdeSystem, solved_form: Mapping, working_order: int,
                 nf_order_limit=None, _overrides=None):
        self.system = system
        self.working_order = int(working_order)
        solved = {}
        for (a, idx), rhs in solved_form.items():
            idx = MultiIndex(idx)
            system.space.jet_variable(a, idx)  # validates
            if not system.space.licenses(rhs):
                raise OrderBudgetError(
                    "solved expression %s exceeds the declared space" % system.space.render(rhs)
                )
            solved[(a, idx)] = rhs
        self.solved_form = solved
        self.leaders = sorted(solved, key=lambda key: (key[0], Variable.jet(*key)))
        if nf_order_limit is None:
            nf_order_limit = max(64, 8 * self.working_order + 8 * system.order + 8)
        self.nf_order_limit = nf_order_limit
        self._nf = {}
        self._overrides = dict(_overrides or {})
        self._in_progress = set()

    # -- classification ------------------------------------------------------

    def is_principal(self, a, index):
        index = MultiIndex(index)
        return any(
            la == a and index.dominates(li) for la, li in self.leaders
        )

    def _leader_for(self, a, index):
        best = None
        for la, li in self.leaders:
            if la == a and index.dominates(li):
                if best is None or li.degree > best[1].degree:
                    best = (la, li)
        return best

    def parametric_coordinates(self, max_order):
        out = []
        for a in range(self.system.space.fiber_dim):
            for idx in multi_indices(self.system.space.base_dim, max_order):
                if not self.is_principal(a, idx):
                    out.append((a, idx))
        return out

    # -- normal forms ----------------------------------------------------------

    def normal_form(self, a, index):
        """The coaction component for u^a_I: a polynomial in parametric
        coordinates and base variables."""
        key = (a, MultiIndex(index))
        override = self._overrides.get(key)
        if override is not None:
            return override
        cached = self._nf.get(key)
        if cached is not None:
            return cached
        if key[1].degree > self.nf_order_limit:
            raise CyclicSolvedFormError(
                "solved-form substitution does not terminate: reached order %d "
                "while normalizing u^%d_%r" % (key[1].degree, a, tuple(key[1]))
            )
        if key in self._in_progress:
            raise CyclicSolvedFormError(
                "cyclic solved form at coordinate u^%d_%r" % (a, tuple(key[1]))
            )
        if not self.is_principal(*key):
            result = Polynomial.jet_var(a, key[1])
        else:
            self._in_progress.add(key)
            try:
                la, li = self._leader_for(*key)
                expr = iterated_total_derivative(
                    self.solved_form[(la, li)], key[1] - li,
                    base_dim=self.system.space.base_dim,
                )
                result = self.reduce(expr)
            finally:
                self._in_progress.discard(key)
        self._nf[key] = result
        return result

    def reduce(self, poly: Polynomial) -> Polynomial:
        """Rewrite every principal jet coordinate in ``poly`` to its normal
        form (parametric coordinates only)."""
        mapping = {}
        for v in poly.jet_variables():
            if self.is_principal(v.fiber, v.index):
                mapping[v] = self.normal_form(v.fiber, v.index)
        if not mapping:
            return poly
        return poly.substitute(mapping)

    def coaction(self, max_order=None):
        """The induced jet assignment: every coordinate up to the order maps
        to its normal form."""
        top = self.working_order if max_order is None else max_order
        return {
            (a, idx): self.normal_form(a, idx)
            for a in range(self.system.space.fiber_dim)
            for idx in multi_indices(self.system.space.base_dim, top)
        }

    def validate(self, check_integrability_first=True):
        """Constructor-grade validation: integrability at the working order
        and exact vanishing of the whole tower under the coaction."""
        if check_integrability_first:
            verdict = check_integrability(self.system, self.working_order)
            if verdict.status in ("obstructed", "inconsistent"):
                raise IntegrabilityError(
                    "system fails integrability at order %d" % self.working_order,
                    verdict,
                )
        prolonged = pde_prolong(self.system, self.working_order)
        for p in prolonged.equations_up_to():
            if self.reduce(p) != 0:
                raise IntegrabilityError(
                    "coaction ill-defined: tower equation %s does not vanish "
                    "under the solved form" % self.system.space.render(p),
                    None,
                )
        # counitality: the order-<=k part restricted to the locus is the identity
        for (a, idx) in self.parametric_coordinates(self.system.order):
            if self.normal_form(a, idx) != Polynomial.jet_var(a, idx):
                raise IntegrabilityError("counitality violated at a parametric coordinate", None)
        return self

    # -- the equation locus as a bundle (E-space) ------------------------------

    def e_fibers(self):
        """Parametric coordinates of order <= k: the fiber coordinates of the
        equation locus viewed as a bundle over the base."""
        return self.parametric_coordinates(self.system.order)

    def e_space(self, order):
        names = tuple(
            self.system.space.coordinate_name(a, idx) for (a, idx) in self.e_fibers()
        )
        return JetSpaceDescriptor(self.system.space.base_names, names, order)

    def represent_parametric(self, a, index):
        """Express a parametric coordinate as an E-jet variable: coordinates
        of order <= k are order-0 fibers; deeper ones are derivatives of the
        order-k cut of their multi-index (parametric by downward closure)."""
        index = MultiIndex(index)
        k = self.system.order
        fibers = self.e_fibers()
        if index.degree <= k:
            e = fibers.index((a, index))
            return Variable.jet(e, MultiIndex.zero(len(index)))
        word = index.word()
        head = [0] * len(index)
        for d in word[:k]:
            head[d] += 1
        head = MultiIndex(head)
        cut = (a, head)
        if cut not in fibers:
            raise IntegrabilityError(
                "order-%d cut of a parametric coordinate is principal" % k, None
            )
        return Variable.jet(fibers.index(cut), index - head)

    def rep(self, poly: Polynomial) -> Polynomial:
        """Rewrite a parametric-coordinate polynomial into E-jet variables."""
        mapping = {}
        for v in poly.jet_variables():
            mapping[v] = Polynomial.variable(self.represent_parametric(v.fiber, v.index))
        return poly.substitute(mapping) if mapping else poly

    # -- evaluation ------------------------------------------------------------

    def point(self, seed, base=None):
        return ParametricPoint(self, seed, base)

    def rho_jet_point(self, pt: ParametricPoint, order=None) -> JetPoint:
        """The induced jet of the locus point: every coordinate evaluated
        through its normal form."""
        top = self.working_order if order is None else order
        desc = self.system.space.with_order(top)
        coords = {
            key: pt.evaluate(nf) for key, nf in self.coaction(top).items()
        }
        return JetPoint(desc, pt.base, coords)

    def mutated(self, rng):
        """A tampered copy: one stored coaction entry gets a single-coefficient
        perturbation.  Used by the mutation-detection law tests."""
        coords = [
            (a, idx)
            for a in range(self.system.space.fiber_dim)
            for idx in multi_indices(self.system.space.base_dim, self.working_order)
        ]
        a, idx = coords[rng.randrange(len(coords))]
        entry = self.normal_form(a, idx)
        delta = Fraction(rng.choice((1, -1, 2)))
        if entry.terms and rng.random() < 0.5:
            mono = sorted(entry.terms)[rng.randrange(len(entry.terms))]
            tampered = entry + Polynomial({mono: delta})
        else:
            tampered = entry + Polynomial.constant(delta)
        overrides = dict(self._overrides)
        overrides[(a, MultiIndex(idx))] = tampered
        twin = CoalgebraStructure.__new__(CoalgebraStructure)
        twin.system = self.system
        twin.working_order = self.working_order
        twin.solved_form = self.solved_form
        twin.leaders = self.leaders
        twin.nf_order_limit = self.nf_order_limit
        twin._nf = {}
        twin._overrides = overrides
        twin._in_progress = set()
        return twin, (a, idx)


def section_respects_coaction(coalg: CoalgebraStructure, section) -> bool:
    """Solutions as coalgebra morphisms: a section solves the system iff the
    map it induces on parametric data intertwines the coaction with honest
    jet prolongation.  Concretely, for every coordinate up to the working
    order, substituting the section's derivatives into the coaction
    component must reproduce the coordinate's own derivative, identically in
    the base variables.  This is a code path independent of both equation
    substitution and pointwise membership."""
    from jetcat.jets import jet_prolong_section

    K = coalg.working_order
    table = coalg.coaction(K)
    deep = K
    for nf in table.values():
        for v in nf.jet_variables():
            deep = max(deep, v.order)
    prolonged = jet_prolong_section(
        section, deep, coalg.system.space.base_names
    )
    mapping = {
        Variable.jet(a, idx): p for (a, idx), p in prolonged.components.items()
    }
    for (a, idx), nf in table.items():
        if nf.substitute(mapping) != prolonged.components[(a, idx)]:
            return False
    return True


def coalgebra_from_solved_form(system: PdeSystem, solved_form: Mapping,
                               working_order: int, validate=True) -> CoalgebraStructure:
    """Build the coaction from user-designated principal coordinates and
    solved expressions.  With ``validate`` the system must pass the
    integrability check at the working order and the whole tower must vanish
    under the solved form (otherwise the coaction would be ill-defined)."""
    coalg = CoalgebraStructure(system, solved_form, working_order)
    if validate:
        coalg.validate()
    return coalg


def cofree_coalgebra(space: JetSpaceDescriptor, working_order: int) -> CoalgebraStructure:
    """The tautological free-jet coaction of the empty system (no equations,
    no principal coordinates)."""
    return CoalgebraStructure(PdeSystem(space, ()), {}, working_order)


# -- coalgebra law verification -------------------------------------------------


@dataclass
class LawReport:
    counit: bool = True
    coaction: bool = True
    beck: bool = True
    samples: int = 0
    failures: list = field(default_factory=list)

    def ok(self):
        return self.counit and self.coaction and self.beck

    def record(self, law, detail):
        if law == "counit":
            self.counit = False
        elif law == "coaction":
            self.coaction = False
        else:
            self.beck = False
        if len(self.failures) < 32:
            self.failures.append({"law": law, "detail": detail})


def _law_component_table(coalg: CoalgebraStructure, total_order: int):
    """For every E-fiber c, inner index J and outer index I with
    |I| + |J| <= total_order: the E-jet polynomial D^E_I(rep(nf(shift(c, J)))).

    This is the finite-order realization of the prolonged coaction J(rho):
    the component for ((c)_J)_I of J^{|I|}(rho_{|J|}).
    """
    m = coalg.system.space.base_dim
    fibers = coalg.e_fibers()
    table = {}
    for e, (a, idx) in enumerate(fibers):
        for inner in multi_indices(m, total_order):
            shifted = coalg.normal_form(a, idx + inner)
            comp = coalg.rep(shifted)
            derivs = {MultiIndex.zero(m): comp}
            table[(e, inner, MultiIndex.zero(m))] = comp
            for deg in range(1, total_order - inner.degree + 1):
                for outer in multi_indices(m, deg, deg):
                    j = next(d for d in range(m) if outer[d] > 0)
                    g = total_derivative(
                        derivs[outer - MultiIndex.unit(j, m)], j, base_dim=m
                    )
                    derivs[outer] = g
                    table[(e, inner, outer)] = g
    return table


def _e_assignment(coalg, pt, polys):
    """Values for every E-jet variable appearing in the given E-polynomials:
    (c)_I evaluates through nf(shift(c, I)) at the parametric point."""
    fibers = coalg.e_fibers()
    out = {}
    for p in polys:
        for v in p.variables():
            if v in out:
                continue
            if v.is_base:
                out[v] = pt.base[v.base_index]
            elif v.is_jet:
                a, idx = fibers[v.fiber]
                out[v] = pt.evaluate(coalg.normal_form(a, idx + v.index))
            else:
                raise ValueError("unexpected eps variable in a law component")
    return out


def verify_coalgebra_laws(coalg: CoalgebraStructure, samples=20, seed=0,
                          beck_samples=None, fail_fast=False) -> LawReport:
    """Pointwise verification of the Eilenberg-Moore laws on sampled points
    of the locus:

    * counit: the order-0 part of the coaction restores the point;
    * coaction: for every split (k', K-k') of the working order K, the
      coproduct of the coaction image agrees with the prolonged coaction of
      the coaction image (exact rational equality per coordinate);
    * Beck: coaction images land in the zero locus of the full prolongation
      tower and equalize the pair (coproduct, prolonged coaction); sampled
      E-jet points that equalize the pair are exactly the coaction images of
      their own parametric data, and distinct points have distinct images.
    """
    report = LawReport()
    K = coalg.working_order
    m = coalg.system.space.base_dim
    fibers = coalg.e_fibers()
    table = _law_component_table(coalg, K)
    polys = list(table.values())
    tower = pde_prolong(coalg.system, K).equations_up_to()
    report.samples = samples

    prev_images = {}
    for s in range(samples):
        if fail_fast and not report.ok():
            return report
        pt = coalg.point("%s|%d" % (seed, s))
        assignment = _e_assignment(coalg, pt, polys)
        # the image is a formal solution: every tower equation vanishes on it
        for eq in tower:
            values = {}
            for v in eq.variables():
                if v.is_base:
                    values[v] = pt.base[v.base_index]
                else:
                    values[v] = pt.evaluate(coalg.normal_form(v.fiber, v.index))
            if eq.evaluate(values) != 0:
                report.record(
                    "beck",
                    "coaction image violates the equation locus at %s (sample %d)"
                    % (coalg.system.space.render(eq), s),
                )
        # counit: parametric coordinates of order <= k restore the point
        for (a, idx) in fibers:
            lhs = pt.evaluate(coalg.normal_form(a, idx))
            if lhs != pt.value(a, idx):
                report.record(
                    "counit",
                    "order-0 part differs at %s (sample %d)"
                    % (coalg.system.space.coordinate_name(a, idx), s),
                )
        # coaction at every split (k', K - k')
        for e, (a, idx) in enumerate(fibers):
            for inner in multi_indices(m, K):
                for outer in multi_indices(m, K - inner.degree):
                    lhs = pt.evaluate(coalg.normal_form(a, idx + inner + outer))
                    rhs_poly = table[(e, inner, outer)]
                    rhs = rhs_poly.evaluate(
                        {v: assignment[v] for v in rhs_poly.variables()}
                    ) if rhs_poly.terms else Fraction(0)
                    if lhs != rhs:
                        report.record(
                            "coaction",
                            "split (%d,%d) fails at ((%s)_%s)_%s (sample %d)"
                            % (
                                outer.degree, inner.degree,
                                coalg.system.space.coordinate_name(a, idx),
                                "".join(map(str, inner)), "".join(map(str, outer)), s,
                            ),
                        )
        # Beck injectivity bookkeeping: image determined by slots up to K
        image_key = tuple(
            pt.evaluate(coalg.normal_form(a, idx))
            for (a, idx) in coalg.system.space.coordinates()
        ) + tuple(pt.base)
        param_key = (
            tuple(pt.base),
            tuple(pt.value(a, idx) for (a, idx) in fibers),
        )
        if image_key in prev_images and prev_images[image_key] != param_key:
            report.record("beck", "coaction image collision (monomorphism fails)")
        prev_images[image_key] = param_key

    # Beck: equalizing points are exactly the coaction images
    n_beck = samples if beck_samples is None else beck_samples
    rng = random.Random("beck|%s" % seed)
    for s in range(n_beck):
        if fail_fast and not report.ok():
            return report
        pt = coalg.point("%s|beck|%d" % (seed, s))
        assignment = _e_assignment(coalg, pt, polys)
        theta = {}
        for e, (a, idx) in enumerate(fibers):
            for inner in multi_indices(m, K):
                theta[(e, inner)] = pt.evaluate(coalg.normal_form(a, idx + inner))
        kind = s % 3
        if kind == 1 and theta:
            # perturb one slot of order <= K
            key = sorted(theta)[rng.randrange(len(theta))]
            theta[key] = theta[key] + 1
        elif kind == 2:
            theta = {key: _seeded_rational("%s|rand|%d|%r" % (seed, s, key)) for key in theta}
        equalizes = _theta_equalizes(coalg, theta, assignment, table, pt, m, K)
        is_image = _theta_reconstructs(coalg, theta, assignment, pt, m, K)
        if kind == 0 and not equalizes:
            report.record("beck", "coaction image fails to equalize (sample %d)" % s)
        if equalizes and not is_image:
            report.record(
                "beck", "point equalizes the pair but is not a coaction image (sample %d)" % s
            )
    return report


def _theta_reconstructs(coalg, theta, assignment, pt, m, K):
    """Solved-form reconstruction: read the parametric data back off the
    sampled E-jet point (order-k cut slots where available, the backing deep
    values beyond the truncation) and compare the point against the coaction
    image of that data on every slot up to order K."""
    fibers = coalg.e_fibers()

    def parametric_value(a, idx):
        v = coalg.represent_parametric(a, idx)
        if v.index.degree <= K:
            return theta[(v.fiber, v.index)]
        e_a, e_idx = fibers[v.fiber]
        return pt.evaluate(coalg.normal_form(e_a, e_idx + v.index))

    for e, (a, idx) in enumerate(fibers):
        for inner in multi_indices(m, K):
            nf = coalg.normal_form(a, idx + inner)
            values = {}
            for v in nf.variables():
                if v.is_base:
                    values[v] = pt.base[v.base_index]
                else:
                    values[v] = parametric_value(v.fiber, v.index)
            expected = nf.evaluate(values) if nf.terms else Fraction(0)
            if theta[(e, inner)] != expected:
                return False
    return True


def _theta_equalizes(coalg, theta, assignment, table, pt, m, K):
    """Evaluate the equalizer pair on an order-K E-jet point.

    The coproduct side reads theta slots by index addition; the prolonged
    coaction side evaluates the law components, reading theta's slots for
    E-jet variables of order <= K and falling back to the deep coaction
    values (beyond-K slots are not part of the sampled point).
    """
    fibers = coalg.e_fibers()

    def value_of(v):
        if v.is_base:
            return pt.base[v.base_index]
        if v.index.degree <= K and (v.fiber, v.index) in theta_keyset:
            return theta[(v.fiber, v.index)]
        return assignment[v]

    theta_keyset = set(theta)
    for e, (a, idx) in enumerate(fibers):
        for inner in multi_indices(m, K):
            for outer in multi_indices(m, K - inner.degree):
                lhs = theta[(e, inner + outer)]
                comp = table[(e, inner, outer)]
                if comp.terms:
                    rhs = comp.evaluate({v: value_of(v) for v in comp.variables()})
                else:
                    rhs = Fraction(0)
                if lhs != rhs:
                    return False
    return True


# -- products and equalizers -----------------------------------------------------


def pde_product(first: PdeSystem, second: PdeSystem) -> PdeSystem:
    """Disjoint union of fiber alphabets, concatenated equations.

    When the factors have different declared orders, the lower-order factor
    contributes its prolongation tower up to the common order, so that both
    factors present the same locus inside the product jet space.
    """
    sa, sb = first.space, second.space
    if sa.base_names != sb.base_names:
        raise DimensionMismatchError("product requires a common base chart")
    overlap = set(sa.fiber_names) & set(sb.fiber_names)
    if overlap:
        raise FiberMismatchError(
            "product fiber names must be disjoint; clashing: %s" % sorted(overlap)
        )
    order = max(sa.order, sb.order)
    space = JetSpaceDescriptor(sa.base_names, sa.fiber_names + sb.fiber_names, order)
    eqs_a = pde_prolong(first, order).equations_up_to() if first.equations else []
    eqs_b = pde_prolong(second, order).equations_up_to() if second.equations else []
    shifted = [p.shift_fibers(sa.fiber_dim) for p in eqs_b]
    return PdeSystem(space, eqs_a + shifted)


def product_coalgebra(first: CoalgebraStructure, second: CoalgebraStructure,
                      working_order=None, validate=True) -> CoalgebraStructure:
    """Pair two solved-form coactions componentwise on the product system."""
    system = pde_product(first.system, second.system)
    offset = first.system.space.fiber_dim
    solved = dict(first.solved_form)
    for (a, idx), rhs in second.solved_form.items():
        solved[(a + offset, idx)] = rhs.shift_fibers(offset)
    K = working_order
    if K is None:
        K = min(first.working_order, second.working_order)
    return coalgebra_from_solved_form(system, solved, K, validate=validate)


def pde_equalizer(first: FormalDiffOperator, second: FormalDiffOperator,
                  working_order: int):
    """The equalizer PDE of two differential operators: base equations
    D1^b - D2^b = 0, returned with its prolongation to the working order."""
    if first.source.fiber_names != second.source.fiber_names:
        raise FiberMismatchError("equalizer operands need a common source")
    if first.target.fiber_names != second.target.fiber_names:
        raise FiberMismatchError("equalizer operands need a common target")
    if first.target.order or second.target.order:
        raise OrderBudgetError("equalizer operands must be plain operators")
    m = first.source.base_dim
    zero = MultiIndex.zero(m)
    eqs = []
    for b in range(first.target.fiber_dim):
        diff = first.components[(b, zero)] - second.components[(b, zero)]
        if diff:
            eqs.append(diff)
    order = max([p.max_jet_order() for p in eqs], default=0)
    space = JetSpaceDescriptor(
        first.source.base_names, first.source.fiber_names, order
    )
    system = PdeSystem(space, eqs)
    return system, pde_prolong(system, max(working_order, order))


def equalizer_spans_match(first: FormalDiffOperator, second: FormalDiffOperator,
                          working_order: int) -> bool:
    """Exact span comparison, order by order, of (a) the prolongation tower
    of the base equalizer and (b) the componentwise differences of the
    prolonged operators.  Both sides are computed through independent code
    paths (iterated total derivatives of the difference vs. prolongation of
    each operator)."""
    system, prolonged = pde_equalizer(first, second, working_order)
    if not (first.is_linear() and second.is_linear()):
        raise ValueError("span comparison is implemented for linear operators")
    k = system.order
    m = first.source.base_dim
    for extra in range(0, working_order - k + 1):
        tower_polys = prolonged.equations_up_to(extra)
        p1 = op_prolong(first, extra)
        p2 = op_prolong(second, extra)
        op_polys = []
        for b in range(first.target.fiber_dim):
            for idx in multi_indices(m, extra):
                diff = p1.components[(b, idx)] - p2.components[(b, idx)]
                if diff:
                    op_polys.append(diff)
        rows_a = [r for r in (linalg.linear_decompose(p) for p in tower_polys) if r]
        rows_b = [r for r in (linalg.linear_decompose(p) for p in op_polys) if r]
        if not linalg.row_space_equal(rows_a, rows_b):
            return False
    return True

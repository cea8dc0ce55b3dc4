"""Order-by-order formal (Taylor) solutions of PDE systems: membership
tests, extension from initial jet data, and obstruction reporting with a
derivation trail.

Extension solves, at each order, the exact linear system that the
prolongation tower imposes on the still-undetermined Taylor coefficients.
Unconstrained coefficients default to 0 (overridable through a callback, so
solution families can be enumerated).  An inconsistency surfaces as an
``obstructed`` state carrying the eliminated constant witness and the tags
of the total derivatives that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from jetcat.errors import UnsupportedModeError
from jetcat.jets import JetPoint, PolySection, jet_prolong_section
from jetcat.linalg import RationalSystem
from jetcat.pde import PdeSystem, ProlongedSystem
from jetcat.poly import MultiIndex, Polynomial, Variable, multi_indices


@dataclass
class FormalSolutionState:
    """Result of an order-by-order extension attempt."""

    system: ProlongedSystem
    base: tuple
    status: str  # complete | obstructed
    order_reached: int
    point: Optional[JetPoint] = None
    free_coordinates: list = field(default_factory=list)
    obstruction: Optional[Polynomial] = None
    obstruction_order: Optional[int] = None
    trail: list = field(default_factory=list)
    history: list = field(default_factory=list)

    def is_complete(self):
        return self.status == "complete"


def is_formal_solution(prolonged: ProlongedSystem, theta: JetPoint) -> bool:
    """True iff every tower equation of jet order <= theta.order vanishes at
    theta (exact evaluation)."""
    assignment = theta.assignment()
    for eq in prolonged.equations_of_jet_order(theta.order):
        if eq.evaluate(assignment) != 0:
            return False
    return True


def check_solution_section(system: PdeSystem, section: PolySection) -> bool:
    """True iff substituting the jet prolongation of the section into every
    equation yields the zero polynomial identically in the base variables."""
    if section.fiber_dim != system.space.fiber_dim:
        raise ValueError("section does not match the system's fiber alphabet")
    prolonged = jet_prolong_section(section, system.order, system.space.base_names)
    mapping = {
        Variable.jet(a, idx): p for (a, idx), p in prolonged.components.items()
    }
    return all(eq.substitute(mapping) == 0 for eq in system.equations)


def _tagged_tower(prolonged: ProlongedSystem):
    """Tower equations with their derivation tags (alpha, I): equation alpha
    of the base system hit by the iterated total derivative D_I."""
    m = prolonged.base.space.base_dim
    out = []
    for s, step in enumerate(prolonged.steps):
        tags = [
            (alpha, idx)
            for alpha in range(len(prolonged.base.equations))
            for idx in multi_indices(m, s, s)
        ]
        out.extend(zip(tags, step))
    return out


def extend_solution(prolonged: ProlongedSystem, seed: Mapping, base,
                    free_value: Optional[Callable] = None,
                    allow_nonlinear=False) -> FormalSolutionState:
    """Extend partial jet data at a base point to a formal solution of the
    tower's working order.

    ``seed`` maps coordinates (fiber, multi-index) to fixed rational values;
    everything else is solved for.  Tower equations are processed in
    increasing jet order, so an inconsistency is reported at the first order
    where the data cannot be extended, together with its witness and trail.
    Exact mode covers linear systems; for polynomial systems pass
    ``allow_nonlinear`` and seed enough low-order data that the remaining
    unknowns enter linearly (prolongations are quasi-linear in their top
    derivatives).
    """
    system = prolonged.base
    if not system.is_linear() and not allow_nonlinear:
        raise UnsupportedModeError(
            "exact extension of a nonlinear system: pass allow_nonlinear to "
            "accept the bounded quasi-linear mode"
        )
    K = prolonged.working_order
    m = system.space.base_dim
    base = tuple(Fraction(b) for b in base)
    fixed = {}
    for (a, idx), val in seed.items():
        idx = MultiIndex(idx)
        if idx.degree > K:
            continue
        fixed[(a, idx)] = Fraction(val)
    base_assignment = {Variable.base(i): b for i, b in enumerate(base)}

    solver = RationalSystem()
    history = []
    equations = sorted(
        _tagged_tower(prolonged),
        key=lambda item: (item[1].max_jet_order(), item[0]),
    )
    current_order = 0
    step_count = 0
    for tag, eq in equations:
        order = eq.max_jet_order()
        if order != current_order:
            if step_count:
                history.append({"order": current_order, "equations": step_count})
            current_order, step_count = order, 0
        step_count += 1
        substitution = dict(base_assignment)
        for v in eq.variables():
            if v.is_jet and (v.fiber, v.index) in fixed:
                substitution[v] = fixed[(v.fiber, v.index)]
        reduced = eq.substitute(
            {v: Polynomial.constant(c) for v, c in substitution.items() if v in eq.variables()}
        )
        if reduced.degree_in(lambda v: v.is_jet) > 1:
            raise UnsupportedModeError(
                "equation %s stays nonlinear in the undetermined coordinates; "
                "seed more low-order data" % system.space.render(eq)
            )
        coeffs = {}
        const = Fraction(0)
        for mono, c in reduced.terms.items():
            jets = [(v, e) for v, e in mono if v.is_jet]
            if not jets:
                if mono:
                    raise ValueError("unsubstituted base variable in the extension step")
                const += c
            else:
                v = jets[0][0]
                coeffs[(v.fiber, v.index)] = coeffs.get((v.fiber, v.index), Fraction(0)) + c
        conflict = solver.add(coeffs, const, tag)
        if conflict is not None:
            witness_const, provenance = conflict
            witness = Polynomial.constant(witness_const).primitive()
            if step_count:
                history.append({"order": current_order, "equations": step_count})
            return FormalSolutionState(
                system=prolonged,
                base=base,
                status="obstructed",
                order_reached=max(order - 1, 0),
                obstruction=witness,
                obstruction_order=order,
                trail=sorted(provenance),
                history=history,
            )
    if step_count:
        history.append({"order": current_order, "equations": step_count})

    default = (lambda key: Fraction(0)) if free_value is None else (
        lambda key: Fraction(free_value(key))
    )
    solved = solver.solve(default=default)
    free = sorted(solver.free_unknowns())
    coords = {}
    for a in range(system.space.fiber_dim):
        for idx in multi_indices(m, K):
            key = (a, idx)
            if key in fixed:
                coords[key] = fixed[key]
            elif key in solved:
                coords[key] = solved[key]
            else:
                coords[key] = default(key)
                free.append(key)
    point = JetPoint(system.space.with_order(K), base, coords)
    state = FormalSolutionState(
        system=prolonged,
        base=base,
        status="complete",
        order_reached=K,
        point=point,
        free_coordinates=sorted(free),
        history=history,
    )
    assert is_formal_solution(prolonged, point)
    return state


def seed_from_section(section: PolySection, x0, max_order,
                      keep=None, base_names=None) -> dict:
    """Seed data read off a section's jet at a point; ``keep`` filters the
    multi-indices (e.g. pure-space derivatives along an initial surface).
    The base dimension is taken from the point."""
    if base_names is None:
        base_names = tuple("x%d" % (i + 1) for i in range(len(x0)))
    prolonged = jet_prolong_section(section, max_order, base_names)
    assignment = {Variable.base(i): Fraction(v) for i, v in enumerate(x0)}
    out = {}
    for (a, idx), p in prolonged.components.items():
        if keep is not None and not keep(idx):
            continue
        out[(a, idx)] = p.evaluate(assignment)
    return out


def taylor_section(state: FormalSolutionState) -> PolySection:
    """The Taylor-polynomial section reconstructed from a complete extension:
    u^a(x) = sum (1/I!) theta_I (x - x0)^I.  Its jet at the base point
    reproduces the extension exactly."""
    if not state.is_complete():
        raise ValueError("only complete states reconstruct to a section")
    theta = state.point
    m = theta.descriptor.base_dim
    shifts = [Polynomial.base_var(i) - theta.base[i] for i in range(m)]
    comps = []
    for a in range(theta.descriptor.fiber_dim):
        total = Polynomial.zero()
        for idx in multi_indices(m, theta.order):
            val = theta.value(a, idx)
            if not val:
                continue
            mono = Polynomial.constant(Fraction(val, idx.factorial()))
            for d in range(m):
                if idx[d]:
                    mono = mono * shifts[d] ** idx[d]
            total = total + mono
        comps.append(total)
    return PolySection(comps)

"""Formal solutions: membership, extension, obstructions, coherence."""

import random
from fractions import Fraction

import pytest

from jetcat.errors import UnsupportedModeError
from jetcat.jets import (
    JetPoint,
    JetSpaceDescriptor,
    PolySection,
    holonomic_check,
    jet_prolong,
    jet_prolong_section,
    jet_to_family,
)
from jetcat.pde import PdeSystem, pde_prolong
from jetcat.poly import MultiIndex, Polynomial
from jetcat.solutions import (
    check_solution_section,
    extend_solution,
    is_formal_solution,
    seed_from_section,
    taylor_section,
)

X = Polynomial.base_var(0)
T = Polynomial.base_var(1)
SP = JetSpaceDescriptor(("x", "t"), ("u",), 2)
HEAT = PdeSystem(SP, [Polynomial.jet_var(0, (0, 1)) - Polynomial.jet_var(0, (2, 0))])


def heat_point(u, ux, uxx, ut, uxt, utt, at=(1, 0)):
    vals = [u, ux, ut, uxx, uxt, utt]
    keys = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    return JetPoint(SP, at, {(0, MultiIndex(k)): v for k, v in zip(keys, vals)})


class TestMembership:
    def test_solution_jet(self):
        prolonged = pde_prolong(HEAT, 2)
        assert is_formal_solution(prolonged, heat_point(1, 2, 2, 2, 0, 0))

    def test_violating_jet(self):
        prolonged = pde_prolong(HEAT, 2)
        assert not is_formal_solution(prolonged, heat_point(1, 2, 2, 3, 0, 0))

    def test_zero_jet_on_homogeneous_system(self):
        prolonged = pde_prolong(HEAT, 2)
        assert is_formal_solution(prolonged, heat_point(0, 0, 0, 0, 0, 0))

    def test_only_equations_within_order_count(self):
        # an order-2 point is not tested against order-3 tower rows
        prolonged = pde_prolong(HEAT, 4)
        assert is_formal_solution(prolonged, heat_point(1, 2, 2, 2, 0, 0))


class TestSectionCheck:
    def test_heat_polynomial_solution(self):
        assert check_solution_section(HEAT, PolySection([X * X + 2 * T]))

    def test_heat_non_solution(self):
        assert not check_solution_section(HEAT, PolySection([X ** 3]))

    def test_trivial_system_accepts_everything(self):
        trivial = PdeSystem(SP, [])
        assert check_solution_section(trivial, PolySection([X ** 5 - T]))


class TestExtension:
    def test_heat_from_initial_line_data(self):
        prolonged = pde_prolong(HEAT, 6)
        seed = seed_from_section(PolySection([X * X]), (0, 0), 6,
                                 keep=lambda idx: idx[1] == 0)
        state = extend_solution(prolonged, seed, (0, 0))
        assert state.is_complete()
        assert state.point == jet_prolong(PolySection([X * X + 2 * T]), 6, (0, 0), ("x", "t"))
        assert state.point.value(0, (0, 1)) == 2
        assert state.point.value(0, (0, 2)) == 0
        assert state.point.value(0, (2, 1)) == 0

    def test_obstruction_with_witness_and_trail(self):
        sp = JetSpaceDescriptor(("x", "y"), ("u",), 1)
        curl = PdeSystem(sp, [Polynomial.jet_var(0, (1, 0)) - Polynomial.base_var(1),
                              Polynomial.jet_var(0, (0, 1))])
        state = extend_solution(pde_prolong(curl, 2), {(0, (0, 0)): 0}, (0, 0))
        assert state.status == "obstructed"
        assert state.obstruction_order == 2
        assert sp.render(state.obstruction) == "1"
        assert state.trail == [(0, MultiIndex((0, 1))), (1, MultiIndex((1, 0)))]

    def test_trivial_system_defaults_to_zero(self):
        trivial = PdeSystem(SP, [])
        state = extend_solution(pde_prolong(trivial, 3), {}, (0, 0))
        assert state.is_complete()
        assert all(v == 0 for v in state.point.coords.values())
        assert len(state.free_coordinates) == len(state.point.coords)

    def test_free_value_callback_enumerates_families(self):
        trivial = PdeSystem(SP, [])
        state = extend_solution(
            pde_prolong(trivial, 2), {}, (0, 0),
            free_value=lambda key: Fraction(key[1].degree + 1),
        )
        assert state.point.value(0, (0, 0)) == 1
        assert state.point.value(0, (1, 0)) == 2

    def test_seed_conflicting_with_equation_obstructs(self):
        prolonged = pde_prolong(HEAT, 2)
        seed = {(0, (0, 0)): 0, (0, (2, 0)): 2, (0, (0, 1)): 5}
        state = extend_solution(prolonged, seed, (0, 0))
        assert state.status == "obstructed"
        assert state.obstruction_order == 2

    def test_nonlinear_requires_opt_in(self):
        sp1 = JetSpaceDescriptor(("x", "t"), ("u",), 1)
        burgers = PdeSystem(sp1, [Polynomial.jet_var(0, (0, 1))
                                  - Polynomial.jet_var(0, (0, 0)) * Polynomial.jet_var(0, (1, 0))])
        prolonged = pde_prolong(burgers, 2)
        with pytest.raises(UnsupportedModeError):
            extend_solution(prolonged, {}, (0, 0))
        seed = seed_from_section(PolySection([X]), (0, 0), 2,
                                 keep=lambda idx: idx[1] == 0)
        state = extend_solution(prolonged, seed, (0, 0), allow_nonlinear=True)
        assert state.is_complete()
        # u = x / (1 - t) solves Burgers u_t = u u_x; at the origin u_t = 0...
        # check the quasi-linear chain instead: u_t = u*u_x = 0*1 = 0
        assert state.point.value(0, (0, 1)) == 0
        assert state.point.value(0, (1, 1)) == 1  # D_x(u u_x) = u_x^2 + u u_xx

    def test_formally_integrable_linear_never_obstructs(self):
        # from any seed satisfying the order-<=k equations
        rng = random.Random(2)
        prolonged = pde_prolong(HEAT, 5)
        for trial in range(10):
            uxx = Fraction(rng.randint(-5, 5))
            seed = {(0, (0, 0)): Fraction(rng.randint(-5, 5)),
                    (0, (1, 0)): Fraction(rng.randint(-5, 5)),
                    (0, (2, 0)): uxx,
                    (0, (0, 1)): uxx}
            state = extend_solution(prolonged, seed, (0, 0))
            assert state.is_complete()


class TestCoherence:
    def _grid(self, degree):
        pts = [Fraction(i) for i in range(degree + 1)]
        return [(a, b) for a in pts for b in pts]

    def test_three_checks_agree(self):
        rng = random.Random(6)
        for trial in range(25):
            c0 = Fraction(rng.randint(-3, 3))
            c1 = Fraction(rng.randint(-3, 3))
            eq = (Polynomial.jet_var(0, (0, 1))
                  - c0 * Polynomial.jet_var(0, (2, 0)) - c1 * Polynomial.jet_var(0, (1, 0)))
            system = PdeSystem(SP, [eq])
            coeffs = [Fraction(rng.randint(-2, 2)) for _ in range(6)]
            sigma = PolySection([
                coeffs[0] + coeffs[1] * X + coeffs[2] * T + coeffs[3] * X * X
                + coeffs[4] * X * T + coeffs[5] * T * T
            ])
            prolonged = pde_prolong(system, 3)
            a = check_solution_section(system, sigma)
            grid = self._grid(6)
            b = all(
                is_formal_solution(prolonged, jet_prolong(sigma, 3, pt, ("x", "t")))
                for pt in grid
            )
            c = all(
                extend_solution(
                    prolonged, seed_from_section(sigma, pt, 3, base_names=("x", "t")), pt
                ).is_complete()
                for pt in grid
            )
            assert a == b == c

    def test_complete_extension_is_holonomic(self):
        prolonged = pde_prolong(HEAT, 4)
        seed = seed_from_section(PolySection([X * X]), (0, 0), 4,
                                 keep=lambda idx: idx[1] == 0)
        state = extend_solution(prolonged, seed, (0, 0))
        section = taylor_section(state)
        fam = jet_to_family(jet_prolong_section(section, 3, ("x", "t")))
        assert holonomic_check(fam)
        # the reconstruction's jet reproduces the extension exactly
        assert jet_prolong(section, 4, (0, 0), ("x", "t")) == state.point

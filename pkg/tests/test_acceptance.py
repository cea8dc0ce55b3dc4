"""Acceptance gate: the ten exactness criteria, zero tolerance.

Every check is an equality of exact rationals or canonical polynomial
forms.  Each test prints one PASS line (run pytest with -s to see them).
"""

import json
import math
import os
import random
from fractions import Fraction

from conftest import CORPUS, GOLDEN, GOLDEN_COMMANDS, load_corpus, run_cli
from jetcat.dsl import format_system, parse_system
from jetcat.jets import (
    JetSpaceDescriptor,
    PolySection,
    base_chart,
    family_to_jet,
    jet_prolong,
    jet_prolong_section,
    jet_to_family,
)
from jetcat.laws import (
    random_operator,
    random_polynomial,
    random_section,
    run_comonad_suite,
)
from jetcat.operators import kleisli_compose, op_apply, op_prolong, substitute_operator
from jetcat.pde import (
    PdeSystem,
    coalgebra_from_solved_form,
    equalizer_spans_match,
    pde_prolong,
    verify_coalgebra_laws,
)
from jetcat.poly import (
    MultiIndex,
    Polynomial,
    Variable,
    WeilAlgebraDescriptor,
    multi_indices,
    taylor_shift,
    weil_reduce,
)
from jetcat.solutions import (
    check_solution_section,
    extend_solution,
    is_formal_solution,
    seed_from_section,
)

X = Polynomial.base_var(0)
T = Polynomial.base_var(1)


def _passed(n, text):
    print("ACCEPTANCE %2d PASS: %s" % (n, text))


def test_criterion_01_comonad_laws():
    """Counit laws and coassociativity, exact, on 200 random jet points per
    (base dim, fiber dim, split) configuration with split totals <= 4."""
    report = run_comonad_suite(
        base_dims=(1, 2), fiber_dims=(1, 2), max_split_total=4, samples=200, seed=20260810,
    )
    assert report["ok"], report["failures"][:4]
    _passed(1, "comonad laws on %d sampled checks" % report["checked"])


def test_criterion_02_nesting_identity():
    """Two-layer Taylor shift equals the single shift by the summed
    infinitesimals, for 100 random polynomials of degree <= 5, orders <= 4."""
    rng = random.Random(2)
    checked = 0
    for trial in range(100):
        n = rng.choice((1, 2))
        k = rng.randint(0, 4)
        w = WeilAlgebraDescriptor(n, k)
        pool = [Variable.base(i) for i in range(n)]
        f = random_polynomial(rng, pool, max_degree=5, max_terms=5)
        once = taylor_shift(f, w)
        nested = Polynomial.zero()
        for eps_mono, coeff in once.eps_decompose().items():
            nested = nested + taylor_shift(coeff, w, layer=1) * Polynomial(
                {eps_mono: Fraction(1)}
            )
        nested = weil_reduce(nested, w)
        subs = {
            Variable.base(i): Polynomial.base_var(i)
            + Polynomial.eps_var(i) + Polynomial.eps_var(i, layer=1)
            for i in range(n)
        }
        direct = weil_reduce(f.substitute(subs), w)
        assert nested == direct, (trial, f)
        checked += 1
    _passed(2, "nesting identity on %d random polynomials" % checked)


def _operator_ensemble(rng, count):
    out = []
    for _ in range(count):
        m = rng.choice((1, 2))
        names = ("x",) if m == 1 else ("x", "t")
        src = JetSpaceDescriptor(names, ("u",), rng.randint(0, 2))
        mid = JetSpaceDescriptor(names, ("v",), rng.randint(0, 2))
        d1 = random_operator(rng, src, ("v",), max_degree=2)
        d2 = random_operator(rng, mid, ("w",), max_degree=2)
        out.append((m, d1, d2))
    return out


def test_criterion_03_composition_functoriality():
    """Applying a co-Kleisli composite equals applying the factors in turn
    (100 random operator pairs, 10 random sections each), and the first
    prolongation of the composite equals the composite of prolongations."""
    rng = random.Random(3)
    pairs = sections = 0
    for m, d1, d2 in _operator_ensemble(rng, 100):
        composite = kleisli_compose(d2, d1)
        for _ in range(10):
            sigma = random_section(rng, m, 1, 3)
            assert op_apply(composite, sigma) == op_apply(d2, op_apply(d1, sigma))
            sections += 1
        lhs = op_prolong(composite, 1)
        rhs = substitute_operator(op_prolong(d2, 1), op_prolong(d1, 1 + d2.order))
        assert lhs.components == rhs.components
        pairs += 1
    _passed(3, "composition functoriality on %d pairs, %d applications" % (pairs, sections))


def test_criterion_04_prolongation_characterization():
    """op_apply(p^l D, sigma) equals the order-l jet prolongation of
    op_apply(D, sigma), for l <= 3 on the random ensemble."""
    rng = random.Random(4)
    checked = 0
    for m, d1, _ in _operator_ensemble(rng, 100):
        sigma = random_section(rng, m, 1, 3)
        names = ("x",) if m == 1 else ("x", "t")
        applied = op_apply(d1, sigma)
        for l in range(4):
            lhs = op_apply(op_prolong(d1, l), sigma)
            rhs = jet_prolong_section(applied, l, names)
            if l == 0:
                assert lhs.components[0] == rhs.components[(0, MultiIndex.zero(m))]
            else:
                assert lhs.components == rhs.components
            checked += 1
    _passed(4, "prolongation characterization on %d instances" % checked)


def test_criterion_05_integrability_verdicts():
    """Heat integrable to 6, the curl-defect system inconsistent with
    constant witness, the exact-form system integrable to 3, wave integrable
    to 6 -- all as golden JSON reports."""
    expectations = {
        "check_heat": ("integrable_up_to", []),
        "check_curl_bad": ("inconsistent", ["1"]),
        "check_exact": ("integrable_up_to", []),
        "check_wave": ("integrable_up_to", []),
    }
    for name, (status, witnesses) in expectations.items():
        with open(os.path.join(GOLDEN, name + ".json"), encoding="utf-8") as fh:
            golden = fh.read()
        code, out, _ = run_cli(GOLDEN_COMMANDS[name])
        assert out == golden, name
        report = json.loads(out)
        assert report["status"] == status
        assert report["witnesses"] == witnesses
        assert code == (0 if status == "integrable_up_to" else 1)
    _passed(5, "four golden integrability verdicts")


def test_criterion_06_coalgebra_law_suite():
    """Heat and exponential-ODE coalgebras at working order 4: counit,
    coaction at every split, and Beck checks on 100 sampled points; 20
    single-coefficient mutations of each coaction all detected."""
    heat = load_corpus("heat.pde")
    ode = load_corpus("ode.pde")
    rng = random.Random(6)
    for sf in (heat, ode):
        coalg = coalgebra_from_solved_form(sf.system(), sf.solved, 4)
        report = verify_coalgebra_laws(coalg, samples=100, seed=606)
        assert report.ok(), (sf.name, report.failures[:3])
        assert report.samples == 100
        detected = 0
        for _ in range(20):
            twin, coord = coalg.mutated(rng)
            tampered = verify_coalgebra_laws(twin, samples=8, seed=607, fail_fast=True)
            assert not tampered.ok(), (sf.name, coord)
            detected += 1
        assert detected == 20
    _passed(6, "coalgebra laws at 100 samples; 2 x 20 mutations detected")


def test_criterion_07_equalizer_prolongation_spans():
    """For 20 random pairs of linear operators (order <= 2, base dim <= 2),
    the equalizer of the prolonged operators and the prolongation of the
    base equalizer have identical equation spans at every order <= 4."""
    rng = random.Random(7)
    for trial in range(20):
        m = rng.choice((1, 2))
        names = ("x",) if m == 1 else ("x", "t")
        src = JetSpaceDescriptor(names, ("u",), rng.randint(1, 2))
        d1 = random_operator(rng, src, ("w",), linear=True)
        d2 = random_operator(rng, src, ("w",), linear=True)
        assert equalizer_spans_match(d1, d2, 4), trial
    _passed(7, "equalizer/prolongation span identity on 20 linear pairs")


def test_criterion_08_solutions_coherence():
    """The three solution checks agree: on heat with x^2+2t (true) and x^3
    (false), and on 50 random (system, section) pairs over a determining
    grid; extension from the x^2 initial line reproduces every Taylor
    coefficient of x^2+2t up to order 6."""
    heat = load_corpus("heat.pde").system()
    assert check_solution_section(heat, PolySection([X * X + 2 * T]))
    assert not check_solution_section(heat, PolySection([X ** 3]))

    sp = JetSpaceDescriptor(("x", "t"), ("u",), 2)
    rng = random.Random(8)
    grid = [(Fraction(a), Fraction(b)) for a in range(5) for b in range(5)]
    agreements = trues = 0
    for trial in range(50):
        c0 = Fraction(rng.randint(-3, 3))
        c1 = Fraction(rng.randint(-3, 3))
        eq = (Polynomial.jet_var(0, (0, 1))
              - c0 * Polynomial.jet_var(0, (2, 0))
              - c1 * Polynomial.jet_var(0, (1, 0)))
        system = PdeSystem(sp, [eq])
        if trial % 2 == 0:
            # engineered solution: u = sum t^j/j! L^j(g) terminates because
            # L = c0 dxx + c1 dx lowers the x-degree
            g = sum((Fraction(rng.randint(-2, 2)) * X ** i for i in range(4)),
                    Polynomial.zero())
            total, term, j = Polynomial.zero(), g, 0
            while term:
                total = total + term * T ** j * Fraction(1, math.factorial(j))
                term = c0 * term.partial(Variable.base(0)).partial(Variable.base(0)) \
                    + c1 * term.partial(Variable.base(0))
                j += 1
            sigma = PolySection([total])
        else:
            coeffs = [Fraction(rng.randint(-2, 2)) for _ in range(6)]
            sigma = PolySection([
                coeffs[0] + coeffs[1] * X + coeffs[2] * T
                + coeffs[3] * X * X + coeffs[4] * X * T + coeffs[5] * T * T
            ])
        prolonged = pde_prolong(system, 3)
        identically = check_solution_section(system, sigma)
        pointwise = all(
            is_formal_solution(prolonged, jet_prolong(sigma, 3, pt, ("x", "t")))
            for pt in grid
        )
        extendable = all(
            extend_solution(
                prolonged, seed_from_section(sigma, pt, 3, base_names=("x", "t")), pt
            ).is_complete()
            for pt in grid
        )
        assert identically == pointwise == extendable, trial
        agreements += 1
        trues += identically
    assert trues >= 10 and trues < agreements  # both branches exercised

    prolonged = pde_prolong(heat, 6)
    seed = seed_from_section(PolySection([X * X]), (0, 0), 6,
                             keep=lambda idx: idx[1] == 0)
    state = extend_solution(prolonged, seed, (0, 0))
    assert state.is_complete()
    exact = jet_prolong(PolySection([X * X + 2 * T]), 6, (0, 0), ("x", "t"))
    assert state.point == exact
    _passed(8, "three-way coherence on %d pairs; heat extension exact to order 6" % agreements)


def test_criterion_09_adjunction_round_trip():
    """family_to_jet and jet_to_family are mutually inverse on 100 random
    jet sections of orders <= 4."""
    rng = random.Random(9)
    for trial in range(100):
        m = rng.choice((1, 2))
        k = rng.randint(0, 4)
        names = ("x",) if m == 1 else ("x", "t")
        params = base_chart(names)
        pool = [Variable.base(i) for i in range(m)]
        comps = {
            (0, idx): random_polynomial(rng, pool, 3, 3)
            for idx in multi_indices(m, k)
        }
        from jetcat.jets import JetSection

        section = JetSection(("u",), k, params, comps)
        fam = jet_to_family(section)
        assert family_to_jet(fam) == section, trial
        assert jet_to_family(family_to_jet(fam)) == fam, trial
    _passed(9, "adjunction round-trip on 100 random jet sections")


def test_criterion_10_cli_determinism_and_round_trip():
    """Byte-identical JSON reports under fixed seeds; print/parse round-trip
    on the full corpus, with every shipped report matching its golden file."""
    for name, argv in sorted(GOLDEN_COMMANDS.items()):
        _, first, _ = run_cli(argv)
        _, second, _ = run_cli(argv)
        assert first == second, name
        with open(os.path.join(GOLDEN, name + ".json"), encoding="utf-8") as fh:
            assert first == fh.read(), name
    corpus_files = sorted(f for f in os.listdir(CORPUS) if f.endswith(".pde"))
    for fname in corpus_files:
        sf = load_corpus(fname)
        assert parse_system(format_system(sf), sf.name) == sf, fname
    _passed(10, "determinism on %d reports; round-trip on %d corpus files"
            % (len(GOLDEN_COMMANDS), len(corpus_files)))

"""jetcat: exact finite-order jet calculus, differential operators as
co-Kleisli morphisms, PDE prolongation and formal integrability, jet
coalgebras with machine-checked laws, and order-by-order formal solutions.

All arithmetic is exact rational; every law check is an equality of
canonical forms.
"""

from jetcat._kernel import kernel_backend
from jetcat.poly import (
    MultiIndex,
    Polynomial,
    Rational,
    Variable,
    WeilAlgebraDescriptor,
    mi_add,
    poly_mul,
    poly_partial,
    poly_to_str,
    rat,
    taylor_shift,
    weil_reduce,
)
from jetcat.jets import (
    JetPoint,
    JetSpaceDescriptor,
    PolySection,
    TaylorFamily,
    coproduct,
    counit,
    family_to_jet,
    holonomic_check,
    jet_prolong,
    jet_prolong_section,
    jet_to_family,
    total_derivative,
)
from jetcat.operators import FormalDiffOperator, kleisli_compose, op_apply, op_prolong
from jetcat.pde import (
    CoalgebraStructure,
    IntegrabilityVerdict,
    PdeSystem,
    ProlongedSystem,
    check_integrability,
    coalgebra_from_solved_form,
    pde_equalizer,
    pde_product,
    pde_prolong,
    verify_coalgebra_laws,
)
from jetcat.solutions import (
    FormalSolutionState,
    check_solution_section,
    extend_solution,
    is_formal_solution,
)
from jetcat.dsl import SystemFile, format_system, parse_system

__version__ = "0.1.0"

__all__ = [
    "CoalgebraStructure",
    "FormalDiffOperator",
    "FormalSolutionState",
    "IntegrabilityVerdict",
    "JetPoint",
    "JetSpaceDescriptor",
    "MultiIndex",
    "PdeSystem",
    "PolySection",
    "Polynomial",
    "ProlongedSystem",
    "Rational",
    "SystemFile",
    "TaylorFamily",
    "Variable",
    "WeilAlgebraDescriptor",
    "check_integrability",
    "check_solution_section",
    "coalgebra_from_solved_form",
    "coproduct",
    "counit",
    "extend_solution",
    "family_to_jet",
    "format_system",
    "holonomic_check",
    "is_formal_solution",
    "jet_prolong",
    "jet_prolong_section",
    "jet_to_family",
    "kernel_backend",
    "kleisli_compose",
    "mi_add",
    "op_apply",
    "op_prolong",
    "parse_system",
    "pde_equalizer",
    "pde_product",
    "pde_prolong",
    "poly_mul",
    "poly_partial",
    "poly_to_str",
    "rat",
    "taylor_shift",
    "total_derivative",
    "verify_coalgebra_laws",
    "weil_reduce",
    "__version__",
]

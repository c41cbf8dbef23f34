"""Exact symbolic calculus and axiom checking for doubled bracket structures.

The package implements, over a single flat doubled chart:

* an exact polynomial function ring with parameters (``poly``),
* Lie algebroids in a global frame with the full differential calculus
  (``algebroid``),
* the doubled bundle with its pairings, skew bracket, flux twist and
  induced Poisson structure (``doubled``),
* mechanical verification of the Courant-family axioms with witnesses and
  classification (``axioms``),
* a batch scenario runner (``cli``).
"""

from .poly import DoubledIndex, ExprError, PolyExpr, Var, eta_pairing, parse_expr
from .algebroid import (
    E,
    ESTAR,
    FormField,
    FrameAlgebroid,
    ParaComplexStructure,
    SideError,
    ValidationReport,
    VectorField,
    algebroid_bracket,
    d_differential,
    dual_side,
    interior_product,
    lie_derivative,
    nijenhuis,
    schouten,
    tangent_bracket,
    validate_lie_algebroid,
)
from .doubled import (
    Admissibility,
    DoubledRealization,
    DoubledSection,
    FluxTensor,
    RealizationError,
    D_op,
    c_bracket,
    flux_contraction,
    pairing,
    pi_map,
    poisson_bracket,
    rho_V,
    rho_V_matrix,
    twisted_c_bracket,
)
from .axioms import (
    AxiomReport,
    GenericSectionFamily,
    check_anchor_antisymmetry,
    check_axiom,
    check_bianchi,
    check_derivation_condition,
    check_strong_constraint,
    check_twist_conditions,
    classify,
    compute_J1_J2,
    generic_functions,
    generic_sections,
    jacobiator,
    quadratic_lie_algebra_check,
    t_scalar,
)

__version__ = "0.1.0"

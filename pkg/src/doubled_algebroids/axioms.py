"""Mechanical verification of the bracket axioms, with witnesses.

Every check reduces an axiom to polynomial residuals and decides them by
canonical-form zero testing.  PASS means the residual is identically zero
for fully generic inputs of bounded coefficient degree (fresh parameter
coefficients on every admissible monomial), which is a proof for all data
of that degree and strong evidence in general.  FAIL always carries a
witness: a concrete substitution under which some residual component
evaluates to a nonzero rational.

Checks probe a small deterministic battery of concrete inputs first, so
failures are found fast and come with small readable counterexamples; the
generic computation only has to run when everything passes, where it is
the proof.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .algebroid import (
    E,
    ESTAR,
    FormField,
    VectorField,
    algebroid_bracket,
    d_differential,
    interior_product,
    lie_derivative,
    schouten,
    tangent_bracket,
)
from .doubled import (
    Admissibility,
    DoubledRealization,
    DoubledSection,
    FluxTensor,
    D_op,
    c_bracket,
    flux_contraction,
    pairing,
    rho_V,
    rho_V_matrix,
    twisted_c_bracket,
)
from .poly import (
    KIND_X,
    KIND_XT,
    DoubledIndex,
    PolyExpr,
    Var,
    eta_pairing,
    poly_sum,
)

__all__ = [
    "PASS",
    "FAIL",
    "SKIPPED",
    "AxiomReport",
    "GenericSectionFamily",
    "generic_sections",
    "generic_functions",
    "jacobiator",
    "t_scalar",
    "compute_J1_J2",
    "check_axiom",
    "check_derivation_condition",
    "check_strong_constraint",
    "check_anchor_antisymmetry",
    "check_twist_conditions",
    "check_bianchi",
    "classify",
    "label_from_statuses",
    "quadratic_lie_algebra_check",
    "CLASSIFICATION_LABELS",
]

PASS = "PASS"
FAIL = "FAIL"
SKIPPED = "SKIPPED"

AXIOM_IDS = ("C1", "C2", "C3", "C4", "C5")
CLASSIFICATION_LABELS = (
    "Courant",
    "pre-Courant",
    "ante-Courant",
    "Vaisman",
    "Jacobi-Vaisman",
    "Jacobi-ante-Courant",
    "not-Vaisman",
)

_ZERO = PolyExpr.zero()
_THIRD = Fraction(1, 3)

Residuals = list[tuple[str, PolyExpr]]


@dataclass(frozen=True)
class GenericSectionFamily:
    """Shape of the generic test data: coefficient degree bound, how many
    sections, and the first fresh-parameter ordinal (the seed)."""

    degree: int = 2
    count: int = 3
    start: int = 1

    def key(self) -> tuple:
        return (self.degree, self.count, self.start)


@dataclass
class AxiomReport:
    """Outcome of one check: status plus witness and residual on failure."""

    check_id: str
    status: str
    witness: Optional[dict] = None
    residual: Optional[str] = None
    degree: Optional[int] = None
    detail: str = ""

    def passed(self) -> bool:
        return self.status == PASS

    def to_json_dict(self) -> dict:
        return {
            "check": self.check_id,
            "status": self.status,
            "witness": self.witness,
            "residual": self.residual,
            "degree": self.degree,
            "detail": self.detail,
        }


class _Allocator:
    """Hands out fresh parameter indices; deterministic given the start."""

    _BUDGET = 100_000

    def __init__(self, start: int = 1):
        if start < 1:
            raise ValueError("parameter ordinals start at 1")
        self.next_index = start

    def fresh(self) -> int:
        if self.next_index > self._BUDGET:
            raise RuntimeError("parameter budget exhausted")
        index = self.next_index
        self.next_index += 1
        return index


def _admissible_monomials(dim: int, degree: int, admissibility: Admissibility):
    """Packed coordinate keys of all admissible monomials of total degree
    <= degree, in a deterministic graded order."""
    variables = admissibility.allowed_vars(dim)
    keys = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(variables, d):
            poly = PolyExpr.one()
            for var in combo:
                poly = poly * PolyExpr.variable(var)
            (key,) = [mono[0] for mono in poly.terms]
            keys.append(key)
    return keys


def _generic_poly(dim: int, degree: int, admissibility: Optional[Admissibility], alloc: _Allocator) -> PolyExpr:
    adm = admissibility or Admissibility.unrestricted()
    terms = {}
    for key in _admissible_monomials(dim, degree, adm):
        terms[(key, (alloc.fresh(),))] = 1
    return PolyExpr(terms)


def _generic_section(R: DoubledRealization, degree: int, alloc: _Allocator) -> DoubledSection:
    comps_x = tuple(_generic_poly(R.dim, degree, R.constraint, alloc) for _ in range(R.dim))
    comps_xi = tuple(_generic_poly(R.dim, degree, R.constraint, alloc) for _ in range(R.dim))
    return DoubledSection.from_parts(comps_x, comps_xi)


def generic_sections(family: GenericSectionFamily, R: DoubledRealization) -> list[DoubledSection]:
    """Fully generic sections: every component gets a fresh parameter on
    every admissible monomial up to the family degree."""
    alloc = _Allocator(family.start)
    return [_generic_section(R, family.degree, alloc) for _ in range(family.count)]


def generic_functions(
    R: DoubledRealization, count: int, degree: int, start: int = 1
) -> list[PolyExpr]:
    """Generic admissible test functions (the function-constraint mask)."""
    alloc = _Allocator(start)
    return [_generic_poly(R.dim, degree, R.function_constraint, alloc) for _ in range(count)]


# -- witness extraction -------------------------------------------------------


def _first_nonzero(groups: Residuals) -> tuple[Optional[str], Optional[PolyExpr]]:
    for label, poly in groups:
        if not poly.is_zero():
            return label, poly
    return None, None


def _var_sort_key(var: Var):
    return (var.index, var.kind)


def _greedy_param_assignment(poly: PolyExpr) -> tuple[dict[int, int], PolyExpr]:
    """The lexicographically smallest 0/1 parameter assignment under which
    the polynomial stays nonzero (try 0 first for each parameter in index
    order; fall back to 1 exactly when 0 would kill every monomial)."""
    assignment: dict[int, int] = {}
    current = poly
    for pidx in sorted(current.param_indices()):
        at_zero = current.subs_params({pidx: 0})
        if at_zero.is_zero():
            assignment[pidx] = 1
            current = current.subs_params({pidx: 1})
        else:
            assignment[pidx] = 0
            current = at_zero
    return assignment, current


def _witness_point(poly: PolyExpr) -> tuple[dict[str, str], str]:
    """Small integer coordinates making a nonzero polynomial evaluate to a
    nonzero rational (one variable at a time, smallest value that works)."""
    current = poly
    if current.param_indices():
        _, current = _greedy_param_assignment(current)
    point: dict[str, str] = {}
    while True:
        coords = sorted(current.coord_vars(), key=_var_sort_key)
        if not coords:
            break
        var = coords[0]
        for value in itertools.count(0):
            candidate = current.subs_coords({var: value})
            if not candidate.is_zero():
                point[str(var)] = str(value)
                current = candidate
                break
    return point, str(current.as_rational())


def _render_value(obj) -> object:
    if isinstance(obj, DoubledSection):
        return {"X": [str(c) for c in obj.X.comps], "xi": [str(c) for c in obj.xi.comps]}
    if isinstance(obj, VectorField):
        return [str(c) for c in obj.comps]
    if isinstance(obj, PolyExpr):
        return str(obj)
    return str(obj)


def _subs_params_in(obj, assignment: dict[int, int]):
    if isinstance(obj, DoubledSection):
        return DoubledSection.from_parts(
            tuple(c.subs_params(assignment) for c in obj.X.comps),
            tuple(c.subs_params(assignment) for c in obj.xi.comps),
        )
    if isinstance(obj, VectorField):
        return VectorField(obj.side, tuple(c.subs_params(assignment) for c in obj.comps))
    if isinstance(obj, PolyExpr):
        return obj.subs_params(assignment)
    return obj


def _input_param_indices(inputs: dict) -> set[int]:
    out: set[int] = set()
    for obj in inputs.values():
        if isinstance(obj, DoubledSection):
            for c in obj.X.comps + obj.xi.comps:
                out |= c.param_indices()
        elif isinstance(obj, VectorField):
            for c in obj.comps:
                out |= c.param_indices()
        elif isinstance(obj, PolyExpr):
            out |= obj.param_indices()
    return out


def _witness_from_inputs(label: str, poly: PolyExpr, inputs: dict) -> tuple[dict, str]:
    """Build the witness record: substitute the greedy 0/1 assignment into
    the generic inputs (unused parameters drop to 0), then pick a small
    coordinate point for the surviving residual component."""
    assignment, reduced = _greedy_param_assignment(poly)
    full = {pidx: 0 for pidx in _input_param_indices(inputs)}
    full.update(assignment)
    concrete = {name: _subs_params_in(obj, full) for name, obj in inputs.items()}
    point, value = _witness_point(reduced)
    witness = {
        "inputs": {name: _render_value(obj) for name, obj in concrete.items()},
        "component": label,
        "point": point,
        "value": value,
    }
    return witness, str(reduced)


def _witness_from_generic(poly: PolyExpr, named: dict[str, tuple[PolyExpr, ...]], label: str) -> dict:
    """Witness for a residual over named component tuples (validation path)."""
    assignment, reduced = _greedy_param_assignment(poly)
    every: set[int] = set()
    for comps in named.values():
        for c in comps:
            every |= c.param_indices()
    full = {p: 0 for p in every}
    full.update(assignment)
    point, value = _witness_point(reduced)
    return {
        "inputs": {
            name: [str(c.subs_params(full)) for c in comps] for name, comps in named.items()
        },
        "component": label,
        "point": point,
        "value": value,
    }


def _decide(
    check_id: str,
    probes: Iterable[dict],
    residual_fn: Callable[[dict], Residuals],
    generic_inputs: Callable[[], dict],
    degree: int,
    detail: str = "",
) -> AxiomReport:
    """Probe concrete inputs for a fast counterexample, then prove on fully
    generic inputs."""
    for inputs in probes:
        label, poly = _first_nonzero(residual_fn(inputs))
        if poly is not None:
            point, value = _witness_point(poly)
            witness = {
                "inputs": {name: _render_value(obj) for name, obj in inputs.items()},
                "component": label,
                "point": point,
                "value": value,
            }
            return AxiomReport(
                check_id, FAIL, witness=witness, residual=str(poly), degree=degree, detail=detail
            )
    inputs = generic_inputs()
    label, poly = _first_nonzero(residual_fn(inputs))
    if poly is None:
        return AxiomReport(check_id, PASS, degree=degree, detail=detail)
    witness, residual = _witness_from_inputs(label, poly, inputs)
    return AxiomReport(check_id, FAIL, witness=witness, residual=residual, degree=degree, detail=detail)


# -- probe batteries ----------------------------------------------------------


def _battery_functions(R: DoubledRealization, admissibility: Admissibility) -> list[PolyExpr]:
    candidates: list[PolyExpr] = []
    for mu in range(1, R.dim + 1):
        candidates.append(PolyExpr.coord(mu))
        candidates.append(PolyExpr.dual(mu))
    for mu in range(1, R.dim + 1):
        candidates.append(PolyExpr.coord(mu) * PolyExpr.dual(mu))
    out = [f for f in candidates if admissibility.allows(f)]
    return out[:8]


def _battery_sections(R: DoubledRealization) -> list[DoubledSection]:
    dim = R.dim
    x1, xt1 = PolyExpr.coord(1), PolyExpr.dual(1)
    one = PolyExpr.one()

    def sec(xcomp: Optional[tuple[int, PolyExpr]], xicomp: Optional[tuple[int, PolyExpr]]):
        xs = [_ZERO] * dim
        xis = [_ZERO] * dim
        if xcomp:
            xs[xcomp[0] - 1] = xcomp[1]
        if xicomp:
            xis[xicomp[0] - 1] = xicomp[1]
        return DoubledSection.from_parts(tuple(xs), tuple(xis))

    candidates = [
        sec((1, xt1), None),
        sec(None, (1, x1)),
        sec((1, one), None),
        sec(None, (1, one)),
        sec((1, x1), None),
        sec(None, (1, xt1)),
        sec((1, x1 * xt1), None),
    ]
    if dim >= 2:
        candidates.append(sec((2, PolyExpr.coord(2)), None))
        candidates.append(sec(None, (2, PolyExpr.dual(2))))
    admissible = [
        s
        for s in candidates
        if all(R.constraint.allows(c) for _, c in s.components())
    ]
    return admissible[:6]


def _extra_probe_sections(R: DoubledRealization, explicit: Sequence[DoubledSection]) -> list[DoubledSection]:
    return list(explicit) + _battery_sections(R)


# -- core residuals -----------------------------------------------------------


def _bracket_fn(R: DoubledRealization, flux: Optional[FluxTensor]):
    if flux is None:
        return lambda a, b: c_bracket(R, a, b)
    return lambda a, b: twisted_c_bracket(R, flux, a, b)


def jacobiator(
    R: DoubledRealization,
    e1: DoubledSection,
    e2: DoubledSection,
    e3: DoubledSection,
    flux: Optional[FluxTensor] = None,
) -> DoubledSection:
    """Cyclic double bracket [[e1,e2],e3] + [[e2,e3],e1] + [[e3,e1],e2]."""
    br = _bracket_fn(R, flux)
    return br(br(e1, e2), e3) + br(br(e2, e3), e1) + br(br(e3, e1), e2)


def t_scalar(
    R: DoubledRealization,
    e1: DoubledSection,
    e2: DoubledSection,
    e3: DoubledSection,
    flux: Optional[FluxTensor] = None,
) -> PolyExpr:
    """The Jacobi anomaly potential: one third of the cyclic sum of
    <[e1,e2], e3>_+."""
    br = _bracket_fn(R, flux)
    total = (
        pairing("+", br(e1, e2), e3)
        + pairing("+", br(e2, e3), e1)
        + pairing("+", br(e3, e1), e2)
    )
    return total.scaled(_THIRD)


def _c1_residual(R, e1, e2, e3, flux) -> DoubledSection:
    br = _bracket_fn(R, flux)
    b12, b23, b31 = br(e1, e2), br(e2, e3), br(e3, e1)
    jac = br(b12, e3) + br(b23, e1) + br(b31, e2)
    t = (pairing("+", b12, e3) + pairing("+", b23, e1) + pairing("+", b31, e2)).scaled(_THIRD)
    return jac - D_op(R, t)


def compute_J1_J2(
    R: DoubledRealization, e1: DoubledSection, e2: DoubledSection, e3: DoubledSection
) -> tuple[DoubledSection, DoubledSection]:
    """The two obstruction sections in the Jacobi-anomaly decomposition.

    J1 contracts e3 into the failure of the two differentials to act as
    derivations of the opposite brackets; J2 measures the gradient section
    of the antisymmetric pairing acting back on e3.
    """
    Ea, Es = R.E, R.Estar

    d_br_xi = d_differential(Ea, algebroid_bracket(Es, e1.xi, e2.xi).as_form())
    d_xi1 = d_differential(Ea, e1.xi.as_form())
    d_xi2 = d_differential(Ea, e2.xi.as_form())
    group_xi = d_br_xi - schouten(Es, e1.xi, d_xi2) + schouten(Es, e2.xi, d_xi1)
    j1_xi = interior_product(e3.X, group_xi).as_vector_field()

    ds_br_x = d_differential(Es, algebroid_bracket(Ea, e1.X, e2.X).as_form())
    ds_x1 = d_differential(Es, e1.X.as_form())
    ds_x2 = d_differential(Es, e2.X.as_form())
    group_x = ds_br_x - schouten(Ea, e1.X, ds_x2) + schouten(Ea, e2.X, ds_x1)
    j1_x = interior_product(e3.xi, group_x).as_vector_field()

    j1 = DoubledSection(j1_x, j1_xi)

    minus = pairing("-", e1, e2)
    grad = D_op(R, minus)  # X part: dual-side gradient; xi part: E-side gradient
    j2_xi = lie_derivative(Ea, grad.X, e3.xi.as_form()).as_vector_field() + algebroid_bracket(
        Es, grad.xi, e3.xi
    )
    j2_x = lie_derivative(Es, grad.xi, e3.X.as_form()).as_vector_field() + algebroid_bracket(
        Ea, grad.X, e3.X
    )
    j2 = DoubledSection(-j2_x, j2_xi)
    return j1, j2


def _leibniz_residual(R, e1, e2, f, flux) -> DoubledSection:
    br = _bracket_fn(R, flux)
    anchored = R.E.rho_dot(e1.X, f) + R.Estar.rho_dot(e1.xi, f)
    return (
        br(e1, e2.scaled(f))
        - br(e1, e2).scaled(f)
        - e2.scaled(anchored)
        + D_op(R, f).scaled(pairing("+", e1, e2))
    )


def _compat_residual(R, e1, e2, e3, flux) -> PolyExpr:
    br = _bracket_fn(R, flux)
    p23 = pairing("+", e2, e3)
    anchored = R.E.rho_dot(e1.X, p23) + R.Estar.rho_dot(e1.xi, p23)
    left = br(e1, e2) + D_op(R, pairing("+", e1, e2))
    right = br(e1, e3) + D_op(R, pairing("+", e1, e3))
    return anchored - pairing("+", left, e3) - pairing("+", e2, right)


def _anchor_residual_components(R, e1, e2, flux) -> Residuals:
    """Anchor-homomorphism defect, kept only on the chart directions that
    admissible test functions can actually probe (their gradient support)."""
    br = _bracket_fn(R, flux)
    lhs = rho_V(R, br(e1, e2))
    rhs = tangent_bracket(rho_V(R, e1), rho_V(R, e2), R.dim)
    mask = R.function_constraint.mask
    out: Residuals = []
    for m in range(1, 2 * R.dim + 1):
        var = DoubledIndex.from_flat(m, R.dim).var()
        if mask is not None and var not in mask:
            continue
        out.append((f"tangent[{m}]", lhs[m - 1] - rhs[m - 1]))
    return out


def _c4_residual(R, f, g) -> PolyExpr:
    # Normalized with a factor 2 so the flat-identity value matches the
    # gradient-pairing form of the constraint (witness value 1 at (x1, xt1)).
    return pairing("+", D_op(R, f), D_op(R, g)).scaled(2)


# -- check_axiom ---------------------------------------------------------------


def _cache_get(R: DoubledRealization, key):
    return R.check_cache.get(key)


def _cache_put(R: DoubledRealization, key, report: AxiomReport):
    R.check_cache[key] = report


def _flux_key(flux: Optional[FluxTensor]):
    if flux is None:
        return None
    return tuple(sorted((m, n, l, str(p)) for (m, n, l), p in flux.entries.items()))


def check_axiom(
    R: DoubledRealization,
    axiom_id: str,
    family: Optional[GenericSectionFamily] = None,
    flux: Optional[FluxTensor] = None,
    explicit_sections: Sequence[DoubledSection] = (),
) -> AxiomReport:
    """Check one of the five bracket axioms (V1 and V2 are aliases for the
    Leibniz and compatibility axioms) on generic admissible data."""
    alias = {"V1": "C3", "V2": "C5"}
    requested = axiom_id
    axiom_id = alias.get(axiom_id, axiom_id)
    if axiom_id not in AXIOM_IDS:
        raise ValueError(f"unknown axiom id {requested!r}")
    family = family or GenericSectionFamily(degree=R.degree, count=R.sections)
    needed = {"C1": 3, "C2": 2, "C3": 2, "C4": 0, "C5": 3}[axiom_id]
    if family.count < needed:
        raise ValueError(
            f"axiom {axiom_id} needs {needed} sections, family provides {family.count}"
        )
    probes_key = tuple(
        tuple(str(comp) for _, comp in sec.components()) for sec in explicit_sections
    )
    cache_key = ("axiom", axiom_id, family.key(), _flux_key(flux), probes_key)
    cached = _cache_get(R, cache_key)
    if cached is not None:
        return replace(cached, check_id=requested)

    sections = _extra_probe_sections(R, explicit_sections)
    functions = _battery_functions(R, R.function_constraint)
    dim = R.dim
    detail = ""

    def generic_inputs_sections(n_sections: int, n_functions: int = 0) -> Callable[[], dict]:
        def build() -> dict:
            alloc = _Allocator(family.start)
            secs = [_generic_section(R, family.degree, alloc) for _ in range(family.count)]
            inputs = {f"e{i}": secs[i - 1] for i in range(1, n_sections + 1)}
            names = ("f", "g")
            for i in range(n_functions):
                inputs[names[i]] = _generic_poly(dim, family.degree, R.function_constraint, alloc)
            return inputs

        return build

    if axiom_id == "C1":
        probes = itertools.islice(
            ({"e1": a, "e2": b, "e3": c} for a, b, c in itertools.product(sections, repeat=3)),
            120,
        )
        residual_fn = lambda ins: _c1_residual(R, ins["e1"], ins["e2"], ins["e3"], flux).components()
        generic = generic_inputs_sections(3)
    elif axiom_id == "C2":
        probes = ({"e1": a, "e2": b} for a, b in itertools.product(sections, repeat=2))
        residual_fn = lambda ins: _anchor_residual_components(R, ins["e1"], ins["e2"], flux)
        generic = generic_inputs_sections(2)
        detail = "defect paired against gradients of admissible test functions"
    elif axiom_id == "C3":
        probes = itertools.islice(
            (
                {"e1": a, "e2": b, "f": f}
                for a, b, f in itertools.product(sections, sections, functions[:3])
            ),
            60,
        )
        residual_fn = lambda ins: _leibniz_residual(R, ins["e1"], ins["e2"], ins["f"], flux).components()
        generic = generic_inputs_sections(2, n_functions=1)
    elif axiom_id == "C4":
        probes = ({"f": f, "g": g} for f, g in itertools.product(functions, repeat=2))
        residual_fn = lambda ins: [("scalar", _c4_residual(R, ins["f"], ins["g"]))]
        generic = generic_inputs_sections(0, n_functions=2)
    else:  # C5
        probes = itertools.islice(
            ({"e1": a, "e2": b, "e3": c} for a, b, c in itertools.product(sections, repeat=3)),
            120,
        )
        residual_fn = lambda ins: [("scalar", _compat_residual(R, ins["e1"], ins["e2"], ins["e3"], flux))]
        generic = generic_inputs_sections(3)

    report = _decide(axiom_id, probes, residual_fn, generic, family.degree, detail)
    _cache_put(R, cache_key, report)
    return replace(report, check_id=requested)


# -- further conditions --------------------------------------------------------


def check_derivation_condition(
    R: DoubledRealization, family: Optional[GenericSectionFamily] = None
) -> AxiomReport:
    """The dual differential as a derivation of the same-side bracket, on
    generic pairs, together with the mirrored condition on the other side."""
    family = family or GenericSectionFamily(degree=R.degree, count=R.sections)
    cache_key = ("derivation", family.key())
    cached = _cache_get(R, cache_key)
    if cached is not None:
        return cached
    Ea, Es = R.E, R.Estar

    def residual_fn(ins: dict) -> Residuals:
        X, Y = ins["X"], ins["Y"]
        xi, eta = ins["xi"], ins["eta"]
        primal = (
            d_differential(Es, algebroid_bracket(Ea, X, Y).as_form())
            + schouten(Ea, Y, d_differential(Es, X.as_form()))
            - schouten(Ea, X, d_differential(Es, Y.as_form()))
        )
        dual = (
            d_differential(Ea, algebroid_bracket(Es, xi, eta).as_form())
            + schouten(Es, eta, d_differential(Ea, xi.as_form()))
            - schouten(Es, xi, d_differential(Ea, eta.as_form()))
        )
        out: Residuals = []
        for (i, j), poly in sorted(primal.comps.items()):
            out.append((f"primal[{i},{j}]", poly))
        for (i, j), poly in sorted(dual.comps.items()):
            out.append((f"dual[{i},{j}]", poly))
        return out

    batt = _battery_sections(R)
    xs = [s.X for s in batt if not s.X.is_zero()]
    xis = [s.xi for s in batt if not s.xi.is_zero()]
    zero_x = VectorField.zero(E, R.dim)
    zero_xi = VectorField.zero(ESTAR, R.dim)
    probes = (
        {"X": a, "Y": b, "xi": zero_xi, "eta": zero_xi}
        for a, b in itertools.product(xs, repeat=2)
    )
    probes = itertools.chain(
        probes,
        (
            {"X": zero_x, "Y": zero_x, "xi": a, "eta": b}
            for a, b in itertools.product(xis, repeat=2)
        ),
    )

    def generic() -> dict:
        alloc = _Allocator(family.start)
        sec1 = _generic_section(R, family.degree, alloc)
        sec2 = _generic_section(R, family.degree, alloc)
        return {"X": sec1.X, "Y": sec2.X, "xi": sec1.xi, "eta": sec2.xi}

    report = _decide("derivation", probes, residual_fn, generic, family.degree)
    _cache_put(R, cache_key, report)
    return report


_STRONG_IDS = {"functions": "strong-fn", "vectors": "strong-vec", "forms": "strong-form"}


def _has_coordinate_anchors(R: DoubledRealization) -> bool:
    one, zero = PolyExpr.one(), _ZERO
    for i in range(R.dim):
        for m in range(2 * R.dim):
            want_e = one if m == i else zero
            want_es = one if m == R.dim + i else zero
            if R.E.anchor[m][i] != want_e or R.Estar.anchor[m][i] != want_es:
                return False
    return True


def check_strong_constraint(
    R: DoubledRealization, level: str, family: Optional[GenericSectionFamily] = None
) -> AxiomReport:
    """Gradient-pairing residuals of admissible data: function against
    function, vector components, or form components.  Meaningful only for
    the flat identity anchors; anything else is reported SKIPPED."""
    if level not in _STRONG_IDS:
        raise ValueError(f"unknown strong-constraint level {level!r}")
    check_id = _STRONG_IDS[level]
    family = family or GenericSectionFamily(degree=R.degree, count=R.sections)
    if not _has_coordinate_anchors(R):
        return AxiomReport(
            check_id,
            SKIPPED,
            degree=family.degree,
            detail="anchors are not the flat identity blocks; gradient-pairing form does not apply",
        )

    functions = _battery_functions(R, R.function_constraint)
    sections = _battery_sections(R)

    if level == "functions":
        probes = ({"f": f, "g": g} for f, g in itertools.product(functions, repeat=2))

        def residual_fn(ins: dict) -> Residuals:
            return [("scalar", eta_pairing(ins["f"], ins["g"]))]

        def generic() -> dict:
            alloc = _Allocator(family.start)
            f = _generic_poly(R.dim, family.degree, R.function_constraint, alloc)
            g = _generic_poly(R.dim, family.degree, R.function_constraint, alloc)
            return {"f": f, "g": g}

    else:
        part = "X" if level == "vectors" else "xi"
        probes = (
            {"f": f, "e": s}
            for f, s in itertools.product(functions[:4], sections)
        )

        def residual_fn(ins: dict) -> Residuals:
            comps = ins["e"].X.comps if part == "X" else ins["e"].xi.comps
            return [
                (f"{part}[{mu}]", eta_pairing(ins["f"], comp))
                for mu, comp in enumerate(comps, start=1)
            ]

        def generic() -> dict:
            alloc = _Allocator(family.start)
            f = _generic_poly(R.dim, family.degree, R.function_constraint, alloc)
            return {"f": f, "e": _generic_section(R, family.degree, alloc)}

    return _decide(check_id, probes, residual_fn, generic, family.degree)


def check_anchor_antisymmetry(R: DoubledRealization) -> AxiomReport:
    """Entrywise vanishing of the symmetrised composite of the two anchors
    through the frame duality (the skew-anchor condition)."""
    from .doubled import pi_map

    pi = pi_map(R)
    residuals: Residuals = []
    for m in range(2 * R.dim):
        for n in range(2 * R.dim):
            entry = pi[m][n] + pi[n][m]
            if not entry.is_zero():
                residuals.append((f"composite[{m + 1},{n + 1}]", entry))
    if not residuals:
        return AxiomReport("anchor-antisym", PASS)
    label, poly = residuals[0]
    point, value = _witness_point(poly)
    witness = {"inputs": {}, "component": label, "point": point, "value": value}
    return AxiomReport("anchor-antisym", FAIL, witness=witness, residual=str(poly))


def _determinant(matrix: Sequence[Sequence[PolyExpr]]) -> PolyExpr:
    """Cofactor determinant with memoisation over column subsets."""
    n = len(matrix)
    memo: dict[tuple[int, int], PolyExpr] = {}

    def go(row: int, cols_mask: int) -> PolyExpr:
        if row == n:
            return PolyExpr.one()
        key = (row, cols_mask)
        hit = memo.get(key)
        if hit is not None:
            return hit
        pieces = []
        sign = 1
        for col in range(n):
            bit = 1 << col
            if cols_mask & bit:
                continue
            entry = matrix[row][col]
            if not entry.is_zero():
                sub = go(row + 1, cols_mask | bit)
                term = entry * sub
                pieces.append(term if sign == 1 else -term)
            sign = -sign
        value = poly_sum(pieces)
        memo[key] = value
        return value

    return go(0, 0)


def check_twist_conditions(R: DoubledRealization, F: FluxTensor) -> list[AxiomReport]:
    """The two twist compatibility conditions: antisymmetry of the lowered
    tensor in its last two slots, and annihilation by the doubled anchor
    (with the anchor determinant reported when the twist is nonzero)."""
    if F.dim != R.dim:
        raise ValueError("flux dimension does not match the realization")
    dim2 = 2 * R.dim
    reports: list[AxiomReport] = []

    sym: Residuals = []
    seen: set[tuple[int, int, int]] = set()
    for (m, n, l) in F.entries:
        l_low = l - R.dim if l > R.dim else l + R.dim
        for key in ((m, n, l_low), (m, l_low, n)):
            if key in seen:
                continue
            seen.add(key)
            a, b, c = key
            entry = F.lowered(a, b, c) + F.lowered(a, c, b)
            if not entry.is_zero():
                sym.append((f"F[{a},{b},{c}]+F[{a},{c},{b}]", entry))
    if not sym:
        reports.append(AxiomReport("twist-V2", PASS))
    else:
        label, poly = sym[0]
        point, value = _witness_point(poly)
        reports.append(
            AxiomReport(
                "twist-V2",
                FAIL,
                witness={"inputs": {}, "component": label, "point": point, "value": value},
                residual=str(poly),
            )
        )

    rho = rho_V_matrix(R)
    annihilation: Residuals = []
    pairs = sorted({(m, n) for (m, n, _l) in F.entries})
    for (m, n) in pairs:
        for l_out in range(1, dim2 + 1):
            entry = poly_sum(
                rho[l_out - 1][k - 1] * F.component(m, n, k) for k in range(1, dim2 + 1)
            )
            if not entry.is_zero():
                annihilation.append((f"rho.F[{m},{n};{l_out}]", entry))
    detail = ""
    if not F.is_zero():
        det = _determinant(rho)
        if det.is_zero():
            detail = "anchor determinant vanishes identically"
        else:
            detail = f"anchor determinant is nonzero ({det}); a nonzero twist cannot lie in its kernel"
    if not annihilation:
        reports.append(AxiomReport("twist-C2", PASS, detail=detail))
    else:
        label, poly = annihilation[0]
        point, value = _witness_point(poly)
        reports.append(
            AxiomReport(
                "twist-C2",
                FAIL,
                witness={"inputs": {}, "component": label, "point": point, "value": value},
                residual=str(poly),
                detail=detail,
            )
        )
    return reports


def _flux_frame_type(R: DoubledRealization, F: FluxTensor) -> Optional[str]:
    """"H" when every entry sits in the lower-lower block with an E* output
    and x-only coefficients, "R" for the mirrored case, None otherwise."""
    if F.is_zero():
        return "H"
    dim = R.dim
    h_like = all(m <= dim and n <= dim and l > dim for (m, n, l) in F.entries)
    r_like = all(m > dim and n > dim and l <= dim for (m, n, l) in F.entries)
    if h_like:
        allowed = frozenset(Var(KIND_X, mu) for mu in range(1, dim + 1))
        if all(p.coord_support_within(allowed) for p in F.entries.values()):
            return "H"
        return None
    if r_like:
        allowed = frozenset(Var(KIND_XT, mu) for mu in range(1, dim + 1))
        if all(p.coord_support_within(allowed) for p in F.entries.values()):
            return "R"
    return None


def _flux_three_form(R: DoubledRealization, F: FluxTensor, frame: str) -> Optional[FormField]:
    """The one-sided 3-form carried by the twist, or None when the lowered
    components are not totally antisymmetric."""
    dim = R.dim

    def low(a: int, b: int, c: int) -> PolyExpr:
        if frame == "H":
            return F.lowered(a, b, c)
        return F.lowered(dim + a, dim + b, dim + c)

    comps: dict[tuple[int, ...], PolyExpr] = {}
    for a in range(1, dim + 1):
        for b in range(1, dim + 1):
            for c in range(1, dim + 1):
                value = low(a, b, c)
                if len({a, b, c}) < 3:
                    if not value.is_zero():
                        return None
                    continue
                key = tuple(sorted((a, b, c)))
                canon = value if _perm_sign((a, b, c)) == 1 else -value
                base = comps.get(key)
                if base is None:
                    comps[key] = canon
                elif base != canon:
                    return None
    on = E if frame == "H" else ESTAR
    return FormField(on, 3, {k: v for k, v in comps.items() if not v.is_zero()}, dim=dim)


def _perm_sign(idx: tuple[int, int, int]) -> int:
    (a, b, c) = idx
    sign = 1
    seq = [a, b, c]
    for i in range(1, 3):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
    return sign


def _jac_f_condition_residual(R, F, e1, e2, e3) -> DoubledSection:
    """The closed-form obstruction to the Jacobi anomaly of the twisted
    bracket, measured directly term by term."""
    total = DoubledSection.zero(R.dim)
    scalars = []
    for (a, b, c) in ((e1, e2, e3), (e2, e3, e1), (e3, e1, e2)):
        ii = flux_contraction(F, a, b)
        scalars.append(pairing("+", ii, c))
        total = total + flux_contraction(F, c_bracket(R, a, b), c)
        total = total + c_bracket(R, ii, c)
        total = total + flux_contraction(F, ii, c)
    correction = D_op(R, poly_sum(scalars)).scaled(PolyExpr.const(_THIRD))
    return total - correction


def check_bianchi(
    R: DoubledRealization, F: FluxTensor, family: Optional[GenericSectionFamily] = None
) -> AxiomReport:
    """Closedness of the one-sided 3-form carried by the twist.

    For a twist in the lower-lower block with x-only data this is the
    exterior derivative on the E side; the mirrored block uses the E*
    side.  In the genuine one-sided frame (the opposite anchor vanishing,
    x-only data) the twisted Jacobi obstruction is also evaluated on
    generic sections and compared with the triple contraction of the
    4-form, which it must equal exactly.
    """
    family = family or GenericSectionFamily(degree=R.degree, count=R.sections)
    frame = _flux_frame_type(R, F)
    if frame is None:
        return AxiomReport(
            "bianchi",
            SKIPPED,
            detail="twist is not a one-sided 3-form with matching one-leaf data; no closedness form applies",
        )
    three = _flux_three_form(R, F, frame)
    if three is None:
        return AxiomReport(
            "bianchi",
            SKIPPED,
            detail="lowered twist components are not totally antisymmetric; not a 3-form",
        )
    algebroid = R.E if frame == "H" else R.Estar
    d_three = d_differential(algebroid, three)
    residuals: Residuals = [
        (f"d{'H' if frame == 'H' else 'R'}[{','.join(map(str, key))}]", poly)
        for key, poly in sorted(d_three.comps.items())
    ]

    detail_parts = [f"{frame}-frame twist"]
    comparison_failed: Optional[tuple[str, PolyExpr, dict]] = None
    one_sided = (
        R.Estar.anchor_is_zero() and not R.Estar.structure
        if frame == "H"
        else R.E.anchor_is_zero() and not R.E.structure
    )
    if one_sided:
        alloc = _Allocator(family.start)
        secs = [_generic_section(R, family.degree, alloc) for _ in range(3)]
        lhs = _jac_f_condition_residual(R, F, *secs)
        contracted = d_three
        # Slot order pinned by the identity itself: the third section fills
        # the first slot of the 4-form, then the second, then the first.
        vectors = [s.X if frame == "H" else s.xi for s in reversed(secs)]
        for v in vectors:
            contracted = interior_product(v, contracted)
        expected_vec = contracted.as_vector_field()
        if frame == "H":
            expected = DoubledSection(VectorField.zero(E, R.dim), expected_vec)
        else:
            expected = DoubledSection(expected_vec, VectorField.zero(ESTAR, R.dim))
        mismatch = lhs - expected
        label, poly = _first_nonzero(mismatch.components())
        if poly is not None:
            inputs = {f"e{i}": s for i, s in enumerate(secs, start=1)}
            witness, residual = _witness_from_inputs(label, poly, inputs)
            comparison_failed = (residual, poly, witness)
        else:
            detail_parts.append(
                "twisted Jacobi obstruction matches the triple contraction of the derivative on generic sections"
            )
    else:
        detail_parts.append("obstruction comparison skipped: realization is not in the one-sided frame")

    if comparison_failed is not None:
        residual, _poly, witness = comparison_failed
        return AxiomReport(
            "bianchi",
            FAIL,
            witness=witness,
            residual=residual,
            degree=family.degree,
            detail="; ".join(
                detail_parts + ["twisted Jacobi obstruction disagrees with the contracted derivative"]
            ),
        )

    label, poly = _first_nonzero(residuals)
    if poly is None:
        return AxiomReport("bianchi", PASS, degree=family.degree, detail="; ".join(detail_parts))
    point, value = _witness_point(poly)
    witness = {"inputs": {}, "component": label, "point": point, "value": value}
    return AxiomReport(
        "bianchi",
        FAIL,
        witness=witness,
        residual=str(poly),
        degree=family.degree,
        detail="; ".join(detail_parts),
    )


# -- classification -----------------------------------------------------------


def label_from_statuses(passed: set[str]) -> tuple[str, bool]:
    """The strongest family supported by a set of passing axiom ids, plus
    whether the combination is impossible for the doubled construction
    (modified Jacobi holding while anchor or gradient compatibility fails)."""
    if "C3" not in passed or "C5" not in passed:
        label = "not-Vaisman"
    elif passed >= {"C1", "C2", "C3", "C4", "C5"}:
        label = "Courant"
    elif {"C2", "C4"} <= passed and "C1" not in passed:
        label = "pre-Courant"
    elif {"C1", "C4"} <= passed:
        label = "Jacobi-ante-Courant"
    elif "C4" in passed:
        label = "ante-Courant"
    elif "C1" in passed:
        label = "Jacobi-Vaisman"
    else:
        label = "Vaisman"
    suspicious = "C1" in passed and bool({"C2", "C4"} - passed)
    return label, suspicious


def classify(
    R: DoubledRealization,
    family: Optional[GenericSectionFamily] = None,
    flux: Optional[FluxTensor] = None,
) -> tuple[str, list[AxiomReport]]:
    """Run the five axioms and name the strongest family they support.

    The combination "modified Jacobi holds but anchor or gradient
    compatibility fails" cannot arise from the doubled construction; when
    observed it is flagged in the Jacobi report's detail since it signals
    an inconsistency rather than a legitimate family.
    """
    family = family or GenericSectionFamily(degree=R.degree, count=R.sections)
    reports = [check_axiom(R, axiom, family, flux) for axiom in AXIOM_IDS]
    ok = {r.check_id for r in reports if r.status == PASS}
    label, suspicious = label_from_statuses(ok)
    if suspicious:
        for r in reports:
            if r.check_id == "C1":
                r.detail = (
                    (r.detail + "; " if r.detail else "")
                    + "modified Jacobi without anchor/gradient compatibility cannot come "
                    + "from the doubled bracket; flagging for review"
                )
    return label, reports


# -- degeneration to algebras ---------------------------------------------------


def quadratic_lie_algebra_check(
    R: DoubledRealization, family: Optional[GenericSectionFamily] = None
) -> list[AxiomReport]:
    """With both anchors zero and constant structure functions the bracket
    restricts to constant sections as a candidate Lie algebra with an
    invariant pairing; check the Jacobi identity, bilinearity over
    functions, and pairing invariance there."""
    if not (R.E.anchor_is_zero() and R.Estar.anchor_is_zero()):
        raise ValueError("degeneration check requires both anchors to vanish")
    if not (R.E.structure_is_constant() and R.Estar.structure_is_constant()):
        raise ValueError("degeneration check requires constant structure functions")
    family = family or GenericSectionFamily(degree=R.degree, count=R.sections)

    alloc = _Allocator(family.start)
    consts = [_generic_section(R, 0, alloc) for _ in range(3)]
    e1, e2, e3 = consts
    f = _generic_poly(R.dim, max(1, family.degree), R.function_constraint, alloc)

    reports: list[AxiomReport] = []

    jac = jacobiator(R, e1, e2, e3)
    label, poly = _first_nonzero(jac.components())
    if poly is None:
        reports.append(AxiomReport("quadratic-jacobi", PASS, degree=0))
    else:
        witness, residual = _witness_from_inputs(label, poly, {"e1": e1, "e2": e2, "e3": e3})
        reports.append(
            AxiomReport("quadratic-jacobi", FAIL, witness=witness, residual=residual, degree=0)
        )

    bilin = c_bracket(R, e1, e2.scaled(f)) - c_bracket(R, e1, e2).scaled(f)
    label, poly = _first_nonzero(bilin.components())
    if poly is None:
        reports.append(AxiomReport("quadratic-bilinearity", PASS, degree=0))
    else:
        witness, residual = _witness_from_inputs(label, poly, {"e1": e1, "e2": e2, "f": f})
        reports.append(
            AxiomReport("quadratic-bilinearity", FAIL, witness=witness, residual=residual, degree=0)
        )

    invariance = pairing("+", c_bracket(R, e1, e2), e3) + pairing("+", e2, c_bracket(R, e1, e3))
    if invariance.is_zero():
        reports.append(AxiomReport("quadratic-ad-invariance", PASS, degree=0))
    else:
        witness, residual = _witness_from_inputs(
            "scalar", invariance, {"e1": e1, "e2": e2, "e3": e3}
        )
        reports.append(
            AxiomReport(
                "quadratic-ad-invariance", FAIL, witness=witness, residual=residual, degree=0
            )
        )
    return reports

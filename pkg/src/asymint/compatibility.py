"""Commutation analysis of the slow-time flows.

A reduction order is asymptotically consistent when the mixed slow-time
derivatives of every correction field agree.  The first two slow times
carry the solved flows plus forcing corrections; the correction entering
the t3 rule of the highest field is not fixed by the reduction itself, so
it is introduced here as a labeled ansatz over the graded space two weights
above the known t2 forcing.  Equating d_{t3} d_{t2} with d_{t2} d_{t3}
gives a linear system for the ansatz labels; whatever survives their
elimination constrains the known forcing coefficients.  Those residual
constraints, canonicalized, are the order-n integrability conditions: the
verdict evaluates them at the coefficients the reduction actually produced.

Known forcing coefficients are treated as independent symbols while the
constraints are derived and only substituted numerically afterwards, so a
FAIL verdict always comes with the violated relation as a witness.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .diffpoly import (
    DiffPolynomial,
    EvolutionRules,
    FieldSymbol,
    time_derivative,
)
from .errors import InconsistentSystemError
from .field import CoeffElement, CoeffField, ModelParams
from .hierarchy import FlowHierarchy
from .knowns import KnownPoly
from .labels import (
    T2_SECOND,
    T2_THIRD,
    T2_THIRD_KDV,
    T3_SECOND,
    LabeledBasis,
    generic_basis,
)


@dataclass
class CompatibilityProblem:
    """One commutation problem: which field the condition is imposed on,
    the rules feeding both slow-time derivatives, and the labeled spaces of
    the known forcing and of the unknown ansatz."""

    variant: str
    order: int
    field: CoeffField
    context: FlowHierarchy
    target: FieldSymbol
    known_basis: LabeledBasis
    known_values: Dict[str, CoeffElement]
    ansatz_basis: LabeledBasis
    evolution_rules: EvolutionRules


@dataclass
class CompatibilityReport:
    order: int
    variant: str
    solved_coefficients: Dict[str, KnownPoly]
    residual_constraints: List[KnownPoly]
    evaluated: List[CoeffElement]
    verdict: str
    witness: Optional[str]


def apply_time_derivative(
    poly: DiffPolynomial, m: int, rules: EvolutionRules
) -> DiffPolynomial:
    """Total d_{t_m} with every field evolution supplied by the rules."""
    return time_derivative(poly, m, rules, strict=True)


# --- canonical label order and linear algebra over the label monomials -----------

_LABEL = re.compile(r"([a-z]+)([0-9]+)$")


def _label_key(name: str):
    m = _LABEL.match(name)
    return (m.group(1), -int(m.group(2))) if m else (name, 0)


def _column_key(key) -> Tuple:
    deg = sum(p for _, p in key)
    return (deg, tuple(sorted(((_label_key(n), p) for n, p in key))))


def strip_content(poly: KnownPoly) -> KnownPoly:
    """Divide out the common label-monomial factor of all terms.  Pivoting
    never divides by a symbol, so elimination can leave a constraint times a
    stray label; the label values are nonvanishing, making the primitive part
    the same condition in canonical form."""
    keys = list(poly.terms)
    if not keys:
        return poly
    common: Dict[str, int] = dict(keys[0])
    for key in keys[1:]:
        have = dict(key)
        common = {n: min(p, have[n]) for n, p in common.items() if n in have}
        if not common:
            return poly
    terms = {}
    for key, coeff in poly.terms.items():
        left = {n: p - common.get(n, 0) for n, p in key}
        terms[tuple(sorted((n, p) for n, p in left.items() if p))] = coeff
    return KnownPoly(poly.field, terms)


def eliminate_unknowns(
    equations: Sequence[KnownPoly], names: Sequence[str], field: CoeffField
) -> Tuple[Dict[str, KnownPoly], List[KnownPoly]]:
    """Solve the ansatz labels out of the linear system, pivoting only on
    invertible constant coefficients so no division by a symbolic quantity
    ever happens; returns the solved map and the unknown-free leftovers."""
    eqs = [e for e in equations if e]
    remaining = set(names)
    solved: Dict[str, KnownPoly] = {}
    while remaining:
        pick = None
        for idx, eq in enumerate(eqs):
            linear, rest = eq.split_linear(remaining)
            for name in sorted(linear, key=_label_key):
                coeff = linear[name]
                if coeff.is_constant() and not coeff.constant_value().is_zero():
                    pick = (idx, name, coeff.constant_value(), linear, rest)
                    break
            if pick:
                break
        if pick is None:
            break
        idx, name, cval, linear, rest = pick
        acc = rest
        for other, coeff in linear.items():
            if other != name:
                acc = acc + coeff * KnownPoly.symbol(field, other)
        expr = acc * (-cval.inv())
        mapping = {name: expr}
        eqs = [e.substitute(mapping) for j, e in enumerate(eqs) if j != idx]
        eqs = [e for e in eqs if e]
        solved = {k: v.substitute(mapping) for k, v in solved.items()}
        solved[name] = expr
        remaining.discard(name)
    if remaining:
        raise InconsistentSystemError(
            f"ansatz labels {sorted(remaining)} admit no constant pivot"
        )
    stray = [e for e in eqs if any(n in e.symbols() for n in names)]
    if stray:
        raise InconsistentSystemError("ansatz labels survive their elimination")
    return solved, eqs


def rref(rows: Sequence[KnownPoly], field: CoeffField) -> List[KnownPoly]:
    """Reduced row echelon form of the span of the rows, with the label
    monomials as columns in canonical order and every leading coefficient
    scaled to one.  The output depends only on the span, so it is the
    canonical form used for constraint comparison."""
    work = [dict(r.terms) for r in rows if r]
    columns = sorted({key for row in work for key in row}, key=_column_key)
    done: List[Tuple[Tuple, Dict]] = []
    for col in columns:
        pivot = None
        for row in work:
            if col in row:
                pivot = row
                break
        if pivot is None:
            continue
        work.remove(pivot)
        inv = pivot[col].inv()
        pivot = {k: v * inv for k, v in pivot.items()}
        for rows_set in (work, [d for _, d in done]):
            for row in rows_set:
                f = row.get(col)
                if f is None:
                    continue
                for k, v in pivot.items():
                    new = row.get(k, field.zero) - f * v
                    if new.is_zero():
                        row.pop(k, None)
                    else:
                        row[k] = new
        done.append((col, pivot))
        work = [row for row in work if row]
    return [KnownPoly(field, terms) for _, terms in done]


def reduce_by_constraints(
    poly: KnownPoly, constraints: Sequence[KnownPoly], field: CoeffField
) -> KnownPoly:
    """Remainder of poly modulo the span of RREF constraints."""
    for c in constraints:
        lead = min(c.terms, key=_column_key)
        f = poly.terms.get(lead)
        if f is not None:
            poly = poly - c * f
    return poly


# --- problem assembly -------------------------------------------------------------


def _lifted(field: CoeffField, poly: DiffPolynomial) -> DiffPolynomial:
    return poly.map_coeffs(lambda ce: KnownPoly.constant(field, ce))


def _linearized(
    field: CoeffField,
    hier: FlowHierarchy,
    j: int,
    norm: CoeffElement,
    kind: str,
    index: int,
) -> DiffPolynomial:
    leaf = DiffPolynomial.leaf(FieldSymbol(kind, index), 0, field.one)
    if kind == "vphi":
        applied = hier.linearized_kdv_flow(j, norm).apply(leaf)
    else:
        applied = hier.linearized_flow(j, norm).apply(leaf)
    return _lifted(field, applied)


def _filled(basis: LabeledBasis, values: Dict[str, CoeffElement], field: CoeffField):
    return {name: values.get(name, field.zero) for name in basis.labels}


def build_problem(engine_report, order: int) -> CompatibilityProblem:
    """Assemble the commutation problem at the given order from a completed
    reduction.  Order seven always lives in the potential variant; order
    nine follows the variant the reduction itself selected."""
    field = engine_report.field
    alpha1, alpha2 = engine_report.alphas[1], engine_report.alphas[2]
    beta3 = engine_report.betas[3]
    hier = FlowHierarchy(alpha1, alpha2)
    one = KnownPoly.constant(field, field.one)

    rules = EvolutionRules(one=one)
    rules.set("phi", 1, 2, _lifted(field, hier.flow(2, alpha1)))
    rules.set("phi", 1, 3, _lifted(field, hier.flow(3, beta3)))
    f_t2 = T2_SECOND.ansatz(field)
    rules.set("phi", 2, 2, _linearized(field, hier, 2, alpha1, "phi", 2) + f_t2)
    f_t3 = T3_SECOND.ansatz(field)
    rules.set("phi", 2, 3, _linearized(field, hier, 3, beta3, "phi", 2) + f_t3)

    if order == 7:
        return CompatibilityProblem(
            variant="potential",
            order=7,
            field=field,
            context=hier,
            target=FieldSymbol("phi", 2),
            known_basis=T2_SECOND,
            known_values=_filled(
                T2_SECOND, engine_report.forcings["f_t2"].coefficients, field
            ),
            ansatz_basis=T3_SECOND,
            evolution_rules=rules,
        )
    if order != 9:
        raise ValueError(f"no commutation problem at order {order}")

    seven = solve_compatibility(build_problem(engine_report, 7))
    if seven.residual_constraints:
        raise InconsistentSystemError("the order-7 ansatz is already constrained")
    f_t3_solved = DiffPolynomial(
        {m: v for (name, m) in T3_SECOND.pairs if (v := seven.solved_coefficients[name])}
    )
    rules.set(
        "phi", 2, 3, _linearized(field, hier, 3, beta3, "phi", 2) + f_t3_solved
    )

    variant = engine_report.variant
    known_values = _filled(
        T2_SECOND, engine_report.forcings["f_t2"].coefficients, field
    )
    if variant == "potential":
        known_basis = T2_THIRD
        ansatz_basis = generic_basis("q", 10, "potential", 2)
        known_values.update(
            _filled(T2_THIRD, engine_report.forcings["h_t2"].coefficients, field)
        )
        rules.set(
            "phi", 3, 2, _linearized(field, hier, 2, alpha1, "phi", 3) + T2_THIRD.ansatz(field)
        )
        rules.set(
            "phi", 3, 3, _linearized(field, hier, 3, beta3, "phi", 3) + ansatz_basis.ansatz(field)
        )
        target = FieldSymbol("phi", 3)
    elif variant == "kdv":
        known_basis = T2_THIRD_KDV
        ansatz_basis = generic_basis("q", 11, "kdv", 2)
        known_values.update(
            _filled(T2_THIRD_KDV, engine_report.forcings["g_t2"].coefficients, field)
        )
        kdv = EvolutionRules(one=one)
        kdv.set("vphi", 1, 2, _lifted(field, hier.kdv_flow(2, alpha1)))
        kdv.set("vphi", 1, 3, _lifted(field, hier.kdv_flow(3, beta3)))
        kdv.set(
            "vphi", 2, 2,
            _linearized(field, hier, 2, alpha1, "vphi", 2) + f_t2.d_x().rename_to_kdv(),
        )
        kdv.set(
            "vphi", 2, 3,
            _linearized(field, hier, 3, beta3, "vphi", 2)
            + f_t3_solved.d_x().rename_to_kdv(),
        )
        kdv.set(
            "vphi", 3, 2,
            _linearized(field, hier, 2, alpha1, "vphi", 3) + T2_THIRD_KDV.ansatz(field),
        )
        kdv.set(
            "vphi", 3, 3,
            _linearized(field, hier, 3, beta3, "vphi", 3) + ansatz_basis.ansatz(field),
        )
        rules = kdv
        target = FieldSymbol("vphi", 3)
    else:
        raise ValueError(f"reduction report carries no ninth-order variant: {variant!r}")

    return CompatibilityProblem(
        variant=variant,
        order=9,
        field=field,
        context=hier,
        target=target,
        known_basis=known_basis,
        known_values=known_values,
        ansatz_basis=ansatz_basis,
        evolution_rules=rules,
    )


# --- solve and verdict -------------------------------------------------------------


def commutator_equations(problem: CompatibilityProblem) -> List[KnownPoly]:
    """Per-monomial coefficients of d_{t3}(t2 rule) - d_{t2}(t3 rule) on the
    target field; each must vanish."""
    rules = problem.evolution_rules
    r2 = rules.get(problem.target, 2)
    r3 = rules.get(problem.target, 3)
    e = apply_time_derivative(r2, 3, rules) - apply_time_derivative(r3, 2, rules)
    return [coeff for _, coeff in e.iter_sorted()]


def solve_compatibility(problem: CompatibilityProblem) -> CompatibilityReport:
    equations = commutator_equations(problem)
    solved, leftovers = eliminate_unknowns(
        equations, problem.ansatz_basis.labels, problem.field
    )
    constraints = rref([strip_content(e) for e in leftovers], problem.field)
    constraints = rref([strip_content(c) for c in constraints], problem.field)
    evaluated = [c.evaluate(problem.known_values) for c in constraints]
    witness = None
    for c, value in zip(constraints, evaluated):
        if not value.is_zero():
            witness = f"{c.text()} evaluates to {value.text()}"
            break
    return CompatibilityReport(
        order=problem.order,
        variant=problem.variant,
        solved_coefficients=solved,
        residual_constraints=constraints,
        evaluated=evaluated,
        verdict="PASS" if witness is None else "FAIL",
        witness=witness,
    )


def verdict(engine_report, level: int) -> Tuple[str, Optional[str]]:
    report = solve_compatibility(build_problem(engine_report, level))
    return report.verdict, report.witness


def solve_t3_correction(
    alpha1: CoeffElement,
    alpha2: CoeffElement,
    beta3: CoeffElement,
    a_values: Dict[str, CoeffElement],
) -> Dict[str, CoeffElement]:
    """Numeric t3-correction coefficients for the second field, used by the
    reduction to continue past the eighth order: the symbolic commutation
    solve evaluated at the computed t2-forcing."""
    field = alpha1.field
    hier = FlowHierarchy(alpha1, alpha2)
    one = KnownPoly.constant(field, field.one)
    rules = EvolutionRules(one=one)
    rules.set("phi", 1, 2, _lifted(field, hier.flow(2, alpha1)))
    rules.set("phi", 1, 3, _lifted(field, hier.flow(3, beta3)))
    rules.set("phi", 2, 2, _linearized(field, hier, 2, alpha1, "phi", 2) + T2_SECOND.ansatz(field))
    rules.set("phi", 2, 3, _linearized(field, hier, 3, beta3, "phi", 2) + T3_SECOND.ansatz(field))
    problem = CompatibilityProblem(
        variant="potential",
        order=7,
        field=field,
        context=hier,
        target=FieldSymbol("phi", 2),
        known_basis=T2_SECOND,
        known_values=_filled(T2_SECOND, a_values, field),
        ansatz_basis=T3_SECOND,
        evolution_rules=rules,
    )
    report = solve_compatibility(problem)
    if report.residual_constraints:
        raise InconsistentSystemError(
            "the t3 correction is constrained; the cross-derivative identity failed"
        )
    return {
        name: expr.evaluate(problem.known_values)
        for name, expr in report.solved_coefficients.items()
    }


def check(params: ModelParams, order: int):
    """Run the reduction, then the commutation analysis, at one order."""
    from .reduction import run_reduction

    engine = run_reduction(params, order=order)
    report = solve_compatibility(build_problem(engine, order))
    return engine, report

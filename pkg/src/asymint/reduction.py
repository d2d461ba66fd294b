"""Order-by-order multiscale reduction of the amplitude-phase lattice.

The combined lattice (selector s: 0 for the on-site cubic term, 1 for the
neighbor-averaged one) is written in amplitude-phase variables nu_n, phi_n
and expanded around the constant solution nu = 1, phi = -sigma t.  All
correction fields are functions of the characteristic slow space
x = eps zeta n - c eps t and of the slow times t_m = eps^(2m-1) t.  In this
frame the even eps-orders of the phase equation determine the amplitude
corrections nu^(i), and the odd eps-orders of the amplitude equation each
release the next evolution rules: every still-unknown slow-time derivative
enters through a clean first x-derivative with one shared constant
coefficient, so one exact integration splits the order into flows plus
forcings.  Removing the secular single-derivative monomial fixes the flow
normalization beta_j; whatever remains beside the linearized flows is the
forcing polynomial, reported through its labeled graded basis.

When the top-order forcing is not an exact x-derivative (the on-site
lattice at the ninth order) the split is performed on the differentiated
equation instead, with every d^ell phi^(j) renamed to d^(ell-1) vphi^(j).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from ._polyops import sign_on_open_unit_interval
from .diffpoly import (
    DiffPolynomial,
    EvolutionRules,
    FieldSymbol,
    mono,
    monomial_text,
    substitute_field,
    substitute_slow_times,
)
from .errors import (
    DomainError,
    ExpansionPointError,
    GradingError,
    InconsistentSystemError,
    NonLocalError,
    SecularResidueError,
)
from .field import CoeffElement, CoeffField, ModelParams
from .hierarchy import FlowHierarchy
from .labels import T2_SECOND, T2_THIRD, T2_THIRD_KDV, T3_SECOND, LabeledBasis

_TAU = FieldSymbol("tau", 1)


# --- truncated eps-series ------------------------------------------------------


class EpsSeries:
    """Map eps-power -> differential polynomial, truncated at a fixed order."""

    __slots__ = ("limit", "orders")

    def __init__(self, limit: int, orders: Optional[Dict[int, DiffPolynomial]] = None):
        self.limit = limit
        self.orders: Dict[int, DiffPolynomial] = {}
        if orders:
            for k, poly in orders.items():
                if k <= limit and not poly.is_zero():
                    self.orders[k] = poly

    @classmethod
    def constant(cls, limit: int, coeff) -> "EpsSeries":
        return cls(limit, {0: DiffPolynomial.constant(coeff)})

    def get(self, k: int) -> DiffPolynomial:
        return self.orders.get(k, DiffPolynomial.zero())

    def min_order(self) -> Optional[int]:
        return min(self.orders) if self.orders else None

    def __add__(self, other: "EpsSeries") -> "EpsSeries":
        out = dict(self.orders)
        for k, poly in other.orders.items():
            cur = out.get(k)
            new = poly if cur is None else cur + poly
            if new.is_zero():
                out.pop(k, None)
            else:
                out[k] = new
        return EpsSeries(self.limit, out)

    def __sub__(self, other: "EpsSeries") -> "EpsSeries":
        return self + other.scale_all(-1)

    def __mul__(self, other: "EpsSeries") -> "EpsSeries":
        acc: Dict[int, DiffPolynomial] = {}
        for i, p in self.orders.items():
            for j, q in other.orders.items():
                if i + j > self.limit:
                    continue
                prod = p * q
                if prod.is_zero():
                    continue
                cur = acc.get(i + j)
                acc[i + j] = prod if cur is None else cur + prod
        return EpsSeries(self.limit, acc)

    def scale_all(self, scalar) -> "EpsSeries":
        return EpsSeries(
            self.limit, {k: poly.scale(scalar) for k, poly in self.orders.items()}
        )

    def contains_kind(self, kind: str) -> bool:
        return any(poly.contains_kind(kind) for poly in self.orders.values())


def expand_shifts(
    series: EpsSeries, direction: int, zeta: CoeffElement
) -> EpsSeries:
    """The series at the neighboring site: every x-dependent factor d^ell X
    carries the ladder sum_j (direction eps zeta)^j / j! d^(ell+j) X; the
    phase baseline marker is site-independent."""
    limit = series.limit
    out = EpsSeries(limit)
    for k, poly in series.orders.items():
        for m, coeff in poly.terms.items():
            acc = EpsSeries(limit, {k: DiffPolynomial.constant(coeff)})
            for sym, ell in m:
                acc = acc * _ladder(sym, ell, direction, zeta, limit)
            out = out + acc
    return out


def _ladder(
    sym: FieldSymbol, ell: int, direction: int, zeta: CoeffElement, limit: int
) -> EpsSeries:
    field = zeta.field
    if sym.kind == "tau":
        return EpsSeries(limit, {0: DiffPolynomial.leaf(sym, ell, field.one)})
    orders = {}
    coeff = field.one
    step = zeta if direction > 0 else -zeta
    for j in range(limit + 1):
        if j:
            coeff = coeff * step * Fraction(1, j)
        orders[j] = DiffPolynomial.leaf(sym, ell + j, coeff)
    return EpsSeries(limit, orders)


_ANALYTIC: Dict[str, Callable[[int], Fraction]] = {
    "sin": lambda j: Fraction((-1) ** (j // 2), _fact(j)) if j % 2 else Fraction(0),
    "cos": lambda j: Fraction((-1) ** (j // 2), _fact(j)) if j % 2 == 0 else Fraction(0),
    "sqrt": lambda j: _sqrt_coeff(j),
    "recip": lambda j: Fraction((-1) ** j),
}


def _fact(j: int) -> int:
    out = 1
    for i in range(2, j + 1):
        out *= i
    return out


def _sqrt_coeff(j: int) -> Fraction:
    # binomial(1/2, j)
    num, den = Fraction(1), 1
    for i in range(j):
        num *= Fraction(1, 2) - i
        den *= i + 1
    return num / den


def expand_analytic(kind: str, arg: EpsSeries, field: CoeffField) -> EpsSeries:
    """Composition with sin/cos (argument vanishing at eps^0) or with
    sqrt/recip around 1 (argument's eps^0 part exactly the constant 1)."""
    if kind in ("sin", "cos"):
        if arg.orders.get(0) is not None or arg.contains_kind("tau"):
            raise ExpansionPointError(
                f"{kind} argument must vanish at eps^0 with no phase baseline left"
            )
        u = arg
    elif kind in ("sqrt", "recip"):
        if arg.get(0) != DiffPolynomial.constant(field.one) or arg.contains_kind("tau"):
            raise ExpansionPointError(f"{kind} argument must equal 1 at eps^0")
        u = EpsSeries(arg.limit, {k: p for k, p in arg.orders.items() if k != 0})
    else:
        raise ValueError(f"unknown analytic primitive {kind!r}")
    coeff_fn = _ANALYTIC[kind]
    base = u.min_order()
    out = EpsSeries(arg.limit)
    a0 = coeff_fn(0)
    if a0:
        out = out + EpsSeries.constant(arg.limit, field.from_fraction(a0))
    if base is None:
        return out
    power = u
    j = 1
    while power.orders and j * base <= arg.limit:
        aj = coeff_fn(j)
        if aj:
            out = out + power.scale_all(field.from_fraction(aj))
        power = power * u
        j += 1
    return out


# --- the lattice in series form -------------------------------------------------


def lattice_residual_series(
    params: ModelParams, field: CoeffField, limit: int
) -> Tuple[EpsSeries, EpsSeries]:
    """Residuals (left minus right side) of the amplitude and phase
    equations on the expanded ansatz, per eps-order."""
    sigma = field.from_int(params.sigma)
    zeta = field.h
    inv_h2 = (field.h * field.h).inv()
    one = field.one

    phi = EpsSeries(limit, {0: DiffPolynomial.leaf(_TAU, 0, -sigma)})
    nu = EpsSeries(limit, {0: DiffPolynomial.constant(one)})
    for j in range(1, limit // 2 + 2):
        if 2 * j - 1 <= limit:
            phi = phi + EpsSeries(
                limit, {2 * j - 1: DiffPolynomial.leaf(FieldSymbol("phi", j), 0, one)}
            )
        if 2 * j <= limit:
            nu = nu + EpsSeries(
                limit, {2 * j: DiffPolynomial.leaf(FieldSymbol("nu", j), 0, one)}
            )

    # d/dt through the slow variables: -c eps d_x + sum_m eps^(2m-1) d_(t_m)
    dphi_dt = EpsSeries(limit, {0: DiffPolynomial.constant(-sigma)})
    dnu_dt = EpsSeries(limit)
    for j in range(1, limit // 2 + 2):
        if 2 * j <= limit:
            dphi_dt = dphi_dt + EpsSeries(
                limit, {2 * j: DiffPolynomial.leaf(FieldSymbol("phi", j), 1, -field.c)}
            )
        if 2 * j + 1 <= limit:
            dnu_dt = dnu_dt + EpsSeries(
                limit, {2 * j + 1: DiffPolynomial.leaf(FieldSymbol("nu", j), 1, -field.c)}
            )
        for m in range(2, limit):
            kp = 2 * j - 1 + 2 * m - 1
            kn = 2 * j + 2 * m - 1
            if kp <= limit:
                dphi_dt = dphi_dt + EpsSeries(
                    limit,
                    {kp: DiffPolynomial.leaf(FieldSymbol("phi", j, (m,)), 0, one)},
                )
            if kn <= limit:
                dnu_dt = dnu_dt + EpsSeries(
                    limit,
                    {kn: DiffPolynomial.leaf(FieldSymbol("nu", j, (m,)), 0, one)},
                )

    nu_up = expand_shifts(nu, +1, zeta)
    nu_dn = expand_shifts(nu, -1, zeta)
    arg_up = expand_shifts(phi, +1, zeta) - phi
    arg_dn = expand_shifts(phi, -1, zeta) - phi

    sin_sum = (
        expand_analytic("sqrt", nu * nu_up, field) * expand_analytic("sin", arg_up, field)
        + expand_analytic("sqrt", nu * nu_dn, field)
        * expand_analytic("sin", arg_dn, field)
    )
    rhs_nu = (nu.scale_all(sigma * params.s) - EpsSeries.constant(limit, inv_h2)) * sin_sum

    recip_nu = expand_analytic("recip", nu, field)
    cos_sum = (
        expand_analytic("sqrt", nu_up * recip_nu, field)
        * expand_analytic("cos", arg_up, field)
        + expand_analytic("sqrt", nu_dn * recip_nu, field)
        * expand_analytic("cos", arg_dn, field)
    )
    rhs_phi = (
        EpsSeries.constant(limit, -inv_h2)
        + nu.scale_all(sigma * (params.s - 1))
        + (
            EpsSeries.constant(limit, inv_h2) - nu.scale_all(sigma * params.s)
        ).scale_all(Fraction(1, 2))
        * cos_sum
    )

    return dnu_dt - rhs_nu, dphi_dt - rhs_phi


# --- report types ---------------------------------------------------------------


@dataclass
class DispersionData:
    c_squared: CoeffElement
    zeta: str
    sigma: int
    general_text: str
    rejected: Dict[int, str]


@dataclass
class Forcing:
    target: str
    time: int
    space: str
    coefficients: Dict[str, CoeffElement]
    poly: DiffPolynomial


@dataclass
class ReductionReport:
    s: int
    order: int
    variant: Optional[str]
    dispersion: DispersionData
    nu_solutions: Dict[int, DiffPolynomial]
    alphas: Dict[int, CoeffElement]
    betas: Dict[int, CoeffElement]
    flows: Dict[str, DiffPolynomial]
    rules: EvolutionRules
    kdv_rules: Optional[EvolutionRules]
    forcings: Dict[str, Forcing]
    stage_log: List[str]
    field: CoeffField

    def amplitude(self, i: int) -> DiffPolynomial:
        """The i-th amplitude correction with every slow-time tag resolved
        through the evolution rules, leaving a plain jet polynomial."""
        return substitute_slow_times(self.nu_solutions[i], self.rules, strict=True)


# --- the reduction driver --------------------------------------------------------


class _Run:
    def __init__(self, params: ModelParams, order: int):
        self.params = params
        self.order = order
        self.field = params.field()
        self.sigma = params.sigma
        self.r_nu, self.r_phi = lattice_residual_series(params, self.field, order)
        self.rules = EvolutionRules(one=self.field.one)
        self.nu_solutions: Dict[int, DiffPolynomial] = {}
        self.alphas: Dict[int, CoeffElement] = {}
        self.betas: Dict[int, CoeffElement] = {}
        self.flows: Dict[str, DiffPolynomial] = {}
        self.forcings: Dict[str, Forcing] = {}
        self.kdv_rules: Optional[EvolutionRules] = None
        self.variant: Optional[str] = None
        self.hier: Optional[FlowHierarchy] = None
        self.log: List[str] = []

    # substitution of everything known so far
    def resolved(self, poly: DiffPolynomial) -> DiffPolynomial:
        for i in sorted(self.nu_solutions):
            poly = substitute_field(
                poly, "nu", i, self.nu_solutions[i], self.rules, strict=False
            )
        return substitute_slow_times(poly, self.rules, strict=False)

    def check_parity(self) -> None:
        if not self.r_phi.get(0).is_zero():
            raise InconsistentSystemError(
                "eps^0: the constant solution does not balance the phase equation"
            )
        for k in range(0, self.order + 1):
            bad = self.r_nu.get(k) if k % 2 == 0 else self.r_phi.get(k)
            if not bad.is_zero():
                raise InconsistentSystemError(
                    f"eps^{k}: parity-forbidden residual {bad.text()}"
                )

    def solve_amplitude(self, k: int) -> None:
        i = k // 2
        poly = self.resolved(self.r_phi.get(k))
        target = FieldSymbol("nu", i)
        lam, rest = _split_bare(poly, target, 0, f"eps^{k}")
        value = rest.scale(-(lam.inv()))
        if value.contains_kind("nu"):
            raise InconsistentSystemError(
                f"eps^{k}: amplitude correction {i} still references amplitudes"
            )
        self.nu_solutions[i] = value
        self.log.append(f"eps^{k}: nu^({i}) eliminated ({len(value)} terms)")

    def phase_residual(self, k: int) -> Tuple[Dict[FieldSymbol, CoeffElement], DiffPolynomial]:
        """Unknown-evolution coefficients and the known remainder at eps^k."""
        poly = self.resolved(self.r_nu.get(k))
        lams: Dict[FieldSymbol, CoeffElement] = {}
        known = poly
        for sym in poly.tagged_unknowns():
            lam, known = _split_bare(known, sym, 1, f"eps^{k}")
            lams[sym] = lam
        if known.tagged_unknowns():
            raise InconsistentSystemError(f"eps^{k}: nested unknown evolutions remain")
        if known.contains_kind("nu"):
            raise InconsistentSystemError(f"eps^{k}: unsolved amplitudes remain")
        top = (k - 3) // 2
        if known.max_field_index("phi") > top:
            raise SecularResidueError(
                f"eps^{k}: wave terms beyond phi^({top}) failed to cancel"
            )
        return lams, known

    def shared_lambda(self, lams: Dict[FieldSymbol, CoeffElement], k: int) -> CoeffElement:
        values = list(lams.values())
        if not values or any(v != values[0] for v in values[1:]):
            raise InconsistentSystemError(
                f"eps^{k}: unknown evolutions enter with unequal coefficients"
            )
        return values[0]

    # --- odd-order stages ----------------------------------------------------

    def stage_dispersion(self) -> None:
        poly = self.resolved(self.r_nu.get(3))
        if not poly.is_zero():
            raise InconsistentSystemError(
                f"eps^3: dispersion identity violated: {poly.text()}"
            )
        self.log.append("eps^3: dispersion identity holds on the characteristic frame")

    def stage_t2(self) -> None:
        lams, known = self.phase_residual(5)
        expect = {FieldSymbol("phi", 1, (2,))}
        if set(lams) != expect:
            raise InconsistentSystemError("eps^5: expected exactly the first t2 evolution")
        lam = self.shared_lambda(lams, 5)
        flow2 = known.integrate_x().scale(-(lam.inv()))
        alpha1 = flow2.terms.get(mono(("phi", 1, 3)), self.field.zero)
        alpha2 = flow2.terms.get(mono(("phi", 1, 1), ("phi", 1, 1)), self.field.zero)
        if len(flow2) != 2 or alpha1.is_zero():
            raise SecularResidueError(f"eps^5: unexpected t2 flow {flow2.text()}")
        self.alphas[1], self.alphas[2] = alpha1, alpha2
        self.betas[2] = alpha1
        self.hier = FlowHierarchy(alpha1, alpha2)
        self.flows["K2"] = flow2
        self.rules.set("phi", 1, 2, flow2)
        self.log.append(
            f"eps^5: t2 flow; alpha1 = {alpha1.text()}, alpha2 = {alpha2.text()}"
        )

    def stage_t3(self) -> None:
        lams, known = self.phase_residual(7)
        expect = {FieldSymbol("phi", 1, (3,)), FieldSymbol("phi", 2, (2,))}
        if set(lams) != expect:
            raise InconsistentSystemError("eps^7: unexpected unknown set")
        lam = self.shared_lambda(lams, 7)
        combined = known.integrate_x().scale(-(lam.inv()))
        second = combined.part_of_degree("phi", 2, 1)
        first = combined.part_of_degree("phi", 2, 0)
        if combined != second + first:
            raise SecularResidueError("eps^7: terms of higher degree in phi^(2) remain")
        linear2 = self.hier.linearized_flow(2, self.alphas[1]).apply(
            DiffPolynomial.leaf(FieldSymbol("phi", 2), 0, self.field.one)
        )
        if second != linear2:
            raise SecularResidueError(
                "eps^7: the phi^(2) sector is not the linearized t2 flow"
            )
        beta3 = first.terms.get(mono(("phi", 1, 5)), self.field.zero)
        flow3 = self.hier.flow(3, beta3)
        forcing = first - flow3
        coeffs = _express(T2_SECOND, forcing, "eps^7")
        self.betas[3] = beta3
        self.alphas[3] = first.terms.get(mono(("phi", 1, 2), ("phi", 1, 2)), self.field.zero)
        self.alphas[4] = first.terms.get(
            mono(("phi", 1, 1), ("phi", 1, 1), ("phi", 1, 1)), self.field.zero
        )
        self.alphas[5] = first.terms.get(mono(("phi", 1, 1), ("phi", 1, 3)), self.field.zero)
        # the fifth-derivative coefficient is itself the flow normalization:
        # no other choice of beta3 cancels the secular monomial
        self.alphas[6] = beta3
        self.flows["K3"] = flow3
        self.rules.set("phi", 1, 3, flow3)
        self.rules.set("phi", 2, 2, linear2 + forcing)
        self.forcings["f_t2"] = Forcing("phi2", 2, "P_6^(1) potential", coeffs, forcing)
        self.log.append(
            f"eps^7: t3 flow and first forcing; beta3 = {beta3.text()}, "
            + ", ".join(f"{n} = {v.text()}" for n, v in sorted(coeffs.items()))
        )

    def prepare_t3_correction(self) -> None:
        """The t3 rule for phi^(2): linearized third flow plus the correction
        whose coefficients are forced by the t2/t3 cross-derivative identity."""
        from .compatibility import solve_t3_correction

        b_values = solve_t3_correction(
            self.alphas[1],
            self.alphas[2],
            self.betas[3],
            self.forcings["f_t2"].coefficients,
        )
        forcing = DiffPolynomial(
            {m: b_values[name] for name, m in T3_SECOND.pairs if not b_values[name].is_zero()}
        )
        linear3 = self.hier.linearized_flow(3, self.betas[3]).apply(
            DiffPolynomial.leaf(FieldSymbol("phi", 2), 0, self.field.one)
        )
        self.rules.set("phi", 2, 3, linear3 + forcing)
        self.forcings["f_t3"] = Forcing("phi2", 3, "P_8^(1) potential", b_values, forcing)
        self.log.append(
            "eps^9 prep: t3 correction for phi^(2) fixed by cross-derivative identity"
        )

    def stage_t4(self) -> None:
        lams, known = self.phase_residual(9)
        expect = {FieldSymbol("phi", 1, (4,)), FieldSymbol("phi", 3, (2,))}
        if set(lams) != expect:
            raise InconsistentSystemError("eps^9: unexpected unknown set")
        lam = self.shared_lambda(lams, 9)
        try:
            combined = known.integrate_x().scale(-(lam.inv()))
        except NonLocalError:
            self.stage_t4_kdv(known.scale(-(lam.inv())))
            return
        self.variant = "potential"
        beta4 = combined.terms.get(mono(("phi", 1, 7)), self.field.zero)
        flow4 = self.hier.flow(4, beta4)
        rest = combined - flow4
        third = rest.part_of_degree("phi", 3, 1)
        other = rest.part_of_degree("phi", 3, 0)
        if rest != third + other:
            raise SecularResidueError("eps^9: terms of higher degree in phi^(3) remain")
        linear2 = self.hier.linearized_flow(2, self.alphas[1]).apply(
            DiffPolynomial.leaf(FieldSymbol("phi", 3), 0, self.field.one)
        )
        if third != linear2:
            raise SecularResidueError(
                "eps^9: the phi^(3) sector is not the linearized t2 flow"
            )
        coeffs = _express(T2_THIRD, other, "eps^9")
        self.betas[4] = beta4
        self.flows["K4"] = flow4
        self.rules.set("phi", 1, 4, flow4)
        self.rules.set("phi", 3, 2, linear2 + other)
        self.forcings["h_t2"] = Forcing("phi3", 2, "P_8^(2) potential", coeffs, other)
        self.log.append(
            f"eps^9: potential split; beta4 = {beta4.text()}, "
            f"{sum(1 for v in coeffs.values() if v)} forcing coefficients"
        )

    def stage_t4_kdv(self, derivative_sum: DiffPolynomial) -> None:
        """Ninth-order split on the differentiated equation: the combined
        unknown enters as d_x of the evolutions, so rename to the derivative
        fields and match the companion hierarchy there."""
        self.variant = "kdv"
        renamed = derivative_sum.rename_to_kdv()
        beta4 = renamed.terms.get(mono(("vphi", 1, 7)), self.field.zero)
        flow4 = self.hier.kdv_flow(4, beta4)
        rest = renamed - flow4
        third = rest.part_of_degree("vphi", 3, 1)
        other = rest.part_of_degree("vphi", 3, 0)
        if rest != third + other:
            raise SecularResidueError("eps^9: terms of higher degree in vphi^(3) remain")
        linear2 = self.hier.linearized_kdv_flow(2, self.alphas[1]).apply(
            DiffPolynomial.leaf(FieldSymbol("vphi", 3), 0, self.field.one)
        )
        if third != linear2:
            raise SecularResidueError(
                "eps^9: the vphi^(3) sector is not the linearized t2 flow"
            )
        coeffs = _express(T2_THIRD_KDV, other, "eps^9")
        self.betas[4] = beta4
        self.flows["K4"] = self.hier.flow(4, beta4)
        self.forcings["g_t2"] = Forcing("vphi3", 2, "P_9^(2) kdv", coeffs, other)
        self.kdv_rules = self._build_kdv_rules(linear2 + other)
        self.log.append(
            f"eps^9: derivative-field split; beta4 = {beta4.text()}, "
            f"{sum(1 for v in coeffs.values() if v)} forcing coefficients"
        )

    def _build_kdv_rules(self, third_rule: DiffPolynomial) -> EvolutionRules:
        rules = EvolutionRules(one=self.field.one)
        hier = self.hier
        for j, norm in ((2, self.alphas[1]), (3, self.betas[3]), (4, self.betas[4])):
            flow = hier.kdv_flow(j, norm)
            self.flows[f"H{j}"] = flow
            rules.set("vphi", 1, j, flow)
        for m in (2, 3):
            rule = self.rules.get(FieldSymbol("phi", 2), m)
            rules.set("vphi", 2, m, rule.d_x().rename_to_kdv())
        rules.set("vphi", 3, 2, third_rule)
        return rules


def _split_bare(
    poly: DiffPolynomial, sym: FieldSymbol, ell: int, stage: str
) -> Tuple[CoeffElement, DiffPolynomial]:
    """Separate lambda * d^ell(sym) from the rest; the symbol must occur in
    no other shape."""
    wanted = ((sym, ell),)
    rest: Dict = {}
    lam = None
    for m, coeff in poly.terms.items():
        if any(s == sym for s, _ in m):
            if m != wanted:
                raise InconsistentSystemError(
                    f"{stage}: {sym.name()} occurs in {monomial_text(m)}, "
                    "not as a clean linear term"
                )
            lam = coeff
        else:
            rest[m] = coeff
    if lam is None or lam.is_zero():
        raise InconsistentSystemError(f"{stage}: no linear term in {sym.name()}")
    return lam, DiffPolynomial(rest)


def _express(basis: LabeledBasis, poly: DiffPolynomial, stage: str) -> Dict[str, CoeffElement]:
    try:
        return basis.express(poly)
    except GradingError as exc:
        raise SecularResidueError(f"{stage}: forcing outside its graded space: {exc}")


# --- dispersion -----------------------------------------------------------------


def derive_dispersion(s: int) -> DispersionData:
    """Run the two lowest orders for both signs of sigma: the amplitude lock
    at eps^2 gives nu^(1) = g d_x phi^(1) with g proportional to c, and the
    eps^3 balance -c g d2phi = rho d2phi then dictates c^2 without touching
    the baked-in square.  Only sigma = +1 keeps c^2 positive on 0 < h < 1."""
    rejected: Dict[int, str] = {}
    accepted: Optional[Tuple[int, CoeffField]] = None
    for sigma in (1, -1):
        params = ModelParams(s=s, sigma=sigma)
        field = params.field()
        r_nu, r_phi = lattice_residual_series(params, field, 3)
        lam, rest = _split_bare(r_phi.get(2), FieldSymbol("nu", 1), 0, "eps^2")
        nu1 = rest.scale(-(lam.inv()))
        gain = nu1.terms.get(mono(("phi", 1, 1)), field.zero)
        if len(nu1) != 1 or not gain.even.is_zero() or gain.odd.is_zero():
            raise InconsistentSystemError(
                "eps^2: amplitude lock is not proportional to c d_x phi"
            )
        rho = (-r_nu.get(3)).terms.get(mono(("phi", 1, 2)), field.zero)
        if not rho.odd.is_zero():
            raise InconsistentSystemError("eps^3: dispersion balance acquired an odd part")
        required = (-rho.even) / gain.odd
        sign = sign_on_open_unit_interval(required.num) * sign_on_open_unit_interval(
            required.den
        )
        if sign > 0:
            if not field.c_squared.odd.is_zero() or required != field.c_squared.even:
                raise InconsistentSystemError(
                    "eps^3: derived dispersion disagrees with the coefficient field"
                )
            accepted = (sigma, field)
        else:
            rejected[sigma] = (
                f"required c^2 = {required.text()} is not positive on 0 < h < 1; "
                "no real characteristic speed"
            )
    if accepted is None or accepted[0] != 1:
        raise DomainError("no sign of the nonlinearity admits a real characteristic speed")
    sigma, field = accepted
    c2 = field.c_squared
    ratio = c2 / (field.h * field.h)
    return DispersionData(
        c_squared=c2,
        zeta="h",
        sigma=sigma,
        general_text=f"c^2 = zeta^2 * ({ratio.even.text()}) with zeta = h",
        rejected=rejected,
    )


# --- public entry ----------------------------------------------------------------


def run_reduction(params: ModelParams, order: int = 9) -> ReductionReport:
    """Resolve the expansion through eps^order and report every extracted
    object.  Orders beyond nine are accepted but carry no verified outputs."""
    if order < 3:
        raise ValueError("the reduction needs at least the dispersion order")
    dispersion = derive_dispersion(params.s)
    if params.sigma != dispersion.sigma:
        raise DomainError(
            "the expansion around the constant solution requires sigma = +1: "
            + dispersion.rejected.get(params.sigma, "rejected")
        )
    run = _Run(params, order)
    run.check_parity()
    stages: Dict[int, Callable[[], None]] = {
        3: run.stage_dispersion,
        5: run.stage_t2,
        7: run.stage_t3,
        9: run.stage_t4,
    }
    run.log.append(f"eps^3: {dispersion.general_text} (sigma = +1 selected)")
    for k in range(2, order + 1):
        if k % 2 == 0:
            run.solve_amplitude(k)
            if k == 8:
                run.prepare_t3_correction()
        else:
            stage = stages.get(k)
            if stage is None:
                raise ValueError(f"no solver stage for eps^{k}")
            stage()
    return ReductionReport(
        s=params.s,
        order=order,
        variant=run.variant,
        dispersion=dispersion,
        nu_solutions=run.nu_solutions,
        alphas=run.alphas,
        betas=run.betas,
        flows=run.flows,
        rules=run.rules,
        kdv_rules=run.kdv_rules,
        forcings=run.forcings,
        stage_log=run.log,
        field=run.field,
    )

"""Differential polynomials in the multiscale correction fields.

A monomial is a multiset of factors d^ell X where X is a field symbol:
phi{j} (potential corrections), vphi{j} (their x-derivative fields), nu{j}
(amplitude corrections), psi/rho (linearization directions) or tau (the fast
phase marker).  Symbols may carry pending slow-time derivative tags; a tag
multiset (2, 3) on phi1 means d_{t_2} d_{t_3} phi1 awaiting an evolution
rule.

Coefficients are duck-typed: anything with ring operations, truthiness for
zero-testing and a text() method works (CoeffElement for the reduction,
sparse polynomials in forcing symbols for the compatibility analysis).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

from .errors import GradingError, MissingEvolutionError, NonLocalError

_GRADABLE = {"phi", "vphi"}


@dataclass(frozen=True, order=True)
class FieldSymbol:
    """One correction field, optionally carrying pending slow-time tags."""

    kind: str
    index: int = 1
    times: Tuple[int, ...] = ()

    def tagged(self, m: int) -> "FieldSymbol":
        return FieldSymbol(self.kind, self.index, tuple(sorted(self.times + (m,))))

    def base(self) -> "FieldSymbol":
        return FieldSymbol(self.kind, self.index)

    def name(self) -> str:
        tag = "" if not self.times else "_t" + "".join(str(m) for m in self.times)
        return f"{self.kind}{self.index}{tag}"


Factor = Tuple[FieldSymbol, int]  # (symbol, number of x-derivatives)
Monomial = Tuple[Factor, ...]


def mono(*factors: Tuple[str, int, int]) -> Monomial:
    """Monomial from (kind, index, ell) triples, e.g. mono(('phi',1,2))."""
    return _sort_mono(tuple((FieldSymbol(k, j), ell) for (k, j, ell) in factors))


def _sort_mono(factors: Iterable[Factor]) -> Monomial:
    return tuple(sorted(factors))


def factor_weight(sym: FieldSymbol, ell: int, grading: str) -> int:
    """Grading weight of d^ell X; GradingError when X is outside the graded
    algebra for that variant."""
    if sym.times:
        raise GradingError(f"tagged symbol {sym.name()} is not gradable")
    if grading == "potential":
        if sym.kind != "phi" or ell < 1:
            raise GradingError(f"D[{ell}]{{{sym.name()}}} is not a potential-grading factor")
        return ell + 2 * sym.index - 1
    if grading == "kdv":
        if sym.kind != "vphi" or ell < 0:
            raise GradingError(f"D[{ell}]{{{sym.name()}}} is not a kdv-grading factor")
        return ell + 2 * sym.index
    raise ValueError(f"unknown grading {grading!r}")


def monomial_weight(m: Monomial, grading: str) -> int:
    return sum(factor_weight(sym, ell, grading) for sym, ell in m)


def factor_text(sym: FieldSymbol, ell: int) -> str:
    return sym.name() if ell == 0 else f"D[{ell}]{{{sym.name()}}}"


def monomial_text(m: Monomial) -> str:
    if not m:
        return "1"
    return "*".join(factor_text(sym, ell) for sym, ell in m)


def _accum(acc: Dict[Monomial, object], m: Monomial, coeff) -> None:
    cur = acc.get(m)
    if cur is None:
        if coeff:
            acc[m] = coeff
    else:
        new = cur + coeff
        if new:
            acc[m] = new
        else:
            del acc[m]


class DiffPolynomial:
    """Finite sum of scalar coefficients times differential monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Monomial, object]] = None):
        self.terms = terms if terms is not None else {}

    @classmethod
    def zero(cls) -> "DiffPolynomial":
        return cls({})

    @classmethod
    def constant(cls, coeff) -> "DiffPolynomial":
        return cls({(): coeff}) if coeff else cls({})

    @classmethod
    def leaf(cls, sym: FieldSymbol, ell: int, coeff) -> "DiffPolynomial":
        return cls({((sym, ell),): coeff}) if coeff else cls({})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, DiffPolynomial) and self.terms == other.terms

    def __len__(self) -> int:
        return len(self.terms)

    def iter_sorted(self) -> Iterator[Tuple[Monomial, object]]:
        for m in sorted(self.terms):
            yield m, self.terms[m]

    # --- ring structure ---------------------------------------------------

    def __add__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        acc = dict(self.terms)
        for m, coeff in other.terms.items():
            _accum(acc, m, coeff)
        return DiffPolynomial(acc)

    def __sub__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        acc = dict(self.terms)
        for m, coeff in other.terms.items():
            _accum(acc, m, -coeff)
        return DiffPolynomial(acc)

    def __neg__(self) -> "DiffPolynomial":
        return DiffPolynomial({m: -coeff for m, coeff in self.terms.items()})

    def __mul__(self, other: "DiffPolynomial") -> "DiffPolynomial":
        acc: Dict[Monomial, object] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                _accum(acc, _sort_mono(m1 + m2), c1 * c2)
        return DiffPolynomial(acc)

    def scale(self, scalar) -> "DiffPolynomial":
        if not scalar:
            return DiffPolynomial.zero()
        acc = {}
        for m, coeff in self.terms.items():
            new = coeff * scalar
            if new:
                acc[m] = new
        return DiffPolynomial(acc)

    def mul_monomial(self, extra: Monomial) -> "DiffPolynomial":
        return DiffPolynomial({_sort_mono(m + extra): c for m, c in self.terms.items()})

    def map_coeffs(self, fn: Callable) -> "DiffPolynomial":
        acc = {}
        for m, coeff in self.terms.items():
            new = fn(coeff)
            if new:
                acc[m] = new
        return DiffPolynomial(acc)

    # --- calculus ----------------------------------------------------------

    def d_x(self, k: int = 1) -> "DiffPolynomial":
        out = self
        for _ in range(k):
            acc: Dict[Monomial, object] = {}
            for m, coeff in out.terms.items():
                for i, (sym, ell) in enumerate(m):
                    bumped = _sort_mono(m[:i] + ((sym, ell + 1),) + m[i + 1:])
                    _accum(acc, bumped, coeff)
            out = DiffPolynomial(acc)
        return out

    def integrate_x(self) -> "DiffPolynomial":
        """Exact antiderivative within the differential algebra.

        Greedy peel of the leading monomial: the top term of any total
        x-derivative has a unique factor of maximal (ell, symbol), obtained
        by bumping that factor in the antiderivative's top term.  When the
        leading monomial violates this (repeated maximum, or no derivative
        at all) the polynomial is not a total derivative: NonLocalError.
        """
        remaining = dict(self.terms)
        anti: Dict[Monomial, object] = {}
        while remaining:
            m = max(remaining, key=_peel_key)
            coeff = remaining[m]
            if not m:
                raise NonLocalError("constant terms have no antiderivative in the algebra")
            top_i = max(range(len(m)), key=lambda i: (m[i][1], m[i][0]))
            sym, ell = m[top_i]
            if ell == 0:
                raise NonLocalError(f"{monomial_text(m)} is not a total x-derivative")
            if sum(1 for f in m if f == (sym, ell)) > 1:
                raise NonLocalError(
                    f"leading monomial {monomial_text(m)} has a repeated top factor"
                )
            guess = _sort_mono(m[:top_i] + ((sym, ell - 1),) + m[top_i + 1:])
            mult = sum(1 for f in guess if f == (sym, ell - 1))
            piece = coeff * Fraction(1, mult)
            _accum(anti, guess, piece)
            for i, (gs, gell) in enumerate(guess):
                bumped = _sort_mono(guess[:i] + ((gs, gell + 1),) + guess[i + 1:])
                _accum(remaining, bumped, -piece)
        result = DiffPolynomial(anti)
        if result.d_x() != self:
            raise NonLocalError("antiderivative reconstruction failed")
        return result

    def frechet(self, kind: str, index: int, times: Tuple[int, ...] = ()) -> "LinearDiffOperator":
        """Linearization with respect to the given field: the operator
        sum_k (dP / d(d^k X)) d_x^k acting on a direction."""
        target = FieldSymbol(kind, index, times)
        buckets: Dict[int, Dict[Monomial, object]] = {}
        for m, coeff in self.terms.items():
            seen = set()
            for i, (sym, ell) in enumerate(m):
                if sym != target or ell in seen:
                    continue
                seen.add(ell)
                mult = sum(1 for f in m if f == (sym, ell))
                rest = list(m)
                rest.remove((sym, ell))
                _accum(
                    buckets.setdefault(ell, {}),
                    _sort_mono(tuple(rest)),
                    coeff * Fraction(mult),
                )
        return LinearDiffOperator(
            {k: DiffPolynomial(acc) for k, acc in buckets.items() if acc}
        )

    def rename_to_kdv(self) -> "DiffPolynomial":
        """Rewrite d^ell phi{j} as d^(ell-1) vphi{j}; every phi factor must
        carry at least one x-derivative."""
        acc: Dict[Monomial, object] = {}
        for m, coeff in self.terms.items():
            out = []
            for sym, ell in m:
                if sym.kind == "phi":
                    if ell < 1:
                        raise GradingError(f"cannot rename underived factor {sym.name()}")
                    out.append((FieldSymbol("vphi", sym.index, sym.times), ell - 1))
                else:
                    out.append((sym, ell))
            _accum(acc, _sort_mono(tuple(out)), coeff)
        return DiffPolynomial(acc)

    # --- inspection ---------------------------------------------------------

    def contains_kind(self, kind: str) -> bool:
        return any(sym.kind == kind for m in self.terms for sym, _ in m)

    def tagged_unknowns(self) -> List[FieldSymbol]:
        """Distinct tagged base symbols still awaiting evolution rules."""
        found = {sym for m in self.terms for sym, _ in m if sym.times}
        return sorted(found)

    def max_field_index(self, kind: str) -> int:
        return max(
            (sym.index for m in self.terms for sym, _ in m if sym.kind == kind),
            default=0,
        )

    def degree_in(self, kind: str, index: int) -> int:
        """Largest multiplicity of the field (any derivative order) in a term."""
        best = 0
        for m in self.terms:
            best = max(best, sum(1 for sym, _ in m if sym.kind == kind and sym.index == index))
        return best

    def part_of_degree(self, kind: str, index: int, degree: int) -> "DiffPolynomial":
        acc = {}
        for m, coeff in self.terms.items():
            if sum(1 for sym, _ in m if sym.kind == kind and sym.index == index) == degree:
                acc[m] = coeff
        return DiffPolynomial(acc)

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(
            f"({coeff.text() if hasattr(coeff, 'text') else coeff})*{monomial_text(m)}"
            for m, coeff in self.iter_sorted()
        )

    def __repr__(self) -> str:
        return f"<DiffPolynomial {self.text()}>"


def _peel_key(m: Monomial) -> Tuple:
    return tuple(sorted(((ell, sym) for sym, ell in m), reverse=True))


@dataclass
class LinearDiffOperator:
    """sum_k coeffs[k] * d_x^k, with differential-polynomial coefficients."""

    coeffs: Dict[int, DiffPolynomial]

    def apply(self, target: DiffPolynomial) -> DiffPolynomial:
        out = DiffPolynomial.zero()
        for k, poly in sorted(self.coeffs.items()):
            out = out + poly * target.d_x(k)
        return out

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.coeffs.values())


# --- slow-time structure -----------------------------------------------------


@dataclass
class EvolutionRules:
    """Substitution table d_{t_m} X = rule(X, m), plus the scalar unit used
    to build fresh leaves."""

    one: object
    table: Dict[Tuple[str, int, int], DiffPolynomial] = dc_field(default_factory=dict)

    def get(self, sym: FieldSymbol, m: int) -> Optional[DiffPolynomial]:
        return self.table.get((sym.kind, sym.index, m))

    def set(self, kind: str, index: int, m: int, value: DiffPolynomial) -> None:
        self.table[(kind, index, m)] = value

    def leaf(self, sym: FieldSymbol, ell: int = 0) -> DiffPolynomial:
        return DiffPolynomial.leaf(sym, ell, self.one)


def time_derivative(
    poly: DiffPolynomial, m: int, rules: EvolutionRules, strict: bool = True
) -> DiffPolynomial:
    """d_{t_m} of a differential polynomial via the chain rule.

    Fields without a rule become tagged leaves (strict=False) or raise
    MissingEvolutionError (strict=True).  The fast-phase marker tau and
    direction fields are slow-time constants.
    """
    out = DiffPolynomial.zero()
    for mon, coeff in poly.terms.items():
        for i, (sym, ell) in enumerate(mon):
            if sym.kind in ("tau", "psi", "rho"):
                continue
            rest = mon[:i] + mon[i + 1:]
            derived = _derive_leaf(sym, ell, m, rules, strict)
            if derived is None:
                tagged = ((sym.tagged(m), ell),)
                out = out + DiffPolynomial({_sort_mono(rest + tagged): coeff})
            else:
                out = out + derived.mul_monomial(rest).scale(coeff)
    return out


def _derive_leaf(
    sym: FieldSymbol, ell: int, m: int, rules: EvolutionRules, strict: bool
) -> Optional[DiffPolynomial]:
    """d_{t_m} d_x^ell (d_{times} X) when a rule for (X, m) exists, else None."""
    rule = rules.get(sym, m)
    if rule is None:
        if strict:
            raise MissingEvolutionError(f"no rule for d_t{m} {sym.name()}")
        return None
    value = rule
    for pending in sorted(sym.times, reverse=True):
        value = time_derivative(value, pending, rules, strict)
    return value.d_x(ell)


def substitute_slow_times(
    poly: DiffPolynomial, rules: EvolutionRules, strict: bool = True
) -> DiffPolynomial:
    """Resolve every tagged leaf through the available evolution rules."""
    out = DiffPolynomial.zero()
    for mon, coeff in poly.terms.items():
        piece = DiffPolynomial.constant(rules.one).scale(coeff)
        for sym, ell in mon:
            piece = piece * _resolve_leaf(sym, ell, rules, strict)
            if piece.is_zero():
                break
        out = out + piece
    return out


def _resolve_leaf(
    sym: FieldSymbol, ell: int, rules: EvolutionRules, strict: bool
) -> DiffPolynomial:
    if not sym.times:
        return rules.leaf(sym, ell)
    pending = max(sym.times)
    remaining = list(sym.times)
    remaining.remove(pending)
    inner = FieldSymbol(sym.kind, sym.index, tuple(remaining))
    rule = rules.get(sym, pending)
    if rule is None:
        if strict:
            raise MissingEvolutionError(f"no rule for d_t{pending} {sym.base().name()}")
        return rules.leaf(sym, ell)
    value = rule
    for t in sorted(inner.times, reverse=True):
        value = time_derivative(value, t, rules, strict)
    return substitute_slow_times(value.d_x(ell), rules, strict)


def substitute_field(
    poly: DiffPolynomial,
    kind: str,
    index: int,
    value: DiffPolynomial,
    rules: Optional[EvolutionRules] = None,
    strict: bool = False,
) -> DiffPolynomial:
    """Replace every occurrence of the field (any derivative order, any
    pending tags) by the corresponding derivative of `value`.  Pending
    slow-time tags are pushed through `rules` when given, else re-tagged
    onto the substituted expression's fields."""
    out = DiffPolynomial.zero()
    for mon, coeff in poly.terms.items():
        pieces = [DiffPolynomial({(): coeff})]
        plain: List[Factor] = []
        for sym, ell in mon:
            if sym.kind == kind and sym.index == index:
                sub = value
                for t in sorted(sym.times, reverse=True):
                    if rules is None:
                        raise MissingEvolutionError(
                            f"substituting tagged {sym.name()} requires evolution rules"
                        )
                    sub = time_derivative(sub, t, rules, strict)
                pieces.append(sub.d_x(ell))
            else:
                plain.append((sym, ell))
        term = pieces[0]
        for p in pieces[1:]:
            term = term * p
        out = out + term.mul_monomial(tuple(plain))
    return out


# --- graded bases -------------------------------------------------------------


@dataclass(frozen=True)
class GradedSpaceBasis:
    """Ordered monomial basis of P_n^(r) for one grading variant."""

    weight: int
    grading: str
    max_index: int
    min_factors: int
    monomials: Tuple[Monomial, ...]

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def extract_coefficients(self, poly: DiffPolynomial) -> List[object]:
        """Coefficient list in basis order; GradingError on monomials
        outside the basis (secular or mis-graded content)."""
        lookup = {m: i for i, m in enumerate(self.monomials)}
        out: List[object] = [None] * len(self.monomials)
        for m, coeff in poly.terms.items():
            if m not in lookup:
                raise GradingError(f"monomial {monomial_text(m)} outside the graded basis")
            out[lookup[m]] = coeff
        return out


def enumerate_basis(
    weight: int, grading: str, max_index: int, min_factors: int = 2
) -> GradedSpaceBasis:
    """All monomials of the given graded weight with every field index <= r
    and at least `min_factors` factors, in canonical order."""
    factors: List[Tuple[Factor, int]] = []
    for j in range(1, max_index + 1):
        ell_min = 1 if grading == "potential" else 0
        for ell in range(ell_min, weight + 1):
            sym = FieldSymbol("phi" if grading == "potential" else "vphi", j)
            try:
                w = factor_weight(sym, ell, grading)
            except GradingError:
                continue
            if w <= weight:
                factors.append(((sym, ell), w))
    factors.sort()
    found: List[Monomial] = []

    def rec(start: int, remaining: int, chosen: List[Factor]) -> None:
        if remaining == 0:
            if len(chosen) >= min_factors:
                found.append(tuple(chosen))
            return
        for i in range(start, len(factors)):
            f, w = factors[i]
            if w <= remaining:
                chosen.append(f)
                rec(i, remaining - w, chosen)
                chosen.pop()

    rec(0, weight, [])
    return GradedSpaceBasis(weight, grading, max_index, min_factors, tuple(sorted(found)))

"""Sparse multivariate polynomials in named forcing coefficients.

The compatibility analysis treats forcing coefficients (a1..a3, c1..c11,
d1..d14, and solver unknowns) as independent transcendentals over the scalar
ring.  A KnownPoly is a sparse sum of CoeffElement coefficients times power
products of such names.  It plugs into DiffPolynomial as a coefficient type:
ring operations, truthiness, text().
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Set, Tuple, Union

from .errors import InconsistentSystemError
from .field import CoeffElement, CoeffField

PowKey = Tuple[Tuple[str, int], ...]  # sorted ((name, power), ...)
ScalarLike = Union[int, Fraction, CoeffElement]


def _mul_keys(a: PowKey, b: PowKey) -> PowKey:
    acc: Dict[str, int] = {}
    for name, p in a + b:
        acc[name] = acc.get(name, 0) + p
    return tuple(sorted(acc.items()))


class KnownPoly:
    __slots__ = ("field", "terms")

    def __init__(self, field: CoeffField, terms: Optional[Dict[PowKey, CoeffElement]] = None):
        self.field = field
        self.terms = terms if terms is not None else {}

    # --- constructors -------------------------------------------------------

    @classmethod
    def constant(cls, field: CoeffField, value: ScalarLike) -> "KnownPoly":
        elem = field.coerce(value)
        return cls(field, {(): elem} if elem else {})

    @classmethod
    def symbol(cls, field: CoeffField, name: str) -> "KnownPoly":
        return cls(field, {((name, 1),): field.one})

    def _lift(self, other) -> Optional["KnownPoly"]:
        if isinstance(other, KnownPoly):
            if other.field != self.field:
                raise ValueError("KnownPoly operands use different fields")
            return other
        if isinstance(other, (int, Fraction, CoeffElement)):
            return KnownPoly.constant(self.field, other)
        return None

    # --- predicates -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(k == () for k in self.terms)

    def constant_value(self) -> CoeffElement:
        if not self.terms:
            return self.field.zero
        if not self.is_constant():
            raise ValueError(f"{self.text()} is not constant")
        return self.terms[()]

    def symbols(self) -> Set[str]:
        return {name for key in self.terms for name, _ in key}

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, CoeffElement)):
            other = KnownPoly.constant(self.field, other)
        return (
            isinstance(other, KnownPoly)
            and self.field == other.field
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.field, tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))))

    # --- ring operations --------------------------------------------------------

    def __add__(self, other) -> "KnownPoly":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        acc = dict(self.terms)
        for key, coeff in o.terms.items():
            cur = acc.get(key)
            new = coeff if cur is None else cur + coeff
            if new:
                acc[key] = new
            elif cur is not None:
                del acc[key]
        return KnownPoly(self.field, acc)

    __radd__ = __add__

    def __neg__(self) -> "KnownPoly":
        return KnownPoly(self.field, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "KnownPoly":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "KnownPoly":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "KnownPoly":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        acc: Dict[PowKey, CoeffElement] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in o.terms.items():
                key = _mul_keys(k1, k2)
                prod = c1 * c2
                cur = acc.get(key)
                new = prod if cur is None else cur + prod
                if new:
                    acc[key] = new
                elif cur is not None:
                    del acc[key]
        return KnownPoly(self.field, acc)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "KnownPoly":
        """Division by an invertible constant (scalar or constant KnownPoly)."""
        if isinstance(other, KnownPoly):
            if not other.is_constant():
                raise InconsistentSystemError(
                    f"division by non-constant known polynomial {other.text()}"
                )
            other = other.constant_value()
        return self * self.field.coerce(other).inv()

    def total_degree(self) -> int:
        return max((sum(p for _, p in key) for key in self.terms), default=0)

    def degree_in(self, names: Union[str, Iterable[str]]) -> int:
        names = {names} if isinstance(names, str) else set(names)
        return max(
            (sum(p for n, p in key if n in names) for key in self.terms),
            default=0,
        )

    # --- substitution / evaluation ------------------------------------------------

    def substitute(self, mapping: Mapping[str, "KnownPoly"]) -> "KnownPoly":
        out = KnownPoly(self.field)
        for key, coeff in self.terms.items():
            term = KnownPoly.constant(self.field, coeff)
            for name, power in key:
                base = mapping.get(name)
                if base is None:
                    base = KnownPoly.symbol(self.field, name)
                for _ in range(power):
                    term = term * base
            out = out + term
        return out

    def evaluate(self, values: Mapping[str, CoeffElement]) -> CoeffElement:
        total = self.field.zero
        for key, coeff in self.terms.items():
            piece = coeff
            for name, power in key:
                if name not in values:
                    raise KeyError(f"no value supplied for symbol {name!r}")
                piece = piece * values[name] ** power
            total = total + piece
        return total

    def split_linear(self, names: Iterable[str]) -> Tuple[Dict[str, "KnownPoly"], "KnownPoly"]:
        """Decompose as sum_i coeff_i * name_i + rest, requiring degree <= 1
        in the given names; coefficients and rest are free of them."""
        names = set(names)
        linear: Dict[str, KnownPoly] = {}
        rest = KnownPoly(self.field)
        for key, coeff in self.terms.items():
            present = [(n, p) for n, p in key if n in names]
            if not present:
                rest = rest + KnownPoly(self.field, {key: coeff})
            elif len(present) == 1 and present[0][1] == 1:
                name = present[0][0]
                reduced = tuple((n, p) for n, p in key if n != name)
                linear[name] = linear.get(name, KnownPoly(self.field)) + KnownPoly(
                    self.field, {reduced: coeff}
                )
            else:
                raise InconsistentSystemError(
                    f"term {self._term_text(key, coeff)} is nonlinear in {sorted(names)}"
                )
        return linear, rest

    # --- display --------------------------------------------------------------------

    @staticmethod
    def _term_text(key: PowKey, coeff: CoeffElement) -> str:
        body = "*".join(n if p == 1 else f"{n}^{p}" for n, p in key)
        return f"({coeff.text()})" + (f"*{body}" if body else "")

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(self._term_text(k, self.terms[k]) for k in sorted(self.terms))

    def __repr__(self) -> str:
        return f"<KnownPoly {self.text()}>"

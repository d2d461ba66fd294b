"""Exact scalar arithmetic for the reduction.

Every coefficient produced by the multiscale machinery lives in the ring

    Q(h)[c] / (c^2 - r(h)),        r(h) = (sigma - s h^2) / h^2 * zeta^2,

i.e. it is even(h) + odd(h) * c with even, odd reduced rational functions of
the lattice spacing h, and c the formal wave speed whose square is the
rational function fixed by the dispersion relation.  With the default
conventions (sigma = +1, zeta = h) the modulus is c^2 = 1 - s h^2.

For s = 0 the ring has zero divisors (c^2 = 1 factors), so it is not a
field; inversion raises ZeroInverse exactly on the radical.  All arithmetic
is exact; numeric evaluation is a separate, explicit step.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt as _fsqrt
from typing import Optional, Tuple, Union

from . import _polyops as P
from .errors import DomainError, ZeroInverse

ScalarLike = Union[int, Fraction, "CoeffElement"]


@dataclass(frozen=True)
class ModelParams:
    """Parameters selecting one member of the combined lattice family.

    s=0 is the standard discretisation, s=1 the integrable one.  sigma is
    the nonlinearity sign, c_sign the branch of the wave speed used when
    numbers are produced, h_value an optional exact specialisation of the
    lattice spacing.
    """

    s: int
    sigma: int = 1
    c_sign: int = 1
    h_value: Optional[Fraction] = None

    def __post_init__(self):
        if self.s not in (0, 1):
            raise ValueError(f"s must be 0 or 1, got {self.s!r}")
        if self.sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma!r}")
        if self.c_sign not in (1, -1):
            raise ValueError(f"c_sign must be +1 or -1, got {self.c_sign!r}")
        if self.h_value is not None:
            h = self.h_value
            if not isinstance(h, Fraction):
                raise ValueError("h_value must be an exact Fraction")
            if not (0 < h < 1):
                raise DomainError(f"h must lie in (0, 1), got {h}")

    def field(self) -> "CoeffField":
        return CoeffField(self.s, h_value=self.h_value)


class RatFunc:
    """Reduced rational function of h over Z: num/den in lowest terms with a
    positive-leading-coefficient denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: P.Poly, den: P.Poly = P.ONE, *, _reduced: bool = False):
        if not den:
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            if not num:
                den = P.ONE
            else:
                g = P.pgcd(num, den)
                if g != P.ONE:
                    num = P.pdivexact(num, g)
                    den = P.pdivexact(den, g)
                if den[-1] < 0:
                    num, den = P.pneg(num), P.pneg(den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("RatFunc is immutable")

    @classmethod
    def from_fraction(cls, q: Fraction) -> "RatFunc":
        return cls(P.pconst(q.numerator), P.pconst(q.denominator))

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatFunc)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den:
            return RatFunc(P.padd(self.num, other.num), self.den)
        return RatFunc(
            P.padd(P.pmul(self.num, other.den), P.pmul(other.num, self.den)),
            P.pmul(self.den, other.den),
        )

    def __neg__(self) -> "RatFunc":
        return RatFunc(P.pneg(self.num), self.den, _reduced=True)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        if not self.num or not other.num:
            return _RAT_ZERO
        # cross-cancel before multiplying to keep intermediates small
        g1 = P.pgcd(self.num, other.den)
        g2 = P.pgcd(other.num, self.den)
        n1 = self.num if g1 == P.ONE else P.pdivexact(self.num, g1)
        d2 = other.den if g1 == P.ONE else P.pdivexact(other.den, g1)
        n2 = other.num if g2 == P.ONE else P.pdivexact(other.num, g2)
        d1 = self.den if g2 == P.ONE else P.pdivexact(self.den, g2)
        num, den = P.pmul(n1, n2), P.pmul(d1, d2)
        if den[-1] < 0:
            num, den = P.pneg(num), P.pneg(den)
        return RatFunc(num, den, _reduced=True)

    def inv(self) -> "RatFunc":
        if not self.num:
            raise ZeroInverse("inverse of the zero rational function")
        num, den = self.den, self.num
        if den[-1] < 0:
            num, den = P.pneg(num), P.pneg(den)
        return RatFunc(num, den, _reduced=True)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        return self * other.inv()

    def eval(self, h: Fraction) -> Fraction:
        den = P.peval(self.den, h)
        if den == 0:
            raise DomainError(f"denominator vanishes at h = {h}")
        return P.peval(self.num, h) / den

    def text(self) -> str:
        body = f"({P.pstr(self.num)})"
        if self.den == P.ONE:
            return body
        if len(self.den) == 1:
            return f"{body}/{self.den[0]}"
        return f"{body}/({P.pstr(self.den)})"


_RAT_ZERO = RatFunc(P.ZERO, P.ONE, _reduced=True)
_RAT_ONE = RatFunc(P.ONE, P.ONE, _reduced=True)


class CoeffField:
    """Factory and arithmetic context for scalar coefficients.

    Instances are keyed by the model branch s and an optional exact
    specialisation of h.  Elements of different fields never mix.
    """

    __slots__ = ("s", "h_value", "_radicand", "_zero", "_one", "_h", "_c")

    def __init__(self, s: int, *, h_value: Optional[Fraction] = None):
        if s not in (0, 1):
            raise ValueError(f"s must be 0 or 1, got {s!r}")
        if h_value is not None and not (0 < h_value < 1):
            raise DomainError(f"h must lie in (0, 1), got {h_value}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "h_value", h_value)
        # c^2 = 1 - s h^2 with sigma = +1, zeta = h already folded in
        if h_value is None:
            rad = RatFunc(P.pnormalize((1, 0, -s)))
            hval = RatFunc(P.pnormalize((0, 1)))
        else:
            rad = RatFunc.from_fraction(1 - s * h_value * h_value)
            hval = RatFunc.from_fraction(h_value)
        object.__setattr__(self, "_radicand", rad)
        object.__setattr__(self, "_zero", CoeffElement(self, _RAT_ZERO, _RAT_ZERO))
        object.__setattr__(self, "_one", CoeffElement(self, _RAT_ONE, _RAT_ZERO))
        object.__setattr__(self, "_h", CoeffElement(self, hval, _RAT_ZERO))
        object.__setattr__(self, "_c", CoeffElement(self, _RAT_ZERO, _RAT_ONE))

    def __setattr__(self, *a):
        raise AttributeError("CoeffField is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CoeffField)
            and self.s == other.s
            and self.h_value == other.h_value
        )

    def __hash__(self) -> int:
        return hash((self.s, self.h_value))

    def __repr__(self) -> str:
        spec = "" if self.h_value is None else f", h={self.h_value}"
        return f"CoeffField(s={self.s}{spec})"

    # --- constructors ----------------------------------------------------

    @property
    def zero(self) -> "CoeffElement":
        return self._zero

    @property
    def one(self) -> "CoeffElement":
        return self._one

    @property
    def h(self) -> "CoeffElement":
        return self._h

    @property
    def c(self) -> "CoeffElement":
        return self._c

    @property
    def c_squared(self) -> "CoeffElement":
        return CoeffElement(self, self._radicand, _RAT_ZERO)

    def from_fraction(self, q) -> "CoeffElement":
        return CoeffElement(self, RatFunc.from_fraction(Fraction(q)), _RAT_ZERO)

    def from_int(self, k: int) -> "CoeffElement":
        return self.from_fraction(Fraction(k))

    def coerce(self, x: ScalarLike) -> "CoeffElement":
        if isinstance(x, CoeffElement):
            if x.field != self:
                raise ValueError("element belongs to a different CoeffField")
            return x
        if isinstance(x, (int, Fraction)):
            return self.from_fraction(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} into CoeffField")

    def specialize(self, h_value: Fraction) -> "CoeffField":
        """The same model branch with h pinned to an exact rational."""
        if self.h_value is not None:
            raise ValueError("field is already specialised")
        return CoeffField(self.s, h_value=Fraction(h_value))

    # --- parsing ----------------------------------------------------------

    def parse(self, text: str) -> "CoeffElement":
        """Parse the canonical coefficient grammar, e.g.
        '(3 - 17*h^2)/64 + (0)*c'.  Any +,-,*,/,^ expression in h and c with
        integer literals is accepted."""
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
            return self._from_ast(tree.body)
        except (SyntaxError, ValueError, ZeroDivisionError, ZeroInverse) as exc:
            raise ValueError(f"not a valid coefficient expression: {text!r}") from exc

    def _from_ast(self, node) -> "CoeffElement":
        if isinstance(node, ast.BinOp):
            left = self._from_ast(node.left)
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    raise ValueError("exponent must be an integer literal")
                return left ** node.right.value
            right = self._from_ast(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
            raise ValueError(f"unsupported operator {type(node.op).__name__}")
        if isinstance(node, ast.UnaryOp):
            operand = self._from_ast(node.operand)
            if isinstance(node.op, ast.USub):
                return -operand
            if isinstance(node.op, ast.UAdd):
                return operand
            raise ValueError(f"unsupported operator {type(node.op).__name__}")
        if isinstance(node, ast.Name):
            if node.id == "h":
                return self._h
            if node.id == "c":
                return self._c
            raise ValueError(f"unknown symbol {node.id!r}")
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return self.from_int(node.value)
        raise ValueError(f"unsupported syntax {type(node).__name__}")


class CoeffElement:
    """even(h) + odd(h) * c, with c^2 reduced via the field's radicand."""

    __slots__ = ("field", "even", "odd")

    def __init__(self, field: CoeffField, even: RatFunc, odd: RatFunc):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "even", even)
        object.__setattr__(self, "odd", odd)

    def __setattr__(self, *a):
        raise AttributeError("CoeffElement is immutable")

    # --- predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return self.even.is_zero() and self.odd.is_zero()

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        """True when the element is a plain rational number (no h, no c)."""
        return (
            self.odd.is_zero()
            and len(self.even.num) <= 1
            and len(self.even.den) <= 1
        )

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a plain rational")
        num = self.even.num[0] if self.even.num else 0
        return Fraction(num, self.even.den[0])

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field.from_fraction(Fraction(other))
        return (
            isinstance(other, CoeffElement)
            and self.field == other.field
            and self.even == other.even
            and self.odd == other.odd
        )

    def __hash__(self) -> int:
        return hash((self.field, self.even, self.odd))

    # --- ring operations ------------------------------------------------

    def _lift(self, other: ScalarLike) -> Optional["CoeffElement"]:
        """Coerce, raising on cross-field mixing but deferring (None) on
        foreign types so Python can try the reflected operation."""
        if isinstance(other, CoeffElement):
            if other.field != self.field:
                raise ValueError("elements belong to different CoeffFields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_fraction(Fraction(other))
        return None

    def __add__(self, other: ScalarLike) -> "CoeffElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return CoeffElement(self.field, self.even + o.even, self.odd + o.odd)

    __radd__ = __add__

    def __neg__(self) -> "CoeffElement":
        return CoeffElement(self.field, -self.even, -self.odd)

    def __sub__(self, other: ScalarLike) -> "CoeffElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: ScalarLike) -> "CoeffElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return (-self) + o

    def __mul__(self, other: ScalarLike) -> "CoeffElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        r = self.field._radicand
        even = self.even * o.even + self.odd * o.odd * r
        odd = self.even * o.odd + self.odd * o.even
        return CoeffElement(self.field, even, odd)

    __rmul__ = __mul__

    def inv(self) -> "CoeffElement":
        """Inverse via the conjugate; raises ZeroInverse on zero and on the
        zero divisors that exist when the radicand is a perfect square."""
        r = self.field._radicand
        norm = self.even * self.even - self.odd * self.odd * r
        if norm.is_zero():
            if self.is_zero():
                raise ZeroInverse("inverse of zero")
            raise ZeroInverse(f"zero divisor has no inverse: {self.text()}")
        ninv = norm.inv()
        return CoeffElement(self.field, self.even * ninv, -(self.odd * ninv))

    def __truediv__(self, other: ScalarLike) -> "CoeffElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other: ScalarLike) -> "CoeffElement":
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inv()

    def __pow__(self, k: int) -> "CoeffElement":
        if not isinstance(k, int):
            raise TypeError("exponent must be an int")
        if k < 0:
            return self.inv() ** (-k)
        out = self.field.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "CoeffElement":
        """The c -> -c involution."""
        return CoeffElement(self.field, self.even, -self.odd)

    # --- evaluation and display -----------------------------------------

    def specialize(self, target: CoeffField) -> "CoeffElement":
        """Image in a field with h pinned; exact, and denominator-checked."""
        if target.s != self.field.s:
            raise ValueError("cannot change the model branch s")
        if target.h_value is None:
            raise ValueError("target field must have h pinned")
        h = target.h_value
        return CoeffElement(
            target,
            RatFunc.from_fraction(self.even.eval(h)),
            RatFunc.from_fraction(self.odd.eval(h)),
        )

    def eval_exact(self, h: Optional[Fraction] = None) -> Tuple[Fraction, Fraction]:
        """(even(h), odd(h)) as exact rationals."""
        if self.field.h_value is not None:
            if h is not None and h != self.field.h_value:
                raise DomainError("field already has h pinned to a different value")
            h = self.field.h_value
        if h is None:
            raise DomainError("an h value is required to evaluate")
        h = Fraction(h)
        if not (0 < h < 1):
            raise DomainError(f"h must lie in (0, 1), got {h}")
        return self.even.eval(h), self.odd.eval(h)

    def eval_float(self, h, c_sign: int = 1) -> float:
        """Float value with c = c_sign * sqrt(1 - s h^2)."""
        if c_sign not in (1, -1):
            raise ValueError("c_sign must be +1 or -1")
        hq = Fraction(h) if not isinstance(h, Fraction) else h
        ev, od = self.eval_exact(hq)
        rad = 1 - self.field.s * hq * hq
        return float(ev) + c_sign * float(od) * _fsqrt(float(rad))

    def text(self) -> str:
        """Canonical display: '(even)/den + (odd)/den*c' with reduced parts."""
        return f"{self.even.text()} + {self.odd.text()}*c"

    def __repr__(self) -> str:
        return f"<{self.text()}>"

"""Dense univariate integer-polynomial kernels.

A polynomial in h with integer coefficients is an immutable tuple of ints in
ascending degree order with no trailing zeros; the zero polynomial is the
empty tuple.  These kernels underlie the scalar field and have no
dependencies, so they are easy to test in isolation.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

Poly = Tuple[int, ...]

ZERO: Poly = ()
ONE: Poly = (1,)


def pnormalize(coeffs: Iterable[int]) -> Poly:
    """Strip trailing zeros and freeze to a tuple."""
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def pconst(k: int) -> Poly:
    return (k,) if k else ()


def pdegree(a: Poly) -> int:
    """Degree, with the zero polynomial mapped to -1."""
    return len(a) - 1


def padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return pnormalize(out)


def pneg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def psub(a: Poly, b: Poly) -> Poly:
    return padd(a, pneg(b))


def pscale(a: Poly, k: int) -> Poly:
    if k == 0:
        return ZERO
    return tuple(c * k for c in a)


def pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ZERO
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return pnormalize(out)


def peval(a: Poly, x: Fraction) -> Fraction:
    """Horner evaluation at an exact rational point."""
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def pcontent(a: Poly) -> int:
    """Non-negative gcd of the coefficients (0 for the zero polynomial)."""
    g = 0
    for c in a:
        g = math.gcd(g, c)
    return g


def pprimitive(a: Poly) -> Tuple[int, Poly]:
    """Split into (content, primitive part); the primitive part keeps the
    sign of the leading coefficient."""
    if not a:
        return 0, ZERO
    g = pcontent(a)
    return g, tuple(c // g for c in a)


def _poslead(a: Poly) -> Poly:
    if a and a[-1] < 0:
        return pneg(a)
    return a


def ppseudo_rem(a: Poly, b: Poly) -> Poly:
    """Pseudo-remainder of a by b (b nonzero): lc(b)^(deg a - deg b + 1) * a mod b."""
    if not b:
        raise ZeroDivisionError("pseudo-remainder by zero polynomial")
    r = list(a)
    db, lb = pdegree(b), b[-1]
    while len(r) - 1 >= db and any(r):
        while r and r[-1] == 0:
            r.pop()
        if len(r) - 1 < db:
            break
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [c * lb for c in r]
        for i, cb in enumerate(b):
            r[shift + i] -= lr * cb
        while r and r[-1] == 0:
            r.pop()
    return pnormalize(r)


def pdivexact(a: Poly, b: Poly) -> Poly:
    """Exact quotient a // b, raising ArithmeticError when b does not divide a."""
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    if not a:
        return ZERO
    r = list(a)
    db, lb = pdegree(b), b[-1]
    if pdegree(a) < db:
        raise ArithmeticError("inexact polynomial division")
    q = [0] * (pdegree(a) - db + 1)
    for k in range(len(q) - 1, -1, -1):
        lead = r[k + db]
        if lead % lb:
            raise ArithmeticError("inexact polynomial division")
        q[k] = lead // lb
        if q[k]:
            for i, cb in enumerate(b):
                r[k + i] -= q[k] * cb
    if any(r):
        raise ArithmeticError("inexact polynomial division")
    return pnormalize(q)


def pgcd(a: Poly, b: Poly) -> Poly:
    """Full gcd in Z[h] (content included), positive leading coefficient."""
    if not a:
        return _poslead(b)
    if not b:
        return _poslead(a)
    ca, pa = pprimitive(a)
    cb, pb = pprimitive(b)
    c = math.gcd(ca, cb)
    while pb:
        r = ppseudo_rem(pa, pb)
        pa, pb = pb, pprimitive(r)[1]
    return pscale(_poslead(pa), c)


def pstr(a: Poly, var: str = "h") -> str:
    """Human form in ascending degree order, e.g. '3 - 17*h^2'."""
    if not a:
        return "0"
    pieces = []
    for k, c in enumerate(a):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            pw = var if k == 1 else f"{var}^{k}"
            body = pw if mag == 1 else f"{mag}*{pw}"
        if not pieces:
            pieces.append(f"-{body}" if c < 0 else body)
        else:
            pieces.append(f"- {body}" if c < 0 else f"+ {body}")
    return " ".join(pieces)


# --- exact sign analysis on the open unit interval ------------------------

def _qdiv(num: Sequence[Fraction], den: Sequence[Fraction]):
    """Long division over Q; returns (quotient, remainder) as Fraction lists."""
    num = list(num)
    q = [Fraction(0)] * max(len(num) - len(den) + 1, 0)
    while len(num) >= len(den) and any(num):
        while num and num[-1] == 0:
            num.pop()
        if len(num) < len(den):
            break
        k = len(num) - len(den)
        coef = num[-1] / den[-1]
        q[k] = coef
        for i, cd in enumerate(den):
            num[k + i] -= coef * cd
        num.pop()
    while num and num[-1] == 0:
        num.pop()
    return q, num


def _sign_variations(values) -> int:
    signs = [v for v in values if v != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if (x < 0) != (y < 0))


def count_roots_open_unit_interval(a: Poly) -> int:
    """Number of distinct real roots of a in the open interval (0, 1).

    Uses a Sturm chain over exact rationals.  Roots at the endpoints are
    excluded by dividing out h and (h - 1) factors first.
    """
    if not a:
        raise ZeroDivisionError("sign analysis of the zero polynomial")
    p = [Fraction(c) for c in a]
    for root in (Fraction(0), Fraction(1)):
        while len(p) > 1 and sum(c * root ** k for k, c in enumerate(p)) == 0:
            p, _ = _qdiv(p, [-root, Fraction(1)])
    if len(p) <= 1:
        return 0
    chain = [p, [k * c for k, c in enumerate(p)][1:]]
    while len(chain[-1]) > 0:
        _, r = _qdiv(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    def _at(x: Fraction) -> list:
        return [sum(c * x ** k for k, c in enumerate(q)) for q in chain]
    return _sign_variations(_at(Fraction(0))) - _sign_variations(_at(Fraction(1)))


def sign_on_open_unit_interval(a: Poly) -> int:
    """Exact constant sign of a on (0, 1): +1, -1, or 0 when the sign is not
    constant (or a vanishes identically)."""
    if not a:
        return 0
    if count_roots_open_unit_interval(a) > 0:
        return 0
    mid = peval(a, Fraction(1, 2))
    if mid > 0:
        return 1
    if mid < 0:
        return -1
    return 0

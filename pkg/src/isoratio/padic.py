"""Bounded-precision l-adic arithmetic and certified root counting.

An element of Q_l is an approximation l^valuation * (unit + O(l^precision)).
Root counting over Q_l is exact: integral roots come from a branch-and-lift
recursion whose leaves are certified by Hensel's criterion (simple root mod
l), never by digit agreement; roots of negative valuation are found on the
reversed polynomial.  Certification depth is bounded by the precision
policy: start at 32 digits, double on failure, hard cap from
ISORATIO_PRECISION_CAP (default 512).
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .errors import PrecisionExhausted
from .exact import ivaluation, kronecker, lvaluation
from .polys import PolyQ

DEFAULT_PRECISION = 32
HARD_CAP = 512


def precision_cap() -> int:
    return min(int(os.environ.get("ISORATIO_PRECISION_CAP", HARD_CAP)), HARD_CAP)


class _Escalate(Exception):
    """Internal: retry the computation at doubled precision."""


def escalating(fn, start: int | None = None):
    """Run fn(precision), doubling on _Escalate up to the cap."""
    prec = start or DEFAULT_PRECISION
    cap = precision_cap()
    while True:
        try:
            return fn(prec)
        except _Escalate:
            if prec >= cap:
                raise PrecisionExhausted(f"certification failed at precision cap {cap}") from None
            prec = min(2 * prec, cap)


@dataclass(frozen=True)
class PadicApprox:
    """l^valuation * (unit + O(l^precision)) with unit coprime to l.

    unit == 0 encodes a zero-ish value: all that is known is O(l^valuation).
    """

    l: int
    valuation: int
    unit: int
    precision: int

    def __post_init__(self):
        if self.precision < 1:
            raise ValueError("precision >= 1 required")
        if self.unit and self.unit % self.l == 0:
            raise ValueError("unit part must be coprime to l")

    @classmethod
    def from_rational(cls, q, l: int, precision: int = DEFAULT_PRECISION) -> "PadicApprox":
        q = Fraction(q)
        if q == 0:
            return cls(l, precision, 0, precision)
        v = int(lvaluation(q, l))
        unit = q / Fraction(l) ** v
        mod = l**precision
        u = unit.numerator % mod * pow(unit.denominator, -1, mod) % mod
        return cls(l, v, u, precision)

    def is_zeroish(self) -> bool:
        return self.unit == 0

    def known_digits(self) -> int:
        """Absolute precision: the value is determined mod l^known_digits."""
        return self.valuation + (0 if self.is_zeroish() else self.precision)

    def integral_lift(self) -> int:
        """Integer representative; requires valuation >= 0."""
        if self.valuation < 0:
            raise ValueError("negative valuation has no integral lift")
        return self.unit * self.l**self.valuation

    def unit_mod(self, k: int) -> int:
        if self.is_zeroish() or k > self.precision:
            raise _Escalate
        return self.unit % self.l**k


def eval_int_poly(coeffs: list[int], x: PadicApprox) -> PadicApprox:
    """f(x) for integer coefficients f, with exact error tracking.

    For v(x) = -m < 0 the quantity actually computed is l^(m deg f) * f(x),
    which is integral; the valuation shift is undone in the result.
    """
    l = x.l
    if not coeffs or all(c == 0 for c in coeffs):
        return PadicApprox(l, 10**9, 0, 1)
    deg = len(coeffs) - 1
    if x.valuation >= 0 or x.is_zeroish():
        lift = 0 if x.is_zeroish() else x.integral_lift()
        K = x.valuation if x.is_zeroish() else x.valuation + x.precision
        shift = 0
        E = 0
        for c in reversed(coeffs):
            E = E * lift + c
    else:
        m = -x.valuation
        K = x.precision
        shift = m * deg
        u = x.unit  # integral lift of l^m * x
        E = 0
        for i, c in enumerate(coeffs):
            E += c * l ** (m * (deg - i)) * u**i
    if K < 1:
        raise _Escalate
    if E == 0 or ivaluation(E, l) >= K:
        return PadicApprox(l, K - shift, 0, 1)
    w = ivaluation(E, l)
    unit = (E // l**w) % l ** (K - w)
    return PadicApprox(l, w - shift, unit, K - w)


def is_square_rational_in_Ql(q, l: int) -> bool:
    """Exact: is the rational q a square in Q_l (0 counts as a square)?"""
    q = Fraction(q)
    if q == 0:
        return True
    v = int(lvaluation(q, l))
    if v % 2:
        return False
    unit = q / Fraction(l) ** v
    if l == 2:
        return unit.numerator * pow(unit.denominator, -1, 8) % 8 == 1
    un = unit.numerator % l * pow(unit.denominator % l, -1, l) % l
    return kronecker(un, l) == 1


def is_square_in_Ql(z: PadicApprox) -> bool:
    """Square test for a certified-nonzero approximate value.

    Raises _Escalate when the stored digits cannot decide (zero-ish value,
    or fewer than 3 unit digits at l=2).
    """
    if z.is_zeroish():
        raise _Escalate
    if z.valuation % 2:
        return False
    if z.l == 2:
        return z.unit_mod(3) == 1
    return kronecker(z.unit_mod(1), z.l) == 1


def _poly_eval_mod(coeffs: list[int], r: int, mod: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * r + c) % mod
    return acc


def _newton_lift(coeffs: list[int], r: int, l: int, digits: int) -> int:
    """Lift a simple root r mod l (f'(r) a unit) to a root mod l^digits."""
    dcoeffs = [i * c for i, c in enumerate(coeffs)][1:]
    k = 1
    while k < digits:
        k = min(2 * k, digits)
        mod = l**k
        fr = _poly_eval_mod(coeffs, r, mod)
        dfr = _poly_eval_mod(dcoeffs, r, mod)
        r = (r - fr * pow(dfr, -1, mod)) % mod
    return r % l**digits


def _shift_scale(coeffs: list[int], r: int, l: int) -> list[int]:
    """Coefficients of g(r + l*z), exact integers."""
    out = [0] * len(coeffs)
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        binom = 1
        for j in range(i + 1):
            out[j] += c * binom * r ** (i - j) * l**j
            binom = binom * (i - j) // (j + 1)
    return out


def _strip_l(coeffs: list[int], l: int) -> list[int]:
    v = min(ivaluation(c, l) for c in coeffs if c != 0)
    return [c // l**v for c in coeffs]


def _zl_roots(coeffs: list[int], l: int, digits: int, depth_cap: int, only_multiples_of_l: bool = False) -> list[int]:
    """Distinct roots in Z_l of a squarefree integer polynomial, certified.

    Each returned integer determines one root mod l^digits, backed by a
    Hensel certificate (simple root mod l at some branching depth).  Raises
    _Escalate when branching exceeds depth_cap.
    """
    roots: list[int] = []
    stack = [(coeffs, 0, 0)]  # roots of poly give base + l^depth * root
    while stack:
        g, base, depth = stack.pop()
        if depth > depth_cap:
            raise _Escalate
        dg = [i * c for i, c in enumerate(g)][1:]
        residues = (0,) if (only_multiples_of_l and depth == 0) else range(l)
        for r in residues:
            if _poly_eval_mod(g, r, l):
                continue
            if _poly_eval_mod(dg, r, l):
                lifted = _newton_lift(g, r, l, max(digits - depth, 1))
                roots.append((base + lifted * l**depth) % l**digits)
            else:
                h = _shift_scale(g, r, l)
                if any(h):
                    stack.append((_strip_l(h, l), base + r * l**depth, depth + 1))
    return roots


def ql_roots(f: PolyQ, l: int, precision: int | None = None) -> list[PadicApprox]:
    """All roots of f in Q_l as certified approximations.

    The squarefree part is used, so multiplicities never inflate the count.
    Degenerate inputs (degree <= 0) return [] with a warning rather than an
    error.
    """
    if f.degree <= 0:
        warnings.warn("l-adic root count of a constant polynomial is 0", stacklevel=2)
        return []

    fsq = f.squarefree_part()
    prec0 = precision or DEFAULT_PRECISION

    out_exact: list[PadicApprox] = []
    if fsq(0) == 0:
        out_exact.append(PadicApprox(l, prec0, 0, prec0))  # the exact root x = 0
        fsq = fsq // PolyQ((0, 1))
        if fsq.degree == 0:
            return out_exact
    ints = fsq.primitive_int()
    rev = fsq.reversed_poly()
    rints = rev.primitive_int()

    def run(prec: int) -> list[PadicApprox]:
        found = []
        for r in _zl_roots(ints, l, prec, depth_cap=prec):
            if r == 0:
                raise _Escalate  # true root hides below l^prec; need more digits
            v = ivaluation(r, l)
            if v >= prec:
                raise _Escalate
            found.append(PadicApprox(l, v, (r // l**v) % l ** (prec - v), prec - v))
        for y in _zl_roots(rints, l, prec, depth_cap=prec, only_multiples_of_l=True):
            if y == 0:
                continue  # root at infinity of the reversal, not a root of f
            v = ivaluation(y, l)
            if v == 0 or v >= prec:
                raise _Escalate
            mod = l ** (prec - v)
            found.append(PadicApprox(l, -v, pow((y // l**v) % mod, -1, mod), prec - v))
        return found

    return out_exact + escalating(run, prec0)


def count_roots_in_Ql(f: PolyQ, l: int, precision: int | None = None) -> int:
    """Exact number of roots of f in Q_l, certified via Hensel's lemma."""
    return len(ql_roots(f, l, precision))

"""Dense univariate polynomials over Q with exact coefficients.

Coefficients are stored lowest-degree first as `Fraction`s.  Degrees in this
package stay below ~90 (division polynomials for p <= 13), so the quadratic
algorithms here are more than fast enough and keep everything exact.

Factorization over Q clears denominators and delegates the integer
factorization to sympy's complete Zassenhaus implementation; real root
counting is Sturm's theorem over exact rationals.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt


def _F(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class PolyQ:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [_F(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # -- construction helpers ------------------------------------------------
    @classmethod
    def x(cls) -> "PolyQ":
        return cls((0, 1))

    @classmethod
    def const(cls, c) -> "PolyQ":
        return cls((c,))

    @classmethod
    def from_roots(cls, roots) -> "PolyQ":
        out = cls((1,))
        for r in roots:
            out = out * cls((-_F(r), 1))
        return out

    # -- basics ---------------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, PolyQ):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if self.is_zero():
            return "PolyQ(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*x" if c != 1 else "x")
            else:
                terms.append(f"{c}*x^{i}" if c != 1 else f"x^{i}")
        return "PolyQ(" + " + ".join(reversed(terms)) + ")"

    def __getitem__(self, i) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    # -- ring operations -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PolyQ):
            other = PolyQ.const(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyQ([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return PolyQ([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, PolyQ):
            other = PolyQ.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return PolyQ.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, PolyQ):
            return PolyQ([c * _F(other) for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return PolyQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out, base = PolyQ((1,)), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, other: "PolyQ") -> tuple["PolyQ", "PolyQ"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q = [Fraction(0)] * max(0, self.degree - other.degree + 1)
        r = list(self.coeffs)
        d, lc = other.degree, other.lead
        while len(r) - 1 >= d and any(c != 0 for c in r):
            while r and r[-1] == 0:
                r.pop()
            if len(r) - 1 < d:
                break
            k = len(r) - 1 - d
            f = r[-1] / lc
            q[k] = f
            for i, c in enumerate(other.coeffs):
                r[k + i] -= f * c
            r.pop()
        return PolyQ(q), PolyQ(r)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def divides(self, other: "PolyQ") -> bool:
        return (other % self).is_zero()

    def gcd(self, other: "PolyQ") -> "PolyQ":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        if a.is_zero():
            return a
        return a * (1 / a.lead)  # monic normalization

    # -- calculus and evaluation ------------------------------------------------
    def deriv(self) -> "PolyQ":
        return PolyQ([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mod(self, x: int, n: int) -> int:
        """Evaluate at an integer modulo n; coefficients must be n-integral."""
        acc = 0
        for c in reversed(self.coeffs):
            if c.denominator == 1:
                cc = c.numerator
            else:
                cc = c.numerator * pow(c.denominator, -1, n)
            acc = (acc * x + cc) % n
        return acc

    def compose_linear(self, a, b) -> "PolyQ":
        """f(a*x + b) exactly."""
        a, b = _F(a), _F(b)
        out = PolyQ()
        lin = PolyQ((b, a))
        for c in reversed(self.coeffs):
            out = out * lin + PolyQ.const(c)
        return out

    def scale_roots(self, s) -> "PolyQ":
        """Monic-normalized polynomial whose roots are s * (roots of self)."""
        s = _F(s)
        cs = [c * s ** (self.degree - i) for i, c in enumerate(self.coeffs)]
        p = PolyQ(cs)
        return p.monic()

    def monic(self) -> "PolyQ":
        if self.is_zero():
            return self
        return self * (1 / self.lead)

    def reversed_poly(self) -> "PolyQ":
        """x^deg * f(1/x); drops trailing zero coefficients first."""
        cs = list(self.coeffs)
        while cs and cs[0] == 0:
            cs.pop(0)
        return PolyQ(list(reversed(cs)))

    def squarefree_part(self) -> "PolyQ":
        if self.degree <= 0:
            return self.monic()
        g = self.gcd(self.deriv())
        if g.degree == 0:
            return self.monic()
        return (self // g).monic()

    # -- integer form -------------------------------------------------------------
    def primitive_int(self) -> list[int]:
        """Primitive integer coefficient list (lowest first), positive leading."""
        if self.is_zero():
            return []
        from math import gcd, lcm

        den = 1
        for c in self.coeffs:
            den = lcm(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = gcd(g, v)
        ints = [v // g for v in ints]
        if ints[-1] < 0:
            ints = [-v for v in ints]
        return ints

    # -- Sturm theory ---------------------------------------------------------------
    def _sturm_chain(self) -> list["PolyQ"]:
        f = self.squarefree_part()
        chain = [f, f.deriv()]
        while not chain[-1].is_zero() and chain[-1].degree > 0:
            chain.append(-(chain[-2] % chain[-1]))
        if chain[-1].is_zero():
            chain.pop()
        return chain

    @staticmethod
    def _variations(values) -> int:
        signs = [1 if v > 0 else -1 for v in values if v != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def count_real_roots(self, lo=None, hi=None) -> int:
        """Distinct real roots in (lo, hi]; whole line when bounds omitted.

        Constants and the zero polynomial count 0 roots (degenerate inputs
        from callers with empty kernels).
        """
        if self.degree <= 0:
            return 0
        chain = self._sturm_chain()
        if lo is None:
            at_lo = [g.lead * (-1) ** g.degree for g in chain]
        else:
            at_lo = [g(lo) for g in chain]
        if hi is None:
            at_hi = [g.lead for g in chain]
        else:
            at_hi = [g(hi) for g in chain]
        return self._variations(at_lo) - self._variations(at_hi)

    def root_bound(self) -> Fraction:
        """Cauchy bound: all real roots lie in (-B, B]."""
        lc = abs(self.lead)
        return 1 + max((abs(c) / lc for c in self.coeffs[:-1]), default=Fraction(0))

    def isolate_real_roots(self) -> list[tuple[Fraction, Fraction]]:
        """Disjoint intervals (a, b] each containing exactly one real root."""
        f = self.squarefree_part()
        if f.degree <= 0:
            return []
        B = f.root_bound()
        out = []
        stack = [(-B, B)]
        while stack:
            a, b = stack.pop()
            n = f.count_real_roots(a, b)
            if n == 0:
                continue
            if n == 1:
                out.append((a, b))
                continue
            m = (a + b) / 2
            stack.append((a, m))
            stack.append((m, b))
        out.sort()
        return out

    def refine_root(self, interval, other: "PolyQ") -> int:
        """Sign of `other` at the single root of self in (a, b].

        Requires gcd(self, other) to have no root there (sign well defined);
        bisection narrows the interval until `other` has no root in it.
        """
        f = self.squarefree_part()
        a, b = interval
        while other.count_real_roots(a, b) > 0 or other(a) == 0:
            m = (a + b) / 2
            if f(m) == 0:
                # exact rational root; evaluate directly
                v = other(m)
                if v == 0:
                    raise ValueError("common root; sign undefined")
                return 1 if v > 0 else -1
            if f.count_real_roots(a, m) == 1:
                b = m
            else:
                a = m
        v = other(b) if other(b) != 0 else other((a + b) / 2)
        return 1 if v > 0 else -1

    # -- rational roots and factorization ---------------------------------------------
    def factor(self) -> list[tuple["PolyQ", int]]:
        """Monic irreducible factors over Q with multiplicities.

        Complete factorization: denominators are cleared and the primitive
        integer polynomial goes through sympy (Zassenhaus + lifting).
        """
        if self.degree <= 0:
            return []
        import sympy

        x = sympy.Symbol("x")
        ints = self.primitive_int()
        expr = sympy.Poly(list(reversed(ints)), x, domain="QQ")
        out = []
        for fac, mult in expr.factor_list()[1]:
            cs = [Fraction(sympy.Rational(c).p, sympy.Rational(c).q) for c in reversed(fac.all_coeffs())]
            out.append((PolyQ(cs).monic(), int(mult)))
        out.sort(key=lambda fm: (fm[0].degree, fm[0].coeffs))
        return out

    def rational_roots(self) -> list[Fraction]:
        """All rational roots (without multiplicity), ascending."""
        roots = [-(f[0]) for f, _ in self.factor() if f.degree == 1]
        return sorted(roots)


def poly_from_int(coeffs) -> PolyQ:
    return PolyQ([Fraction(c) for c in coeffs])


def resultant(f: PolyQ, g: PolyQ) -> Fraction:
    """Resultant via the Euclidean remainder sequence (exact, small degrees)."""
    if f.is_zero() or g.is_zero():
        return Fraction(0)
    a, b = f, g
    res = Fraction(1)
    while b.degree > 0:
        r = a % b
        if r.is_zero():
            return Fraction(0)
        res *= b.lead ** (a.degree - r.degree)
        if (a.degree * b.degree) % 2 == 1:
            res = -res
        a, b = b, r
    res *= b.lead**a.degree
    return res


def isqrt_exact(n: int):
    """Integer square root when n is a perfect square, else None."""
    if n < 0:
        return None
    r = isqrt(n)
    return r if r * r == n else None

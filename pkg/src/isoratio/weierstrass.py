"""Elliptic curves over Q in long Weierstrass form.

Models carry exact rational a-invariants; the standard b/c quantities and the
discriminant are computed eagerly (they are cheap and used everywhere).
Minimal models follow Laska--Kraus--Connell: the candidate scaling u is the
largest divisor-bounded value whose scaled (c4, c6) pair is realizable by an
integral model, where realizability is decided constructively by the b2-range
search rather than by memorized congruence conditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .errors import SingularModelError
from .exact import factorize, ivaluation, lvaluation, squarefree_part
from .polys import PolyQ


def _F(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class WeierstrassModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q, nonsingular."""

    __slots__ = ("a1", "a2", "a3", "a4", "a6", "b2", "b4", "b6", "b8", "c4", "c6", "disc")

    def __init__(self, a1, a2, a3, a4, a6):
        self.a1, self.a2, self.a3, self.a4, self.a6 = (_F(a1), _F(a2), _F(a3), _F(a4), _F(a6))
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        self.b2 = a1 * a1 + 4 * a2
        self.b4 = 2 * a4 + a1 * a3
        self.b6 = a3 * a3 + 4 * a6
        self.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        self.c4 = self.b2 * self.b2 - 24 * self.b4
        self.c6 = -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6
        self.disc = (
            -self.b2 * self.b2 * self.b8 - 8 * self.b4**3 - 27 * self.b6 * self.b6 + 9 * self.b2 * self.b4 * self.b6
        )
        if self.disc == 0:
            raise SingularModelError(f"singular model {self.a_invariants()}")

    # -- bookkeeping -----------------------------------------------------------
    def a_invariants(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def __eq__(self, other):
        return isinstance(other, WeierstrassModel) and self.a_invariants() == other.a_invariants()

    def __hash__(self):
        return hash(self.a_invariants())

    def __repr__(self):
        return "WeierstrassModel" + str(tuple(str(a) for a in self.a_invariants()))

    @property
    def j(self) -> Fraction:
        return self.c4**3 / self.disc

    def invariants(self):
        """(b2, b4, b6, b8, c4, c6, disc, j)."""
        return (self.b2, self.b4, self.b6, self.b8, self.c4, self.c6, self.disc, self.j)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.a_invariants())

    def two_division_poly(self) -> PolyQ:
        """4x^3 + b2 x^2 + 2 b4 x + b6; its roots are the 2-torsion x's."""
        return PolyQ((self.b6, 2 * self.b4, self.b2, 4))

    def ordinate_square(self) -> PolyQ:
        """g with (2y + a1 x + a3)^2 = g(x) on the curve."""
        return self.two_division_poly()

    def rhs_cubic(self) -> PolyQ:
        return PolyQ((self.a6, self.a4, self.a2, 1))

    def eta(self, x, y) -> Fraction:
        """2y + a1 x + a3, the denominator of the invariant differential."""
        return 2 * _F(y) + self.a1 * _F(x) + self.a3

    def on_curve(self, x, y) -> bool:
        x, y = _F(x), _F(y)
        return y * y + self.a1 * x * y + self.a3 * y == x**3 + self.a2 * x * x + self.a4 * x + self.a6

    def bad_primes(self, hint_primes=()) -> list[int]:
        """Primes of bad reduction (of the minimal model)."""
        mm, _ = self.minimal_model(hint_primes=hint_primes)
        return sorted(factorize(mm.disc.numerator, hint_primes=hint_primes))

    # -- transformations ---------------------------------------------------------
    def transformed(self, t: "ModelMap") -> "WeierstrassModel":
        u, r, s, tt = t.u, t.r, t.s, t.t
        a1, a2, a3, a4, a6 = self.a_invariants()
        na1 = (a1 + 2 * s) / u
        na2 = (a2 - s * a1 + 3 * r - s * s) / u**2
        na3 = (a3 + r * a1 + 2 * tt) / u**3
        na4 = (a4 - s * a3 + 2 * r * a2 - (tt + r * s) * a1 + 3 * r * r - 2 * s * tt) / u**4
        na6 = (a6 + r * a4 + r * r * a2 + r**3 - tt * a3 - tt * tt - r * tt * a1) / u**6
        return WeierstrassModel(na1, na2, na3, na4, na6)

    # -- minimal models ------------------------------------------------------------
    def integral_model(self) -> tuple["WeierstrassModel", "ModelMap"]:
        """Clear denominators with a (1/n, 0, 0, 0) change of variables."""
        n = 1
        for a in self.a_invariants():
            n = lcm(n, a.denominator)
        if n == 1:
            return self, ModelMap.identity()
        t = ModelMap(Fraction(1, n), 0, 0, 0)
        return self.transformed(t), t

    def minimal_model(self, hint_primes=()) -> tuple["WeierstrassModel", "ModelMap"]:
        """Global minimal model and the transform carrying self to it."""
        m, t0 = self.integral_model()
        c4, c6, disc = m.c4.numerator, m.c6.numerator, m.disc.numerator
        fac = factorize(disc, hint_primes=hint_primes)
        exps = {}
        for l, e in fac.items():
            k = e // 12
            if c4 != 0:
                k = min(k, ivaluation(c4, l) // 4)
            if c6 != 0:
                k = min(k, ivaluation(c6, l) // 6)
            if k:
                exps[l] = k
        u = 1
        best = None
        # largest realizable u wins; realizability is decided constructively
        candidates = [1]
        for l, k in exps.items():
            candidates = [c * l**i for c in candidates for i in range(k + 1)]
        for cu in sorted(set(candidates), reverse=True):
            built = _model_from_c4c6(c4 // cu**4 if c4 else 0, c6 // cu**6 if c6 else 0)
            if built is not None:
                u, best = cu, built
                break
        assert best is not None  # u = 1 always realizable: m itself is integral
        # the (u,r,s,t) carrying m to best
        t1 = _connecting_map(m, best, Fraction(u))
        return best, t0.compose(t1)

    def quadratic_twist(self, d: int, hint_primes=()) -> "WeierstrassModel":
        """Minimal model of the twist by the squarefree integer d != 0."""
        if d == 0:
            raise ValueError("twist by 0")
        c4d = self.c4 * d * d
        c6d = self.c6 * d**3
        rough = WeierstrassModel(0, 0, 0, -27 * c4d, -54 * c6d)
        hints = set(hint_primes) | {2, 3} | set(factorize(abs(d)))
        mm, _ = rough.minimal_model(hint_primes=tuple(hints))
        return mm

    def two_torsion_order(self) -> int:
        """#E[2](Q) in {1, 2, 4}."""
        n = len(self.two_division_poly().rational_roots())
        return 1 + (3 if n == 3 else (1 if n >= 1 else 0))

    def short_model(self) -> tuple["WeierstrassModel", "ModelMap"]:
        """The model y^2 = x^3 - 27 c4 x - 54 c6 and the map onto it."""
        short = WeierstrassModel(0, 0, 0, -27 * self.c4, -54 * self.c6)
        t = _connecting_map(self, short, Fraction(1, 6))
        return short, t

    def real_components(self) -> int:
        return 2 if self.disc > 0 else 1


def _model_from_c4c6(c4: int, c6: int):
    """Integral model with invariants (c4, c6), or None when none exists.

    Search b2 over a full residue system mod 12; Kraus's conditions at 2 and
    3 are exactly the solvability of this construction, so no separate
    congruence test is needed.
    """
    if c4**3 - c6 * c6 == 0:
        return None
    for b2 in range(-5, 7):
        if (b2 * b2 - c4) % 24:
            continue
        b4 = (b2 * b2 - c4) // 24
        if (-(b2**3) + 36 * b2 * b4 - c6) % 216:
            continue
        b6 = (-(b2**3) + 36 * b2 * b4 - c6) // 216
        a1 = b2 % 2
        a2 = (b2 - a1) // 4
        a3 = b6 % 2
        a6 = (b6 - a3) // 4
        if (b4 - a1 * a3) % 2:
            continue
        a4 = (b4 - a1 * a3) // 2
        try:
            m = WeierstrassModel(a1, a2, a3, a4, a6)
        except SingularModelError:
            continue
        if m.c4 == c4 and m.c6 == c6:
            return m
    return None


def _connecting_map(m: "WeierstrassModel", m2: "WeierstrassModel", u: Fraction) -> "ModelMap":
    """The (u, r, s, t) with u given that carries m to m2; validated exactly."""
    s = (u * m2.a1 - m.a1) / 2
    r = (u * u * m2.a2 - m.a2 + s * m.a1 + s * s) / 3
    t = (u**3 * m2.a3 - m.a3 - r * m.a1) / 2
    tm = ModelMap(u, r, s, t)
    if m.transformed(tm) != m2:
        raise ValueError("models are not related by the given u")
    return tm


@dataclass(frozen=True)
class ModelMap:
    """Change of variables x = u^2 x' + r, y = u^3 y' + s u^2 x' + t.

    Sends a model m to m' = m.transformed(self); on points it is
    (x, y) |-> ((x - r)/u^2, (y - s(x - r) - t)/u^3).  The invariant
    differential scales as w' = u * w.
    """

    u: Fraction
    r: Fraction
    s: Fraction
    t: Fraction

    def __init__(self, u, r, s, t):
        object.__setattr__(self, "u", _F(u))
        object.__setattr__(self, "r", _F(r))
        object.__setattr__(self, "s", _F(s))
        object.__setattr__(self, "t", _F(t))

    @classmethod
    def identity(cls) -> "ModelMap":
        return cls(1, 0, 0, 0)

    def is_identity(self) -> bool:
        return (self.u, self.r, self.s, self.t) == (1, 0, 0, 0)

    def compose(self, then: "ModelMap") -> "ModelMap":
        """self followed by `then` (self: m->m1, then: m1->m2)."""
        u1, r1, s1, t1 = self.u, self.r, self.s, self.t
        u2, r2, s2, t2 = then.u, then.r, then.s, then.t
        return ModelMap(
            u1 * u2,
            r1 + u1 * u1 * r2,
            s1 + u1 * s2,
            t1 + u1 * u1 * r2 * s1 + u1**3 * t2,
        )

    def inverse(self) -> "ModelMap":
        u, r, s, t = self.u, self.r, self.s, self.t
        return ModelMap(1 / u, -r / u**2, -s / u, (r * s - t) / u**3)

    def point(self, x, y) -> tuple[Fraction, Fraction]:
        x, y = _F(x), _F(y)
        return ((x - self.r) / self.u**2, (y - self.s * (x - self.r) - self.t) / self.u**3)

    def x_forward(self, x) -> Fraction:
        """x-coordinate on the target model."""
        return (_F(x) - self.r) / self.u**2

    def x_back(self, x2) -> Fraction:
        return self.u**2 * _F(x2) + self.r

    def kernel_poly_forward(self, k: PolyQ) -> PolyQ:
        """Transform a monic kernel polynomial to target-model coordinates."""
        return k.compose_linear(self.u**2, self.r).monic()


# -- points and the group law -------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    """Affine point or the point at infinity on a fixed model."""

    x: Fraction | None = None
    y: Fraction | None = None

    @classmethod
    def infinity(cls) -> "CurvePoint":
        return cls(None, None)

    @property
    def is_infinity(self) -> bool:
        return self.x is None


def point_on(m: WeierstrassModel, x, y) -> CurvePoint:
    x, y = _F(x), _F(y)
    if not m.on_curve(x, y):
        raise ValueError(f"({x}, {y}) is not on {m}")
    return CurvePoint(x, y)


def point_neg(m: WeierstrassModel, P: CurvePoint) -> CurvePoint:
    if P.is_infinity:
        return P
    return CurvePoint(P.x, -P.y - m.a1 * P.x - m.a3)


def point_add(m: WeierstrassModel, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y2 == -y1 - m.a1 * x2 - m.a3:
            return CurvePoint.infinity()
        lam = (3 * x1 * x1 + 2 * m.a2 * x1 + m.a4 - m.a1 * y1) / (2 * y1 + m.a1 * x1 + m.a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + m.a1 * lam - m.a2 - x1 - x2
    y3 = -(lam + m.a1) * x3 - nu - m.a3
    return CurvePoint(x3, y3)


def point_mul(m: WeierstrassModel, n: int, P: CurvePoint) -> CurvePoint:
    if n < 0:
        return point_mul(m, -n, point_neg(m, P))
    R = CurvePoint.infinity()
    while n:
        if n & 1:
            R = point_add(m, R, P)
        P = point_add(m, P, P)
        n >>= 1
    return R


# -- torsion probes --------------------------------------------------------------


def rational_p_torsion_xs(m: WeierstrassModel, p: int) -> list[Fraction]:
    """Rational roots of the p-division polynomial (candidate torsion x's)."""
    from .isogeny import division_poly

    return division_poly(m, p).rational_roots()


def has_rational_p_torsion(m: WeierstrassModel, p: int) -> bool:
    """Is there a rational point of exact order p (p odd prime)?

    Detected by factoring the p-division polynomial and checking that the
    completed-square ordinate value is a rational square at some root.
    """
    from .polys import PolyQ as _P  # noqa: F401  (import kept local: cycle)
    from .exact import is_square_rational

    g = m.ordinate_square()
    return any(is_square_rational(g(x0)) for x0 in rational_p_torsion_xs(m, p))


def torsion_exclusion_twists(m: WeierstrassModel, poly: PolyQ) -> dict[int, Fraction]:
    """Map d -> x0 for squarefree d where the twist by d makes some rational
    root x0 of `poly` the x-coordinate of a rational point.

    On the twist, the ordinate square at the scaled root is d^3 g(x0) times a
    rational square, so the twisted point is rational exactly when d equals
    the squarefree part of g(x0).
    """
    g = m.ordinate_square()
    out: dict[int, Fraction] = {}
    for x0 in poly.rational_roots():
        gx = g(x0)
        if gx == 0:
            continue  # 2-torsion x; impossible for odd-order kernels
        out.setdefault(squarefree_part(gx), x0)
    return out


# -- isomorphism testing -----------------------------------------------------------


def isomorphism(m1: WeierstrassModel, m2: WeierstrassModel):
    """The ModelMap carrying m1 to m2 over Q, or None.

    u^2 is pinned by (c4, c6, disc); the two sign choices of u are tried and
    each candidate (u, r, s, t) is validated exactly against all five
    coefficient laws.
    """
    usq: Fraction | None = None
    if m1.c4 != 0 and m1.c6 != 0:
        if m2.c4 == 0 or m2.c6 == 0:
            return None
        usq = (m1.c6 * m2.c4) / (m1.c4 * m2.c6)
    elif m1.c4 == 0:  # j = 0: u^6 = c6/c6', cube root is unique over Q
        if m2.c4 != 0:
            return None
        ratio = m1.c6 / m2.c6
        usq = _rational_root(ratio, 3)
    else:  # j = 1728: u^4 = c4/c4'
        if m2.c6 != 0 or m2.c4 == 0:
            return None
        ratio = m1.c4 / m2.c4
        usq = _rational_root(ratio, 2)
        if usq is not None and usq < 0:
            usq = None
    if usq is None or usq <= 0:
        return None
    u = _rational_root(usq, 2)
    if u is None:
        return None
    for uu in (u, -u):
        try:
            t = _connecting_map(m1, m2, uu)
        except ValueError:
            continue
        return t
    return None


def _rational_root(q: Fraction, n: int):
    """Rational n-th root of q when it exists (unique for odd n, >=0 for even)."""
    if q == 0:
        return Fraction(0)
    sign = 1
    if q < 0:
        if n % 2 == 0:
            return None
        sign = -1
        q = -q
    num = round(q.numerator ** (1 / n))
    den = round(q.denominator ** (1 / n))
    for dn in (num - 1, num, num + 1):
        for dd in (den - 1, den, den + 1):
            if dn > 0 and dd > 0 and Fraction(dn, dd) ** n == q:
                return sign * Fraction(dn, dd)
    return None

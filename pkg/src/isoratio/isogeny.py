"""Rational p-isogenies: division polynomials, Velu's formulas, duals, and
the differential ratio alpha with phi^* w_B = alpha * w_A.

Velu sums over the kernel are evaluated by trace computations in
Q[T]/(kernel), so irrational kernel points never need to be represented.
The y-coordinate map is not stored: it is pinned by the x-map, the codomain
and alpha through the pullback identity for the invariant differential, and
that identity (checked exactly in Q[x,y] modulo the curve) is the acceptance
test for a kernel candidate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import DualNotFoundError, InvariantViolation, NotAKernelError
from .exact import lvaluation
from .polys import PolyQ
from .weierstrass import ModelMap, WeierstrassModel, isomorphism

_DIVPOLY_CACHE: dict[tuple, PolyQ] = {}


def division_poly(m: WeierstrassModel, p: int) -> PolyQ:
    """The p-division polynomial in x for odd p, via the standard recurrence.

    psi_n is represented by its x-part f_n (psi_n = f_n for n odd,
    psi_n = f_n * psi_2 for n even), with psi_2^2 = 4x^3 + b2 x^2 + 2b4 x + b6.
    """
    if p % 2 == 0 or p < 3:
        raise ValueError("odd p >= 3 required")
    key = (m.a_invariants(), p)
    if key in _DIVPOLY_CACHE:
        return _DIVPOLY_CACHE[key]
    b2, b4, b6, b8 = m.b2, m.b4, m.b6, m.b8
    g = PolyQ((b6, 2 * b4, b2, 4))
    f: dict[int, PolyQ] = {
        0: PolyQ(),
        1: PolyQ((1,)),
        2: PolyQ((1,)),
        3: PolyQ((b8, 3 * b6, 3 * b4, b2, 3)),
        4: PolyQ(
            (
                b4 * b8 - b6 * b6,
                b2 * b8 - b4 * b6,
                10 * b8,
                10 * b6,
                5 * b4,
                b2,
                2,
            )
        ),
    }

    def get(n: int) -> PolyQ:
        if n in f:
            return f[n]
        k = n // 2
        if n % 2 == 1:
            if k % 2 == 0:
                r = get(k + 2) * get(k) ** 3 * g * g - get(k - 1) * get(k + 1) ** 3
            else:
                r = get(k + 2) * get(k) ** 3 - get(k - 1) * get(k + 1) ** 3 * g * g
        else:
            r = get(k) * (get(k + 2) * get(k - 1) ** 2 - get(k - 2) * get(k + 1) ** 2)
        f[n] = r
        return r

    out = get(p)
    _DIVPOLY_CACHE[key] = out
    return out


# -- trace machinery over Q[T]/(kernel) -----------------------------------------


def _power_sums(k: PolyQ, upto: int) -> list[Fraction]:
    """Power sums of the roots of the monic polynomial k (Newton's identities)."""
    m = k.degree
    e = [Fraction(0)] * (m + 1)  # elementary symmetric: e[j]
    for j in range(m + 1):
        e[j] = (-1) ** j * k[m - j]
    p = [Fraction(m)]
    for kk in range(1, upto + 1):
        acc = Fraction(0)
        for i in range(1, min(kk - 1, m) + 1):
            acc += (-1) ** (i - 1) * e[i] * p[kk - i]
        if kk <= m:
            acc += (-1) ** (kk - 1) * kk * e[kk]
        p.append(acc)
    return p


def _trace_times_quotient(k: PolyQ, h: PolyQ) -> PolyQ:
    """P(x) = sum over roots T of k of h(T) * k(x)/(x - T).

    Uses k(x)/(x-T) = sum_j (sum_{i>j} c_i T^{i-1-j}) x^j with c = coeffs(k),
    so P's x^j coefficient is a finite sum of trace values tr(h * T^e).
    """
    m = k.degree
    ps = _power_sums(k, h.degree + m)
    tr_pow = lambda e: ps[e]  # noqa: E731

    def tr_h_shift(shift: int) -> Fraction:
        return sum((c * tr_pow(i + shift) for i, c in enumerate(h.coeffs)), Fraction(0))

    out = []
    for j in range(m):
        acc = Fraction(0)
        for i in range(j + 1, m + 1):
            acc += k[i] * tr_h_shift(i - 1 - j)
        out.append(acc)
    return PolyQ(out)


@dataclass(frozen=True)
class Isogeny:
    """A rational p-isogeny phi: domain -> codomain with exact maps.

    x_num/x_den give the x-map; kernel_poly is monic of degree (p-1)/2 and
    divides the p-division polynomial of the domain.  alpha is the pullback
    ratio phi^* w_codomain = alpha * w_domain on the stored models.
    """

    domain: WeierstrassModel
    codomain: WeierstrassModel
    p: int
    kernel_poly: PolyQ
    x_num: PolyQ
    x_den: PolyQ
    alpha: Fraction

    def __repr__(self):
        return f"Isogeny(p={self.p}, {self.domain} -> {self.codomain}, kernel={self.kernel_poly})"

    # -- model changes -----------------------------------------------------------
    def with_codomain_map(self, t: ModelMap) -> "Isogeny":
        """Postcompose with the model change t on the codomain."""
        new_cod = self.codomain.transformed(t)
        num = (self.x_num - t.r * self.x_den) * (1 / t.u**2)
        return replace(self, codomain=new_cod, x_num=num, alpha=self.alpha * t.u)

    def with_domain_map(self, t: ModelMap) -> "Isogeny":
        """Precompose with the inverse of the model change t on the domain."""
        new_dom = self.domain.transformed(t)
        usq, r = t.u**2, t.r
        num = self.x_num.compose_linear(usq, r)
        den = self.x_den.compose_linear(usq, r)
        # renormalize so den is monic, keeping num/den reduced
        lc = den.lead
        num, den = num * (1 / lc), den * (1 / lc)
        ker = t.kernel_poly_forward(self.kernel_poly)
        return replace(self, domain=new_dom, x_num=num, x_den=den, kernel_poly=ker, alpha=self.alpha / t.u)

    def minimized(self) -> "Isogeny":
        """Equivalent isogeny on the global minimal models of both sides."""
        out = self
        _, td = out.domain.minimal_model()
        if not td.is_identity():
            out = out.with_domain_map(td)
        _, tc = out.codomain.minimal_model()
        if not tc.is_identity():
            out = out.with_codomain_map(tc)
        return out

    def negated(self) -> "Isogeny":
        """Composition with [-1] on the codomain (same x-map, alpha flips)."""
        return replace(self, alpha=-self.alpha)

    def validate(self) -> bool:
        """Exact re-check of the codomain identity on the stored models."""
        return _satisfies_codomain(self)

    # -- evaluation ---------------------------------------------------------------
    def x_map(self, x: Fraction) -> Fraction:
        den = self.x_den(x)
        if den == 0:
            raise ZeroDivisionError("kernel x-coordinate")
        return self.x_num(x) / den

    def __call__(self, xy):
        """Image of an affine rational point (None means the point at infinity)."""
        if xy is None:
            return None
        x, y = Fraction(xy[0]), Fraction(xy[1])
        if self.x_den(x) == 0:
            return None
        X = self.x_map(x)
        Y = self._y_image(x, y, X)
        return (X, Y)

    def _y_image(self, x, y, X):
        d = self.domain
        c = self.codomain
        num = self.x_num
        den = self.x_den
        # X'(x) as a rational value
        dx = (num.deriv()(x) * den(x) - num(x) * den.deriv()(x)) / den(x) ** 2
        eta = 2 * y + d.a1 * x + d.a3
        return (dx * eta / self.alpha - c.a1 * X - c.a3) / 2

    # -- mod-q evaluation (validation helper) ---------------------------------------
    def reduce_point(self, pt, q: int):
        """Image of an affine point mod q; None encodes infinity."""
        if pt is None:
            return None
        x, y = pt
        den = self.x_den.eval_mod(x, q)
        if den % q == 0:
            return None
        num = self.x_num.eval_mod(x, q)
        X = num * pow(den, -1, q) % q
        dnum = self.x_num.deriv().eval_mod(x, q)
        dden = self.x_den.deriv().eval_mod(x, q)
        dx = (dnum * den - num * dden) * pow(den * den % q, -1, q) % q
        d, c = self.domain, self.codomain
        eta = (2 * y + _fr_mod(d.a1, q) * x + _fr_mod(d.a3, q)) % q
        al = self.alpha
        alinv = al.denominator * pow(al.numerator % q, -1, q) % q
        Y = (dx * eta % q * alinv - _fr_mod(c.a1, q) * X - _fr_mod(c.a3, q)) * pow(2, -1, q) % q
        return (X, Y % q)


# -- Velu construction ----------------------------------------------------------


def velu(m: WeierstrassModel, kernel_poly: PolyQ) -> Isogeny:
    """Isogeny with the given monic kernel polynomial, by Velu's formulas.

    Validation: the kernel polynomial must divide the p-division polynomial
    and the constructed maps must satisfy the codomain equation identically
    in Q[x,y] modulo the domain equation; otherwise NotAKernelError.
    """
    k = kernel_poly.monic()
    deg = k.degree
    p = 2 * deg + 1
    if p < 3 or p % 2 == 0:
        raise NotAKernelError(f"kernel degree {deg} does not give an odd prime")
    psi = division_poly(m, p)
    if not k.divides(psi):
        raise NotAKernelError("kernel polynomial does not divide the p-division polynomial")

    b2, b4, b6 = m.b2, m.b4, m.b6
    tpoly = PolyQ((b4, b2, 6))  # 6T^2 + b2 T + b4
    upoly = PolyQ((b6, 2 * b4, b2, 4))  # ordinate square g(T)
    ps = _power_sums(k, 3)
    t_sum = 6 * ps[2] + b2 * ps[1] + b4 * ps[0]
    u_sum = 4 * ps[3] + b2 * ps[2] + 2 * b4 * ps[1] + b6 * ps[0]
    xt_sum = 6 * ps[3] + b2 * ps[2] + b4 * ps[1]
    w_sum = u_sum + xt_sum

    cod = WeierstrassModel(m.a1, m.a2, m.a3, m.a4 - 5 * t_sum, m.a6 - b2 * t_sum - 7 * w_sum)

    pt = _trace_times_quotient(k, tpoly)
    pu = _trace_times_quotient(k, upoly)
    x = PolyQ.x()
    num = x * k * k + pt * k + pu * k.deriv() - pu.deriv() * k
    den = k * k
    iso = Isogeny(m, cod, p, k, num, den, Fraction(1))

    if not _satisfies_codomain(iso):
        raise NotAKernelError("Velu maps do not satisfy the codomain equation")
    _spot_check_mod_q(iso)
    return iso


def _satisfies_codomain(iso: Isogeny) -> bool:
    """Exact identity check in Q[x,y]/(domain curve), denominators cleared."""
    m, c = iso.domain, iso.codomain
    K = iso.x_den  # = kernel^2 here, but any denominator works
    N = iso.x_num
    # ring elements are pairs (P, Q) standing for P(x) + Q(x) y
    R = m.rhs_cubic()  # y^2 = R(x) - (a1 x + a3) y
    lin = PolyQ((m.a3, m.a1))

    def mul(e1, e2):
        P1, Q1 = e1
        P2, Q2 = e2
        yy = Q1 * Q2
        return (P1 * P2 + yy * R, P1 * Q2 + P2 * Q1 - yy * lin)

    # W = (N' K - N K') * eta / alpha - A1 N K - A3 K^2  [times K for weight]
    Mnum = N.deriv() * K - N * K.deriv()
    eta = (PolyQ((0, m.a1)) + PolyQ((m.a3,)), PolyQ((2,)))
    ai = 1 / iso.alpha
    W = (
        (Mnum * eta[0]) * ai - c.a1 * N * K - c.a3 * K * K,
        (Mnum * eta[1]) * ai,
    )
    W2 = mul(W, W)
    term_xy = (2 * c.a1 * N * K * W[0], 2 * c.a1 * N * K * W[1])
    term_y = (2 * c.a3 * K * K * W[0], 2 * c.a3 * K * K * W[1])
    rhs = (
        4 * (N**3 + c.a2 * N * N * K + c.a4 * N * K * K + c.a6 * K**3) * K,
        PolyQ(),
    )
    total = (
        W2[0] + term_xy[0] + term_y[0] - rhs[0],
        W2[1] + term_xy[1] + term_y[1] - rhs[1],
    )
    return total[0].is_zero() and total[1].is_zero()


def _fr_mod(fr: Fraction, q: int) -> int:
    return fr.numerator * pow(fr.denominator, -1, q) % q


def _bad_product(iso: Isogeny) -> int:
    """Primes dividing this avoid every denominator and bad reduction."""
    bad = abs(
        (iso.domain.disc * iso.codomain.disc).numerator
        * (iso.domain.disc * iso.codomain.disc).denominator
        * iso.p
        * iso.alpha.numerator
        * iso.alpha.denominator
    )
    for a in (*iso.domain.a_invariants(), *iso.codomain.a_invariants()):
        bad *= a.denominator
    for cf in (*iso.x_num.coeffs, *iso.x_den.coeffs, *iso.kernel_poly.coeffs):
        bad *= cf.denominator
    return bad


def _good_validation_primes(iso: Isogeny, count: int = 2) -> list[int]:
    from .exact import next_prime

    bad = _bad_product(iso)
    out, q = [], 3
    while len(out) < count:
        q = next_prime(q)
        if bad % q:
            out.append(q)
    return out


def _ff_points(m: WeierstrassModel, q: int, want: int, rng: random.Random):
    """Up to `want` affine points of the reduction mod q (q a good prime)."""
    a1, a2, a3, a4, a6 = (int(a.numerator * pow(a.denominator, -1, q)) % q for a in m.a_invariants())
    pts = []
    xs = list(range(q))
    rng.shuffle(xs)
    inv2 = pow(2, -1, q)
    for x in xs:
        rhs = (4 * (x**3 + a2 * x * x + a4 * x + a6) + (a1 * x + a3) ** 2) % q
        if rhs == 0:
            es = (0,)
        elif pow(rhs, (q - 1) // 2, q) == 1:
            e = _sqrt_mod(rhs, q)
            es = (e, q - e)
        else:
            continue
        for e in es:
            pts.append((x, (e - a1 * x - a3) * inv2 % q))
        if len(pts) >= want:
            break
    return pts


def _sqrt_mod(a: int, q: int) -> int:
    """Tonelli-Shanks (q odd prime, a a QR)."""
    if q % 4 == 3:
        return pow(a, (q + 1) // 4, q)
    s, e = q - 1, 0
    while s % 2 == 0:
        s //= 2
        e += 1
    n = 2
    while pow(n, (q - 1) // 2, q) != q - 1:
        n += 1
    x = pow(a, (s + 1) // 2, q)
    b = pow(a, s, q)
    g = pow(n, s, q)
    r = e
    while True:
        t, mm = b, 0
        while t != 1:
            t = t * t % q
            mm += 1
        if mm == 0:
            return x
        gs = pow(g, 1 << (r - mm - 1), q)
        g = gs * gs % q
        x = x * gs % q
        b = b * g % q
        r = mm


def _ff_add(a, P, Q, q):
    a1, a2, a3, a4, a6 = a
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2 and (y2 + y1 + a1 * x2 + a3) % q == 0:
        return None
    if x1 == x2:
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) * pow(2 * y1 + a1 * x1 + a3, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    nu = (y1 - lam * x1) % q
    x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % q
    y3 = (-(lam + a1) * x3 - nu - a3) % q
    return (x3, y3)


def _ff_mul(a, n, P, q):
    R = None
    while n:
        if n & 1:
            R = _ff_add(a, R, P, q)
        P = _ff_add(a, P, P, q)
        n >>= 1
    return R


def _ff_coeffs(m: WeierstrassModel, q: int):
    return tuple(int(a.numerator * pow(a.denominator, -1, q)) % q for a in m.a_invariants())


def _spot_check_mod_q(iso: Isogeny, points: int = 3):
    """Velu post-validation: mapped points land on the codomain mod two good primes."""
    rng = random.Random(20260810)
    for q in _good_validation_primes(iso):
        ac = _ff_coeffs(iso.codomain, q)
        for pt in _ff_points(iso.domain, q, points, rng):
            img = iso.reduce_point(pt, q)
            if img is None:
                continue
            X, Y = img
            a1, a2, a3, a4, a6 = ac
            lhs = (Y * Y + a1 * X * Y + a3 * Y) % q
            rhs = (X**3 + a2 * X * X + a4 * X + a6) % q
            if lhs != rhs:
                raise InvariantViolation(f"mapped point off the codomain mod {q}")


# -- enumeration, duals, gamma ------------------------------------------------------


def rational_p_isogenies(m: WeierstrassModel, p: int) -> list[Isogeny]:
    """All p-isogenies of m defined over Q (possibly empty), minimized models."""
    psi = division_poly(m, p)
    factors = [f for f, _ in psi.factor()]
    target = (p - 1) // 2
    found = []
    seen = set()

    def subsets(i, degree_left, current):
        if degree_left == 0:
            yield list(current)
            return
        if i >= len(factors):
            return
        f = factors[i]
        if f.degree <= degree_left:
            current.append(f)
            yield from subsets(i + 1, degree_left - f.degree, current)
            current.pop()
        yield from subsets(i + 1, degree_left, current)

    for combo in subsets(0, target, []):
        k = PolyQ((1,))
        for f in combo:
            k = k * f
        k = k.monic()
        if k.coeffs in seen:
            continue
        seen.add(k.coeffs)
        try:
            iso = velu(m, k)
        except NotAKernelError:
            continue
        found.append(iso.minimized())
    found.sort(key=lambda i: i.kernel_poly.coeffs)
    return found


def dual(phi: Isogeny) -> Isogeny:
    """The isogeny psi with psi o phi = [p], validated on reductions.

    Candidates are the rational p-isogenies of the codomain; the one whose
    composite with phi acts as [p] on sampled points modulo two good primes
    is returned, sign-normalized so the composite is [p] and not [-p].
    """
    p = phi.p
    rng = random.Random(777)
    for cand in rational_p_isogenies(phi.codomain, p):
        t = isomorphism(cand.codomain, phi.domain)
        if t is None:
            continue
        psi = cand.with_codomain_map(t)
        verdict = _is_multiplication_by_p(phi, psi, rng)
        if verdict == "yes":
            return psi
        if verdict == "negated":
            return psi.negated()
    raise DualNotFoundError(f"no dual found for {phi}")


def _is_multiplication_by_p(phi: Isogeny, psi: Isogeny, rng, points: int = 10, need: int = 5):
    """Does psi o phi act as [p] (or [-p] -> "negated") on the domain?

    Points whose p-multiple is the origin decide nothing (the reduction can
    be all p-torsion at small primes), so primes grow until enough decisive
    samples accumulate.
    """
    from .exact import next_prime

    bad = _bad_product(phi) * _bad_product(psi)
    checked_plus = checked_minus = 0
    q, rounds = 3, 0
    while rounds < 15 and checked_plus + checked_minus < need:
        q = next_prime(q)
        if bad % q == 0:
            continue
        rounds += 1
        a = _ff_coeffs(phi.domain, q)
        for pt in _ff_points(phi.domain, q, points, rng):
            mid = phi.reduce_point(pt, q)
            if mid is None:
                continue
            out = psi.reduce_point(mid, q)
            expect = _ff_mul(a, phi.p, pt, q)
            if expect is None and out is None:
                continue
            if out is None or expect is None:
                return "no"
            if out == expect:
                checked_plus += 1
                continue
            neg = (expect[0], (-expect[1] - a[0] * expect[0] - a[2]) % q)
            if out == neg:
                checked_minus += 1
            else:
                return "no"
    if checked_plus >= need and not checked_minus:
        return "yes"
    if checked_minus >= need and not checked_plus:
        return "negated"
    if checked_plus and checked_minus:
        return "no"
    return "inconclusive"


def gamma_p_exponent(phi: Isogeny) -> int:
    """v_p(alpha) on p-minimal models: the exponent with gamma_{phi,p} = p^v.

    Global minimal models are minimal at p, so minimizing both sides realizes
    the Neron-model normalization in dimension 1.  gamma_{phi,l} = 1 for any
    l != p.
    """
    mini = phi.minimized()
    v = lvaluation(mini.alpha, phi.p)
    if v not in (0, 1):
        raise InvariantViolation(f"v_p(alpha) = {v} outside {{0,1}} after minimization")
    return int(v)

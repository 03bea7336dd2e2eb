"""Local and global Selmer ratios of rational p-isogenies.

All ratios are integer powers of p and are carried as integer exponents with
a per-place breakdown.  At a finite place the exponent is the p-valuation of
the Tamagawa ratio c_l(codomain)/c_l(domain), plus the differential-ratio
exponent at l = p; at the real place it is -1 exactly when the kernel has a
nonzero real point.  Twists of family members reuse the finite-place
breakdown (ramified good primes contribute nothing) and recompute only the
real place; the slow path builds the twisted isogeny outright, and the two
must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .errors import InvariantViolation, NonPPowerTamagawaRatio
from .exact import is_squarefree, kronecker, lvaluation
from .isogeny import Isogeny, division_poly, dual, gamma_p_exponent, velu
from .localdata import tate
from .polys import PolyQ
from .weierstrass import WeierstrassModel, torsion_exclusion_twists

INF_PLACE = "inf"

RANK_ASSUMPTION = (
    "selmer-side bound: rk + dim_Fp Sha[p] >= i is certified; "
    "rank 0 (L-value nonvanishing) is an external analytic assumption"
)


@dataclass(frozen=True)
class RatioExponent:
    """c = p^exponent with its per-place breakdown (absent places are 0)."""

    p: int
    exponent: int
    breakdown: tuple  # sorted tuple of (place, exponent) pairs

    def __post_init__(self):
        if sum(e for _, e in self.breakdown) != self.exponent:
            raise InvariantViolation("breakdown does not sum to the exponent")

    @classmethod
    def make(cls, p: int, parts: dict) -> "RatioExponent":
        items = tuple(sorted(parts.items(), key=lambda kv: (kv[0] == INF_PLACE, kv[0] if kv[0] != INF_PLACE else 0)))
        return cls(p, sum(parts.values()), items)

    def as_dict(self) -> dict:
        return dict(self.breakdown)

    def at(self, place) -> int:
        return self.as_dict().get(place, 0)

    def nonzero(self) -> dict:
        return {pl: e for pl, e in self.breakdown if e != 0}

    def same_ratio(self, other: "RatioExponent") -> bool:
        return self.p == other.p and self.exponent == other.exponent and self.nonzero() == other.nonzero()

    def __str__(self):
        return f"{self.p}^{self.exponent}"


@dataclass(frozen=True)
class BoundRecord:
    """Per-twist certified lower bound for rk + dim_Fp Sha[p] on the twisted
    domain, or the torsion-obstruction reason that excludes the twist."""

    d: int
    exponent: int
    excluded: str | None
    bound: int | None
    assumption: str = RANK_ASSUMPTION

    def __post_init__(self):
        if (self.excluded is None) == (self.bound is None):
            raise InvariantViolation("exactly one of bound/excluded must be set")


@dataclass(frozen=True)
class ApplicabilityReport:
    p: int
    exponent: int
    ratio_at_least_p_squared: bool
    two_torsion_not_z2: bool
    modular_quotient_asserted: bool | None
    twist_family_bound_applies: bool  # needs modular quotient + c(phi) >= p^2
    elliptic_positive_proportion_applies: bool  # needs c(phi) >= p^2 + E[2](Q) != Z/2Z


# -- local pieces -----------------------------------------------------------------


def support_primes(phi: Isogeny) -> list[int]:
    """Primes dividing 2 p N: the bad primes of both models plus 2 and p."""
    bad = set(phi.domain.bad_primes()) | set(phi.codomain.bad_primes()) | {2, phi.p}
    return sorted(bad)


def bad_primes_of(phi: Isogeny) -> list[int]:
    return sorted(set(phi.domain.bad_primes()) | set(phi.codomain.bad_primes()))


def local_ratio(phi: Isogeny, l: int) -> int:
    """Exponent of c_l(phi): v_p of the Tamagawa ratio, plus the
    differential-ratio exponent when l = p."""
    p = phi.p
    ca = tate(phi.domain, l).tamagawa
    cb = tate(phi.codomain, l).tamagawa
    ratio = Fraction(cb, ca)
    e = lvaluation(ratio, p)
    if ratio != Fraction(p) ** int(e):
        raise NonPPowerTamagawaRatio(f"c_{l} ratio {ratio} is not a power of {p}")
    e = int(e)
    if l == p:
        e += gamma_p_exponent(phi)
    return e


def kernel_has_real_point(phi: Isogeny, flip: bool = False) -> bool:
    """Does the kernel have a nonzero real point (after an optional sign flip
    of the ordinate square, which is how a negative twist acts at infinity)?

    Complex conjugation acts on the cyclic kernel by a scalar, so either no
    kernel x-coordinate is real or all are; among real x's the ordinate-square
    sign is constant.  Both facts are asserted.
    """
    k = phi.kernel_poly
    nreal = k.count_real_roots()
    if nreal == 0:
        return False
    if nreal != k.degree:
        raise InvariantViolation("kernel with real x-coordinates must have all of them real")
    g = phi.domain.ordinate_square()
    signs = set()
    for iv in k.isolate_real_roots():
        signs.add(k.refine_root(iv, g))
    if len(signs) != 1:
        raise InvariantViolation("mixed ordinate signs on a cyclic kernel")
    s = signs.pop()
    return (s < 0) if flip else (s > 0)


def infinity_ratio(phi: Isogeny) -> int:
    """Exponent of c_infinity(phi) = 1/#ker(R): -1 iff a real kernel point exists."""
    return -1 if kernel_has_real_point(phi) else 0


def global_ratio(phi: Isogeny, badset=None) -> RatioExponent:
    """Breakdown over badset and infinity; all other places are 0 exactly
    (good unramified primes contribute nothing and gamma is trivial away
    from p)."""
    if badset is None:
        badset = sorted(set(bad_primes_of(phi)) | {phi.p})
    else:
        badset = sorted(set(badset))
        missing = set(bad_primes_of(phi)) - set(badset)
        if missing:
            raise ValueError(f"badset misses bad primes {sorted(missing)}")
    parts = {l: local_ratio(phi, l) for l in badset}
    parts[INF_PLACE] = infinity_ratio(phi)
    return RatioExponent.make(phi.p, parts)


# -- twists -----------------------------------------------------------------------


def twist_isogeny(phi: Isogeny, d: int) -> Isogeny:
    """The d-th quadratic twist of phi, built explicitly on minimal models."""
    if d == 0 or not is_squarefree(d):
        raise ValueError("d must be a nonzero squarefree integer")
    if d == 1:
        return phi
    dom = phi.domain
    short, tshort = dom.short_model()
    k_short = tshort.kernel_poly_forward(phi.kernel_poly)
    twisted_short = WeierstrassModel(0, 0, 0, short.a4 * d * d, short.a6 * d**3)
    k_twist = k_short.scale_roots(d)
    hints = tuple(set(bad_primes_of(phi)) | {2, 3, phi.p} | set(_prime_divisors(d)))
    dom_min, tmin = twisted_short.minimal_model(hint_primes=hints)
    k_min = tmin.kernel_poly_forward(k_twist)
    iso = velu(dom_min, k_min)
    cod_min, tc = iso.codomain.minimal_model(hint_primes=hints)
    if not tc.is_identity():
        iso = iso.with_codomain_map(tc)
    return iso


def _prime_divisors(d: int) -> list[int]:
    from .exact import factorize

    return list(factorize(abs(d)))


def is_unit_square_at_support(d: int, support) -> bool:
    """Is d a square in Z_l^x for every l in the support?  At 2 this is the
    strict condition d = 1 mod 8 (Kronecker (d/2)=1 would also admit d = -1
    mod 8, which does not trivialize the twist over Q_2)."""
    for l in support:
        if l == 2:
            if d % 8 != 1:
                return False
        elif kronecker(d, l) != 1:
            return False
    return True


def twist_ratio(phi: Isogeny, d: int, method: str = "auto") -> RatioExponent:
    """Exponent of c(phi_d).

    Fast path (d a unit square at every support prime): the finite-place
    breakdown of phi is reused -- ramified good primes contribute nothing --
    and only the real place is recomputed.  Slow path: build the twisted
    isogeny and run the breakdown from scratch.  Property tests pin the two
    paths to each other.
    """
    if d == 0 or not is_squarefree(d):
        raise ValueError("d must be a nonzero squarefree integer")
    if method not in ("auto", "fast", "slow"):
        raise ValueError("method must be auto, fast or slow")
    fast_ok = is_unit_square_at_support(d, support_primes(phi))
    if method == "fast" and not fast_ok:
        raise ValueError("fast path requires d to be a unit square at the support")
    if method == "slow" or (method == "auto" and not fast_ok):
        psi_d = twist_isogeny(phi, d)
        badset = sorted(set(bad_primes_of(psi_d)) | {phi.p})
        return global_ratio(psi_d, badset)
    base = global_ratio(phi)
    parts = {pl: e for pl, e in base.breakdown if pl != INF_PLACE}
    parts[INF_PLACE] = -1 if kernel_has_real_point(phi, flip=(d < 0)) else 0
    return RatioExponent.make(phi.p, parts)


# -- duality / composition consistency ------------------------------------------------


@lru_cache(maxsize=None)
def dual_cached(phi: Isogeny) -> Isogeny:
    return dual(phi)


def composition_check(phi: Isogeny, places=None) -> dict:
    """exponent(c_v(phi)) + exponent(c_v(dual)) against the [p] baseline:
    0 at finite v != p, +1 at v = p, -1 at infinity.  Returns place -> bool."""
    psi = dual_cached(phi)
    if places is None:
        places = sorted(set(bad_primes_of(phi)) | {phi.p}) + [INF_PLACE]
    out = {}
    for v in places:
        if v == INF_PLACE:
            got = infinity_ratio(phi) + infinity_ratio(psi)
            out[v] = got == -1
        else:
            got = local_ratio(phi, v) + local_ratio(psi, v)
            out[v] = got == (1 if v == phi.p else 0)
    return out


# -- the Sha-rank bound per twist ------------------------------------------------------


@lru_cache(maxsize=None)
def exclusion_map(phi: Isogeny) -> tuple:
    """Finitely many twists where rational torsion obstructs the bound.

    A twist by squarefree d makes a rational root x0 of a torsion polynomial
    into a rational point exactly when d equals the squarefree part of the
    ordinate square g(x0) -- so the obstruction sets are finite and exact:
      - kernel points on the twisted domain,
      - any p-torsion on the twisted domain,
      - dual-kernel points on the twisted codomain.
    """
    out: dict[int, str] = {}
    dom, cod, p = phi.domain, phi.codomain, phi.p
    for d in torsion_exclusion_twists(dom, phi.kernel_poly):
        out.setdefault(d, "rational kernel point")
    for d in torsion_exclusion_twists(dom, division_poly(dom, p)):
        out.setdefault(d, "rational p-torsion point")
    psi = dual_cached(phi)
    for d in torsion_exclusion_twists(cod, psi.kernel_poly):
        out.setdefault(d, "rational dual-kernel point")
    return tuple(sorted(out.items()))


def sha_bound(phi: Isogeny, d: int, method: str = "auto") -> BoundRecord:
    """rk(domain_d) + dim_Fp Sha(domain_d)[p] >= max(i, 0) for the twisted
    isogeny's exponent i, unless a rational torsion point excludes d."""
    ratio = twist_ratio(phi, d, method=method)
    reason = dict(exclusion_map(phi)).get(d)
    if reason is not None:
        return BoundRecord(d=d, exponent=ratio.exponent, excluded=reason, bound=None)
    return BoundRecord(d=d, exponent=ratio.exponent, excluded=None, bound=max(ratio.exponent, 0))


def applicability(E: WeierstrassModel, phi: Isogeny, modular_quotient: bool | None = None) -> ApplicabilityReport:
    """Evaluate the two hypotheses exactly: c(phi) >= p^2, and E[2](Q) != Z/2Z."""
    if phi.domain != E:
        raise ValueError("phi must have domain E")
    exp = global_ratio(phi).exponent
    ratio_ok = exp >= 2
    tt_ok = E.two_torsion_order() != 2
    return ApplicabilityReport(
        p=phi.p,
        exponent=exp,
        ratio_at_least_p_squared=ratio_ok,
        two_torsion_not_z2=tt_ok,
        modular_quotient_asserted=modular_quotient,
        twist_family_bound_applies=bool(ratio_ok and modular_quotient),
        elliptic_positive_proportion_applies=bool(ratio_ok and tt_ok),
    )

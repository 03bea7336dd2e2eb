"""Brute-force estimation of local Selmer ratios from l-adic points.

The formula path computes c_l(phi) from Tamagawa numbers and the
differential ratio; this module estimates the same number directly from the
definition #coker/#ker on Q_l-points and must agree with the formula on the
regression suite.

Kernel orders are exact (certified root counting plus ordinate tests).  The
cokernel is statistical: the image of phi is an open subgroup of index
#coker, so its Haar measure is 1/#coker.  Haar measure on points is
|dx / (2y + a1 x + a3)|, i.e. weight |g(x)|^(-1/2) on the x-line, and the
x-line is cut into residue classes (stratified over x-valuations, boundary
classes near roots of g subdivided recursively) on which that weight and the
existence of points are provably constant -- so the class masses are exact.
What stays statistical is divisibility: each class gets a sampled
representative point, tested exactly by fiber analysis (Q_l-roots of
x_num - x * x_den, then ordinate tests), under the heuristic that
phi-divisibility is constant at the class radius.  Disagreement between
representatives of one class triggers subdivision; the seed and worker count
are recorded in every estimate.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .errors import InconclusiveSampling, InvariantViolation
from .exact import kronecker, lvaluation
from .isogeny import Isogeny
from .padic import (
    DEFAULT_PRECISION,
    PadicApprox,
    count_roots_in_Ql,
    escalating,
    eval_int_poly,
    is_square_in_Ql,
    is_square_rational_in_Ql,
    ql_roots,
)
from .polys import PolyQ
from .selmer import INF_PLACE

_NEG_STRATA = 5  # x-valuation strata v(x) = -1 .. -_NEG_STRATA
_MAX_DEPTH = 24  # subdivision cap for boundary classes
_REP_DIGITS = 10  # random digits beyond the class radius for representatives


@dataclass(frozen=True)
class OracleEstimate:
    place: object  # prime or "inf"
    kernel_order: int
    cokernel_order: int
    samples: int
    divisible_fraction: float
    exponent: int  # log_p(coker) - log_p(ker)
    seed: int
    workers: int
    note: str = ""


def _int_poly_and_scale(f: PolyQ) -> tuple[list[int], int]:
    """(den * f as integer coefficients, den); den^2 * f is a square iff f
    is, which is how rational polys feed the square test."""
    den = 1
    for c in f.coeffs:
        den = lcm(den, c.denominator)
    return [int(c * den) for c in f.coeffs], den


def _ordinate_exists(g_int: list[int], den: int, root: PadicApprox, l: int, prec: int) -> bool:
    """Is g(root) a square in Q_l, where g = g_int/den?  May escalate."""
    val = eval_int_poly(g_int, root)
    scaled = val if den == 1 else val * PadicApprox.from_rational(den, l, max(prec, val.precision))
    return is_square_in_Ql(scaled)


def kernel_order_local(phi: Isogeny, place) -> int:
    """#ker(phi)(Q_l) (or over R), exactly; always 1 or p for a cyclic kernel.

    Count the kernel-polynomial roots in the local field that carry a local
    ordinate (2 points each), add 1 for the identity, and certify the total.
    """
    p = phi.p
    k = phi.kernel_poly
    g = phi.domain.ordinate_square()
    if place == INF_PLACE:
        valid = 0
        for iv in k.isolate_real_roots():
            if k.refine_root(iv, g) > 0:
                valid += 1
        total = 1 + 2 * valid
    else:
        l = int(place)
        g_int, den = _int_poly_and_scale(g)

        def run(prec: int) -> int:
            count = 0
            for root in ql_roots(k, l, prec):
                if _ordinate_exists(g_int, den, root, l, prec):
                    count += 1
            return count

        total = 1 + 2 * escalating(run)
    if total not in (1, p):
        raise InvariantViolation(f"kernel order {total} not in {{1, {p}}}")
    return total


def _phi_divisible(phi: Isogeny, xs: Fraction, l: int, prec: int) -> bool:
    """Is a point with x-coordinate xs in the image of phi on Q_l-points?

    Exact fiber analysis: preimage x's are Q_l-roots of x_num - xs*x_den
    (kernel x's never appear: they are poles, not roots).  Roots shared with
    the ordinate square are 2-torsion preimages whose ordinate is rational in
    x, hence automatically local; the rest get the square test.
    """
    P = (phi.x_num - xs * phi.x_den).squarefree_part()
    if P.degree <= 0:
        return False
    g = phi.domain.ordinate_square()
    h = P.gcd(g)
    if h.degree > 0:
        if count_roots_in_Ql(h, l, prec) > 0:
            return True
        P = P // h
        if P.degree <= 0:
            return False
    g_int, den = _int_poly_and_scale(g)
    for root in ql_roots(P, l, prec):
        if _ordinate_exists(g_int, den, root, l, prec):
            return True
    return False


# -- exact class decomposition of the x-line ------------------------------------


@dataclass(frozen=True)
class _XClass:
    """x = l^(-m) * (c + l^k * Z_l-unit-or-all): a point-carrying residue
    class with constant |g(x)| and constant ordinate existence."""

    m: int  # x-valuation stratum: v(x) = -m for m > 0, integral for m = 0
    c: int  # residue of the integral part u mod l^k (x = u / l^m)
    k: int  # class radius in u-digits
    mass: Fraction  # exact Haar mass of the points over the class


def _x_classes(g: PolyQ, l: int) -> tuple[list[_XClass], Fraction]:
    """Point-carrying classes and the (tiny) unresolved tail mass.

    The g-weight |g(x)|^(-1/2) is constant on {u = c mod l^k} once
    v(g) < k - 3m (three more digits at l = 2, for the mod-8 square test);
    boundary classes are subdivided until that holds or the depth cap bites.
    """
    out: list[_XClass] = []
    tail = Fraction(0)
    margin = 3 if l == 2 else 0

    def recurse(m: int, c: int, k: int):
        nonlocal tail
        x = Fraction(c, l**m)
        gx = g(x)
        vg = None if gx == 0 else int(lvaluation(gx, l))
        radius = k - 3 * m  # digits of g pinned by the class
        if vg is not None and vg < radius - margin:
            # weight and square class are constant here
            if vg % 2 or not is_square_rational_in_Ql(gx, l):
                return  # no points over this class
            mass = Fraction(l) ** (m - k) * Fraction(l) ** Fraction(vg, 2).numerator // 1
            mass = Fraction(l**m, l**k) * Fraction(l) ** (vg // 2)
            out.append(_XClass(m=m, c=c, k=k, mass=mass))
            return
        if k >= _MAX_DEPTH:
            # unresolved: bounded by the dx-mass times the best possible weight
            bound = Fraction(l**m, l**k) * Fraction(l) ** max((vg or radius) // 2, 0)
            tail += bound
            return
        for j in range(l):
            cc = c + j * l**k
            if m > 0 and k == 0 and cc % l == 0:
                continue  # u must stay a unit in negative strata
            recurse(m, cc, k + 1)

    for m in range(0, _NEG_STRATA + 1):
        recurse(m, 0, 0)
    return out, tail


def _class_representative(cl: _XClass, l: int, rng: random.Random) -> Fraction:
    u = cl.c + l**cl.k * rng.randrange(l**_REP_DIGITS)
    if cl.m > 0 and u % l == 0:  # keep u a unit (only possible when k = 0)
        u += l**cl.k
    return Fraction(u, l**cl.m)


def cokernel_order_sampled(
    phi: Isogeny,
    l: int,
    samples: int = 200,
    precision: int | None = None,
    seed: int = 0,
    workers: int = 1,
) -> OracleEstimate:
    """Estimate #coker(A(Q_l) -> B(Q_l)) and the local-ratio exponent.

    The divisible fraction must land within 0.15 of some 1/p^k (k <= 2),
    else InconclusiveSampling; the nearest power wins.  Runs with the same
    (seed, workers) reproduce exactly.
    """
    if samples < 100:
        raise ValueError("samples >= 100 required")
    p = phi.p
    prec = precision or DEFAULT_PRECISION
    g_b = phi.codomain.ordinate_square()
    classes, tail = _x_classes(g_b, l)
    if not classes:
        raise InconclusiveSampling(f"no local points found at l={l}")
    total = sum((cl.mass for cl in classes), Fraction(0))
    reps = max(1, samples // len(classes))

    def verdicts(chunk_classes, chunk_seed):
        rng = random.Random(chunk_seed)
        num = Fraction(0)
        tried = 0
        for cl in chunk_classes:
            votes = []
            for _ in range(reps):
                xs = _class_representative(cl, l, rng)
                tried += 1
                votes.append(escalating(lambda pr: _phi_divisible(phi, xs, l, pr), prec))
            if all(votes):
                num += cl.mass
            elif any(votes):
                # mixed verdicts: divisibility not constant at this radius
                raise InconclusiveSampling(
                    f"divisibility not locally constant on class {cl} at l={l} (seed {seed})"
                )
        return num, tried

    chunks = [classes[i::workers] for i in range(workers)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: verdicts(*a), [(ch, (seed, i)) for i, ch in enumerate(chunks)]))
    else:
        parts = [verdicts(ch, (seed, i)) for i, ch in enumerate(chunks)]
    num = sum((pp[0] for pp in parts), Fraction(0))
    tried = sum(pp[1] for pp in parts)

    frac = float(num / total)
    best_k, best_err = 0, abs(frac - 1.0)
    for kk in range(1, 3):
        err = abs(frac - p**-kk)
        if err < best_err:
            best_k, best_err = kk, err
    if best_err > 0.15:
        raise InconclusiveSampling(f"divisible fraction {frac:.4f} near no power of 1/{p} (seed {seed})")
    ker = kernel_order_local(phi, l)
    k0 = 0 if ker == 1 else 1
    return OracleEstimate(
        place=l,
        kernel_order=ker,
        cokernel_order=p**best_k,
        samples=tried,
        divisible_fraction=frac,
        exponent=best_k - k0,
        seed=seed,
        workers=workers,
        note=(
            f"{len(classes)} classes, tail bound {float(tail / (total + tail)):.2e}, "
            f"fraction {frac:.4f} matched 1/{p}^{best_k} within {best_err:.4f}"
        ),
    )


def oracle_estimate(phi: Isogeny, place, samples: int = 200, seed: int = 0, workers: int = 1, retries: int = 2) -> OracleEstimate:
    """Full local estimate at a finite place or at infinity.

    At infinity the cokernel is trivial (odd-degree isogeny on real points),
    so only the kernel side is measured.  Finite places retry inconclusive
    sampling with shifted seeds at doubled sample counts.
    """
    if place == INF_PLACE:
        ker = kernel_order_local(phi, place)
        k0 = 0 if ker == 1 else 1
        return OracleEstimate(
            place=place,
            kernel_order=ker,
            cokernel_order=1,
            samples=0,
            divisible_fraction=1.0,
            exponent=-k0,
            seed=seed,
            workers=workers,
            note="archimedean cokernel is trivial for odd degree",
        )
    attempt = 0
    while True:
        try:
            return cokernel_order_sampled(phi, int(place), samples=samples, seed=seed + attempt, workers=workers)
        except InconclusiveSampling:
            attempt += 1
            if attempt > retries:
                raise
            samples *= 2

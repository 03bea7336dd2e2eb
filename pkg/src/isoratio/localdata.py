"""Tate's algorithm at finite primes and the archimedean component count.

The full algorithm runs at every prime including 2 and 3: no c4/c6 shortcut.
Normalizing translations are found constructively (double roots of reduced
cubics, small searches at l = 2) and every claimed divisibility is asserted,
so a slip in a normalization becomes a loud failure instead of a wrong
Kodaira type.  Non-minimal models restart with u = l, so the output is
invariant under any integral change of model.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvariantViolation
from .exact import ivaluation, kronecker
from .weierstrass import WeierstrassModel

GOOD = "good"
SPLIT = "split multiplicative"
NONSPLIT = "nonsplit multiplicative"
ADDITIVE = "additive"


@dataclass(frozen=True)
class LocalData:
    prime: int
    kodaira: str
    tamagawa: int
    vdisc_min: int
    reduction: str

    def __post_init__(self):
        _check_kodaira_table(self)


@dataclass(frozen=True)
class RealData:
    components: int  # 2 iff disc > 0


_CACHE: dict[tuple, LocalData] = {}
_CACHE_LOCK = threading.Lock()


def real_data(m: WeierstrassModel) -> RealData:
    return RealData(components=2 if m.disc > 0 else 1)


def tate(m: WeierstrassModel, l: int) -> LocalData:
    """Kodaira type and Tamagawa number of m at l (memoized)."""
    key = (m.a_invariants(), l)
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is not None:
        return hit
    mi, _ = m.integral_model()
    a = tuple(int(x) for x in mi.a_invariants())
    data = _tate_integer(a, l)
    with _CACHE_LOCK:
        _CACHE[key] = data
    return data


# -- integer-model machinery ---------------------------------------------------


def _binvs(a):
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return b2, b4, b6, b8, c4, disc


def _translate(a, r, s, t):
    a1, a2, a3, a4, a6 = a
    return (
        a1 + 2 * s,
        a2 - s * a1 + 3 * r - s * s,
        a3 + r * a1 + 2 * t,
        a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
        a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1,
    )


def _quadroots(qa: int, qb: int, qc: int, l: int) -> bool:
    """Does qa Y^2 + qb Y + qc have a root mod l?"""
    qa, qb, qc = qa % l, qb % l, qc % l
    if l == 2:
        return qc == 0 or (qa + qb + qc) % 2 == 0
    if qa == 0:
        return qb != 0 or qc == 0
    return kronecker(qb * qb - 4 * qa * qc, l) >= 0


def _cubic_double_root(g3, g2, g1, g0, l):
    """(kind, root) for the cubic g3 T^3 + ... mod l: kind in
    {"separable", "double", "triple"}; root is the repeated root when any.

    A repeated root of a cubic over F_l always lies in F_l, so a residue
    scan with synthetic-division multiplicities is complete.
    """
    for r in range(l):
        if (g3 * r**3 + g2 * r * r + g1 * r + g0) % l:
            continue
        m = _mult_by_division((g0, g1, g2, g3), r, l)
        if m >= 2:
            return ("triple" if m >= 3 else "double"), r
    return "separable", None


def _mult_by_division(coeffs_low_first, r, l):
    """Multiplicity of the root r of a polynomial over F_l, by synthetic division."""
    cs = [c % l for c in reversed(coeffs_low_first)]  # highest first
    mult = 0
    while True:
        out, acc = [], 0
        for c in cs:
            acc = (acc * r + c) % l
            out.append(acc)
        if out[-1] % l != 0:
            return mult
        mult += 1
        cs = out[:-1]
        if not cs:
            return mult


def _cubic_roots_count(g2, g1, g0, l):
    """Number of roots in F_l of T^3 + g2 T^2 + g1 T + g0 (separable case)."""
    return sum(1 for r in range(l) if (r**3 + g2 * r * r + g1 * r + g0) % l == 0)


def _singular_point(a, l):
    """The unique singular point of the reduced curve mod l, as (r, t)."""
    a1, a2, a3, a4, a6 = a
    if l == 2:
        for r in (0, 1):
            for t in (0, 1):
                f = (t * t + a1 * r * t + a3 * t - r**3 - a2 * r * r - a4 * r - a6) % 2
                fx = (a1 * t - 3 * r * r - 2 * a2 * r - a4) % 2
                fy = (2 * t + a1 * r + a3) % 2
                if f == 0 and fx == 0 and fy == 0:
                    return r, t
        raise InvariantViolation("no singular point found mod 2")
    b2, b4, b6, b8, c4, disc = _binvs(a)
    # singular x = repeated root of 4x^3 + b2 x^2 + 2 b4 x + b6 mod l
    kind, r = _cubic_double_root(4, b2, 2 * b4, b6, l)
    if r is None:
        raise InvariantViolation("no singular point found")
    t = (-(a1 * r + a3) * pow(2, -1, l)) % l
    return r, t


def _tate_integer(a, l: int) -> LocalData:
    while True:
        res = _tate_once(a, l)
        if isinstance(res, tuple):  # restart with the u = l rescaling
            a = res
            continue
        return res


def _tate_once(a, l: int):
    b2, b4, b6, b8, c4, disc = _binvs(a)
    n = ivaluation(disc, l)
    if n == 0:
        return LocalData(l, "I0", 1, 0, GOOD)

    r, t = _singular_point(a, l)
    a = _translate(a, r, 0, t)
    a1, a2, a3, a4, a6 = a
    assert a3 % l == 0 and a4 % l == 0 and a6 % l == 0
    b2, b4, b6, b8, c4, disc = _binvs(a)

    if c4 % l != 0:
        # multiplicative: tangent quadratic T^2 + a1 T - a2 decides splitness
        split = _quadroots(1, a1, -a2, l)
        c = n if split else (2 if n % 2 == 0 else 1)
        return LocalData(l, f"I{n}", c, n, SPLIT if split else NONSPLIT)

    if a6 and ivaluation(a6, l) < 2:
        return LocalData(l, "II", 1, n, ADDITIVE)
    if b8 and ivaluation(b8, l) < 3:
        return LocalData(l, "III", 2, n, ADDITIVE)
    if b6 and ivaluation(b6, l) < 3:
        c = 3 if _quadroots(1, a3 // l, -(a6 // l**2), l) else 1
        return LocalData(l, "IV", c, n, ADDITIVE)

    # normalize: l | a1, a2; l^2 | a3, a4; l^3 | a6
    if l == 2:
        s = a2 % 2
    else:
        s = (-a1 * pow(2, -1, l)) % l
    a = _translate(a, 0, s, 0)
    a1, a2, a3, a4, a6 = a
    # a3 + 2t = 0 mod l^2 pins t mod l^2 for odd l, only mod 2 at l = 2;
    # the remaining freedom is searched for l^3 | a6'
    if l == 2:
        candidates = [(a3 // 2) % 2 + 2 * j for j in range(4)]
    else:
        tp = (-(a3 // l) * pow(2, -1, l)) % l
        candidates = [l * tp + l * l * j for j in range(l)]
    for t in candidates:
        cand = _translate(a, 0, 0, t)
        if cand[4] % l**3 == 0 and cand[2] % l**2 == 0:
            a = cand
            break
    else:
        raise InvariantViolation("normalization before step I0* failed")
    a1, a2, a3, a4, a6 = a
    assert a1 % l == 0 and a2 % l == 0 and a3 % l**2 == 0 and a4 % l**2 == 0 and a6 % l**3 == 0

    kind, rr = _cubic_double_root(1, a2 // l, a4 // l**2, a6 // l**3, l)
    if kind == "separable":
        c = 1 + _cubic_roots_count(a2 // l, a4 // l**2, a6 // l**3, l)
        return LocalData(l, "I0*", c, n, ADDITIVE)

    if kind == "double":
        a = _translate(a, l * rr, 0, 0)
        a1, a2, a3, a4, a6 = a
        assert ivaluation(a2, l) == 1 and a4 % l**3 == 0 and a6 % l**4 == 0
        ix, iy = 3, 3
        mx = my = l * l
        while True:
            a3t = a3 // my
            a6t = a6 // (mx * my)
            if (a3t * a3t + 4 * a6t) % l:
                c = 4 if _quadroots(1, a3t, -a6t, l) else 2
                return LocalData(l, f"I{ix + iy - 5}*", c, n, ADDITIVE)
            y0 = (a6t % 2) if l == 2 else (-a3t * pow(2, -1, l)) % l
            a = _translate(a, 0, 0, my * y0)
            a1, a2, a3, a4, a6 = a
            iy += 1
            my *= l
            a2t = a2 // l
            a4t = a4 // (l * mx)
            a6t = a6 // (mx * my)
            if (a4t * a4t - 4 * a2t * a6t) % l:
                c = 4 if _quadroots(a2t, a4t, a6t, l) else 2
                return LocalData(l, f"I{ix + iy - 5}*", c, n, ADDITIVE)
            x0 = (a6t * pow(a2t, -1, 2)) % 2 if l == 2 else (-a4t * pow(2 * a2t, -1, l)) % l
            a = _translate(a, mx * x0, 0, 0)
            a1, a2, a3, a4, a6 = a
            ix += 1
            mx *= l

    # triple root: move it to T = 0
    a = _translate(a, l * rr, 0, 0)
    a1, a2, a3, a4, a6 = a
    assert a2 % l**2 == 0 and a4 % l**3 == 0 and a6 % l**4 == 0

    a3t = a3 // l**2
    a6t = a6 // l**4
    if (a3t * a3t + 4 * a6t) % l:
        c = 3 if _quadroots(1, a3t, -a6t, l) else 1
        return LocalData(l, "IV*", c, n, ADDITIVE)
    y0 = (a6t % 2) if l == 2 else (-a3t * pow(2, -1, l)) % l
    a = _translate(a, 0, 0, l * l * y0)
    a1, a2, a3, a4, a6 = a
    assert a3 % l**3 == 0 and a6 % l**5 == 0

    if a4 == 0 or ivaluation(a4, l) >= 4:
        if a6 == 0 or ivaluation(a6, l) >= 6:
            # non-minimal: rescale by u = l and restart
            assert a1 % l == 0 and a2 % l**2 == 0 and a3 % l**3 == 0
            return (a1 // l, a2 // l**2, a3 // l**3, a4 // l**4, a6 // l**6)
        return LocalData(l, "II*", 1, n, ADDITIVE)
    return LocalData(l, "III*", 2, n, ADDITIVE)


def _check_kodaira_table(d: LocalData):
    k, c = d.kodaira, d.tamagawa
    if k == "I0":
        ok = c == 1 and d.reduction == GOOD and d.vdisc_min == 0
    elif k in ("II", "II*"):
        ok = c == 1 and d.reduction == ADDITIVE
    elif k in ("III", "III*"):
        ok = c == 2 and d.reduction == ADDITIVE
    elif k in ("IV", "IV*"):
        ok = c in (1, 3) and d.reduction == ADDITIVE
    elif k.endswith("*") and k[1:-1].isdigit():
        ok = (c in (1, 2, 4) if k == "I0*" else c in (2, 4)) and d.reduction == ADDITIVE
    elif k[1:].isdigit():
        nn = int(k[1:])
        if d.reduction == SPLIT:
            ok = c == nn
        elif d.reduction == NONSPLIT:
            ok = c == (2 if nn % 2 == 0 else 1)
        else:
            ok = False
        ok = ok and d.vdisc_min == nn
    else:
        ok = False
    if not ok:
        raise InvariantViolation(f"Kodaira/Tamagawa table violation: {d}")


def tamagawa_product(m: WeierstrassModel, bad_primes) -> int:
    out = 1
    for l in bad_primes:
        out *= tate(m, l).tamagawa
    return out

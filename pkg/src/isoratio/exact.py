"""Exact integer and rational arithmetic helpers.

Rationals are `fractions.Fraction` throughout the package (denominator > 0
and reduced form are guaranteed by the stdlib).  This module adds the number
theory the rest of the code leans on: Kronecker symbols, l-adic valuations,
squarefree machinery and a couple of small prime utilities.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

INF = float("inf")  # valuation of 0


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond the sizes used here."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> list[int]:
    """Ascending primes <= n (numpy sieve)."""
    if n < 2:
        return []
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return [int(p) for p in np.nonzero(mask)[0]]


def next_prime(n: int) -> int:
    n += 1
    while not is_prime(n):
        n += 1
    return n


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), the multiplicative extension of Legendre.

    (a/2) is 0 for even a and +1/-1 for a = +-1 / +-3 mod 8; (a/-1) is the
    sign character; (a/0) is 1 exactly for a = +-1.
    """
    a, n = int(a), int(n)
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    # factor out twos of n
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    # now n odd > 0: Jacobi with reciprocity
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def lvaluation(q, l: int):
    """v_l(q) for a rational q, with |q|_l = l^{-v_l(q)}.  Returns INF for 0."""
    q = Fraction(q)
    if q == 0:
        return INF
    v, n = 0, q.numerator
    while n % l == 0:
        n //= l
        v += 1
    if v:
        return v
    d = q.denominator
    while d % l == 0:
        d //= l
        v -= 1
    return v


def ivaluation(n: int, l: int) -> int:
    """v_l of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % l == 0:
        n //= l
        v += 1
    return v


def squarefree_part(q) -> int:
    """Signed squarefree integer s with q = s * (rational square), q != 0."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("squarefree part of 0")
    n = q.numerator * q.denominator
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, d = 1, 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            if e % 2:
                s *= d
        d += 1 if d == 2 else 2
    return sign * s * n


def is_square_rational(q) -> bool:
    q = Fraction(q)
    if q < 0:
        return False
    if q == 0:
        return True
    return (
        math.isqrt(q.numerator) ** 2 == q.numerator
        and math.isqrt(q.denominator) ** 2 == q.denominator
    )


def is_squarefree(n: int) -> bool:
    """Trial-division squarefree test (the per-integer oracle; sieves below
    are the bulk path)."""
    n = abs(n)
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        while n % d == 0:
            n //= d
        d += 1
    return True


def squarefree_mask(X: int) -> np.ndarray:
    """Boolean mask m of length X+1 with m[d] = (d squarefree), m[0] = False."""
    from . import _kernels

    return _kernels.squarefree_mask(X)


def squarefree_range(X: int):
    """Ascending squarefree integers in [1, X], sieve-based."""
    if X < 1:
        raise ValueError("X >= 1 required")
    mask = squarefree_mask(X)
    for d in np.nonzero(mask)[0]:
        yield int(d)


def smallest_factor_sieve(X: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 2 <= n <= X (spf[0]=spf[1]=0)."""
    spf = np.zeros(X + 1, dtype=np.int64)
    for p in range(2, X + 1):
        if spf[p] == 0:
            spf[p::p][spf[p::p] == 0] = p
    return spf


def factorize(n: int, hint_primes=()) -> dict[int, int]:
    """Exact factorization of a nonzero integer by hinted and trial division.

    `hint_primes` lets callers pass the primes they already know divide n
    (twist census knows the support of every discriminant it builds).  Falls
    back to sympy's factorint for any stubborn cofactor.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("factorize(0)")
    out: dict[int, int] = {}
    for p in sorted(set(hint_primes)):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out[p] = e
    d = 2
    while d * d <= n and d < 10**6:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out[d] = out.get(d, 0) + e
        d += 1 if d == 2 else 2
    if n > 1:
        if is_prime(n):
            out[n] = out.get(n, 0) + 1
        else:
            import sympy

            for p, e in sympy.factorint(n).items():
                out[int(p)] = out.get(int(p), 0) + int(e)
    return dict(sorted(out.items()))

"""Hot numeric kernels for the twist census.

Each kernel has a numba @njit implementation and a pure-numpy fallback.
Selection: ISORATIO_NO_NUMBA=1 forces the numpy path, otherwise numba is
used when importable.  `benchmarks/bench_kernels.py` times the two paths on
census-sized input and checks they agree bit for bit.

Everything here runs on machine integers over |d| <= X; exactness is not at
risk for the bounds in scope (X <= 10^8 fits int64 comfortably).
"""

from __future__ import annotations

import math
import os

import numpy as np

_FORCE_NUMPY = os.environ.get("ISORATIO_NO_NUMBA", "") == "1"

try:  # pragma: no cover - the benchmark exercises both paths explicitly
    if _FORCE_NUMPY:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


def squarefree_mask_numpy(X: int) -> np.ndarray:
    """mask[d] = d squarefree for 0 <= d <= X (mask[0] = False)."""
    mask = np.ones(X + 1, dtype=bool)
    mask[0] = False
    for q in range(2, math.isqrt(X) + 1):
        mask[q * q :: q * q] = False
    return mask


@njit(cache=True)
def _squarefree_mask_loop(X):  # pragma: no cover - numba-compiled
    mask = np.ones(X + 1, dtype=np.bool_)
    mask[0] = False
    q = 2
    while q * q <= X:
        qq = q * q
        m = qq
        while m <= X:
            mask[m] = False
            m += qq
        q += 1
    return mask


def squarefree_mask_numba(X: int) -> np.ndarray:
    return _squarefree_mask_loop(X)


def squarefree_mask(X: int) -> np.ndarray:
    return squarefree_mask_numba(X) if HAS_NUMBA else squarefree_mask_numpy(X)


def member_mask_numpy(X: int, moduli: np.ndarray, tables: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """mask[n] = n squarefree and tables[i][n % moduli[i]] for every i.

    tables is the flat concatenation of per-modulus boolean residue tables,
    offsets[i] the start of table i.
    """
    mask = squarefree_mask_numpy(X)
    n = np.arange(X + 1, dtype=np.int64)
    for i, m in enumerate(moduli):
        t = tables[offsets[i] : offsets[i] + m]
        mask &= t[n % m]
    return mask


@njit(cache=True)
def _member_mask_loop(X, moduli, tables, offsets):  # pragma: no cover
    mask = _squarefree_mask_loop(X)
    for d in range(1, X + 1):
        if not mask[d]:
            continue
        for i in range(len(moduli)):
            if not tables[offsets[i] + d % moduli[i]]:
                mask[d] = False
                break
    return mask


def member_mask_numba(X: int, moduli: np.ndarray, tables: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return _member_mask_loop(X, moduli, tables, offsets)


def member_mask(X: int, residue_tables: list[tuple[int, np.ndarray]]) -> np.ndarray:
    """Squarefree n in [1, X] passing all residue tables [(modulus, table)]."""
    moduli = np.asarray([m for m, _ in residue_tables], dtype=np.int64)
    tables = (
        np.concatenate([t.astype(np.bool_) for _, t in residue_tables])
        if residue_tables
        else np.zeros(0, dtype=np.bool_)
    )
    offsets = np.zeros(len(residue_tables), dtype=np.int64)
    acc = 0
    for i, (m, _) in enumerate(residue_tables):
        offsets[i] = acc
        acc += m
    if HAS_NUMBA:
        return member_mask_numba(X, moduli, tables, offsets)
    return member_mask_numpy(X, moduli, tables, offsets)

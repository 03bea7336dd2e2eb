"""Twist-family enumeration and large-X censuses.

A family fixes an odd prime p, the support primes (everything dividing 2pN),
and a sign.  Membership demands a squarefree d of that sign which is a unit
square at every support prime: d = 1 mod 8 at l = 2 (the strict condition
that trivializes the twist over Q_2; see the module decision in the ledger)
and (d/l) = 1 at odd support primes.

A census streams one record per member: the twisted ratio exponent and the
certified bound, or an explicit torsion-exclusion reason.  The d-range is cut
into fixed blocks processed independently (all per-d work is pure); merging
preserves order, so the output is byte-identical for any worker count and
under checkpoint resume.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exact import is_squarefree, kronecker
from .isogeny import Isogeny
from .selmer import (
    INF_PLACE,
    RANK_ASSUMPTION,
    BoundRecord,
    exclusion_map,
    global_ratio,
    kernel_has_real_point,
    support_primes,
)

DEFAULT_BLOCK = 100_000


@dataclass(frozen=True)
class TwistFamily:
    p: int
    support: tuple[int, ...]  # sorted primes dividing 2pN
    sign: int  # +1 or -1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if 2 not in self.support or self.p not in self.support:
            raise ValueError("support must contain 2 and p")

    @classmethod
    def for_isogeny(cls, phi: Isogeny, sign: int = 1) -> "TwistFamily":
        return cls(p=phi.p, support=tuple(support_primes(phi)), sign=sign)

    def odd_support(self) -> tuple[int, ...]:
        return tuple(l for l in self.support if l != 2)


def sigma_membership(d: int, fam: TwistFamily) -> bool:
    """Direct per-integer membership test (the scalar reference; the census
    enumerates with sieve kernels and is pinned to this in tests)."""
    if d == 0 or (d > 0) != (fam.sign > 0):
        return False
    if not is_squarefree(d):
        return False
    if d % 8 != 1:
        return False
    return all(kronecker(d, l) == 1 for l in fam.odd_support())


def _residue_tables(fam: TwistFamily) -> list[tuple[int, np.ndarray]]:
    """Residue conditions on n = |d| for membership of d = sign * n."""
    s = fam.sign
    t8 = np.zeros(8, dtype=bool)
    for n in range(8):
        t8[n] = (s * n) % 8 == 1
    tables = [(8, t8)]
    for l in fam.odd_support():
        t = np.zeros(l, dtype=bool)
        for n in range(l):
            t[n] = kronecker(s * n, l) == 1
        tables.append((l, t))
    return tables


def member_values(fam: TwistFamily, X: int) -> np.ndarray:
    """|d| values of all members with |d| <= X, ascending."""
    mask = _kernels.member_mask(X, _residue_tables(fam))
    return np.nonzero(mask)[0].astype(np.int64)


def predicted_density(fam: TwistFamily) -> float:
    """Closed-form member density among all integers of the family's sign.

    Inclusion-exclusion over the support congruences and the squarefree
    sieve: measure 1/8 at l = 2, (l-1)/(2l) at odd support primes, and the
    squarefree factor 6/pi^2 corrected by 1/(1 - l^-2) inside the support.
    """
    rho = 6 / math.pi**2 / 8
    for l in fam.support:
        rho /= 1 - l**-2
    for l in fam.odd_support():
        rho *= (l - 1) / (2 * l)
    return rho


@dataclass(frozen=True)
class CensusReport:
    X: int
    sign: int
    exponent: int  # common twisted exponent of every member
    member_count: int
    excluded_count: int
    excluded: tuple  # (d, reason) pairs
    empirical_density: float
    predicted_density: float
    elapsed_seconds: float
    assumption: str
    records_path: str | None

    def __post_init__(self):
        assert 0.0 <= self.empirical_density <= 1.0


def _member_exponent(phi: Isogeny, fam: TwistFamily) -> int:
    """c(phi_d) exponent shared by every member: finite places are untouched
    (d is a unit square on the support, ramified primes are good), and the
    real place only depends on the sign."""
    base = global_ratio(phi)
    finite = sum(e for pl, e in base.breakdown if pl != INF_PLACE)
    inf = -1 if kernel_has_real_point(phi, flip=(fam.sign < 0)) else 0
    return finite + inf


def _block_lines(args) -> tuple[int, str]:
    lo, hi, members, exponent, exclusions = args
    out = []
    for n in members:
        d = int(n)
        reason = exclusions.get(d)
        if reason is None:
            out.append(f"{d}\t{exponent}\t{max(exponent, 0)}")
        else:
            out.append(f"{d}\t{exponent}\tEXCLUDED:{reason}")
    out.append(f"# last_d\t{hi}")
    return lo, "".join(line + "\n" for line in out)


def census(
    phi: Isogeny,
    fam: TwistFamily,
    X: int,
    workers: int = 1,
    block: int = DEFAULT_BLOCK,
    checkpoint: str | None = None,
    resume: bool = False,
) -> CensusReport:
    """Sweep the family to |d| = X, emitting one record per member.

    Records are `d <TAB> exponent <TAB> bound-or-EXCLUDED:reason` lines; a
    `# last_d` marker closes each block and `# done` closes the file, which
    is what resuming hinges on.
    """
    if X < 1:
        raise ValueError("X >= 1 required")
    start = time.perf_counter()
    missing = set(support_primes(phi)) - set(fam.support)
    if missing:
        raise ValueError(f"family support misses isogeny support {sorted(missing)}")

    exponent = _member_exponent(phi, fam)
    exclusions = dict(exclusion_map(phi))
    mask_members = member_values(fam, X)

    done_upto = 0
    kept_lines: list[str] = []
    if checkpoint and resume and os.path.exists(checkpoint):
        done_upto, kept_lines = _read_checkpoint(checkpoint)
        done_upto = min(done_upto, X)

    blocks = []
    lo = done_upto + 1
    while lo <= X:
        hi = min(lo + block - 1, X)
        idx = np.searchsorted(mask_members, [lo, hi + 1])
        members = mask_members[idx[0] : idx[1]] * fam.sign
        blocks.append((lo, hi, members, exponent, exclusions))
        lo = hi + 1

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block_lines, blocks))
    else:
        results = [_block_lines(b) for b in blocks]
    results.sort(key=lambda t: t[0])

    lines = kept_lines + [text for _, text in results]
    body = "".join(lines) + f"# done\t{X}\n"
    if checkpoint:
        with open(checkpoint, "w", encoding="utf-8") as fh:
            fh.write(body)

    member_count = 0
    excluded = []
    for line in body.splitlines():
        if line.startswith("#"):
            continue
        member_count += 1
        d_s, _, tail = line.split("\t")
        if tail.startswith("EXCLUDED:"):
            excluded.append((int(d_s), tail[len("EXCLUDED:") :]))
    elapsed = time.perf_counter() - start
    return CensusReport(
        X=X,
        sign=fam.sign,
        exponent=exponent,
        member_count=member_count,
        excluded_count=len(excluded),
        excluded=tuple(excluded),
        empirical_density=member_count / X,
        predicted_density=predicted_density(fam),
        elapsed_seconds=elapsed,
        assumption=RANK_ASSUMPTION,
        records_path=checkpoint,
    )


def _read_checkpoint(path: str) -> tuple[int, list[str]]:
    """Last completed block boundary and the text up to (and including) it."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    kept = []
    last = 0
    buf = []
    for line in text.splitlines(keepends=True):
        if not line.endswith("\n"):
            break  # torn tail from an interrupted run
        if line.startswith("# done"):
            break
        buf.append(line)
        if line.startswith("# last_d"):
            last = int(line.split("\t")[1])
            kept.extend(buf)
            buf = []
    return last, kept


def bound_records(phi: Isogeny, fam: TwistFamily, X: int) -> list[BoundRecord]:
    """In-memory variant of the census output (small X)."""
    exponent = _member_exponent(phi, fam)
    exclusions = dict(exclusion_map(phi))
    out = []
    for n in member_values(fam, X):
        d = int(n) * fam.sign
        reason = exclusions.get(d)
        if reason is None:
            out.append(BoundRecord(d=d, exponent=exponent, excluded=None, bound=max(exponent, 0)))
        else:
            out.append(BoundRecord(d=d, exponent=exponent, excluded=reason, bound=None))
    return out

"""Command-line interface.

One verb per capability: `local-data`, `isogenies`, `ratio`, `twist-ratio`,
`census`, `check-theorem`, `oracle`.  Human-readable tables go to stdout;
machine-readable newline-delimited `kind=... key=value` records go to the
--output path and contain nothing run-dependent, so identical configs
(including seed and worker count) produce byte-identical reports.

Exit codes: 0 success, 2 invariant violation, 3 oracle mismatch, 4 input
error.  Precision precedence: --precision-cap flag, then the
ISORATIO_PRECISION_CAP environment variable, then the built-in default.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .census import TwistFamily, census, sigma_membership
from .errors import (
    InconclusiveSampling,
    InvariantViolation,
    IsoratioError,
    ParseError,
    PrecisionExhausted,
    SingularModelError,
)
from .exact import next_prime
from .isogeny import rational_p_isogenies
from .localdata import tate
from .oracle import oracle_estimate
from .selmer import (
    INF_PLACE,
    applicability,
    bad_primes_of,
    composition_check,
    dual_cached,
    global_ratio,
    infinity_ratio,
    local_ratio,
    sha_bound,
    support_primes,
    twist_ratio,
)
from .weierstrass import WeierstrassModel

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_ORACLE = 3
EXIT_INPUT = 4


@dataclass
class CurveRecord:
    label: str
    model: WeierstrassModel
    asserted: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    command: str
    p: int = 0
    X: int = 0
    sign: int = 1
    precision_cap: int = 512
    samples: int = 200
    workers: int = 1
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if self.precision_cap <= 0 or self.precision_cap > 512:
            raise ParseError("precision cap must be in 1..512")
        if self.workers < 1 or self.samples < 0 or self.X < 0:
            raise ParseError("bounds must be positive")


def parse_curve_line(line: str) -> CurveRecord:
    """Parse `label: a1 a2 a3 a4 a6` with exact rational literals."""
    if ":" not in line:
        raise ParseError("missing ':' after label", position=0)
    label, _, rest = line.partition(":")
    label = label.strip()
    if not label:
        raise ParseError("empty label", position=0)
    parts = rest.split()
    if len(parts) != 5:
        raise ParseError(f"expected 5 coefficients, got {len(parts)}", position=len(label) + 1)
    coeffs = []
    pos = len(label) + 1
    for tok in parts:
        pos = line.index(tok, pos)
        try:
            coeffs.append(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad rational literal {tok!r}", position=pos) from None
        pos += len(tok)
    model = WeierstrassModel(*coeffs)  # raises SingularModelError on disc = 0
    return CurveRecord(label=label, model=model)


def format_curve_line(rec: CurveRecord) -> str:
    return f"{rec.label}: " + " ".join(str(a) for a in rec.model.a_invariants())


class _Reporter:
    """Collects machine records; written to the output path on success."""

    def __init__(self, path):
        self.path = path
        self.lines: list[str] = []

    def emit(self, kind: str, **kv):
        body = " ".join(f"{k}={v}" for k, v in kv.items())
        self.lines.append(f"kind={kind} {body}")

    def flush(self):
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="\n") as fh:
                for line in self.lines:
                    fh.write(line + "\n")


def _load_curve(args) -> CurveRecord:
    if args.curve:
        return parse_curve_line(args.curve)
    if args.curve_file:
        with open(args.curve_file, encoding="utf-8") as fh:
            records = [parse_curve_line(ln) for ln in fh if ln.strip() and not ln.startswith("#")]
        if args.label is None:
            if len(records) == 1:
                return records[0]
            raise ParseError("multiple records; choose one with --label")
        for rec in records:
            if rec.label == args.label:
                return rec
        raise ParseError(f"label {args.label!r} not found")
    raise ParseError("provide --curve or --curve-file")


def _select_isogenies(model: WeierstrassModel, p: int, index, use_dual: bool):
    mm, _ = model.minimal_model()
    isos = rational_p_isogenies(mm, p)
    if use_dual:
        isos = [dual_cached(phi) for phi in isos]
    if index is not None:
        if not 0 <= index < len(isos):
            raise ParseError(f"isogeny index {index} out of range (found {len(isos)})")
        isos = [isos[index]]
    return isos


def _breakdown_kv(ratio):
    out = {}
    for pl, e in ratio.breakdown:
        out[f"place_{pl}"] = e
    return out


def _place_str(ratio):
    parts = [f"{pl}: {e}" for pl, e in ratio.breakdown]
    return "{" + ", ".join(parts) + "}"


def cmd_local_data(args, rep) -> int:
    rec = _load_curve(args)
    mm, _ = rec.model.minimal_model()
    primes = mm.bad_primes()
    print(f"{rec.label}: minimal model {tuple(map(str, mm.a_invariants()))}")
    print(f"{'prime':>6} {'kodaira':>8} {'c':>4} {'v(disc)':>8}  reduction")
    for l in primes:
        d = tate(mm, l)
        print(f"{l:>6} {d.kodaira:>8} {d.tamagawa:>4} {d.vdisc_min:>8}  {d.reduction}")
        rep.emit(
            "localdata",
            label=rec.label,
            prime=l,
            kodaira=d.kodaira,
            tamagawa=d.tamagawa,
            vdisc=d.vdisc_min,
            reduction=d.reduction.replace(" ", "-"),
        )
    return EXIT_OK


def cmd_isogenies(args, rep) -> int:
    rec = _load_curve(args)
    isos = _select_isogenies(rec.model, args.p, None, False)
    print(f"{rec.label}: {len(isos)} rational {args.p}-isogen{'y' if len(isos) == 1 else 'ies'}")
    for i, phi in enumerate(isos):
        print(f"  [{i}] kernel {phi.kernel_poly}  ->  codomain {phi.codomain}")
        rep.emit(
            "isogeny",
            label=rec.label,
            index=i,
            p=args.p,
            kernel=";".join(str(c) for c in phi.kernel_poly.coeffs),
            codomain=",".join(str(a) for a in phi.codomain.a_invariants()),
        )
    return EXIT_OK


def cmd_ratio(args, rep) -> int:
    rec = _load_curve(args)
    isos = _select_isogenies(rec.model, args.p, args.index, args.dual)
    if not isos:
        print(f"{rec.label}: no rational {args.p}-isogeny")
        return EXIT_INPUT
    for i, phi in enumerate(isos):
        ratio = global_ratio(phi)
        ok = composition_check(phi)
        print(f"{rec.label}[{i}]: breakdown {_place_str(ratio)}")
        print(f"{rec.label}[{i}]: c(phi) = {ratio}")
        rep.emit("ratio", label=rec.label, index=i, p=args.p, exponent=ratio.exponent, **_breakdown_kv(ratio))
        if not all(ok.values()):
            bad = [str(v) for v, good in ok.items() if not good]
            raise InvariantViolation(f"composition check failed at {', '.join(bad)}")
    return EXIT_OK


def cmd_twist_ratio(args, rep) -> int:
    rec = _load_curve(args)
    isos = _select_isogenies(rec.model, args.p, args.index, args.dual)
    if not isos:
        print(f"{rec.label}: no rational {args.p}-isogeny")
        return EXIT_INPUT
    for i, phi in enumerate(isos):
        ratio = twist_ratio(phi, args.d, method=args.method)
        record = sha_bound(phi, args.d)
        print(f"{rec.label}[{i}] twist d={args.d}: c(phi_d) = {ratio}  breakdown {_place_str(ratio)}")
        if record.excluded:
            print(f"  excluded: {record.excluded}")
        else:
            print(f"  bound: rk + dim Sha[{args.p}] >= {record.bound}  ({record.assumption})")
        rep.emit(
            "bound",
            label=rec.label,
            index=i,
            d=args.d,
            exponent=ratio.exponent,
            bound=record.bound if record.bound is not None else f"EXCLUDED:{record.excluded.replace(' ', '-')}",
        )
    return EXIT_OK


def cmd_census(args, rep) -> int:
    rec = _load_curve(args)
    isos = _select_isogenies(rec.model, args.p, args.index if args.index is not None else 0, args.dual)
    phi = isos[0]
    fam = TwistFamily.for_isogeny(phi, sign=args.sign)
    report = census(
        phi,
        fam,
        args.X,
        workers=args.workers,
        block=args.block,
        checkpoint=args.checkpoint,
        resume=args.resume,
    )
    print(f"family p={fam.p} support={list(fam.support)} sign={'+' if fam.sign > 0 else '-'}")
    print(f"members <= {args.X}: {report.member_count} ({report.excluded_count} excluded)")
    print(f"member exponent: {report.exponent}; bound {max(report.exponent, 0)} on non-excluded twists")
    print(f"empirical density {report.empirical_density:.6f} vs predicted {report.predicted_density:.6f}")
    print(f"elapsed {report.elapsed_seconds:.2f}s; note: {report.assumption}")
    for d, reason in report.excluded:
        print(f"  excluded d={d}: {reason}")
    rep.emit(
        "census",
        label=rec.label,
        p=fam.p,
        sign=fam.sign,
        X=args.X,
        members=report.member_count,
        excluded=report.excluded_count,
        exponent=report.exponent,
        empirical_density=f"{report.empirical_density:.8f}",
        predicted_density=f"{report.predicted_density:.8f}",
        assumption="selmer-side-bound;rank-0-analytic-input-out-of-scope",
    )
    return EXIT_OK


def cmd_check_theorem(args, rep) -> int:
    rec = _load_curve(args)
    mm, _ = rec.model.minimal_model()
    isos = _select_isogenies(mm, args.p, args.index, False)
    if not isos:
        print(f"{rec.label}: no rational {args.p}-isogeny")
        return EXIT_INPUT
    for i, phi in enumerate(isos):
        psi = dual_cached(phi)
        for side, iso, curve in (("domain", phi, phi.domain), ("quotient", psi, psi.domain)):
            repx = applicability(curve, iso, modular_quotient=rec.asserted.get("modular-quotient", args.assume_modular_quotient))
            print(
                f"{rec.label}[{i}] {side} side: c(phi) = {repx.p}^{repx.exponent}; "
                f"c >= p^2: {repx.ratio_at_least_p_squared}; E[2](Q) != Z/2Z: {repx.two_torsion_not_z2}"
            )
            print(
                f"  twist-family bound applies: {repx.twist_family_bound_applies}"
                f" (modular quotient asserted: {repx.modular_quotient_asserted})"
            )
            print(f"  elliptic positive-proportion result applies: {repx.elliptic_positive_proportion_applies}")
            rep.emit(
                "theorem",
                label=rec.label,
                index=i,
                side=side,
                p=repx.p,
                exponent=repx.exponent,
                ratio_ok=repx.ratio_at_least_p_squared,
                two_torsion_ok=repx.two_torsion_not_z2,
                elliptic_applies=repx.elliptic_positive_proportion_applies,
                family_applies=repx.twist_family_bound_applies,
            )
    return EXIT_OK


def cmd_oracle(args, rep) -> int:
    rec = _load_curve(args)
    isos = _select_isogenies(rec.model, args.p, args.index, args.dual)
    if not isos:
        print(f"{rec.label}: no rational {args.p}-isogeny")
        return EXIT_INPUT
    status = EXIT_OK
    for i, phi in enumerate(isos):
        places = sorted(set(bad_primes_of(phi)) | {phi.p})
        good, q = [], 2
        while len(good) < 2:
            q = next_prime(q)
            if q not in places:
                good.append(q)
        for place in places + good + [INF_PLACE]:
            formula = infinity_ratio(phi) if place == INF_PLACE else local_ratio(phi, place)
            est = oracle_estimate(phi, place, samples=args.samples, seed=args.seed, workers=args.workers)
            agree = est.exponent == formula
            print(
                f"{rec.label}[{i}] v={place}: formula {formula:+d}, oracle {est.exponent:+d} "
                f"(ker {est.kernel_order}, coker {est.cokernel_order}, "
                f"fraction {est.divisible_fraction:.4f}, samples {est.samples}) "
                f"{'ok' if agree else 'MISMATCH'}"
            )
            rep.emit(
                "oracle",
                label=rec.label,
                index=i,
                place=place,
                formula=formula,
                oracle=est.exponent,
                kernel=est.kernel_order,
                cokernel=est.cokernel_order,
                samples=est.samples,
                seed=est.seed,
                workers=est.workers,
                agree=agree,
            )
            if not agree:
                status = EXIT_ORACLE
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isoratio", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, needs_p=True):
        sp.add_argument("--curve", help='inline record "label: a1 a2 a3 a4 a6"')
        sp.add_argument("--curve-file", help="file of curve records, one per line")
        sp.add_argument("--label", help="record label to select from --curve-file")
        sp.add_argument("--output", help="machine-readable report path")
        sp.add_argument("--precision-cap", type=int, default=None, help="l-adic digit cap (<= 512)")
        if needs_p:
            sp.add_argument("-p", type=int, required=True, help="odd prime isogeny degree")
            sp.add_argument("--index", type=int, default=None, help="which isogeny (default: all)")
            sp.add_argument("--dual", action="store_true", help="use the dual isogeny instead")

    sp = sub.add_parser("local-data", help="Tate's algorithm table at the bad primes")
    common(sp, needs_p=False)

    sp = sub.add_parser("isogenies", help="list rational p-isogenies")
    common(sp)

    sp = sub.add_parser("ratio", help="global Selmer ratio with per-place breakdown")
    common(sp)

    sp = sub.add_parser("twist-ratio", help="Selmer ratio of a single quadratic twist")
    common(sp)
    sp.add_argument("--d", type=int, required=True, help="squarefree twist parameter")
    sp.add_argument("--method", choices=("auto", "fast", "slow"), default="auto")

    sp = sub.add_parser("census", help="sweep a twist family, emitting per-twist bounds")
    common(sp)
    sp.add_argument("--X", type=int, required=True, help="sweep |d| <= X")
    sp.add_argument("--sign", type=int, choices=(1, -1), default=1)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--block", type=int, default=100_000)
    sp.add_argument("--checkpoint", help="checkpoint / record file")
    sp.add_argument("--resume", action="store_true", help="resume from the checkpoint")

    sp = sub.add_parser("check-theorem", help="hypothesis flags and applicability verdicts")
    common(sp)
    sp.add_argument("--assume-modular-quotient", action="store_true", help="assert the modular-quotient hypothesis")

    sp = sub.add_parser("oracle", help="formula vs sampled-cokernel comparison")
    common(sp)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)

    return ap


_COMMANDS = {
    "local-data": cmd_local_data,
    "isogenies": cmd_isogenies,
    "ratio": cmd_ratio,
    "twist-ratio": cmd_twist_ratio,
    "census": cmd_census,
    "check-theorem": cmd_check_theorem,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "precision_cap", None):
        os.environ["ISORATIO_PRECISION_CAP"] = str(args.precision_cap)
    rep = _Reporter(getattr(args, "output", None))
    try:
        code = _COMMANDS[args.command](args, rep)
    except (ParseError, SingularModelError, FileNotFoundError, ValueError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (InconclusiveSampling,) as e:
        print(f"oracle failure: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except (InvariantViolation, PrecisionExhausted, IsoratioError) as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    rep.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands::

    latticeid analyze FILE          verdict and quasi-Levy table
    latticeid cw FILE --bound B     Cramer-Wold projection table
    latticeid factorize FILE        compound Poisson factors -> mu1.json, mu2.json
    latticeid generate FAMILY ...   write a pmf JSON (Poisson, geometric, ...)

Exit codes for ``analyze``: 0 infinitely divisible, 1 quasi only, 2 not
quasi-ID, 3 inconclusive or error.  ``cw`` exits 0 iff the projection
results and the direct verdict are consistent.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .charfn import DEFAULT_MAX_POINTS
from .cw import cw_test
from .errors import LatticeError, NormalizationError
from .measures import (
    LatticePmf,
    SignedLatticeMeasure,
    affine,
    bernoulli,
    convolve,
    dirac,
    geometric,
    load_measure,
    poisson,
    product,
    shift,
)
from .qid import DEFAULT_TOL, NEG_TOL, CompoundPoissonFactor, Kind, classify, compound_poisson_pmf, factorize

EXIT_ERROR = 3


def _vec(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def _matrix(text: str) -> list[list[int]]:
    return [list(_vec(row)) for row in text.split(";")]


def _load_pmf(path) -> LatticePmf:
    obj = load_measure(path)
    if not isinstance(obj, LatticePmf):
        raise ValueError(f"{path} holds a signed measure, not a pmf")
    return obj


def _fmt_vec(v) -> str:
    return "(" + ",".join(str(int(x)) for x in v) + ")"


def _fmt_mass(c: float) -> str:
    return f"{c:+.6f}" if abs(c) >= 1e-3 else f"{c:+.3e}"


def nu_table(nu: SignedLatticeMeasure, limit: int | None = 20) -> list[str]:
    order = sorted(range(len(nu)), key=lambda i: (-abs(nu.masses[i]), tuple(nu.points[i])))
    lines = [f"{'n':<16}{'nu({n})':>14}", "-" * 30]
    shown = order if limit is None else order[:limit]
    for i in shown:
        lines.append(f"{_fmt_vec(nu.points[i]):<16}{_fmt_mass(nu.masses[i]):>14}")
    if len(shown) < len(order):
        lines.append(f"... {len(order) - len(shown)} more atoms")
    return lines


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=1))


def cmd_analyze(args) -> int:
    p = _load_pmf(args.input)
    verdict = classify(p, args.tol, args.neg_tol, args.max_grid)
    if args.json:
        _print_json(verdict.to_json_dict())
        return verdict.kind.exit_code
    print(f"verdict: {verdict.kind.value}")
    if verdict.kind is Kind.NOT_QUASI:
        z = ", ".join(f"{x:.12f}" for x in verdict.witness)
        print(f"witness: phi vanishes at z = ({z})")
        print(f"grid size: {verdict.certificate.grid_size}")
        return verdict.kind.exit_code
    t = verdict.triplet
    print(f"drift: {list(t.drift)}")
    if verdict.witness is not None:
        print(f"witness: n = {_fmt_vec(verdict.witness)}, nu = {_fmt_mass(verdict.witness_mass)}")
    if verdict.marginal:
        print(f"marginal atoms: {', '.join(_fmt_vec(n) for n in verdict.marginal)}")
    print(f"grid size: {t.grid_size}")
    print(f"reconstruction_error: {t.reconstruction_error:.3e}")
    print(f"max_imag_residual: {t.max_imag_residual:.3e}")
    print(f"tail_mass: {t.tail_mass:.3e}")
    print()
    print("\n".join(nu_table(t.nu, None if args.all else args.top)))
    return verdict.kind.exit_code


def cmd_cw(args) -> int:
    p = _load_pmf(args.input)
    report = cw_test(p, args.bound, args.tol, args.neg_tol, args.max_grid, signed=args.signed)
    if args.json:
        _print_json(report.to_json_dict())
    else:
        print(report.render())
    return 0 if report.consistent else 1


def cmd_factorize(args) -> int:
    p = _load_pmf(args.input)
    verdict = classify(p, args.tol, args.neg_tol, args.max_grid)
    if verdict.kind is Kind.NOT_QUASI:
        print("refused: characteristic function has a zero, no factorization exists", file=sys.stderr)
        return 2
    fac = factorize(p, args.tol, args.max_grid)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fac.mu1.save(out / "mu1.json")
    fac.mu2.save(out / "mu2.json")
    summary = {
        "drift": list(fac.drift),
        "lambda1": fac.factor1.rate,
        "lambda2": fac.factor2.rate,
        "residual": fac.residual,
        "grid_size": fac.grid_size,
        "mu1": str(out / "mu1.json"),
        "mu2": str(out / "mu2.json"),
    }
    if args.json:
        _print_json(summary)
    else:
        print(f"drift: {summary['drift']}")
        print(f"lambda1: {fac.factor1.rate:.12g}")
        print(f"lambda2: {fac.factor2.rate:.12g}")
        print(f"max verification residual: {fac.residual:.3e} (grid {fac.grid_size})")
        print(f"wrote {summary['mu1']} and {summary['mu2']}")
    return 0


def cmd_generate(args) -> int:
    fam = args.family
    if fam == "bernoulli":
        p = bernoulli(args.p)
    elif fam == "poisson":
        p = poisson(args.lam, args.tail)
    elif fam == "geometric":
        p = geometric(args.p, args.tail)
    elif fam == "dirac":
        p = dirac(_vec(args.at))
    elif fam == "product":
        p = product(_load_pmf(args.first), _load_pmf(args.second))
    elif fam == "convolve":
        p = convolve(_load_pmf(args.first), _load_pmf(args.second))
    elif fam == "shift":
        p = shift(_load_pmf(args.input), _vec(args.by))
    elif fam == "affine":
        base = _load_pmf(args.input)
        offset = _vec(args.offset) if args.offset else (0,) * base.dim
        p = affine(base, _matrix(args.matrix), offset)
    elif fam == "compound-poisson":
        jumps = load_measure(args.jumps)
        if isinstance(jumps, SignedLatticeMeasure):
            factor = CompoundPoissonFactor.from_measure(jumps if args.rate is None else
                                                        jumps * (args.rate / jumps.total_mass))
        else:
            factor = CompoundPoissonFactor(args.rate if args.rate is not None else 1.0, jumps)
        p = compound_poisson_pmf(factor, args.tail)
    elif fam == "random":
        rng = np.random.default_rng(args.seed)
        maker = {
            "n0": lambda: fixtures.random_n0_pmf(rng, args.dim, args.extent),
            "zero-free": lambda: fixtures.random_zero_free(rng, args.dim, args.extent),
            "id": lambda: fixtures.random_id_law(rng, args.dim),
            "quasi": lambda: fixtures.random_quasi_only(rng, args.dim),
        }[args.kind]
        p = maker()
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown family {fam}")
    meta = dict(p.meta)
    meta.setdefault("family", fam)
    if fam == "random":
        meta.update(kind=args.kind, seed=args.seed)
    p = LatticePmf.from_arrays(p.points, p.masses, p.dim, meta=meta)
    text = p.dumps(indent=1)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return 0


def _analysis_flags(sub):
    sub.add_argument("input", help="pmf JSON file")
    sub.add_argument("--tol", type=float, default=DEFAULT_TOL, help="extraction tolerance (default: %(default)g)")
    sub.add_argument("--neg-tol", type=float, default=NEG_TOL,
                     help="atoms above -neg_tol count as nonnegative (default: %(default)g)")
    sub.add_argument("--max-grid", type=int, default=DEFAULT_MAX_POINTS,
                     help="largest torus grid in points, M^d (default: %(default)d)")
    sub.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticeid",
        description="Infinite divisibility of Z^d-valued distributions.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subs = parser.add_subparsers(dest="command", required=True)

    a = subs.add_parser("analyze", help="classify a pmf and print its quasi-Levy measure")
    _analysis_flags(a)
    a.add_argument("--top", type=int, default=20, help="atoms shown in the table (default: %(default)d)")
    a.add_argument("--all", action="store_true", help="show every atom")
    a.set_defaults(func=cmd_analyze)

    c = subs.add_parser("cw", help="Cramer-Wold projection test")
    _analysis_flags(c)
    c.add_argument("--bound", type=int, default=4, help="sup-norm bound on directions (default: %(default)d)")
    c.add_argument("--signed", action="store_true", help="also try directions with negative entries")
    c.set_defaults(func=cmd_cw)

    f = subs.add_parser("factorize", help="compound Poisson quotient factorization")
    _analysis_flags(f)
    f.add_argument("--out-dir", default=".", help="where mu1.json and mu2.json go (default: %(default)s)")
    f.set_defaults(func=cmd_factorize)

    g = subs.add_parser("generate", help="write a pmf JSON file")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="output path (default: stdout)")
    common.add_argument("--tail", type=float, default=1e-12,
                        help="truncation tail mass for infinite families (default: %(default)g)")
    fams = g.add_subparsers(dest="family", required=True)

    def family(name):
        return fams.add_parser(name, parents=[common])

    fb = family("bernoulli")
    fb.add_argument("--p", type=float, required=True)
    fp = family("poisson")
    fp.add_argument("--lambda", dest="lam", type=float, required=True)
    fg = family("geometric")
    fg.add_argument("--p", type=float, required=True, help="success probability; p_n = p (1-p)^n")
    fd = family("dirac")
    fd.add_argument("--at", required=True, help="lattice point, e.g. 2,-1 (write --at=-2,1 if it starts with '-')")
    for name in ("product", "convolve"):
        fx = family(name)
        fx.add_argument("first")
        fx.add_argument("second")
    fs = family("shift")
    fs.add_argument("input")
    fs.add_argument("--by", required=True, help="integer vector, e.g. --by=-1,3")
    fa = family("affine")
    fa.add_argument("input")
    fa.add_argument("--matrix", required=True, help="rows separated by ';', e.g. '1,1;0,1'")
    fa.add_argument("--offset", default=None, help="integer offset vector, e.g. --offset=-1,0 (default: 0)")
    fc = family("compound-poisson")
    fc.add_argument("jumps", help="jump law (pmf JSON) or nonnegative measure (signed JSON)")
    fc.add_argument("--rate", type=float, default=None)
    fr = family("random")
    fr.add_argument("--kind", choices=["n0", "zero-free", "id", "quasi"], default="n0")
    fr.add_argument("--dim", type=int, default=2)
    fr.add_argument("--extent", type=int, default=4)
    fr.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NormalizationError as exc:
        print(f"error: pmf not normalized: {exc}", file=sys.stderr)
    except (LatticeError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

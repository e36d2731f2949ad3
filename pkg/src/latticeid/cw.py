"""Cramer-Wold harness: test infinite divisibility through integer projections.

A Z^d-valued X is infinitely divisible iff a^T X is for every a in N_0^d.
Only finitely many directions can be tried, so a passing run is not a proof
of divisibility on its own; :func:`cw_test` therefore pairs the projection
results with the direct lattice verdict and reports whether the two agree.
A failing projection, on the other hand, does certify that X is not
infinitely divisible.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .charfn import DEFAULT_MAX_POINTS
from .errors import IllConditionedError, InconclusiveError
from .measures import LatticePmf, project, pushforward_signed, shift
from .oned import katti
from .qid import DEFAULT_TOL, NEG_TOL, Kind, Verdict, classify


@dataclass(frozen=True)
class DirectionFamily:
    dim: int
    bound: int
    directions: tuple[tuple[int, ...], ...]
    signed: bool = False

    def __iter__(self):
        return iter(self.directions)

    def __len__(self):
        return len(self.directions)


def enumerate_directions(dim: int, bound: int, signed: bool = False) -> DirectionFamily:
    """Nonzero integer vectors with gcd 1 and sup-norm at most ``bound``.

    By default only N_0^d is searched; ``signed=True`` uses {-B..B}^d, which
    goes beyond the minimal family needed for the equivalence.
    """
    if dim < 1 or bound < 1:
        raise ValueError("dim and bound must be positive")
    values = range(-bound, bound + 1) if signed else range(bound + 1)
    found = [
        a for a in itertools.product(values, repeat=dim)
        if any(a) and math.gcd(*a) == 1
    ]
    return DirectionFamily(dim, bound, tuple(sorted(found)), signed)


@dataclass(frozen=True)
class CWRecord:
    direction: tuple[int, ...]
    support_size: int
    katti_verdict: str
    katti_first_negative: int | None
    quasi_levy_verdict: str
    witness: object = None
    drift: int | None = None
    projection_residual: float | None = None
    drift_matches: bool | None = None
    nu: object = field(default=None, repr=False)

    @property
    def failed(self) -> bool:
        return self.katti_verdict == "negative" or self.quasi_levy_verdict in (
            Kind.QUASI_ONLY.value, Kind.NOT_QUASI.value,
        )


@dataclass(frozen=True)
class CWReport:
    records: tuple[CWRecord, ...]
    direct_verdict: Verdict
    bound: int

    @property
    def fail_direction(self) -> tuple[int, ...] | None:
        return next((r.direction for r in self.records if r.failed), None)

    @property
    def aggregate(self) -> str:
        return "AllPass" if self.fail_direction is None else "FailAt"

    @property
    def consistent(self) -> bool:
        direct_id = self.direct_verdict.kind is Kind.INFINITELY_DIVISIBLE
        return direct_id == (self.aggregate == "AllPass")

    def to_json_dict(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "fail_direction": list(self.fail_direction) if self.fail_direction else None,
            "direct_verdict": self.direct_verdict.to_json_dict(),
            "consistent": self.consistent,
            "bound": self.bound,
            "directions": [
                {
                    "direction": list(r.direction),
                    "support_size": r.support_size,
                    "katti": r.katti_verdict,
                    "katti_first_negative": r.katti_first_negative,
                    "quasi_levy": r.quasi_levy_verdict,
                    "witness": _plain(r.witness),
                    "drift": r.drift,
                    "projection_residual": r.projection_residual,
                    "drift_matches": r.drift_matches,
                }
                for r in self.records
            ],
        }

    def render(self) -> str:
        head = f"{'direction':<14}{'support':>8}  {'katti':<10}{'quasi-levy':<21}{'witness':<24}"
        lines = [head.rstrip(), "-" * len(head)]
        for r in self.records:
            lines.append(
                f"{_fmt_vec(r.direction):<14}{r.support_size:>8}  {r.katti_verdict:<10}"
                f"{r.quasi_levy_verdict:<21}{_fmt_witness(r.witness):<24}".rstrip()
            )
        lines.append("")
        agg = self.aggregate
        if agg == "FailAt":
            agg = f"FailAt {_fmt_vec(self.fail_direction)}"
        lines.append(f"aggregate:      {agg}")
        lines.append(f"direct verdict: {self.direct_verdict.kind.value}")
        lines.append(f"consistent:     {'yes' if self.consistent else 'no'}")
        return "\n".join(lines)


def _plain(w):
    if w is None:
        return None
    if isinstance(w, tuple):
        return [float(x) if isinstance(x, float) else int(x) for x in w]
    return w


def _fmt_vec(v) -> str:
    return "(" + ",".join(str(int(x)) for x in v) + ")"


def _fmt_witness(w) -> str:
    if w is None:
        return "-"
    if all(isinstance(x, int) for x in w):
        return "n=" + _fmt_vec(w)
    return "z=(" + ",".join(f"{x:.6f}" for x in w) + ")"


def _project_one(p, a, direct, tol, neg_tol, max_points) -> CWRecord:
    proj = project(p, a)
    lo = int(proj.points[0, 0])
    based = shift(proj, [-lo])
    try:
        seq = katti(based, neg_tol=neg_tol)
        katti_verdict = "ok" if seq.first_negative is None else "negative"
        first_negative = seq.first_negative
    except IllConditionedError:
        katti_verdict, first_negative = "n/a", None

    try:
        verdict = classify(proj, tol, neg_tol, max_points)
    except InconclusiveError:
        return CWRecord(a, len(proj), katti_verdict, first_negative, "inconclusive")

    drift = residual = matches = nu = None
    if verdict.triplet is not None:
        drift = verdict.triplet.drift[0]
        nu = verdict.triplet.nu
        if direct.triplet is not None:
            expected = pushforward_signed(direct.triplet.nu, a)
            residual = nu.max_difference(expected)
            matches = drift == sum(x * k for x, k in zip(a, direct.triplet.drift))
    witness = verdict.witness
    if katti_verdict == "negative" and verdict.kind is Kind.INFINITELY_DIVISIBLE:
        witness = (first_negative + lo,)
    return CWRecord(a, len(proj), katti_verdict, first_negative, verdict.kind.value,
                    witness, drift, residual, matches, nu)


def cw_test(
    p: LatticePmf,
    bound: int = 4,
    tol: float = DEFAULT_TOL,
    neg_tol: float = NEG_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
    signed: bool = False,
    direct: Verdict | None = None,
) -> CWReport:
    """Project p on every direction of :func:`enumerate_directions` and test each law.

    Each projection is shifted to start at 0 and run through Katti's
    recursion, and independently classified via its own quasi-Levy triplet.
    A direction fails when either route certifies non-divisibility.  Raises
    InconclusiveError if some projection could not be classified and no
    direction failed.
    """
    family = enumerate_directions(p.dim, bound, signed)
    if direct is None:
        direct = classify(p, tol, neg_tol, max_points)
    records = tuple(_project_one(p, a, direct, tol, neg_tol, max_points) for a in family)
    report = CWReport(records, direct, bound)
    if report.aggregate == "AllPass" and any(r.quasi_levy_verdict == "inconclusive" for r in records):
        raise InconclusiveError("some projections could not be classified within the grid budget")
    return report

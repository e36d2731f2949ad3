"""Acceptance criteria, one check per criterion with its tolerance pinned.

Run ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass
from functools import cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from latticeid import fixtures  # noqa: E402
from latticeid.cw import cw_test, enumerate_directions  # noqa: E402
from latticeid.errors import ConvergenceError, InconclusiveError, ZeroFoundError  # noqa: E402
from latticeid.measures import bernoulli, convolve, poisson, project, pushforward_signed, shift  # noqa: E402
from latticeid.oned import formal_log_series, katti  # noqa: E402
from latticeid.qid import Kind, classify, factorize, quasi_levy  # noqa: E402
from oracles import atoms_of, max_atom_gap, mercator  # noqa: E402

TOL_MERCATOR = 1e-8
TOL_POISSON = 1e-8
TOL_ZERO_WITNESS = 1e-10
TOL_ORACLE = 1e-9
TOL_RECON = 1e-10
TOL_PROJECTION = 2e-10
TOL_FACTOR = 1e-9
TOL_IMAG = 1e-10
TOL_COVARIANCE = 2e-10
MAX_EXCLUDED = 0.05

SEED = 20240611


@dataclass(frozen=True)
class Outcome:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  [{self.number:>2}] {self.title}: {self.detail} ({self.seconds:.1f}s)"


CRITERIA: dict[int, tuple[str, object]] = {}
RESULTS: list[Outcome] = []
IMAG_SEEN: list[tuple[str, float]] = []


def criterion(number: int, title: str):
    def register(fn):
        CRITERIA[number] = (title, fn)
        return fn
    return register


def evaluate(number: int) -> Outcome:
    title, fn = CRITERIA[number]
    start = time.perf_counter()
    passed, detail = fn()
    out = Outcome(number, title, bool(passed), detail, time.perf_counter() - start)
    RESULTS.append(out)
    return out


def _seen(label, triplet):
    IMAG_SEEN.append((label, triplet.max_imag_residual))
    return triplet


@criterion(1, "Bernoulli(0.3) atoms match the Mercator series")
def bernoulli_mercator():
    v = classify(bernoulli(0.3))
    t = _seen("bernoulli(0.3)", v.triplet)
    gap = max(abs(t.nu[(n,)] - mercator(0.3, n)) for n in range(1, 11))
    ok = gap < TOL_MERCATOR and v.kind is Kind.QUASI_ONLY
    return ok, f"max |nu(n) - mercator| over n<=10 = {gap:.2e} < {TOL_MERCATOR:g}, verdict {v.kind.value}"


@criterion(2, "truncated Poisson laws are ID with nu = lambda delta_1")
def poisson_id():
    worst_one = worst_other = 0.0
    ok = True
    for lam in (0.5, 1.0, 2.0):
        p = poisson(lam, 1e-12)
        v = classify(p)
        t = _seen(f"poisson({lam})", v.triplet)
        seq = katti(p, degree=int(t.nu.points[:, 0].max()))
        worst_one = max(worst_one, abs(t.nu[(1,)] - lam), abs(seq.q[1] - lam))
        others = [abs(c) for n, c in atoms_of(t.nu).items() if n != (1,)]
        worst_other = max([worst_other, *others, *np.abs(seq.q[2:])])
        ok &= v.kind is Kind.INFINITELY_DIVISIBLE and t.drift == (0,)
    ok &= worst_one < TOL_POISSON and worst_other < TOL_POISSON
    return ok, (f"max |nu(1) - lambda| = {worst_one:.2e}, max other |atom| = {worst_other:.2e} "
                f"(both < {TOL_POISSON:g}; Katti agrees), k = 0, verdict ID")


@criterion(3, "Bernoulli(0.5) is refused with a zero at pi")
def bernoulli_half():
    v = classify(bernoulli(0.5))
    gap = abs(v.witness[0] - math.pi)
    ok = v.kind is Kind.NOT_QUASI and gap < TOL_ZERO_WITNESS
    return ok, f"verdict {v.kind.value}, |witness - pi| = {gap:.1e} < {TOL_ZERO_WITNESS:g}"


@cache
def oracle_fixtures():
    """200 random N_0^d pmfs (d in {1, 2}, p0 >= 0.3) whose pgf is zero-free on the closed polydisk.

    A certified zero-free phi with winding k = 0 is the same as a pgf with no
    zero in the closed polydisk, which is exactly when log P has the
    quasi-Levy atoms as its coefficients.  Laws with a zero or with k != 0
    are drawn again; laws that do not converge in the grid budget are
    counted as exclusions.
    """
    rng = np.random.default_rng(SEED)
    kept, counts = [], {"zero": 0, "winding": 0, "no_convergence": 0}
    while len(kept) < 200:
        dim = 1 if len(kept) % 2 == 0 else 2
        p = fixtures.random_n0_pmf(rng, dim, extent=6 if dim == 1 else 3, p0_min=0.3)
        try:
            t = quasi_levy(p)
        except (ZeroFoundError, InconclusiveError):
            counts["zero"] += 1
            continue
        except ConvergenceError:
            counts["no_convergence"] += 1
            continue
        if any(t.drift):
            counts["winding"] += 1
            continue
        kept.append((p, _seen("oracle fixture", t)))
    return kept, counts


@criterion(4, "quasi_levy agrees with the formal log series (and Katti in d=1)")
def oracle_equivalence():
    kept, counts = oracle_fixtures()
    worst_formal = worst_katti = 0.0
    for p, t in kept:
        box = np.maximum(p.points.max(axis=0), np.abs(t.nu.points).max(axis=0))
        series = formal_log_series(p, box=box)
        inside = {n: c for n, c in atoms_of(t.nu).items() if all(0 <= x <= b for x, b in zip(n, box))}
        outside = max((abs(c) for n, c in atoms_of(t.nu).items() if n not in inside), default=0.0)
        worst_formal = max(worst_formal, max_atom_gap(inside, atoms_of(series)), outside)
        if p.dim == 1:
            seq = katti(p, degree=int(box[0]))
            worst_katti = max(worst_katti, max_atom_gap(atoms_of(t.nu), atoms_of(seq.to_measure())))
    excluded = counts["no_convergence"] / (len(kept) + counts["no_convergence"])
    ok = worst_formal < TOL_ORACLE and worst_katti < TOL_ORACLE and excluded <= MAX_EXCLUDED
    return ok, (f"{len(kept)} fixtures, max gap vs formal log {worst_formal:.2e}, vs Katti {worst_katti:.2e} "
                f"(< {TOL_ORACLE:g}); redrawn: {counts['zero']} with a zero, {counts['winding']} with k != 0; "
                f"excluded for grid budget: {counts['no_convergence']} ({excluded:.1%} <= {MAX_EXCLUDED:.0%})")


def _grid_error(p, t, rng) -> float:
    """max |exp(representation) - phi| on the triplet's grid.

    phi is summed directly over the atoms of p.  The exponent is synthesised
    here from the atoms of nu with a plain inverse FFT on the full grid, and
    additionally by direct sums on a random subset of nodes.
    """
    m, d = t.grid_size, p.dim
    axis = 2 * np.pi * np.arange(m) / m
    z = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    phi = np.concatenate([np.exp(1j * c @ p.points.T) @ p.masses
                          for c in np.array_split(z, max(1, len(z) // 4096))])
    acc = np.zeros((m,) * d, dtype=np.complex128)
    np.add.at(acc, tuple((t.nu.points % m).T), t.nu.masses)
    jumps = (np.fft.ifftn(acc) * m**d).reshape(-1) - t.nu.total_mass
    drift = z @ np.asarray(t.drift, dtype=np.float64)
    worst = float(np.max(np.abs(np.exp(1j * drift + jumps) - phi)))
    pick = rng.choice(len(z), size=min(256, len(z)), replace=False)
    direct = np.exp(t.exponent(z[pick]))
    return max(worst, float(np.max(np.abs(direct - phi[pick]))))


@criterion(5, "exp(representation) reproduces phi on the grid")
def reconstruction():
    kept, _ = oracle_fixtures()
    rng = np.random.default_rng(SEED + 5)
    worst = max(_grid_error(p, t, rng) for p, t in kept)
    return worst < TOL_RECON, f"{len(kept)} fixtures, max grid error {worst:.2e} < {TOL_RECON:g}"


@criterion(6, "projections: drift a.k exactly, nu pushed forward per atom")
def projection_consistency():
    rng = np.random.default_rng(SEED + 6)
    directions = enumerate_directions(2, 3)
    worst, drift_ok, count = 0.0, True, 0
    for _ in range(50):
        p = fixtures.random_zero_free(rng, 2, extent=2)
        t = _seen("projection fixture", quasi_levy(p))
        for a in directions:
            s = _seen("projection", quasi_levy(project(p, a)))
            drift_ok &= s.drift == (a[0] * t.drift[0] + a[1] * t.drift[1],)
            worst = max(worst, s.nu.max_difference(pushforward_signed(t.nu, a)))
            count += 1
    ok = drift_ok and worst < TOL_PROJECTION
    return ok, (f"50 fixtures x {len(directions)} directions (B=3), drift exact: {drift_ok}, "
                f"max atom gap {worst:.2e} < {TOL_PROJECTION:g}")


@criterion(7, "Cramer-Wold: ID laws pass, quasi-only laws fail somewhere")
def cramer_wold():
    rng = np.random.default_rng(SEED + 7)
    id_ok = 0
    for i in range(100):
        dim = 2 if i < 70 else 3
        p = fixtures.random_id_law(rng, dim, extent=1 if dim == 3 else 2)
        r = cw_test(p, bound=4 if dim == 2 else 2)
        _seen("cw id", r.direct_verdict.triplet)
        id_ok += r.aggregate == "AllPass" and r.direct_verdict.kind is Kind.INFINITELY_DIVISIBLE
    quasi_ok = 0
    for _ in range(50):
        p = fixtures.random_quasi_only(rng, 2)
        r = cw_test(p, bound=4)
        _seen("cw quasi", r.direct_verdict.triplet)
        quasi_ok += r.aggregate == "FailAt" and r.consistent
    ok = id_ok == 100 and quasi_ok == 50
    return ok, (f"ID laws AllPass with direct ID: {id_ok}/100 (70 in d=2 with B=4, 30 in d=3 with B=2); "
                f"quasi-only laws FailAt with B=4 and consistent: {quasi_ok}/50")


@criterion(8, "factorization identity phi * phi_mu2 = e^{i<k,z>} phi_mu1")
def factorization():
    rng = np.random.default_rng(SEED + 8)
    worst_grid = worst_off = 0.0
    for i in range(50):
        p = fixtures.random_zero_free(rng, 1 + i % 2, extent=2)
        fac = factorize(p)
        _seen("factorize", fac.triplet)
        worst_grid = max(worst_grid, fac.residual)
        z = rng.uniform(0, 2 * np.pi, size=(16, p.dim))
        phi = lambda m: np.exp(1j * z @ m.points.T) @ m.masses  # noqa: E731
        off = np.abs(phi(p) * phi(fac.mu2) - np.exp(1j * z @ np.asarray(fac.drift)) * phi(fac.mu1))
        worst_off = max(worst_off, float(off.max()))
    ok = worst_grid < TOL_FACTOR and worst_off < TOL_FACTOR
    return ok, (f"50 fixtures, max residual on grid {worst_grid:.2e}, at random off-grid points "
                f"{worst_off:.2e} (< {TOL_FACTOR:g})")


@criterion(10, "additivity under convolution and shift covariance")
def covariance():
    rng = np.random.default_rng(SEED + 10)
    worst_add = worst_shift = 0.0
    drift_ok = True
    for i in range(100):
        dim = 1 + i % 2
        p = fixtures.random_zero_free(rng, dim, extent=2)
        q = fixtures.random_zero_free(rng, dim, extent=2)
        m = tuple(int(x) for x in rng.integers(-6, 7, size=dim))
        tp, tq = _seen("pair", quasi_levy(p)), _seen("pair", quasi_levy(q))
        tpq = _seen("pair", quasi_levy(convolve(p, q)))
        ts = _seen("pair", quasi_levy(shift(p, m)))
        drift_ok &= tpq.drift == tuple(a + b for a, b in zip(tp.drift, tq.drift))
        drift_ok &= ts.drift == tuple(a + b for a, b in zip(tp.drift, m))
        worst_add = max(worst_add, tpq.nu.max_difference(tp.nu + tq.nu))
        worst_shift = max(worst_shift, ts.nu.max_difference(tp.nu))
    ok = drift_ok and worst_add < TOL_COVARIANCE and worst_shift < TOL_COVARIANCE
    return ok, (f"100 pairs, drifts exact: {drift_ok}, max gap additivity {worst_add:.2e}, "
                f"shift {worst_shift:.2e} (< {TOL_COVARIANCE:g})")


@criterion(9, "quasi-Levy coefficients are real")
def realness():
    # runs after every other criterion so it sees all of their triplets
    for n in sorted(CRITERIA):
        if n != 9 and not any(r.number == n for r in RESULTS):
            evaluate(n)
    worst = max(v for _, v in IMAG_SEEN)
    return worst < TOL_IMAG, f"{len(IMAG_SEEN)} triplets, max |Im c_n| {worst:.2e} < {TOL_IMAG:g}"


ORDER = [1, 2, 3, 4, 5, 6, 7, 8, 10, 9]


@pytest.mark.acceptance
@pytest.mark.parametrize("number", ORDER, ids=lambda n: f"criterion{n}")
def test_criterion(number):
    done = next((r for r in RESULTS if r.number == number), None)
    out = done or evaluate(number)
    print(out.line())
    assert out.passed, out.line()


if __name__ == "__main__":
    for n in ORDER:
        if not any(r.number == n for r in RESULTS):
            evaluate(n)
    for r in sorted(RESULTS, key=lambda r: r.number):
        print(r.line())
    sys.exit(0 if all(r.passed for r in RESULTS) else 1)

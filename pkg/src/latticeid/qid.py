"""Quasi-Levy triplets, divisibility verdicts and compound Poisson factorization.

A zero-free lattice law has characteristic function

    phi(z) = exp(i <k, z> + sum_{n != 0} c_n (exp(i <n, z>) - 1))

with an integer drift k and real c_n forming a finite signed measure nu.
:func:`quasi_levy` recovers (k, nu) from torus samples: unwrap the phase,
read k off the winding, subtract i<k, z> and Fourier-transform what is left.
The law is infinitely divisible exactly when nu is nonnegative.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal

from .charfn import (
    DEFAULT_MAX_POINTS,
    Refusal,
    ZeroFreeCertificate,
    certify_adaptive,
    distinguished_log,
    drift_removed,
    sample_grid,
    winding_vector,
)
from .errors import (
    ConvergenceError,
    GridBudgetError,
    InconclusiveError,
    NumericalFault,
    UnwrapError,
    WindingError,
    ZeroFoundError,
)
from .measures import LatticePmf, SignedLatticeMeasure, poisson_cutoff, shift

DEFAULT_TOL = 1e-10
#: Atoms at or above -NEG_TOL count as nonnegative.
NEG_TOL = 1e-9


@dataclass(frozen=True)
class QLTriplet:
    drift: tuple[int, ...]
    nu: SignedLatticeMeasure
    max_imag_residual: float
    reconstruction_error: float
    tail_mass: float
    grid_size: int
    tol: float = DEFAULT_TOL

    @property
    def dim(self) -> int:
        return self.nu.dim

    def exponent(self, z) -> np.ndarray:
        """i<k,z> + sum c_n (e^{i<n,z>} - 1) at the rows of ``z``."""
        z = np.asarray(z, dtype=np.float64).reshape(-1, self.dim)
        phase = z @ self.nu.points.T
        jumps = (np.exp(1j * phase) - 1.0) @ self.nu.masses
        return 1j * (z @ np.asarray(self.drift, dtype=np.float64)) + jumps

    def diagnostics(self) -> dict:
        return {
            "reconstruction_error": self.reconstruction_error,
            "max_imag_residual": self.max_imag_residual,
            "tail_mass": self.tail_mass,
            "grid_size": self.grid_size,
        }


class Kind(str, enum.Enum):
    INFINITELY_DIVISIBLE = "InfinitelyDivisible"
    QUASI_ONLY = "QuasiOnly"
    NOT_QUASI = "NotQuasi"

    @property
    def exit_code(self) -> int:
        return {"InfinitelyDivisible": 0, "QuasiOnly": 1, "NotQuasi": 2}[self.value]


@dataclass(frozen=True)
class Verdict:
    kind: Kind
    triplet: QLTriplet | None = None
    witness: tuple | None = None
    witness_mass: float | None = None
    marginal: tuple = ()
    certificate: ZeroFreeCertificate | Refusal | None = None

    def __post_init__(self):
        if (self.kind is Kind.NOT_QUASI) != (self.triplet is None):
            raise ValueError("a triplet is present exactly when the law is quasi-infinitely divisible")

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind.value}
        if self.triplet is not None:
            out["drift"] = list(self.triplet.drift)
            out["nu"] = self.triplet.nu.to_json_dict()
            out["diagnostics"] = self.triplet.diagnostics()
        if self.witness is not None:
            key = "witness_z" if self.kind is Kind.NOT_QUASI else "witness_n"
            out[key] = list(self.witness)
        if self.witness_mass is not None:
            out["witness_mass"] = self.witness_mass
        if self.marginal:
            out["marginal"] = [list(n) for n in self.marginal]
        if self.certificate is not None:
            cert = self.certificate
            out.setdefault("diagnostics", {})
            out["diagnostics"]["certificate"] = {
                "valid": cert.valid,
                "grid_size": cert.grid_size,
                "min_modulus": getattr(cert, "min_modulus", getattr(cert, "modulus", None)),
                "lipschitz_bound": cert.lipschitz_bound,
            }
        return out


def _certify(p: LatticePmf, max_points: int) -> ZeroFreeCertificate:
    cert = certify_adaptive(p, max_points=max_points)
    if isinstance(cert, Refusal):
        if cert.reason == "zero":
            raise ZeroFoundError(
                f"characteristic function vanishes near z={cert.witness}",
                witness=cert.witness, modulus=cert.modulus,
            )
        raise InconclusiveError(
            f"zero-freeness undecided at M={cert.grid_size} (min modulus {cert.modulus:.3g})"
        )
    return cert


def _start_size(p: LatticePmf, cert: ZeroFreeCertificate) -> int:
    """Smallest power of two >= 8 that holds the support radius twice over."""
    radius = int(np.max(np.abs(p.points))) if len(p) else 0
    size = 8
    while size < 2 * radius:
        size *= 2
    return max(size, cert.grid_size)


def _prune(points, values, threshold, budget):
    """Drop the smallest atoms below ``threshold`` while their total stays within ``budget``."""
    mags = np.abs(values)
    small = np.flatnonzero(mags < threshold)
    order = small[np.argsort(mags[small])]
    drop = order[np.cumsum(mags[order]) <= budget]
    keep = np.ones(len(values), dtype=bool)
    keep[drop] = False
    return points[keep], values[keep]


def quasi_levy(
    p: LatticePmf,
    tol: float = DEFAULT_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
    prune: float | None = None,
) -> QLTriplet:
    """Drift and quasi-Levy measure of a zero-free lattice law.

    The grid is doubled until the coefficients in the outer shell of the
    aliased index box (max |n_i| >= M/4) sum to less than ``tol`` and
    exp(representation) matches phi to ``tol/2`` both on the sampling grid
    and on the half-cell-shifted grid.  Atoms below ``prune`` (default
    ``tol/10``) are removed smallest first as long as their total |mass| stays
    within ``tol/10``.

    Raises ZeroFoundError if phi vanishes, InconclusiveError if zero-freeness
    cannot be settled, ConvergenceError when the grid budget runs out and
    NumericalFault if the coefficients are not real to within ``tol``.
    """
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    prune = tol / 10 if prune is None else prune
    # The grid only sees the winding modulo M: work with the law centred at
    # its rounded mean, where the winding is small, and move the drift back.
    centre = np.rint(p.mean()).astype(np.int64)
    if np.any(centre):
        t = quasi_levy(shift(p, -centre), tol, max_points, prune)
        drift = tuple(int(a + b) for a, b in zip(t.drift, centre))
        return replace(t, drift=drift)
    cert = _certify(p, max_points)
    d = p.dim
    size = _start_size(p, cert)
    while True:
        if size**d > max_points:
            raise ConvergenceError(f"no convergence before M^{d} exceeded {max_points} points")
        grid = sample_grid(p, size, max_points)
        try:
            psi = distinguished_log(grid, cert)
            k = winding_vector(psi, p)
        except (UnwrapError, WindingError):
            size *= 2
            continue
        coeffs = np.fft.fftn(drift_removed(psi, k)) / float(size) ** d

        freqs = np.rint(np.fft.fftfreq(size, 1.0 / size)).astype(np.int64)
        index = np.stack(np.meshgrid(*([freqs] * d), indexing="ij"), axis=-1).reshape(-1, d)
        flat = coeffs.reshape(-1)
        shell = np.max(np.abs(index), axis=1) >= size // 4
        tail = float(np.sum(np.abs(flat[shell])))
        if tail >= tol:
            size *= 2
            continue
        real = flat.real.copy()
        real[0] = 0.0
        recon = _reconstruction_error(p, index, real, k, size)
        if recon < tol / 2:
            break
        size *= 2

    c0 = flat[0]
    rest = np.sum(flat[1:])
    if abs(c0 + rest) > tol:
        raise NumericalFault(f"c_0 = {c0} differs from -sum c_n = {-rest}")
    imag = float(np.max(np.abs(flat.imag)))
    if imag > tol:
        raise NumericalFault(f"imaginary part {imag:.3g} of the Fourier coefficients exceeds tol")
    nonzero = real != 0
    points, values = _prune(index[nonzero], real[nonzero], prune, tol / 10)
    nu = SignedLatticeMeasure.from_arrays(points, values, d)
    return QLTriplet(k, nu, imag, recon, tail, size, tol)


def _reconstruction_error(p, index, coeffs, k, size) -> float:
    """max |exp(representation) - phi| over the grid and the half-shifted grid."""
    # coeffs is laid out like the FFT grid, so one inverse FFT evaluates the
    # jump sum; the half-shifted grid needs a twiddle exp(i pi sum(n) / M)
    worst = 0.0
    total = float(np.sum(coeffs))
    shape = (size,) * p.dim
    twiddle = np.exp(1j * np.pi * index.sum(axis=1) / size)
    for offset in (0.0, 0.5):
        weights = coeffs * twiddle if offset else coeffs
        jumps = np.fft.ifftn(weights.reshape(shape)) * float(size) ** p.dim
        z = sample_grid(p, size, max_points=size**p.dim, offset=offset)
        drift = sum(kj * node for kj, node in zip(k, z.nodes()))
        approx = np.exp(1j * drift + jumps - total)
        worst = max(worst, float(np.max(np.abs(approx - z.values))))
    return worst


def classify(
    p: LatticePmf,
    tol: float = DEFAULT_TOL,
    neg_tol: float = NEG_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
) -> Verdict:
    """Three-way verdict: infinitely divisible, quasi only, or not quasi-ID.

    Raises InconclusiveError when the grid budget runs out before
    zero-freeness is either certified or refuted.
    """
    cert = certify_adaptive(p, max_points=max_points)
    if isinstance(cert, Refusal):
        if cert.reason == "zero":
            return Verdict(Kind.NOT_QUASI, witness=cert.witness, certificate=cert)
        raise InconclusiveError(
            f"zero-freeness undecided at M={cert.grid_size} (min modulus {cert.modulus:.3g})"
        )
    triplet = quasi_levy(p, tol, max_points)
    nu = triplet.nu
    marginal = tuple(
        tuple(int(x) for x in n)
        for n, c in zip(nu.points, nu.masses)
        if -neg_tol <= c < 0
    )
    where, mass = nu.min_atom()
    if where is not None and mass < -neg_tol:
        return Verdict(Kind.QUASI_ONLY, triplet, where, mass, marginal, cert)
    return Verdict(Kind.INFINITELY_DIVISIBLE, triplet, marginal=marginal, certificate=cert)


def hahn_jordan(v: SignedLatticeMeasure) -> tuple[SignedLatticeMeasure, SignedLatticeMeasure]:
    """Split v into nonnegative parts with disjoint supports, v = plus - minus."""
    pos = v.masses > 0
    plus = SignedLatticeMeasure.from_arrays(v.points[pos], v.masses[pos], v.dim)
    minus = SignedLatticeMeasure.from_arrays(v.points[~pos], -v.masses[~pos], v.dim)
    return plus, minus


@dataclass(frozen=True)
class CompoundPoissonFactor:
    """Jump rate and jump-size law of a compound Poisson distribution."""

    rate: float
    jump_law: LatticePmf

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("jump rate must be positive")
        if np.any(np.all(self.jump_law.points == 0, axis=1)):
            raise ValueError("jump law must not charge the origin")

    @classmethod
    def from_measure(cls, nu: SignedLatticeMeasure) -> "CompoundPoissonFactor":
        """Rate nu(Z^d) and jump law nu / nu(Z^d) for a nonnegative nu."""
        if np.any(nu.masses < 0):
            raise ValueError("compound Poisson needs a nonnegative measure")
        rate = nu.total_mass
        return cls(rate, LatticePmf.from_arrays(nu.points, nu.masses, nu.dim, normalize=True))


def compound_poisson_pmf(f: CompoundPoissonFactor, tail: float = 1e-12) -> LatticePmf:
    """exp(-rate) sum_{m <= m*} rate^m sigma^{*m} / m!, renormalized.

    m* is the smallest m with P(Poisson(rate) > m) < tail.  Terms are built by
    FFT convolution on dense boxes; entries below a cut-off are dropped and
    the cut-off is lowered until the dropped mass stays under ``tail / 2``.
    ``meta`` records the Poisson cut and the dropped mass.
    """
    if not 0 < tail <= 1e-6:
        raise ValueError("tail must lie in (0, 1e-6]")
    lam, sigma = f.rate, f.jump_law
    m_star = poisson_cutoff(lam, tail)
    cut = tail * 1e-4
    while True:
        points, masses, dropped = _compound_terms(lam, sigma, m_star, cut)
        if dropped <= tail / 2 or cut < 1e-300:
            break
        cut *= 1e-3
    return LatticePmf.from_arrays(
        points, masses, sigma.dim, normalize=True,
        meta={"family": "compound_poisson", "rate": lam, "tail": tail,
              "poisson_cutoff": m_star, "dropped_mass": dropped},
    )


def _compound_terms(lam, sigma, m_star, cut):
    d = sigma.dim
    lo, hi = sigma.support_bounds()
    kernel = np.zeros(tuple(hi - lo + 1))
    kernel[tuple((sigma.points - lo).T)] = sigma.masses
    term = np.full((1,) * d, math.exp(-lam))
    origin = np.zeros(d, dtype=np.int64)
    pts, wts = [origin[None, :]], [term.reshape(-1)]
    dropped = 0.0
    for m in range(1, m_star + 1):
        term = signal.fftconvolve(term, kernel) * (lam / m)
        origin = origin + lo
        noise = 1e-15 * float(term.max())
        small = term < max(cut, noise)
        dropped += float(term[small & (term > 0)].sum())
        term[small] = 0.0
        nz = np.nonzero(term)
        if len(nz[0]) == 0:
            break
        # crop to the bounding box of what is left
        first = np.array([a.min() for a in nz])
        last = np.array([a.max() for a in nz])
        term = term[tuple(slice(a, b + 1) for a, b in zip(first, last))]
        origin = origin + first
        nz = np.nonzero(term)
        pts.append(np.stack(nz, axis=1) + origin)
        wts.append(term[nz])
    return np.concatenate(pts), np.concatenate(wts), dropped


@dataclass(frozen=True)
class Factorization:
    """phi(z) = e^{i<k,z>} phi_mu1(z) / phi_mu2(z) with compound Poisson mu1, mu2."""

    drift: tuple[int, ...]
    mu1: LatticePmf
    mu2: LatticePmf
    factor1: CompoundPoissonFactor
    factor2: CompoundPoissonFactor
    residual: float
    grid_size: int
    triplet: QLTriplet = field(repr=False)

    def __iter__(self):
        return iter((self.drift, self.mu1, self.mu2))


def factorize(
    p: LatticePmf,
    tol: float = DEFAULT_TOL,
    max_points: int = DEFAULT_MAX_POINTS,
) -> Factorization:
    """Write p as a shifted quotient of two compound Poisson laws.

    Both the positive and negative part of nu get an extra unit atom at e_1
    so that either rate is strictly positive.  The identity
    phi * phi_mu2 = e^{i<k,z>} phi_mu1 is checked on the triplet's grid to
    within 10 * tol.
    """
    triplet = quasi_levy(p, tol, max_points)
    plus, minus = hahn_jordan(triplet.nu)
    e1 = np.zeros((1, p.dim), dtype=np.int64)
    e1[0, 0] = 1
    unit = SignedLatticeMeasure.from_arrays(e1, [1.0], p.dim)
    f1 = CompoundPoissonFactor.from_measure(plus + unit)
    f2 = CompoundPoissonFactor.from_measure(minus + unit)
    cp_tail = min(tol, 1e-6)
    mu1 = compound_poisson_pmf(f1, cp_tail)
    mu2 = compound_poisson_pmf(f2, cp_tail)
    residual = factorization_residual(p, triplet.drift, mu1, mu2, triplet.grid_size, max_points)
    if residual >= 10 * tol:
        raise NumericalFault(f"factorization residual {residual:.3g} exceeds 10*tol")
    return Factorization(triplet.drift, mu1, mu2, f1, f2, residual, triplet.grid_size, triplet)


def factorization_residual(p, k, mu1, mu2, size, max_points=DEFAULT_MAX_POINTS) -> float:
    """max over the grid of |phi_p * phi_mu2 - e^{i<k,z>} phi_mu1|."""
    if size**p.dim > max_points:
        raise GridBudgetError(f"grid {size}^{p.dim} exceeds budget")
    g = sample_grid(p, size, max_points)
    g1 = sample_grid(mu1, size, max_points)
    g2 = sample_grid(mu2, size, max_points)
    drift = sum(kj * node for kj, node in zip(k, g.nodes()))
    return float(np.max(np.abs(g.values * g2.values - np.exp(1j * drift) * g1.values)))

"""Random lattice laws for tests, benchmarks and ``latticeid generate``.

All generators take a ``numpy.random.Generator`` so runs are reproducible
from a seed.
"""
from __future__ import annotations

import numpy as np

from .measures import LatticePmf, SignedLatticeMeasure, bernoulli, convolve, dirac, product
from .qid import CompoundPoissonFactor, compound_poisson_pmf


def random_n0_pmf(rng: np.random.Generator, dim: int, extent: int = 4, p0_min: float = 0.3,
                  p0_max: float = 0.9, atoms: int | None = None) -> LatticePmf:
    """Random pmf on {0..extent}^d with p(0) drawn uniformly from [p0_min, p0_max]."""
    cells = (extent + 1) ** dim
    count = atoms if atoms is not None else int(rng.integers(1, min(cells - 1, 8) + 1))
    count = min(count, cells - 1)
    flat = rng.choice(np.arange(1, cells), size=count, replace=False)
    pts = np.stack(np.unravel_index(flat, (extent + 1,) * dim), axis=1)
    w = rng.random(count) + 0.05
    p0 = rng.uniform(p0_min, p0_max)
    w = w / w.sum() * (1.0 - p0)
    pts = np.vstack([np.zeros((1, dim), dtype=np.int64), pts])
    return LatticePmf.from_arrays(pts, np.concatenate([[p0], w]), dim, normalize=True)


def random_zero_free(rng: np.random.Generator, dim: int, extent: int = 4, offset: int = 3,
                     p0_min: float = 0.55, p0_max: float = 0.8) -> LatticePmf:
    """Random law with the largest atom above 1/2 (so |phi| >= 2 p_max - 1 > 0), randomly shifted.

    Raising ``p0_min`` speeds up the decay of the quasi-Levy atoms, which
    keeps three-dimensional fixtures resolvable on a 64^3 grid.
    """
    if p0_min <= 0.5:
        raise ValueError("p0_min must exceed 1/2 for a zero-free guarantee")
    base = random_n0_pmf(rng, dim, extent, p0_min=p0_min, p0_max=p0_max)
    move = rng.integers(-offset, offset + 1, size=dim)
    return LatticePmf.from_arrays(base.points + move, base.masses, dim)


def random_levy_measure(rng: np.random.Generator, dim: int, extent: int = 2, rate: float = 0.6,
                        exclude=()) -> SignedLatticeMeasure:
    """Nonnegative measure with total mass ``rate`` on a few points of [-extent, extent]^d."""
    excluded = {tuple(e) for e in exclude}
    pts = []
    while not pts:
        cand = rng.integers(-extent, extent + 1, size=(int(rng.integers(1, 5)), dim))
        pts = [tuple(c) for c in cand if any(c) and tuple(c) not in excluded]
    pts = sorted(set(pts))
    w = rng.random(len(pts)) + 0.1
    w = w / w.sum() * rate
    return SignedLatticeMeasure.from_arrays(pts, w, dim)


def random_id_law(rng: np.random.Generator, dim: int, extent: int = 2, rate: float | None = None,
                  tail: float = 1e-14) -> LatticePmf:
    """Truncated compound Poisson law with a random nonnegative Levy measure."""
    if rate is None:
        rate = float(rng.uniform(0.2, 0.8))
    nu = random_levy_measure(rng, dim, extent, rate)
    return compound_poisson_pmf(CompoundPoissonFactor.from_measure(nu), tail)


def random_quasi_only(rng: np.random.Generator, dim: int, tail: float = 1e-14,
                      r_min: float = 0.2, r_max: float = 0.45) -> LatticePmf:
    """Bernoulli(r < 1/2) first coordinate convolved with a small ID law.

    The quasi-Levy measure carries the negative atom -(r/(1-r))^2/2 at 2 e_1;
    the ID part keeps its jumps inside [0, 1]^d away from 2 e_1.
    """
    r = float(rng.uniform(r_min, r_max))
    first = bernoulli(r)
    if dim > 1:
        first = product(first, dirac((0,) * (dim - 1)))
    two_e1 = (2,) + (0,) * (dim - 1)
    nu = random_levy_measure(rng, dim, 1, float(rng.uniform(0.1, 0.3)), exclude=[two_e1])
    nu = SignedLatticeMeasure.from_arrays(np.abs(nu.points), nu.masses, dim)
    noise = compound_poisson_pmf(CompoundPoissonFactor.from_measure(nu), tail)
    return convolve(first, noise)

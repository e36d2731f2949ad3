"""Finitely supported measures on the integer lattice Z^d.

Two value types live here:

* :class:`LatticePmf` -- a probability mass function with finitely many atoms.
* :class:`SignedLatticeMeasure` -- a finite signed measure on Z^d minus the
  origin, the shape taken by quasi-Levy measures.

Both store their atoms as a lexicographically sorted ``(N, d)`` int64 array of
lattice points plus an ``(N,)`` float64 array of masses.  The arrays are made
read-only on construction, so instances can be shared freely between threads.

JSON layout (also the CLI file format)::

    {"dim": 2, "atoms": [{"n": [0, 0], "p": 0.7}, {"n": [1, 1], "p": 0.3}]}

Signed measures use the key ``"c"`` instead of ``"p"``.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DimensionMismatch, NormalizationError, SingularMatrixError

#: Allowed deviation of a pmf's total mass from one.
MASS_TOL = 1e-12

__all__ = [
    "MASS_TOL",
    "LatticePmf",
    "SignedLatticeMeasure",
    "convolve",
    "project",
    "pushforward_signed",
    "shift",
    "product",
    "affine",
    "dirac",
    "bernoulli",
    "poisson",
    "geometric",
    "uniform",
    "poisson_cutoff",
    "measure_from_json",
    "load_measure",
]


def _as_point(key, dim=None) -> tuple[int, ...]:
    if isinstance(key, (int, np.integer)):
        point = (int(key),)
    else:
        point = tuple(int(x) for x in key)
    if dim is not None and len(point) != dim:
        raise DimensionMismatch(f"lattice point {point} has dimension {len(point)}, expected {dim}")
    return point


def _canonicalize(points: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sort rows lexicographically and sum the weights of repeated rows."""
    if len(weights) == 0:
        return points.reshape(0, points.shape[1]), weights.astype(np.float64)
    order = np.lexsort(points.T[::-1])
    points = points[order]
    weights = weights[order]
    first = np.ones(len(points), dtype=bool)
    first[1:] = np.any(points[1:] != points[:-1], axis=1)
    if first.all():
        return points, weights
    group = np.cumsum(first) - 1
    summed = np.zeros(int(group[-1]) + 1)
    np.add.at(summed, group, weights)
    return points[first], summed


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


class _AtomicMeasure:
    """Shared storage and comparison logic for the two measure types."""

    __slots__ = ("dim", "points", "masses", "meta")
    _mass_key = "p"

    def __init__(self, atoms: Mapping, dim: int | None = None, *, meta: Mapping | None = None):
        keys = [_as_point(k) for k in atoms]
        if dim is None:
            if not keys:
                raise ValueError("dim must be given for an empty atom map")
            dim = len(keys[0])
        pts = np.array([_as_point(k, dim) for k in keys], dtype=np.int64).reshape(len(keys), dim)
        w = np.array([float(v) for v in atoms.values()], dtype=np.float64)
        self._init(dim, pts, w, meta)

    def _init(self, dim, points, weights, meta):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dim must be a positive integer")
        points = np.asarray(points, dtype=np.int64).reshape(-1, dim)
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if len(points) != len(weights):
            raise ValueError("points and masses differ in length")
        if not np.all(np.isfinite(weights)):
            raise ValueError("masses must be finite")
        points, weights = _canonicalize(points, weights)
        points, weights = self._validate(dim, points, weights)
        self.dim = dim
        self.points = _freeze(points)
        self.masses = _freeze(weights)
        self.meta = dict(meta) if meta else {}

    def _validate(self, dim, points, weights):
        return points, weights

    @classmethod
    def from_arrays(cls, points, masses, dim: int | None = None, *, meta=None, **kwargs):
        points = np.asarray(points, dtype=np.int64)
        if dim is None:
            if points.ndim != 2:
                raise ValueError("dim is required when points is not a 2-D array")
            dim = points.shape[1]
        obj = cls.__new__(cls)
        obj._init_from_arrays(dim, points, masses, meta, **kwargs)
        return obj

    def _init_from_arrays(self, dim, points, masses, meta):
        self._init(dim, points, masses, meta)

    # -- container protocol -------------------------------------------------

    @property
    def atoms(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(x) for x in n): float(m) for n, m in zip(self.points, self.masses)}

    def __len__(self) -> int:
        return len(self.masses)

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], float]]:
        return iter(self.atoms.items())

    def __getitem__(self, key) -> float:
        """Mass at a lattice point (zero off the support)."""
        point = np.asarray(_as_point(key, self.dim), dtype=np.int64)
        hit = np.flatnonzero(np.all(self.points == point, axis=1))
        return float(self.masses[hit[0]]) if len(hit) else 0.0

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.masses, other.masses)
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.dim, self.points.tobytes(), self.masses.tobytes()))

    def __repr__(self) -> str:
        shown = ", ".join(f"{n}: {m:.6g}" for n, m in list(self.atoms.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"{type(self).__name__}(dim={self.dim}, {{{shown}{more}}})"

    def isclose(self, other, atol: float = MASS_TOL) -> bool:
        """Atom-map equality with masses compared to ``atol``; missing atoms count as zero."""
        return self.max_difference(other) <= atol

    def max_difference(self, other) -> float:
        if self.dim != other.dim:
            raise DimensionMismatch("measures live in different dimensions")
        pts = np.concatenate([self.points, other.points])
        w = np.concatenate([self.masses, -np.asarray(other.masses)])
        if len(w) == 0:
            return 0.0
        _, diff = _canonicalize(pts, w)
        return float(np.max(np.abs(diff))) if len(diff) else 0.0

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def support_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise minimum and maximum of the support."""
        if len(self) == 0:
            zero = np.zeros(self.dim, dtype=np.int64)
            return zero, zero
        return self.points.min(axis=0), self.points.max(axis=0)

    # -- JSON ----------------------------------------------------------------

    def to_json_dict(self) -> dict:
        out = {
            "dim": self.dim,
            "atoms": [
                {"n": [int(x) for x in n], self._mass_key: float(m)}
                for n, m in zip(self.points, self.masses)
            ],
        }
        if self.meta:
            out["meta"] = self.meta
        return out

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(indent=1) + "\n")

    @classmethod
    def from_json_dict(cls, obj: Mapping):
        try:
            dim = int(obj["dim"])
            rows = obj["atoms"]
            points = np.array([row["n"] for row in rows], dtype=np.int64).reshape(len(rows), dim)
            masses = np.array([row[cls._mass_key] for row in rows], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed {cls.__name__} JSON: {exc}") from exc
        return cls.from_arrays(points, masses, dim, meta=obj.get("meta"))

    @classmethod
    def loads(cls, text: str):
        return cls.from_json_dict(json.loads(text))

    @classmethod
    def load(cls, path):
        return cls.loads(Path(path).read_text())


class LatticePmf(_AtomicMeasure):
    """Finitely supported probability mass function on Z^d.

    Exact zero masses are dropped; negative masses, or a total differing from
    one by more than :data:`MASS_TOL`, raise :class:`NormalizationError`.
    Pass ``normalize=True`` to :meth:`from_arrays` to rescale instead.

    >>> LatticePmf({0: 0.7, 1: 0.3})
    LatticePmf(dim=1, {(0,): 0.7, (1,): 0.3})
    """

    __slots__ = ()

    def _init_from_arrays(self, dim, points, masses, meta, normalize: bool = False):
        masses = np.asarray(masses, dtype=np.float64)
        if normalize:
            if np.any(masses < 0):
                raise NormalizationError("negative mass in pmf")
            total = math.fsum(masses)
            if not total > 0:
                raise NormalizationError("pmf has no positive mass", total=total)
            masses = masses / total
        self._init(dim, points, masses, meta)

    def _validate(self, dim, points, weights):
        if np.any(weights < 0):
            bad = points[np.argmin(weights)]
            raise NormalizationError(f"negative mass at {tuple(int(x) for x in bad)}")
        keep = weights > 0
        points, weights = points[keep], weights[keep]
        total = math.fsum(weights)
        if abs(total - 1.0) > MASS_TOL:
            raise NormalizationError(f"masses sum to {total!r}, not 1", total=total)
        return points, weights

    def mean(self) -> np.ndarray:
        return self.masses @ self.points

    def lipschitz_bound(self) -> float:
        """Global bound on the gradient norm of the characteristic function."""
        return float(self.masses @ np.linalg.norm(self.points, axis=1))


class SignedLatticeMeasure(_AtomicMeasure):
    """Finite signed measure on Z^d without an atom at the origin.

    Supports the linear operations ``+``, ``-`` and scalar ``*``.  Atoms whose
    mass is exactly zero are dropped.
    """

    __slots__ = ()
    _mass_key = "c"

    def _validate(self, dim, points, weights):
        keep = weights != 0
        points, weights = points[keep], weights[keep]
        if np.any(np.all(points == 0, axis=1)):
            raise ValueError("signed lattice measure cannot charge the origin")
        return points, weights

    @classmethod
    def zero(cls, dim: int) -> "SignedLatticeMeasure":
        return cls.from_arrays(np.zeros((0, dim), dtype=np.int64), np.zeros(0), dim)

    @property
    def total_variation(self) -> float:
        return math.fsum(np.abs(self.masses))

    def min_atom(self) -> tuple[tuple[int, ...] | None, float]:
        """The atom of smallest mass, or ``(None, 0.0)`` for the zero measure."""
        if len(self) == 0:
            return None, 0.0
        i = int(np.argmin(self.masses))
        return tuple(int(x) for x in self.points[i]), float(self.masses[i])

    def _combine(self, other, sign):
        if not isinstance(other, SignedLatticeMeasure):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatch("measures live in different dimensions")
        return SignedLatticeMeasure.from_arrays(
            np.concatenate([self.points, other.points]),
            np.concatenate([self.masses, sign * other.masses]),
            self.dim,
        )

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return SignedLatticeMeasure.from_arrays(self.points, -self.masses, self.dim)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, np.floating, np.integer)):
            return NotImplemented
        return SignedLatticeMeasure.from_arrays(self.points, float(scalar) * self.masses, self.dim)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# operations


def _check_dims(*measures):
    dims = {m.dim for m in measures}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def _vector(v, dim, name="vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.int64).reshape(-1)
    if len(arr) != dim:
        raise DimensionMismatch(f"{name} has length {len(arr)}, expected {dim}")
    return arr


def convolve(p: LatticePmf, q: LatticePmf) -> LatticePmf:
    """Law of X + Y for independent X ~ p, Y ~ q."""
    _check_dims(p, q)
    pts = (p.points[:, None, :] + q.points[None, :, :]).reshape(-1, p.dim)
    w = np.multiply.outer(p.masses, q.masses).reshape(-1)
    return LatticePmf.from_arrays(pts, w, p.dim, normalize=True)


def project(p: LatticePmf, a: Sequence[int]) -> LatticePmf:
    """Law of a^T X as a one-dimensional pmf (integer arithmetic throughout)."""
    a = _vector(a, p.dim, "direction")
    return LatticePmf.from_arrays((p.points @ a)[:, None], p.masses, 1)


def pushforward_signed(v: SignedLatticeMeasure, a: Sequence[int]) -> SignedLatticeMeasure:
    """Image of ``v`` under n -> a^T n with any mass landing at 0 removed."""
    a = _vector(a, v.dim, "direction")
    image = v.points @ a
    off_origin = image != 0
    return SignedLatticeMeasure.from_arrays(image[off_origin][:, None], v.masses[off_origin], 1)


def shift(p: LatticePmf, m: Sequence[int]) -> LatticePmf:
    """Translate every atom by ``m``."""
    m = _vector(m, p.dim, "shift")
    return LatticePmf.from_arrays(p.points + m, p.masses, p.dim)


def product(p: LatticePmf, q: LatticePmf) -> LatticePmf:
    """Joint law of independent coordinates, dimension ``p.dim + q.dim``."""
    left = np.repeat(p.points, len(q), axis=0)
    right = np.tile(q.points, (len(p), 1))
    w = np.multiply.outer(p.masses, q.masses).reshape(-1)
    return LatticePmf.from_arrays(np.hstack([left, right]), w, p.dim + q.dim, normalize=True)


def _integer_det(matrix: Sequence[Sequence[int]]) -> int:
    rows = [[Fraction(int(x)) for x in row] for row in matrix]
    n = len(rows)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] / rows[col][col]
            for c in range(col, n):
                rows[r][c] -= factor * rows[col][c]
    return int(det)


def affine(p: LatticePmf, A: Sequence[Sequence[int]], v: Sequence[int]) -> LatticePmf:
    """Law of A X + v for an integer matrix A with nonzero determinant."""
    A = np.asarray(A, dtype=np.int64)
    if A.shape != (p.dim, p.dim):
        raise DimensionMismatch(f"matrix has shape {A.shape}, expected {(p.dim, p.dim)}")
    if _integer_det(A.tolist()) == 0:
        raise SingularMatrixError("affine map needs an invertible matrix")
    v = _vector(v, p.dim, "offset")
    return LatticePmf.from_arrays(p.points @ A.T + v, p.masses, p.dim)


# ---------------------------------------------------------------------------
# constructors


def dirac(point) -> LatticePmf:
    point = _as_point(point)
    return LatticePmf({point: 1.0})


def bernoulli(p: float) -> LatticePmf:
    if not 0 <= p <= 1:
        raise ValueError("Bernoulli parameter must lie in [0, 1]")
    return LatticePmf.from_arrays([[0], [1]], [1.0 - p, p], 1, meta={"family": "bernoulli", "p": p})


def uniform(points: Iterable) -> LatticePmf:
    pts = [_as_point(x) for x in points]
    return LatticePmf.from_arrays(pts, np.ones(len(pts)), normalize=True)


def poisson_cutoff(lam: float, tail: float) -> int:
    """Smallest m with P(Poisson(lam) > m) < tail."""
    if lam <= 0:
        return 0
    m = int(stats.poisson.isf(tail, lam))
    while m > 0 and stats.poisson.sf(m - 1, lam) < tail:
        m -= 1
    while stats.poisson.sf(m, lam) >= tail:
        m += 1
    return m


def poisson(lam: float, tail: float = 1e-12) -> LatticePmf:
    """Poisson(lam) cut at :func:`poisson_cutoff` and renormalized."""
    if lam <= 0:
        raise ValueError("Poisson rate must be positive")
    m = poisson_cutoff(lam, tail)
    n = np.arange(m + 1)
    return LatticePmf.from_arrays(
        n[:, None], stats.poisson.pmf(n, lam), 1, normalize=True,
        meta={"family": "poisson", "lambda": lam, "tail": tail},
    )


def geometric(p: float, tail: float = 1e-12) -> LatticePmf:
    """p (1-p)^n on N_0, cut where the remaining tail drops below ``tail``."""
    if not 0 < p <= 1:
        raise ValueError("geometric parameter must lie in (0, 1]")
    q = 1.0 - p
    # P(X > m) = q^(m+1)
    m = 0 if q == 0 else max(0, math.ceil(math.log(tail) / math.log(q)) - 1)
    while q ** (m + 1) >= tail:
        m += 1
    n = np.arange(m + 1)
    return LatticePmf.from_arrays(
        n[:, None], p * q**n, 1, normalize=True,
        meta={"family": "geometric", "p": p, "tail": tail},
    )


def measure_from_json(obj: Mapping):
    """Build a pmf or signed measure depending on the mass key used."""
    rows = obj.get("atoms", [])
    if rows and "c" in rows[0]:
        return SignedLatticeMeasure.from_json_dict(obj)
    return LatticePmf.from_json_dict(obj)


def load_measure(path):
    return measure_from_json(json.loads(Path(path).read_text()))

"""Power-series criteria for laws on N_0 and N_0^d.

For a pmf on N_0 with p_0 > 0 write log P(s) = c_0 + sum_{n>=1} q_n s^n for
its probability generating function P.  The law is infinitely divisible iff
every q_n >= 0 (Katti), and when phi has no zeros the q_n are exactly the
quasi-Levy masses nu({n}).  Comparing coefficients in s P'(s) = P(s) s (log P)'(s)
gives the forward recursion

    n p_n = sum_{k=1}^{n} k q_k p_{n-k}.

:func:`formal_log_series` does the same in several variables by dividing
d_j P by P as truncated power series over a box.  It never touches a Fourier
transform, so it serves as an independent check on :mod:`latticeid.qid`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AxisInconsistencyError, DimensionMismatch, IllConditionedError
from .measures import LatticePmf, SignedLatticeMeasure

#: Below this mass at zero the forward recursion is refused.
MIN_P0 = 1e-8
MAX_DEGREE = 512
#: Allowed disagreement between per-axis integrations.
AXIS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KattiSequence:
    """Log-pgf coefficients; ``q[n]`` is the coefficient of s^n and ``q[0] = log p_0``."""

    q: np.ndarray
    first_negative: int | None

    @property
    def degree(self) -> int:
        return len(self.q) - 1

    def is_nonnegative(self, neg_tol: float = 0.0) -> bool:
        return bool(np.all(self.q[1:] >= -neg_tol))

    def to_measure(self) -> SignedLatticeMeasure:
        n = np.arange(1, len(self.q))
        return SignedLatticeMeasure.from_arrays(n[:, None], self.q[1:], 1)


def _dense_n0(p: LatticePmf, what: str) -> np.ndarray:
    if p.dim != 1:
        raise DimensionMismatch(f"{what} needs a one-dimensional pmf")
    if len(p) and p.points.min() < 0:
        raise ValueError(f"{what} needs a pmf supported in N_0")
    dense = np.zeros(int(p.points.max()) + 1 if len(p) else 1)
    dense[p.points[:, 0]] = p.masses
    return dense


def _check_p0(p0: float) -> None:
    if p0 <= 0:
        raise ValueError("mass at 0 must be positive; shift the pmf so its minimum sits at 0")
    if p0 < MIN_P0:
        raise IllConditionedError(f"p_0 = {p0:.3g} < {MIN_P0:g}: forward recursion is ill-conditioned")


def default_degree(max_support: int) -> int:
    return int(min(max(4 * max_support, 1), MAX_DEGREE))


def katti(p: LatticePmf, degree: int | None = None, neg_tol: float = 0.0) -> KattiSequence:
    """Katti coefficients q_1..q_degree of a pmf on N_0.

    ``first_negative`` is the first n with q_n < -neg_tol.  The default degree
    is four times the largest support point, capped at 512.
    """
    dense = _dense_n0(p, "katti")
    _check_p0(dense[0])
    if degree is None:
        degree = default_degree(len(dense) - 1)
    if degree < 1:
        raise ValueError("degree must be at least 1")
    q = np.asarray(_kernels.katti_recursion(dense, int(degree)), dtype=np.float64)
    q[0] = math.log(dense[0])
    neg = np.flatnonzero(q[1:] < -neg_tol)
    return KattiSequence(q, int(neg[0]) + 1 if len(neg) else None)


@dataclass(frozen=True)
class LogConvexity:
    holds: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.holds


def log_convex(p: LatticePmf, rtol: float = 1e-12) -> LogConvexity:
    """Check p_{n-1} p_{n+1} >= p_n^2 on a contiguous support {0..N}.

    Non-contiguous supports, or supports not starting at 0, give
    ``LogConvexity(False, "not applicable")``; supports without an interior
    point hold vacuously and say so in ``reason``.
    """
    if p.dim != 1:
        return LogConvexity(False, "not applicable")
    n = p.points[:, 0]
    if n[0] != 0 or np.any(np.diff(n) != 1):
        return LogConvexity(False, "not applicable")
    m = p.masses
    if len(m) < 3:
        return LogConvexity(True, "vacuous: no interior support point")
    lhs = m[:-2] * m[2:]
    rhs = m[1:-1] ** 2
    return LogConvexity(bool(np.all(lhs >= rhs * (1 - rtol))))


def formal_log_series(p: LatticePmf, box=None) -> SignedLatticeMeasure:
    """Coefficients of log P over a box, for P the multivariate pgf of p.

    For each axis j, (d_j P) / P is formed by truncated series division and
    integrated in z_j; every coefficient is computed from each axis on which
    it has a positive index, and the spread between those values is stored as
    ``meta["axis_residual"]`` (AxisInconsistencyError above 1e-10).  The
    default box is four times the support extent per axis, capped at 512.
    """
    if len(p) and p.points.min() < 0:
        raise ValueError("formal_log_series needs a pmf supported in N_0^d")
    d = p.dim
    hi = p.points.max(axis=0)
    if box is None:
        box = [default_degree(int(h)) for h in hi]
    box = np.asarray(box, dtype=np.int64).reshape(-1)
    if len(box) != d:
        raise DimensionMismatch(f"box has length {len(box)}, expected {d}")
    if np.any(box < hi):
        raise ValueError(f"box {tuple(box)} does not cover the support {tuple(hi)}")
    shape = tuple(int(b) + 1 for b in box)
    P = np.zeros(shape)
    P[tuple(p.points.T)] = p.masses
    p0 = P.flat[0]
    _check_p0(p0)
    P = P / p0

    grids = np.meshgrid(*[np.arange(s) for s in shape], indexing="ij")
    coeffs = np.full(shape, np.nan)
    spread = 0.0
    for j in range(d):
        dP = np.zeros(shape)
        src = [slice(None)] * d
        dst = [slice(None)] * d
        src[j] = slice(1, None)
        dst[j] = slice(0, -1)
        # d/ds_j shifts index n_j -> n_j - 1 with factor n_j
        dP[tuple(dst)] = (grids[j] * P)[tuple(src)]
        R = np.asarray(_kernels.series_quotient(dP.reshape(-1), P.reshape(-1), shape)).reshape(shape)
        # integrate: c_n = R_{n - e_j} / n_j for n_j >= 1
        integ = np.full(shape, np.nan)
        integ[tuple(src)] = R[tuple(dst)] / grids[j][tuple(src)]
        have = ~np.isnan(coeffs) & ~np.isnan(integ)
        if np.any(have):
            spread = max(spread, float(np.max(np.abs(coeffs[have] - integ[have]))))
        fill = np.isnan(coeffs) & ~np.isnan(integ)
        coeffs[fill] = integ[fill]
    if spread > AXIS_TOL:
        raise AxisInconsistencyError(f"per-axis log coefficients disagree by {spread:.3g}")
    coeffs.flat[0] = 0.0
    pts = np.stack(np.nonzero(np.ones(shape, dtype=bool)), axis=1)[1:]
    return SignedLatticeMeasure.from_arrays(
        pts, coeffs.reshape(-1)[1:], d, meta={"axis_residual": spread, "box": [int(b) for b in box]}
    )

"""Characteristic functions of lattice laws on torus grids.

A :class:`TorusGrid` holds samples of a 2*pi-periodic function on the regular
grid z_j = 2*pi*(j + offset)/M, j in {0..M-1}^d.  ``values`` is a d-dimensional
C-ordered (row-major) array, so ``values[j1, ..., jd]`` sits at
``(2*pi*(j1 + offset)/M, ..., 2*pi*(jd + offset)/M)`` and the flattened layout
has the last axis varying fastest.

Pipeline for a zero-free pmf::

    grid = sample_grid(p, M)
    cert = certify_zero_free(p, M, grid=grid)
    psi = distinguished_log(grid, cert)
    k = winding_vector(psi, p)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import optimize

from . import _kernels
from .errors import GridBudgetError, UnwrapError, WindingError
from .measures import LatticePmf

#: Default cap on M**d for any single grid.
DEFAULT_MAX_POINTS = 2**20
#: A grid value (or polished root) below this modulus counts as a zero.
ZERO_MODULUS = 1e-13
#: Largest admissible phase step between neighbouring grid points.
UNWRAP_STEP = math.pi / 2

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class TorusGrid:
    dim: int
    size: int
    values: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("grid size must be at least 2")
        if self.values.shape != (self.size,) * self.dim:
            raise ValueError(f"values must have shape {(self.size,) * self.dim}")

    def axis_nodes(self) -> np.ndarray:
        return TWO_PI * (np.arange(self.size) + self.offset) / self.size

    def node(self, index) -> np.ndarray:
        return TWO_PI * (np.asarray(index, dtype=np.float64) + self.offset) / self.size

    def nodes(self) -> list[np.ndarray]:
        """Broadcastable per-axis coordinate arrays (``np.ix_`` style)."""
        return list(np.ix_(*([self.axis_nodes()] * self.dim)))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass(frozen=True)
class ZeroFreeCertificate:
    """Proof that phi has no zero on the torus.

    ``method`` is ``"lipschitz"`` (margin = min_modulus - L * h) or
    ``"taylor2"`` (margin = min_j |phi_j| - |grad phi_j| h - curvature_bound h^2 / 2),
    with h the half cell diagonal.
    """

    min_modulus: float
    lipschitz_bound: float
    grid_size: int
    margin: float
    method: str = "lipschitz"
    curvature_bound: float | None = None

    @property
    def valid(self) -> bool:
        return self.margin > 0


@dataclass(frozen=True)
class Refusal:
    """Certification did not succeed.

    ``reason`` is ``"zero"`` when the modulus fell below :data:`ZERO_MODULUS`
    at ``witness`` and ``"inconclusive"`` when the grid was merely too coarse.
    ``polished`` marks witnesses found by root refinement off the grid.
    """

    reason: Literal["zero", "inconclusive"]
    witness: tuple[float, ...]
    modulus: float
    grid_size: int
    lipschitz_bound: float = 0.0
    polished: bool = field(default=False)

    @property
    def valid(self) -> bool:
        return False


def is_power_of_two(m: int) -> bool:
    return m >= 2 and (m & (m - 1)) == 0


def check_grid(dim: int, size: int, max_points: int = DEFAULT_MAX_POINTS) -> None:
    if not is_power_of_two(size):
        raise ValueError(f"grid size must be a power of two >= 2, got {size}")
    if size**dim > max_points:
        raise GridBudgetError(f"grid {size}^{dim} = {size**dim} points exceeds budget {max_points}")


def lattice_dft(points: np.ndarray, weights: np.ndarray, size: int, offset: float = 0.0) -> np.ndarray:
    """sum_n w_n exp(i <n, z_j>) on the grid z_j = 2*pi*(j + offset)/size.

    Points are folded modulo ``size`` before one inverse FFT; folding is
    exact because exp(2*pi*i*n*j/M) only depends on n mod M.
    """
    points = np.asarray(points, dtype=np.int64)
    dim = points.shape[1]
    w = np.asarray(weights, dtype=np.complex128)
    if offset:
        w = w * np.exp(1j * TWO_PI * offset * points.sum(axis=1) / size)
    acc = np.zeros((size,) * dim, dtype=np.complex128)
    np.add.at(acc, tuple((points % size).T), w)
    return np.fft.ifftn(acc) * float(size) ** dim


def eval_charfn(p: LatticePmf, z) -> complex:
    """phi(z) = sum_n p(n) exp(i <n, z>)."""
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    if len(z) != p.dim:
        raise ValueError(f"z has length {len(z)}, expected {p.dim}")
    return complex(_kernels.charfn_direct(p.points, p.masses, z[None, :])[0])


def eval_charfn_many(p: LatticePmf, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64).reshape(-1, p.dim)
    return _kernels.charfn_direct(p.points, p.masses, z)


def sample_grid(p: LatticePmf, size: int, max_points: int = DEFAULT_MAX_POINTS, offset: float = 0.0) -> TorusGrid:
    check_grid(p.dim, size, max_points)
    return TorusGrid(p.dim, size, lattice_dft(p.points, p.masses, size, offset), offset)


def half_diagonal(dim: int, size: int) -> float:
    return math.pi * math.sqrt(dim) / size


def certify_zero_free(
    p: LatticePmf,
    size: int,
    max_points: int = DEFAULT_MAX_POINTS,
    grid: TorusGrid | None = None,
    second_order: bool = True,
) -> ZeroFreeCertificate | Refusal:
    """Certify |phi| > 0 on the whole torus from one grid.

    Every point of the torus is within the half cell diagonal h = pi*sqrt(d)/M
    of a node.  First try the global bound |grad phi| <= L = sum |n| p(n):
    min |phi| on the grid exceeding L*h proves zero-freeness.  Failing that
    (and with ``second_order``), bound each cell by Taylor's theorem around
    its node, |phi(z)| >= |phi_j| - |grad phi_j| h - H h^2 / 2 with
    H = sum |n - c|^2 p(n) for the law re-centred at its rounded mean c
    (re-centring multiplies phi by a unimodular factor).
    """
    if grid is None:
        grid = sample_grid(p, size, max_points)
    elif grid.size != size or grid.offset != 0.0:
        raise ValueError("grid does not match the requested size")
    modulus = np.abs(grid.values)
    j = np.unravel_index(int(np.argmin(modulus)), modulus.shape)
    m_star = float(modulus[j])
    lip = p.lipschitz_bound()
    witness = tuple(float(x) for x in grid.node(j))
    if m_star < ZERO_MODULUS:
        return Refusal("zero", witness, m_star, size, lip)
    h = half_diagonal(p.dim, size)
    margin = m_star - lip * h
    if margin > 0:
        return ZeroFreeCertificate(m_star, lip, size, margin)
    if second_order:
        centred = p.points - np.rint(p.mean()).astype(np.int64)
        curvature = float(p.masses @ np.sum(centred.astype(np.float64) ** 2, axis=1))
        values = lattice_dft(centred, p.masses, size)
        grad2 = np.zeros(values.shape)
        for ax in range(p.dim):
            grad2 += np.abs(lattice_dft(centred, p.masses * centred[:, ax], size)) ** 2
        bound = np.abs(values) - np.sqrt(grad2) * h - 0.5 * curvature * h * h
        margin2 = float(bound.min())
        if margin2 > 0:
            return ZeroFreeCertificate(m_star, lip, size, margin2, "taylor2", curvature)
    return Refusal("inconclusive", witness, m_star, size, lip)


def polish_zero(p: LatticePmf, z0) -> tuple[np.ndarray, float]:
    """Refine a near-zero of phi by least squares on (Re phi, Im phi)."""
    pts = p.points.astype(np.float64)

    def residual(z):
        v = eval_charfn(p, z)
        return [v.real, v.imag]

    def jac(z):
        phase = pts @ z
        c = p.masses * np.cos(phase)
        s = p.masses * np.sin(phase)
        # d/dz_i of sum p e^{i<n,z>} = i * sum n_i p e^{i<n,z>}
        return np.vstack([-(s @ pts), c @ pts])

    method = "lm" if p.dim <= 2 else "trf"
    sol = optimize.least_squares(residual, np.asarray(z0, dtype=np.float64), jac=jac,
                                 method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    z = np.mod(sol.x, TWO_PI)
    return z, abs(eval_charfn(p, z))


def certify_adaptive(
    p: LatticePmf,
    start: int = 2,
    max_points: int = DEFAULT_MAX_POINTS,
    polish: bool = True,
) -> ZeroFreeCertificate | Refusal:
    """Double M from ``start`` until certified, a zero shows up, or the budget runs out.

    While inconclusive, the smallest-modulus node is polished by root
    refinement; a polished modulus below :data:`ZERO_MODULUS` is reported as
    a zero (off-grid witness, ``polished=True``).
    """
    size = start
    result = None
    while size ** p.dim <= max_points:
        result = certify_zero_free(p, size, max_points)
        if result.valid or result.reason == "zero":
            return result
        if polish and result.modulus < 0.5:
            z, mod = polish_zero(p, result.witness)
            if mod < ZERO_MODULUS:
                return Refusal("zero", tuple(float(x) for x in z), mod, size,
                               result.lipschitz_bound, polished=True)
        size *= 2
    if result is None:
        check_grid(p.dim, start, max_points)
    return result


def _phase_steps(values: np.ndarray, axis: int) -> np.ndarray:
    """Principal phase of values[j + e_axis] / values[j], wrap-around included."""
    return np.angle(np.roll(values, -1, axis=axis) / values)


def distinguished_log(grid: TorusGrid, cert: ZeroFreeCertificate) -> TorusGrid:
    """Continuous logarithm of the sampled phi with psi[0] = 0.

    The imaginary part is accumulated along axis-aligned paths from the
    origin: first along axis 0, then axis 1 from each reached point, and so
    on.  Every neighbouring phase step (wrap-around included) must stay below
    pi/2; with that, each grid plaquette closes and the result does not
    depend on the path order.
    """
    if not isinstance(cert, ZeroFreeCertificate) or not cert.valid:
        raise ValueError("distinguished_log needs a valid zero-free certificate")
    if grid.offset != 0.0:
        raise ValueError("distinguished_log expects a grid anchored at the origin")
    phi = grid.values
    d = grid.dim
    steps = [_phase_steps(phi, ax) for ax in range(d)]
    worst = max(float(np.max(np.abs(s))) for s in steps)
    if worst >= UNWRAP_STEP:
        raise UnwrapError(f"phase step {worst:.3f} >= pi/2 on a {grid.size}^{d} grid; refine M")

    imag = np.zeros(phi.shape)
    for ax in range(d):
        # fill the sub-array (all, ..., all, [axis ax], 0, ..., 0)
        head = (slice(None),) * ax
        tail = (0,) * (d - ax - 1)
        line_steps = steps[ax][head + (slice(0, -1),) + tail]
        base = imag[head + (slice(0, 1),) + tail]
        imag[head + (slice(1, None),) + tail] = base + np.cumsum(line_steps, axis=ax)
    real = np.log(np.abs(phi))
    psi = real + 1j * imag
    psi.flat[0] = 0.0
    return TorusGrid(d, grid.size, psi)


def _loop_phase(phi: np.ndarray, axis: int) -> np.ndarray:
    """Accumulated phase (over 2*pi) along every closed loop in ``axis``."""
    return _phase_steps(phi, axis).sum(axis=axis) / TWO_PI


def winding_vector(psi_grid: TorusGrid, p: LatticePmf | None = None) -> tuple[int, ...]:
    """Integer phase winding of phi along each coordinate loop of the torus.

    Evaluated on the loop through the origin and, for d > 1, on a parallel
    loop shifted by M/2 in another axis; the two must agree.  When ``p`` is
    given, k is also checked to lie in the bounding box of its support.
    """
    phi = np.exp(psi_grid.values)
    M, d = psi_grid.size, psi_grid.dim
    k = []
    for ax in range(d):
        loops = np.asarray(_loop_phase(phi, ax))
        origin = float(loops.flat[0])
        kj = round(origin)
        if abs(origin - kj) > 1e-6:
            raise WindingError(f"axis {ax}: loop phase {origin!r} is not an integer multiple of 2*pi")
        if d > 1:
            other = [0] * (d - 1)
            other[0] = M // 2
            parallel = float(loops[tuple(other)])
            if abs(parallel - kj) > 1e-6:
                raise WindingError(f"axis {ax}: parallel loops disagree ({origin!r} vs {parallel!r})")
        k.append(int(kj))
    if p is not None:
        lo, hi = p.support_bounds()
        if np.any(np.asarray(k) < lo) or np.any(np.asarray(k) > hi):
            raise WindingError(f"winding {tuple(k)} outside support box {tuple(lo)}..{tuple(hi)}")
    return tuple(k)


def drift_removed(psi_grid: TorusGrid, k) -> np.ndarray:
    """psi~[j] = psi[j] - i <k, z_j>."""
    out = psi_grid.values.astype(np.complex128, copy=True)
    for ax, (kj, z) in enumerate(zip(k, psi_grid.nodes())):
        if kj:
            out = out - 1j * kj * z
    return out


def periodic_closure_residual(psi_grid: TorusGrid, k) -> float:
    """Largest mismatch of psi~ continued across the wrap-around of any axis.

    For the true distinguished logarithm psi~ is 2*pi-periodic; on the grid
    the continuation psi[M-1] + (step to index 0) - 2*pi*i*k_j must land on
    psi[0] of the same row.
    """
    psi = psi_grid.values
    phi = np.exp(psi)
    M = psi_grid.size
    worst = 0.0
    for ax in range(psi_grid.dim):
        last = np.take(psi, M - 1, axis=ax)
        first = np.take(psi, 0, axis=ax)
        phi_first = np.take(phi, 0, axis=ax)
        step = np.angle(phi_first / np.take(phi, M - 1, axis=ax))
        cont = np.log(np.abs(phi_first)) + 1j * (last.imag + step)
        gap = cont - first - 1j * TWO_PI * k[ax]
        worst = max(worst, float(np.max(np.abs(gap))))
    return worst

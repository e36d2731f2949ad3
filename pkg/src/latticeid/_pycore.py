"""Pure-Python/numpy versions of the compiled kernels in ``_core.pyx``.

Signatures and results match the compiled module exactly (up to floating
point summation order); ``latticeid._kernels`` picks one at import time.
"""
import numpy as np


def katti_recursion(p, degree):
    """Coefficients q_1..q_degree of log P(s) for P(s) = sum p_n s^n.

    Solves n p_n = sum_{k=1}^n k q_k p_{n-k} forward.  ``p[0]`` must be
    positive.  Returns an array of length ``degree + 1`` with ``q[0] = 0``.
    """
    p = np.asarray(p, dtype=np.float64)
    padded = np.zeros(degree + 1)
    padded[: min(len(p), degree + 1)] = p[: degree + 1]
    p0 = padded[0]
    q = np.zeros(degree + 1)
    kq = np.zeros(degree + 1)  # k * q_k
    for n in range(1, degree + 1):
        # sum_{k=1}^{n-1} k q_k p_{n-k}
        acc = kq[1:n] @ padded[n - 1 : 0 : -1] if n > 1 else 0.0
        kq[n] = (n * padded[n] - acc) / p0
        q[n] = kq[n] / n
    return q


def series_quotient(num, den, shape):
    """Truncated quotient of two multivariate power series.

    ``num`` and ``den`` are coefficient arrays flattened in row-major order
    over the box ``shape``; ``den`` must have a nonzero constant term.  The
    result R satisfies (den * R)_n = num_n for every n in the box.

    R at total degree t only needs R at lower total degrees, so the
    recursion runs layer by layer over the nonzero terms of ``den``.
    """
    shape = tuple(int(s) for s in shape)
    D = np.asarray(den, dtype=np.float64).reshape(shape)
    N = np.asarray(num, dtype=np.float64).reshape(shape)
    R = np.zeros(shape)
    d0 = D.flat[0]
    terms = [(m, D[m]) for m in zip(*np.nonzero(D)) if any(m)]
    coords = np.indices(shape).reshape(len(shape), -1)
    degree = coords.sum(axis=0)
    order = np.argsort(degree, kind="stable")
    bounds = np.searchsorted(degree[order], np.arange(degree.max() + 2))
    for t in range(degree.max() + 1):
        layer = coords[:, order[bounds[t] : bounds[t + 1]]]
        acc = np.zeros(layer.shape[1])
        for m, dm in terms:
            src = layer - np.asarray(m)[:, None]
            ok = np.all(src >= 0, axis=0)
            acc[ok] += dm * R[tuple(src[:, ok])]
        R[tuple(layer)] = (N[tuple(layer)] - acc) / d0
    return R.reshape(-1)


def charfn_direct(points, masses, z):
    """sum_n masses[n] exp(i <points[n], z_k>) for every row z_k of ``z``."""
    points = np.asarray(points, dtype=np.float64)
    masses = np.asarray(masses, dtype=np.float64)
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    out = np.empty(len(z), dtype=np.complex128)
    chunk = max(1, 2**20 // max(1, len(masses)))
    for start in range(0, len(z), chunk):
        phase = z[start : start + chunk] @ points.T
        out[start : start + chunk] = np.cos(phase) @ masses + 1j * (np.sin(phase) @ masses)
    return out

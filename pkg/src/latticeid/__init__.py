"""Infinite divisibility of lattice distributions via quasi-Levy representations."""
from ._kernels import BACKEND
from .charfn import (
    Refusal,
    TorusGrid,
    ZeroFreeCertificate,
    certify_adaptive,
    certify_zero_free,
    distinguished_log,
    eval_charfn,
    sample_grid,
    winding_vector,
)
from .cw import CWReport, DirectionFamily, cw_test, enumerate_directions
from .measures import (
    LatticePmf,
    SignedLatticeMeasure,
    affine,
    bernoulli,
    convolve,
    dirac,
    geometric,
    poisson,
    product,
    project,
    pushforward_signed,
    shift,
)
from .oned import KattiSequence, formal_log_series, katti, log_convex
from .qid import (
    CompoundPoissonFactor,
    Kind,
    QLTriplet,
    Verdict,
    classify,
    compound_poisson_pmf,
    factorize,
    hahn_jordan,
    quasi_levy,
)

__version__ = "0.1.0"

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latticeid import fixtures
from latticeid.cw import cw_test, enumerate_directions
from latticeid.measures import LatticePmf, bernoulli, convolve, dirac, poisson, product, project
from latticeid.qid import Kind, classify


def test_directions_two_dim():
    fam = enumerate_directions(2, 2)
    assert fam.directions == ((0, 1), (1, 0), (1, 1), (1, 2), (2, 1))
    assert len(fam) == 5 and not fam.signed


@pytest.mark.parametrize("dim,bound", [(1, 3), (2, 4), (3, 3)])
def test_directions_gcd_and_unique(dim, bound):
    fam = enumerate_directions(dim, bound)
    assert len(set(fam)) == len(fam)
    for a in fam:
        assert any(a) and math.gcd(*a) == 1 and max(a) <= bound and min(a) >= 0
    assert list(fam) == sorted(fam)


def test_signed_directions_include_negatives():
    fam = enumerate_directions(2, 1, signed=True)
    assert (1, -1) in fam.directions and (-1, 0) in fam.directions and fam.signed
    assert len(fam) == 8


def test_directions_validation():
    with pytest.raises(ValueError):
        enumerate_directions(2, 0)


def test_all_pass_on_product_poisson():
    r = cw_test(product(poisson(1.0, 1e-14), poisson(2.0, 1e-14)), bound=3)
    assert r.aggregate == "AllPass" and r.consistent
    assert r.direct_verdict.kind is Kind.INFINITELY_DIVISIBLE
    for rec in r.records:
        assert rec.drift_matches and rec.projection_residual < 2e-10


def test_fail_on_coupled_bernoulli():
    # law of (Y, Y) with Y ~ Bernoulli(0.3): every projection is a two-point law
    p = LatticePmf({(0, 0): 0.7, (1, 1): 0.3})
    r = cw_test(p, bound=1)
    assert r.aggregate == "FailAt" and r.fail_direction == (0, 1)
    assert r.direct_verdict.kind is Kind.QUASI_ONLY and r.consistent
    rec = r.records[0]
    assert rec.katti_verdict == "negative" and rec.katti_first_negative == 2


def test_fail_on_zero():
    p = product(bernoulli(0.5), poisson(1.0, 1e-14))
    r = cw_test(p, bound=2)
    assert r.direct_verdict.kind is Kind.NOT_QUASI
    assert r.aggregate == "FailAt" and r.consistent
    assert r.records[r.records.index(next(x for x in r.records if x.direction == (1, 0)))].quasi_levy_verdict == "NotQuasi"


def test_shifted_projection_uses_katti_after_rebasing():
    p = convolve(dirac((-3, 2)), product(poisson(0.5, 1e-14), poisson(0.4, 1e-14)))
    r = cw_test(p, bound=2)
    assert r.aggregate == "AllPass" and r.consistent
    assert all(rec.katti_verdict == "ok" for rec in r.records)


def test_render_is_fixed_width():
    p = LatticePmf({(0, 0): 0.7, (1, 1): 0.3})
    text = cw_test(p, bound=1).render().splitlines()
    assert text[0] == "direction      support  katti     quasi-levy           witness"
    assert text[2] == "(0,1)                2  negative  QuasiOnly            n=(2)"
    assert text[-3:] == ["aggregate:      FailAt (0,1)", "direct verdict: QuasiOnly", "consistent:     yes"]


def test_json_report():
    d = cw_test(bernoulli(0.3), bound=1).to_json_dict()
    assert d["aggregate"] == "FailAt" and d["fail_direction"] == [1]
    assert d["directions"][0]["katti"] == "negative"


@settings(max_examples=10)
@given(st.integers(0, 2**31))
def test_soundness_fail_never_id(seed):
    rng = np.random.default_rng(seed)
    p = fixtures.random_zero_free(rng, 2, extent=2, offset=1)
    r = cw_test(p, bound=2)
    if r.aggregate == "FailAt":
        assert r.direct_verdict.kind is not Kind.INFINITELY_DIVISIBLE


@pytest.mark.parametrize("dim,bound", [(2, 4), (3, 2)])
def test_completeness_on_id_laws(dim, bound, rng):
    for _ in range(3):
        p = fixtures.random_id_law(rng, dim, extent=1, rate=float(rng.uniform(0.2, 0.5)))
        r = cw_test(p, bound=bound)
        assert r.aggregate == "AllPass" and r.consistent


def test_projection_identity_fields(rng):
    p = fixtures.random_zero_free(rng, 2, extent=2)
    r = cw_test(p, bound=3)
    k = r.direct_verdict.triplet.drift
    for rec in r.records:
        assert rec.drift == rec.direction[0] * k[0] + rec.direction[1] * k[1]
        assert rec.projection_residual < 2e-10
        assert rec.support_size == len(project(p, rec.direction))

import math

import numpy as np
import pytest
from scipy import stats

from steinkit import measure as M
from steinkit.errors import ExpressionDomainError, NormalizationError


CASES = [
    (M.gaussian(1.0, 2.0), stats.norm(1.0, math.sqrt(2.0))),
    (M.exponential(1.5), stats.expon(scale=1 / 1.5)),
    (M.gamma(2.5, 1.5), stats.gamma(2.5, scale=1.5)),
    (M.beta(2.0, 3.0), stats.beta(2.0, 3.0)),
    (M.student(5.0), stats.t(5.0)),
    (M.gumbel(), stats.gumbel_r()),
    (M.frechet(3.0), stats.invweibull(3.0)),
]


@pytest.mark.parametrize("d,ref", CASES, ids=[c[0].family for c in CASES])
def test_continuous_families_against_scipy(d, ref):
    xs = d.probe_grid(50)
    np.testing.assert_allclose(d.pdf(xs), ref.pdf(xs), rtol=1e-10)
    np.testing.assert_allclose(d.cdf(xs), ref.cdf(xs), rtol=1e-10, atol=1e-15)
    assert d.mean == pytest.approx(ref.mean(), rel=1e-9)
    assert d.variance == pytest.approx(ref.var(), rel=1e-8)


@pytest.mark.parametrize("d", [c[0] for c in CASES], ids=[c[0].family for c in CASES])
def test_log_ratio_matches_logpdf_difference(d):
    xs = d.probe_grid(40)
    dy = 0.01 * (np.abs(xs) + 1)
    ok = d.support.interior(xs + dy)
    want = d.logpdf(xs + dy) - d.logpdf(xs)
    np.testing.assert_allclose(d.log_ratio(xs, dy)[ok], want[ok], rtol=1e-9, atol=1e-12)


def test_lattice_families():
    b = M.binomial(6, 0.4)
    xs, ps = b.points()
    np.testing.assert_allclose(ps, stats.binom(6, 0.4).pmf(xs), rtol=1e-12)
    p = M.poisson(2.5)
    assert p.mean == pytest.approx(2.5, rel=1e-12)
    assert p.variance == pytest.approx(2.5, rel=1e-10)
    r = M.rademacher()
    assert list(r.points()[0]) == [-1.0, 1.0]


def test_poisson_binomial_pmf_by_enumeration():
    ps = [0.1, 0.5, 0.8]
    d = M.poisson_binomial(ps)
    want = np.zeros(4)
    for bits in range(8):
        k = bin(bits).count("1")
        w = 1.0
        for i, p in enumerate(ps):
            w *= p if bits >> i & 1 else 1 - p
        want[k] += w
    np.testing.assert_allclose(d.points()[1], want, rtol=1e-13)


def test_table_rejects_bad_input():
    with pytest.raises(NormalizationError):
        M.table([0.5, 0.6])
    with pytest.raises(NormalizationError):
        M.table([0.5, 0.0, 0.5])


def test_table_trims_end_zeros():
    d = M.table([0.0, 0.25, 0.75, 0.0], origin=-1.0, spacing=2.0)
    xs, ps = d.points()
    assert list(xs) == [1.0, 3.0]
    assert list(ps) == [0.25, 0.75]


def test_expression_density_normalizes():
    d = M.expression_density("exp(-x^2/2)", (-np.inf, np.inf))
    assert d.params["normalizer"] == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert d.variance == pytest.approx(1.0, rel=1e-9)


def test_expression_density_domain_error():
    with pytest.raises(ExpressionDomainError):
        M.expression_density("log(x)", (-1.0, 1.0))


def test_density_from_spec_round_trip():
    d = M.density_from_spec({"family": "student", "params": {"nu": 5}})
    assert d.family == "student"
    t = M.density_from_spec({"family": "table", "pmf": [0.5, 0.5],
                             "lattice": {"origin": -1, "spacing": 2}})
    assert list(t.points()[0]) == [-1.0, 1.0]
    with pytest.raises(ValueError):
        M.density_from_spec({"family": "nosuch"})


def test_quantile_inverts_cdf():
    d = M.gamma(2.5, 1.5)
    q = np.array([1e-6, 0.1, 0.5, 0.9, 1 - 1e-6])
    np.testing.assert_allclose(d.cdf(d.quantile(q)), q, rtol=1e-9)


def test_expect_matches_moment():
    d = M.beta(2.0, 3.0)
    assert M.expect(d, lambda x: x) == pytest.approx(0.4, rel=1e-12)

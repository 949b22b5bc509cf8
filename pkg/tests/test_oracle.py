import math

import numpy as np
import pytest
from scipy import stats

import steinkit as sk
from steinkit import measure as M
from steinkit.errors import IncompatibleError


def test_tv_of_shifted_gaussians():
    d = sk.tv_distance(M.gaussian(0.0, 1.0), M.gaussian(1.0, 1.0)).value
    assert d == pytest.approx(2 * stats.norm.cdf(0.5) - 1, rel=1e-10)


def test_kolmogorov_of_shifted_gaussians():
    d = sk.kolmogorov_distance(M.gaussian(0.0, 1.0), M.gaussian(1.0, 1.0)).value
    assert d == pytest.approx(2 * stats.norm.cdf(0.5) - 1, rel=1e-10)


def test_wasserstein_of_shift_is_the_shift():
    d = sk.wasserstein_distance(M.gaussian(0.0, 1.0), M.gaussian(0.7, 1.0)).value
    assert d == pytest.approx(0.7, rel=1e-9)


def test_lattice_distances():
    a, b = M.binomial(4, 0.3), M.binomial(4, 0.5)
    pa, pb = stats.binom(4, 0.3).pmf(range(5)), stats.binom(4, 0.5).pmf(range(5))
    assert sk.tv_distance(a, b).value == pytest.approx(0.5 * np.abs(pa - pb).sum(), rel=1e-12)
    gap = np.abs(np.cumsum(pa) - np.cumsum(pb))
    assert sk.kolmogorov_distance(a, b).value == pytest.approx(gap.max(), rel=1e-12)
    assert sk.wasserstein_distance(a, b).value == pytest.approx(gap.sum(), rel=1e-12)


def test_tv_between_lattice_and_continuous_is_one():
    with pytest.warns(UserWarning, match="mutually singular"):
        d = sk.tv_distance(M.poisson(2.0), M.gaussian(2.0, 2.0)).value
    assert d == pytest.approx(1.0)


def test_characterization_detects_perturbation():
    p = M.binomial(5, 0.4)
    sp = sk.pair(p)
    assert sk.characterization_check(sp, p) < 1e-12
    assert sk.characterization_check(sp, M.binomial(5, 0.45)) > 1e-3


def test_characterization_needs_matching_support():
    with pytest.raises(IncompatibleError):
        sk.characterization_check(sk.pair(M.binomial(5, 0.4)), M.binomial(6, 0.4))
    with pytest.raises(IncompatibleError):
        sk.characterization_check(sk.pair(M.gaussian()), M.gaussian())

import math

import numpy as np
import pytest

import steinkit as sk
from steinkit import measure as M
from steinkit.compare import BoundReport
from steinkit.errors import CenteringError, IncompatibleError, NormalizationError, SoundnessError
from steinkit.functions import Indicator
from steinkit.operators import OperatorSpec


def test_kernel_bound_student():
    rep = sk.kernel_bound(sk.pair(M.gaussian()), sk.pair(M.student(10.0)), cls="tv")
    assert rep.bound == pytest.approx(0.5, rel=1e-8)
    assert rep.sound and rep.oracle_distance < rep.bound


def test_equal_laws_give_zero():
    g = sk.pair(M.gaussian())
    rep = sk.kernel_bound(g, g, cls="tv")
    assert rep.bound == pytest.approx(0.0, abs=1e-12)
    assert rep.oracle_distance == pytest.approx(0.0, abs=1e-12)


def test_score_bound_gaussians():
    rep = sk.score_bound(sk.pair(M.gaussian()), sk.pair(M.gaussian(0.0, 4.0)), cls="tv")
    assert rep.bound == pytest.approx(1.5, rel=1e-8)
    assert rep.sound


def test_report_invariants():
    with pytest.raises(ValueError):
        BoundReport(-1.0, "tv")
    with pytest.raises(SoundnessError):
        BoundReport(0.1, "tv", 0.2).require_sound()
    r = BoundReport(0.4, "tv", 0.1)
    assert r.slack == pytest.approx(4.0)
    assert r.to_dict()["slack"] == pytest.approx(4.0)


def test_stein_discrepancy_student_closed_form():
    s = sk.stein_discrepancy(sk.pair(M.student(5.0)))
    assert s == pytest.approx(math.sqrt((25 + 10 / 3 + 1) / 16), rel=1e-9)


def test_stein_discrepancy_of_gaussian_is_zero():
    assert sk.stein_discrepancy(sk.pair(M.gaussian())) == pytest.approx(0.0, abs=1e-10)


def test_general_identity_equals_mean_difference():
    sp1, sp2 = sk.pair(M.gaussian()), sk.pair(M.gaussian(0.0, 1.5))
    f1 = lambda x: np.ones_like(np.asarray(x, float))
    f2 = lambda x: 1.5 * np.ones_like(np.asarray(x, float))
    h = Indicator(0.4)
    val = sk.general_identity_eval(sp1, sp2, h, f1, f2)
    d1, d2 = sp1.density, sp2.density
    want = float(d2.cdf(np.array([0.4]))[0] - d1.cdf(np.array([0.4]))[0])
    assert val == pytest.approx(want, abs=1e-7)


def test_sum_kernel_two_rademachers():
    xi = M.rademacher()
    tau = sk.pair(xi).kernel
    kw = sk.sum_kernel([(xi, tau), (xi, tau)], [1.0, 1.0])
    np.testing.assert_allclose(kw(np.array([-2.0, 0.0, 2.0])), [0.0, 1.0, 2.0], atol=1e-15)


def test_lattice_gauss_bound_requires_scaled_kernel():
    xi = M.rademacher()
    tau = sk.pair(xi).kernel
    w = sk.sum_kernel([(xi, tau)] * 4, [0.5] * 4)
    with pytest.raises(NormalizationError):
        sk.lattice_gauss_bound(w.density, w)


def test_lattice_gauss_bound_requires_centering():
    with pytest.raises(CenteringError):
        sk.lattice_gauss_bound(M.poisson(2.0), lambda x: x)
    with pytest.raises(IncompatibleError):
        sk.lattice_gauss_bound(M.gaussian(), lambda x: x)


def test_rademacher_sum_bound():
    xi = M.rademacher()
    tau = sk.pair(xi, OperatorSpec("span", 1.0, True)).kernel
    n = 16
    w = sk.sum_kernel([(xi, tau)] * n, [1 / math.sqrt(n)] * n)
    rep = sk.lattice_gauss_bound(w.density, w, operator="span")
    assert rep.components["discrepancy"] == pytest.approx(1 / math.sqrt(n), rel=1e-12)
    assert rep.bound == pytest.approx(3 / math.sqrt(n), rel=1e-12)
    assert rep.sound

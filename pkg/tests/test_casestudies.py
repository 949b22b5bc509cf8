import math

import numpy as np
import pytest

from steinkit.casestudies import (STUDIES, exp_max_uniform_study, frechet_study,
                                  gauss_gauss_study, gumbel_study, poisson_binomial_study,
                                  rademacher_clt_study, rate_slope, student_gauss_study,
                                  student_score_closed_form, uniform_max_density)
from steinkit.errors import BudgetError


def test_exp_max_minimizer():
    res = exp_max_uniform_study(100, 0.5)
    assert res.checks["eps_star"] == pytest.approx(0.138, abs=5e-4)
    assert res.checks["bound_star"] <= min(r.bound for r in res.reports)
    assert res.sound


def test_uniform_max_density_is_normalized():
    from steinkit.measure import expect
    d = uniform_max_density(20)
    assert expect(d, lambda x: np.ones_like(x)) == pytest.approx(1.0, rel=1e-12)
    assert d.mean == pytest.approx(21 / 21, rel=1e-10)


def test_frechet_integrand_positive():
    res = frechet_study(10, 1.0)
    assert res.checks["integrand_far_right"] == pytest.approx(0.1, rel=1e-5)
    assert res.sound


def test_gumbel_bound_value():
    res = gumbel_study(10)
    assert res.reports[0].bound == pytest.approx(1 / 11, rel=1e-10)


def test_gauss_gauss_orders():
    r = gauss_gauss_study(1.0, 2.0).reports[0]
    assert sorted(r.components["gauss1_orders"]) == pytest.approx([1.5, 6.0], rel=1e-8)
    assert r.components["ratio"] == pytest.approx(1.5, rel=1e-12)


def test_student_score_matches_closed_form():
    r = student_gauss_study(5.0).reports[0]
    assert r.components["score_bound"] == pytest.approx(student_score_closed_form(5.0), rel=1e-7)


def test_poisson_binomial_example():
    r = poisson_binomial_study([0.1, 0.2, 0.3]).reports[0]
    assert r.components["spread"] == pytest.approx(0.04, rel=1e-12)
    assert r.components["expression1"] == pytest.approx(0.036, rel=1e-8)
    assert r.oracle_distance == pytest.approx(0.014, rel=1e-8)


def test_poisson_binomial_constant_vector_is_binomial():
    r = poisson_binomial_study([0.3] * 4).reports[0]
    assert r.bound == 0.0 and r.oracle_distance == pytest.approx(0.0, abs=1e-15)


def test_budgets():
    with pytest.raises(BudgetError):
        poisson_binomial_study(np.full(13, 0.5))
    with pytest.raises(BudgetError):
        rademacher_clt_study(65)


def test_rademacher_discrepancy_is_one_over_root_n():
    for n in (4, 9, 25):
        res = rademacher_clt_study(n)
        assert res.checks["discrepancy"] == pytest.approx(1 / math.sqrt(n), rel=1e-12)
        assert res.checks["two_point_residual"] < 1e-15


def test_every_study_serializes():
    import json
    for name, fn in STUDIES.items():
        args = {"frechet": (10,), "exp-max-uniform": (50, 0.5, (0.0,), False),
                "gumbel": (5,), "gauss-gauss": (1.0, 1.5), "student-gauss": (5,),
                "poisson-binomial": ([0.2, 0.4],), "rademacher": (4,)}[name]
        json.dumps(fn(*args).to_dict())


def test_rate_slope_of_power_law():
    ns = np.array([10, 100, 1000])
    assert rate_slope(ns, 3 / ns) == pytest.approx(-1.0)


def test_dyadic_rates():
    ns = [16, 32, 64, 128, 256, 512, 1024]
    fr = [frechet_study(n, 1.0).reports[0].oracle_distance for n in ns]
    gu = [gumbel_study(n).reports[0].oracle_distance for n in ns]
    assert rate_slope(ns, fr) <= -0.95
    assert rate_slope(ns, gu) <= -0.95
    small = [4, 8, 16, 32, 64]
    ra = [rademacher_clt_study(n).reports[0].oracle_distance for n in small]
    assert rate_slope(small, ra) <= -0.45

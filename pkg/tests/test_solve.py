import math

import numpy as np
import pytest

import steinkit as sk
from steinkit import measure as M
from steinkit.functions import Indicator
from steinkit.solve import TestClass


def test_gaussian_indicator_solution_residual():
    sp = sk.pair(M.gaussian())
    sol = sk.solve(sp, Indicator(0.3), fixed_f=1.0)
    xs = np.array([-4.0, -1.0, 0.0, 0.29, 0.31, 2.0, 5.0])
    assert np.max(np.abs(sol.residual(xs))) < 1e-10


def test_fixed_g_branch():
    sp = sk.pair(M.gaussian())
    sol = sk.solve(sp, np.tanh, fixed_g=lambda x: 1 + 0.5 * np.cos(np.asarray(x, float)))
    xs = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(sol.f(xs) * sol.g(xs), sol.product(xs), atol=1e-12)


def test_solve_needs_one_fixed():
    with pytest.raises(ValueError):
        sk.solve(sk.pair(M.gaussian()), np.sin)


def test_gaussian_factors_are_analytic():
    sp = sk.pair(M.gaussian(0.0, 4.0))
    f = sk.stein_factors(sp, "tv")
    assert f.method == "analytic"
    assert f.sup_g == pytest.approx(2.0 * math.sqrt(math.pi / 2))
    assert f.sup_dg == pytest.approx(2.0)


def test_grid_factors_bracket_gaussian_values():
    # the grid search over indicator levels never exceeds the analytic supremum
    sp = sk.pair(M.gaussian())
    f = sk.stein_factors(sp, "kolmogorov", fixed_f=lambda x: 1.0 + 0.0 * np.asarray(x, float),
                         grid_points=2000)
    a = sk.stein_factors(sp, "kolmogorov")
    assert f.sup_g <= a.sup_g * (1 + 1e-6)


def test_lattice_factors_bounded():
    sp = sk.pair(M.binomial(5, 0.3))
    f = sk.stein_factors(sp, "tv", fixed_f=lambda x: np.asarray(x, float))
    assert 0 < f.sup_g < np.inf and 0 < f.sup_dg < np.inf


def test_test_class_aliases():
    assert TestClass("ks").kind == "kolmogorov"
    assert TestClass("wasserstein").metric == "wasserstein"
    with pytest.raises(ValueError):
        TestClass("sobolev")


def test_frechet_solution_solves_its_equation():
    # x^(alpha+1) f'(x) + alpha f(x) = 1(x <= z) - Phi(z)
    alpha, z = 2.0, 1.3
    sol = sk.frechet_solution(alpha, z)
    d = M.frechet(alpha)
    xs = np.array([0.5, 1.0, 1.2, 1.4, 2.0, 4.0, 50.0])
    lhs = xs ** (alpha + 1) * sol.derivative(xs) + alpha * sol(xs)
    want = (xs <= z).astype(float) - float(d.cdf(np.array([z]))[0])
    np.testing.assert_allclose(lhs, want, atol=1e-12)


def test_frechet_solution_bounds_and_limits():
    sol = sk.frechet_solution(1.0, 1.0)
    xs = np.geomspace(1e-3, 1e6, 200)
    v = sol(xs)
    assert np.all(v >= -1e-15) and np.all(v <= 1 + 1e-15)
    assert abs(float(sol(np.array([1e12]))[0])) < 1e-10
    eps = 1e-9
    left, right = sol(np.array([1 - eps, 1 + eps]))
    assert abs(left - right) < 1e-8

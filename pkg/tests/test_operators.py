import math

import numpy as np
import pytest

import steinkit as sk
from steinkit import measure as M
from steinkit.errors import CenteringError, ClassMembershipError
from steinkit.operators import OperatorSpec


def test_gaussian_score_and_kernel():
    sp = sk.pair(M.gaussian(1.0, 2.0))
    xs = np.linspace(-3, 5, 9)
    np.testing.assert_allclose(sp.score(xs), -(xs - 1.0) / 2.0, rtol=1e-12)
    np.testing.assert_allclose(sp.kernel(xs), 2.0, rtol=1e-12)


def test_student_kernel_far_in_the_tails():
    sp = sk.pair(M.student(5.0))
    xs = np.array([-1000.0, -30.0, 0.0, 40.0, 1000.0])
    np.testing.assert_allclose(sp.kernel(xs), (xs ** 2 + 5) / 4, rtol=1e-9)


def test_default_lattice_operator_is_forward_difference():
    sp = sk.pair(M.poisson(2.0))
    assert sp.op.kind == "forward" and sp.op.spacing == 1.0
    xs = np.arange(0.0, 8.0)
    np.testing.assert_allclose(sp.kernel(xs), xs, atol=1e-12)


def test_rademacher_kernel_under_two_conventions():
    xi = M.rademacher()
    xs = np.array([-1.0, 1.0])
    np.testing.assert_allclose(sk.pair(xi).kernel(xs), [0.0, 1.0], atol=1e-15)
    span = sk.pair(xi, OperatorSpec("span", 1.0, True))
    np.testing.assert_allclose(span.kernel(xs), [0.0, 2.0], atol=1e-15)


def test_operator_spec_validation():
    with pytest.raises(ValueError):
        OperatorSpec("sideways")
    with pytest.raises(ValueError):
        OperatorSpec("forward", -1.0)
    assert OperatorSpec("span", 0.5, True).divisor == 1.0


def test_inverse_undoes_operator():
    sp = sk.pair(M.gamma(2.5, 1.5))
    h = lambda x: np.sin(x)
    inv = sp.inverse(h, auto_center=True)
    xs = np.linspace(0.5, 8.0, 12)
    f = lambda x: inv(x)
    back = sp.apply(f, xs)
    target = np.sin(xs) - M.expect(sp.density, np.sin)
    np.testing.assert_allclose(back, target, atol=1e-6)


def test_inverse_needs_centering():
    with pytest.raises(CenteringError):
        sk.pair(M.gaussian()).inverse(lambda x: np.ones_like(x) * 1.0)(np.array([0.0]))


def test_check_in_class():
    sp = sk.pair(M.gaussian())
    assert sp.check_in_class(lambda x: np.sin(x)).in_class
    assert not sp.check_in_class(lambda x: np.exp(x * x)).in_class


def test_standardize_rejects_outside_class():
    sp = sk.pair(M.exponential(1.0))
    with pytest.raises(ClassMembershipError):
        sk.standardize(sp, fixed_f=lambda x: np.ones_like(np.asarray(x, float)))
    with pytest.raises(ValueError):
        sk.standardize(sp)


def test_standardized_gaussian_operator():
    sp = sk.pair(M.gaussian())
    op = sk.standardize(sp, fixed_f=1.0)
    xs = np.linspace(-2, 2, 5)
    np.testing.assert_allclose(op.apply(np.sin, xs), np.cos(xs) - xs * np.sin(xs), atol=1e-7)


@pytest.mark.parametrize("d,coef", [
    (M.gaussian(0.0, 2.0), (2.0, 0.0, 0.0)),
    (M.student(5.0), (1.25, 0.0, 0.25)),
    (M.beta(2.0, 3.0), (0.0, 0.2, -0.2)),
])
def test_pearson_coefficients(d, coef):
    got = sk.pearson_kernel_check(d)
    assert got is not None
    np.testing.assert_allclose(got, coef, atol=1e-8)


def test_pearson_rejects_gumbel():
    assert sk.pearson_kernel_check(M.gumbel()) is None


def test_gibbs_poisson_case():
    res = sk.gibbs_operator(lambda x: 0.0 * np.asarray(x, float), 2.0)
    xs, ps = res.pair.density.points()
    from scipy import stats
    np.testing.assert_allclose(ps, stats.poisson(2.0).pmf(xs), rtol=1e-10, atol=1e-300)
    f = lambda x: np.cos(np.asarray(x, float))
    assert abs(math.fsum(res.operator(f)(xs) * ps)) < 1e-12


def test_diffusion_operator_zero_mean():
    d = M.gaussian()
    op = sk.diffusion_operator(d, lambda x: -np.asarray(x, float))
    np.testing.assert_allclose(op.beta(np.linspace(-2, 2, 5)), 2.0, rtol=1e-9)
    val = M.expect(d, op(np.tanh))
    assert abs(val) < 1e-8


def test_diffusion_operator_needs_centered_gamma():
    with pytest.raises(CenteringError):
        sk.diffusion_operator(M.gaussian(), lambda x: 1.0 - np.asarray(x, float))


def test_zero_bias_fixes_gaussian():
    d = M.gaussian()
    z = sk.zero_bias_density(d)
    xs = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(z.pdf(xs), d.pdf(xs), rtol=1e-9)


def test_zero_bias_of_rademacher_is_uniform():
    z = sk.zero_bias_density(M.rademacher())
    np.testing.assert_allclose(z.pdf(np.array([-0.5, 0.0, 0.7])), 0.5, rtol=1e-12)


def test_formula_density_has_gaussian_kernel():
    d = M.expression_density("exp(-x^2/2)", (-np.inf, np.inf))
    np.testing.assert_allclose(sk.pair(d).kernel(np.array([-6.0, 0.0, 3.0])), 1.0, rtol=1e-9)

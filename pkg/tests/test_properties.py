import math

import numpy as np
from hypothesis import given, settings, strategies as st

import steinkit as sk
from steinkit import measure as M
from steinkit.expression import parse_expression
from steinkit.casestudies import poisson_binomial_study

settings.register_profile("steinkit", deadline=None, max_examples=30)
settings.load_profile("steinkit")

pos = st.floats(0.3, 6.0)
pmfs = st.lists(st.floats(0.02, 1.0), min_size=2, max_size=9)


@given(mu=st.floats(-3, 3), s2=pos, a=st.floats(0.1, 2.0), b=st.floats(-3, 3))
def test_gaussian_operator_has_zero_mean(mu, s2, a, b):
    d = M.gaussian(mu, s2)
    sp = sk.pair(d)
    f = lambda x: np.sin(a * x + b)
    assert abs(M.expect(d, lambda x: sp.apply(f, x), rel_tol=1e-12)) < 1e-8


@given(alpha=st.floats(1.2, 8.0), beta=st.floats(1.2, 8.0))
def test_beta_kernel_mean_is_variance(alpha, beta):
    d = M.beta(alpha, beta)
    e = M.expect(d, sk.pair(d).kernel, rel_tol=1e-12)
    assert math.isclose(e, d.variance, rel_tol=1e-8)


@given(alpha=st.floats(0.8, 10.0), scale=pos)
def test_gamma_kernel_is_linear(alpha, scale):
    d = M.gamma(alpha, scale)
    xs = d.probe_grid(20)
    np.testing.assert_allclose(sk.pair(d).kernel(xs), scale * xs, rtol=1e-8)


@given(w=pmfs, origin=st.integers(-4, 4), data=st.data())
def test_lattice_inverse_round_trip(w, origin, data):
    w = np.asarray(w) / math.fsum(w)
    d = M.table(w, origin=float(origin))
    sp = sk.pair(d)
    xs, ps = d.points()
    hv = np.asarray(data.draw(st.lists(st.floats(-5, 5), min_size=xs.size, max_size=xs.size)))
    h = lambda x: np.interp(x, xs, hv)
    inv = sp.inverse(h, auto_center=True)
    back = sp.apply(inv, xs)
    np.testing.assert_allclose(back, hv - math.fsum(hv * ps), atol=1e-10)


@given(w=pmfs)
def test_characterization_vanishes_at_truth(w):
    w = np.asarray(w) / math.fsum(w)
    d = M.table(w)
    assert sk.characterization_check(sk.pair(d), d) < 1e-10


@given(m1=st.floats(-2, 2), m2=st.floats(-2, 2), m3=st.floats(-2, 2),
       s1=pos, s2=pos, s3=pos)
def test_metric_axioms_on_gaussians(m1, m2, m3, s1, s2, s3):
    a, b, c = M.gaussian(m1, s1), M.gaussian(m2, s2), M.gaussian(m3, s3)
    for dist in (sk.tv_distance, sk.kolmogorov_distance, sk.wasserstein_distance):
        ab, ba = dist(a, b).value, dist(b, a).value
        assert math.isclose(ab, ba, rel_tol=1e-7, abs_tol=1e-10)
        assert dist(a, a).value < 1e-10
        assert ab <= dist(a, c).value + dist(c, b).value + 1e-8


@given(p=st.lists(st.floats(0.01, 0.99), min_size=1, max_size=8))
def test_poisson_binomial_bound_is_sound(p):
    r = poisson_binomial_study(p).reports[0]
    assert r.sound
    assert r.oracle_distance <= r.components["expression1"] + 1e-12


@given(n=st.integers(1, 12))
def test_rademacher_sum_kernel_mean_is_variance(n):
    xi = M.rademacher()
    tau = sk.pair(xi, sk.OperatorSpec("span", 1.0, True)).kernel
    kw = sk.sum_kernel([(xi, tau)] * n, [1 / math.sqrt(n)] * n)
    xs, ps = kw.density.points()
    assert math.isclose(math.fsum(kw(xs) * ps), 1.0, rel_tol=1e-12)


@given(coef=st.lists(st.floats(-5, 5), min_size=1, max_size=4),
       x=st.floats(-3, 3))
def test_expression_polynomials(coef, x):
    text = " + ".join(f"({c!r})*x^{i}" for i, c in enumerate(coef))
    got = float(parse_expression(text)(np.array([x]))[0])
    want = sum(c * x ** i for i, c in enumerate(coef))
    assert math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-12)

"""Worked comparisons, each pairing a Stein bound with an exact oracle distance.

Every study returns a StudyResult holding one BoundReport per parameter point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.optimize import minimize_scalar

from .compare import (BoundReport, kernel_bound, lattice_gauss_bound, score_bound,
                      stein_discrepancy, sum_kernel)
from .errors import BudgetError
from .measure import (INF, SupportInterval, binomial, continuous, expect, exponential,
                      frechet, gaussian, gumbel, poisson_binomial, rademacher, student)
from .operators import OperatorSpec, pair
from .oracle import kolmogorov_distance, tv_distance, wasserstein_distance
from .solve import stein_factors


@dataclass
class StudyResult:
    study_name: str
    grid: list
    reports: list
    reference_values: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def sound(self):
        return all(r.sound for r in self.reports)

    def rows(self):
        for params, r in zip(self.grid, self.reports):
            yield {**params, "bound": r.bound, "oracle": r.oracle_distance, "slack": r.slack}

    def to_dict(self):
        return {"study_name": self.study_name, "grid": self.grid,
                "reports": [r.to_dict() for r in self.reports],
                "reference_values": self.reference_values,
                "checks": self.checks}


# ---- maxima of Pareto variables against Frechet --------------------------------------


def scaled_pareto_max(n, alpha):
    """W_n = M_n / n^(1/alpha) for the maximum M_n of n Pareto(alpha) variables."""
    n, alpha = int(n), float(alpha)
    lo = n ** (-1.0 / alpha)

    def log_base(x):
        # log(1 - x^-alpha / n), written relative to the lower end for accuracy there
        return np.log(-np.expm1(-alpha * np.log1p((x - lo) / lo)))

    def logpdf(x):
        return math.log(alpha) - (alpha + 1) * np.log(x) + (n - 1) * log_base(x)

    return continuous(
        lambda x: np.exp(logpdf(x)),
        SupportInterval(lo, INF, True),
        cdf=lambda x: np.exp(n * log_base(x)),
        sf=lambda x: -np.expm1(n * log_base(x)),
        logpdf=logpdf,
        logratio=lambda x, dy: (-(alpha + 1) * np.log1p(dy / x)
                                + (n - 1) * (log_base(x + dy) - log_base(x))),
        dlogpdf=lambda x: (-(alpha + 1) / x
                           + (n - 1) * alpha * x ** (-alpha - 1) / (n - x ** (-alpha))),
        name="pareto-max", params={"n": n, "alpha": alpha})


def frechet_study(n, alpha=1.0) -> StudyResult:
    if n < 2:
        raise ValueError("n must be at least 2")
    w = scaled_pareto_max(n, alpha)

    def gap(x):
        return np.abs(1.0 - (n - 1) / n / (1.0 - x ** (-alpha) / n))

    e = expect(w, gap, rel_tol=1e-13)
    closed = 2.0 * (1.0 - 1.0 / n) ** (n - 1) / n
    bound = 2.0 / math.e / (n - 1)
    dist = kolmogorov_distance(w, frechet(alpha)).value
    rep = BoundReport(bound, "kolmogorov", dist,
                      {"expectation": e, "closed_form": closed, "factor": 1.0,
                       "direct_bound": e},
                      {"n": n, "alpha": alpha})
    # 1 - (n-1)/n (1 - x^-alpha/n)^-1 vanishes at the lower end and tends to 1/n,
    # so it is positive on the whole support
    far = float(1.0 - (n - 1) / n / (1.0 - 1e6 ** (-alpha) / n))
    return StudyResult("frechet", [{"n": n, "alpha": alpha}], [rep], {},
                       {"expectation_error": abs(e - closed), "integrand_far_right": far})


# ---- maximum of uniforms against the exponential ----------------------------------------


def uniform_max_density(n):
    """X_2 = (n+1)(1 - U_(n)) on [0, n+1]."""
    n = int(n)
    m = n + 1.0

    def log_base(x):
        return np.log((m - x) / m)

    return continuous(
        lambda x: n / m * np.exp((n - 1) * log_base(x)),
        SupportInterval(0.0, m, True, True),
        cdf=lambda x: -np.expm1(n * log_base(x)),
        sf=lambda x: np.exp(n * log_base(x)),
        logpdf=lambda x: math.log(n / m) + (n - 1) * log_base(x),
        logratio=lambda x, dy: (n - 1) * np.log1p(-dy / (m - x)),
        dlogpdf=lambda x: -(n - 1) / (m - x),
        name="uniform-max", params={"n": n})


def _exp_bound(d, n, t, eps):
    def integrand(x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            xe = np.where(x > 0, x ** eps, 1.0 if eps == 0 else 0.0)
        return xe * np.abs((n - 1) / (n + 1 - x) - 1.0)

    e = expect(d, integrand, rel_tol=1e-13, points=(2.0,))
    return t ** (-eps) * (-math.expm1(-t)) * e, e


def exp_max_uniform_study(n=100, t=0.5, eps=(0.0, 0.138, 1.0), scan=True) -> StudyResult:
    n, t = int(n), float(t)
    if n < 1 or t <= 0:
        raise ValueError("need n >= 1 and t > 0")
    d = uniform_max_density(n)
    eps = [float(e) for e in np.atleast_1d(eps)]
    pointwise = abs(float(d.cdf(np.array([t]))[0]) - (-math.expm1(-t)))
    kol = kolmogorov_distance(d, exponential(1.0)).value
    grid, reports = [], []
    for e in eps:
        b, ex = _exp_bound(d, n, t, e)
        grid.append({"n": n, "t": t, "eps": e})
        reports.append(BoundReport(b, "kolmogorov", pointwise,
                                   {"expectation": ex, "sup_f": t ** (-e) * -math.expm1(-t),
                                    "kolmogorov_distance": kol},
                                   {"n": n, "t": t, "eps": e}))
    checks = {}
    if scan:
        coarse = np.linspace(0.0, 1.0, 101)
        vals = [_exp_bound(d, n, t, e)[0] for e in coarse]
        i = int(np.argmin(vals))
        lo, hi = coarse[max(i - 1, 0)], coarse[min(i + 1, coarse.size - 1)]
        res = minimize_scalar(lambda e: _exp_bound(d, n, t, e)[0], bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-9})
        checks = {"eps_star": float(res.x), "bound_star": float(res.fun)}
    ref = {}
    if n == 100 and t == 0.5:
        ref = {"eps=0": 0.00497143, "eps=1": 0.00852033, "eps=0.138": 0.00488718,
               "eps_star": 0.138}
    return StudyResult("exp-max-uniform", grid, reports, ref, checks)


# ---- maximum of exponentials against Gumbel -------------------------------------------


def shifted_exp_max(n):
    """X_2 = max of n Exp(1) variables minus log(n+1)."""
    n = int(n)
    m = n + 1.0
    lo = -math.log(m)

    def log_base(x):
        # log(1 - e^-x / (n+1)) = log(1 - e^-(x - lo))
        return np.log(-np.expm1(-(x - lo)))

    def logpdf(x):
        return math.log(n / m) - x + (n - 1) * log_base(x)

    return continuous(
        lambda x: np.exp(logpdf(x)),
        SupportInterval(lo, INF, True),
        cdf=lambda x: np.exp(n * log_base(x)),
        sf=lambda x: -np.expm1(n * log_base(x)),
        logpdf=logpdf,
        logratio=lambda x, dy: -dy + (n - 1) * (log_base(x + dy) - log_base(x)),
        dlogpdf=lambda x: -1.0 + (n - 1) * np.exp(-x) / (m - np.exp(-x)),
        name="exp-max", params={"n": n})


def gumbel_study(n) -> StudyResult:
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1")
    d2 = shifted_exp_max(n)
    sp1, sp2 = pair(gumbel()), pair(d2)
    score = lambda x: np.expm1(-np.asarray(x, float))
    e_exp = expect(d2, lambda x: np.exp(-np.asarray(x, float)), rel_tol=1e-13)
    xs = d2.probe_grid(200)
    inv = sp2.inverse(score)(xs)
    residual = float(np.max(np.abs(inv - (1.0 - np.exp(-xs) / (n + 1)))))
    rep = kernel_bound(sp1, sp2, omega=score, cls="kolmogorov")
    rep.params.update({"n": n})
    return StudyResult("gumbel", [{"n": n}], [rep], {"bound": 1.0 / (n + 1)},
                       {"mean_exp": e_exp, "inverse_residual": residual})


# ---- Gaussian against Gaussian, Student against Gaussian ----------------------------------


def gauss_gauss_study(sigma1, sigma2) -> StudyResult:
    s1, s2 = float(sigma1), float(sigma2)
    g1, g2 = pair(gaussian(0.0, s1 * s1)), pair(gaussian(0.0, s2 * s2))
    k12 = kernel_bound(g1, g2, cls="tv")
    k21 = kernel_bound(g2, g1, cls="tv", oracle=False)
    sc = score_bound(g1, g2, 1.0, cls="tv", oracle=False)
    kern = min(k12.bound, k21.bound)
    ratio = sc.bound
    rep = BoundReport(min(kern, ratio), "tv", k12.oracle_distance,
                      {"gauss1": kern, "ratio": ratio, "gauss1_orders": [k12.bound, k21.bound],
                       "ratio_sharper": ratio <= kern},
                      {"sigma1": s1, "sigma2": s2})
    smax, smin = max(s1, s2), min(s1, s2)
    ref = {"gauss1": 2.0 / smax ** 2 * abs(s1 * s1 - s2 * s2),
           "ratio": abs(s1 * s1 - s2 * s2) / (s1 * s2)}
    return StudyResult("gauss-gauss", [{"sigma1": s1, "sigma2": s2}], [rep], ref,
                       {"ratio_sharper": ratio <= kern, "sigma_ratio": smax / smin})


def student_score_closed_form(nu):
    nu = float(nu)
    top = -2.0 + 8.0 * (nu / (1.0 + nu)) ** ((1.0 + nu) / 2.0)
    return math.sqrt(math.pi / 2) * top / ((nu - 1) * math.sqrt(nu) * special.beta(nu / 2, 0.5))


def student_gauss_study(nu) -> StudyResult:
    nu = float(nu)
    if nu <= 2:
        raise ValueError("the kernel expectation diverges for nu <= 2")
    z, w = pair(gaussian()), pair(student(nu))
    kb = kernel_bound(z, w, cls="tv")
    sb = score_bound(z, w, 1.0, cls="tv", oracle=False)
    e = kb.components["expectation"]
    rep = BoundReport(kb.bound, "tv", kb.oracle_distance,
                      {**kb.components, "score_bound": sb.bound,
                       "score_closed_form": student_score_closed_form(nu)},
                      {"nu": nu})
    return StudyResult("student-gauss", [{"nu": nu}], [rep],
                       {"kernel_bound": 4.0 / (nu - 2)},
                       {"kernel_expectation": e, "closed_form": 2.0 / (nu - 2)})


# ---- Poisson-binomial against binomial -------------------------------------------------


def poisson_binomial_study(p) -> StudyResult:
    p = np.asarray(p, dtype=float)
    n = p.size
    if not 1 <= n <= 12:
        raise BudgetError("exact subset enumeration supports 1 <= n <= 12")
    pbar = float(p.mean())
    target = binomial(n, pbar)
    w = poisson_binomial(p)
    sp = pair(target)
    spread = math.fsum(np.abs(p - pbar) * p)
    dist = tv_distance(target, w).value
    if spread == 0.0:
        e1 = e2 = 0.0
        fk = fi = None
    else:
        fk = stein_factors(sp, "tv", fixed_f=lambda x: (1 - pbar) * np.asarray(x, float))
        fi = stein_factors(sp, "tv", fixed_f=lambda x: np.asarray(x, float))
        e1 = fk.sup_dg * spread
        e2 = 2.0 * fi.sup_g / (1.0 - pbar) * spread
    rep = BoundReport(min(e1, e2), "tv", dist,
                      {"expression1": e1, "expression2": e2, "spread": spread,
                       "kernel_factor": fk.sup_dg if fk else 0.0,
                       "identity_factor": fi.sup_g if fi else 0.0},
                      {"p": p.tolist()})
    return StudyResult("poisson-binomial", [{"n": n, "p": p.tolist()}], [rep], {},
                       {"pbar": pbar})


# ---- Rademacher central limit theorem ---------------------------------------------------


def rademacher_clt_study(n) -> StudyResult:
    n = int(n)
    if not 1 <= n <= 64:
        raise BudgetError("exact enumeration supports 1 <= n <= 64")
    xi = rademacher()
    tau = pair(xi, OperatorSpec("span", 1.0, True)).kernel
    a = 1.0 / math.sqrt(n)
    kw = sum_kernel([(xi, tau)] * n, [a] * n)
    w = kw.density
    rep = lattice_gauss_bound(w, kw, operator="span")
    s = rep.components["discrepancy"]
    rep.params.update({"n": n})
    rep.components.update({"stated_bound": 3.0 / math.sqrt(n),
                           "single_component_discrepancy": 1.0})
    # the two-point identity E[X g(X)] = E[tau (g(X) - g(X - 2))] / 2 for arbitrary g
    g = {-1.0: 0.3, 1.0: 1.7}
    lhs = 0.5 * (g[1.0] - g[-1.0])
    rhs = 0.5 * float(tau(np.array([1.0]))[0]) * (g[1.0] - g[-1.0]) / 2.0
    return StudyResult("rademacher", [{"n": n}], [rep], {"bound": 3.0 / math.sqrt(n)},
                       {"discrepancy": s, "two_point_residual": abs(lhs - rhs),
                        "claimed_discrepancy_cap": 0.5 / math.sqrt(n)})


STUDIES = {
    "frechet": frechet_study,
    "exp-max-uniform": exp_max_uniform_study,
    "gumbel": gumbel_study,
    "gauss-gauss": gauss_gauss_study,
    "student-gauss": student_gauss_study,
    "poisson-binomial": poisson_binomial_study,
    "rademacher": rademacher_clt_study,
}


def rate_slope(ns, values):
    """Least-squares slope of log(values) against log(ns)."""
    x, y = np.log(np.asarray(ns, float)), np.log(np.asarray(values, float))
    return float(np.polyfit(x, y, 1)[0])

"""Invariant suites run by `steinkit verify` and by the test suite.

Each check returns a CheckResult with the worst residual seen.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import measure as M
from .casestudies import (exp_max_uniform_study, frechet_study, gauss_gauss_study,
                          gumbel_study, poisson_binomial_study, rademacher_clt_study,
                          student_gauss_study)
from .functions import Indicator, WithDerivative
from .measure import expect
from .operators import pair
from .oracle import tv_distance, wasserstein_distance
from .solve import solve

DEFAULT_TOL = 1e-8


def default_tol():
    raw = os.environ.get("STEINKIT_TOL")
    if raw is None:
        return DEFAULT_TOL
    tol = float(raw)
    if not tol > 0:
        raise ValueError("STEINKIT_TOL must be positive")
    return tol


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    worst: float
    tol: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite}/{self.name} worst={self.worst:.3e} tol={self.tol:.1e}"


def builtin_densities():
    """Built-in families with finite variance, used across the suites."""
    return {
        "gaussian": M.gaussian(0.0, 1.0),
        "gaussian(1,2)": M.gaussian(1.0, 2.0),
        "exponential": M.exponential(1.5),
        "gamma": M.gamma(2.5, 1.5),
        "beta": M.beta(2.0, 3.0),
        "student": M.student(5.0),
        "frechet": M.frechet(3.0),
        "gumbel": M.gumbel(),
        "pareto": M.pareto(5.0),
        "uniform": M.uniform(0.0, 1.0),
        "bernoulli": M.bernoulli(0.3),
        "binomial": M.binomial(6, 0.4),
        "poisson": M.poisson(2.5),
        "poisson-binomial": M.poisson_binomial([0.1, 0.5, 0.8]),
        "rademacher": M.rademacher(),
    }


def _location_scale(d):
    if d.is_lattice:
        xs, _ = d.points()
        return float(np.mean(xs)), max(1.0, float(np.ptp(xs)) / 4)
    q1, q2, q3 = d.quantile(np.array([0.25, 0.5, 0.75]))
    return float(q2), float(q3 - q1)


def class_functions(sp, count=20):
    """Smooth bounded functions, damped to vanish where the boundary term lives."""
    d = sp.density
    c, s = _location_scale(d)
    if d.is_lattice:
        lo, hi = d.lower, d.upper
        if sp.direction == "forward":
            w = (lambda x: (np.asarray(x, float) - lo)) if math.isfinite(lo) else (lambda x: 1.0)
        else:
            w = (lambda x: (hi - np.asarray(x, float))) if math.isfinite(hi) else (lambda x: 1.0)
        out = []
        for j in range(count):
            a, b = 0.3 + 0.2 * j, 0.7 * j
            out.append(lambda x, a=a, b=b: w(x) * np.sin(a * (np.asarray(x, float) - c) / s + b))
        return out
    ends = [e for e in (d.lower, d.upper) if math.isfinite(e)]

    def damp(x):
        v, dv = np.ones_like(x), np.zeros_like(x)
        for e in ends:
            r = (x - e) / s
            q = r * r / (1 + r * r)
            dq = 2 * r / (1 + r * r) ** 2 / s
            dv = dv * q + v * dq
            v = v * q
        return v, dv

    out = []
    for j in range(count):
        a, b = 0.25 + 0.15 * j, 0.9 * j
        kind = j % 4

        def f(x, a=a, b=b, kind=kind, deriv=False):
            x = np.asarray(x, float)
            t = (x - c) / s
            if kind == 0:
                v, dv = np.sin(a * t + b), a * np.cos(a * t + b)
            elif kind == 1:
                v, dv = 1 / (1 + (t - b / 4) ** 2), -2 * (t - b / 4) / (1 + (t - b / 4) ** 2) ** 2
            elif kind == 2:
                v, dv = np.tanh(a * t - 1), a / np.cosh(a * t - 1) ** 2
            else:
                e = np.exp(-0.5 * (a * t) ** 2)
                v, dv = e * (1 + t), e * (1 - a * a * t * (1 + t))
            dv = dv / s
            w, dw = damp(x)
            return w * dv + dw * v if deriv else w * v

        out.append(WithDerivative(f, lambda x, f=f: f(x, deriv=True)))
    return out


def _worst(values):
    values = [v for v in values if v is not None]
    return max(values) if values else 0.0


def suite_operators(tol=None):
    tol = default_tol() if tol is None else tol
    results = []
    for name, d in builtin_densities().items():
        sp = pair(d)
        res = [abs(expect(d, lambda x, f=f: sp.apply(f, x), rel_tol=1e-12))
               for f in class_functions(sp)]
        results.append(CheckResult("operators", f"zero-mean[{name}]", _worst(res) < tol,
                                   _worst(res), tol))
    return results


def _kernel_identity(sp):
    """max over test g of |E[(X - mean) g] - E[tau D*g]|."""
    d = sp.density
    tau = sp.kernel
    m = d.mean
    c, s = _location_scale(d)
    worst = 0.0
    for j in range(6):
        a, b = 0.4 + 0.3 * j, 0.5 * j
        # a damped wave keeps the heavy-tailed integrals absolutely convergent in t
        g = lambda x, a=a, b=b: (np.sin(a * (np.asarray(x, float) - c) / s + b)
                                 / (1 + ((np.asarray(x, float) - c) / s) ** 2))
        if d.is_lattice:
            step = sp.step
            if sp.direction == "forward":
                dg = lambda x, g=g: (g(x) - g(np.asarray(x, float) - step)) / sp.divisor
            else:
                dg = lambda x, g=g: (g(np.asarray(x, float) + step) - g(x)) / sp.divisor
        else:
            def dg(x, a=a, b=b):
                t = (np.asarray(x, float) - c) / s
                q = 1 + t * t
                return (a * np.cos(a * t + b) / q - 2 * t * np.sin(a * t + b) / q ** 2) / s
        lhs = expect(d, lambda x, g=g: (np.asarray(x, float) - m) * g(x), rel_tol=1e-11,
                     abs_tol=1e-13)
        rhs = expect(d, lambda x, dg=dg: np.asarray(tau(x), float) * dg(x), rel_tol=1e-11,
                     abs_tol=1e-13)
        worst = max(worst, abs(lhs - rhs))
    return worst


def kernel_table():
    """Closed-form kernels from the standard list, keyed by family."""
    return {
        "gaussian": (M.gaussian(0.0, 2.0), lambda x: np.full(np.shape(x), 2.0)),
        "beta": (M.beta(2.0, 3.0), lambda x: x * (1 - x) / 5.0),
        "student": (M.student(5.0), lambda x: (x * x + 5.0) / 4.0),
        "poisson": (M.poisson(2.5), lambda x: np.asarray(x, float)),
        "binomial": (M.binomial(6, 0.4), lambda x: 0.6 * np.asarray(x, float)),
        "gamma": (M.gamma(2.5, 1.5), lambda x: 1.5 * np.asarray(x, float)),
    }


def suite_kernels(tol=None):
    tol = default_tol() if tol is None else tol
    results = []
    for name, d in builtin_densities().items():
        sp = pair(d)
        res = _kernel_identity(sp)
        lat = d.is_lattice
        limit = 1e-12 if lat else tol
        results.append(CheckResult("kernels", f"identity[{name}]", res < limit, res, limit))
        e_tau = expect(d, sp.kernel, rel_tol=1e-12)
        # an unscaled difference of step s carries a factor s: E tau * s = Var
        stretch = sp.step / sp.divisor if lat else 1.0
        gap = abs(e_tau * stretch - d.variance)
        results.append(CheckResult("kernels", f"mean-equals-variance[{name}]", gap < tol, gap, tol))
        vals = np.asarray(sp.kernel(d.probe_grid(200)), float)
        neg = float(max(0.0, -vals.min()))
        results.append(CheckResult("kernels", f"nonnegative[{name}]", neg <= 1e-12, neg, 1e-12))
    for name, (d, closed) in kernel_table().items():
        xs = d.probe_grid(200)
        err = float(np.max(np.abs(np.asarray(pair(d).kernel(xs), float) - closed(xs))))
        results.append(CheckResult("kernels", f"closed-form[{name}]", err < tol, err, tol))
    return results


def suite_solutions(tol=None):
    tol = default_tol() if tol is None else tol
    results = []
    for name, d in builtin_densities().items():
        sp = pair(d)
        worst = 0.0
        c, s = _location_scale(d)
        xs = d.probe_grid(60)
        for z in (c - 0.5 * s, c + 0.3 * s):
            z = float(z)
            h = Indicator(z)
            sol = solve(sp, h, fixed_f=1.0)
            # stay away from the jump of the indicator for the continuous residual
            pts = xs if d.is_lattice else xs[np.abs(xs - z) > 1e-6 * max(1.0, abs(z))]
            worst = max(worst, float(np.max(np.abs(sol.residual(pts)))))
        limit = 1e-10
        results.append(CheckResult("solutions", f"product-rule[{name}]", worst < limit,
                                   worst, limit))
    return results


def suite_oracles(tol=None):
    tol = default_tol() if tol is None else tol
    results = []
    Phi = lambda x: 0.5 * math.erfc(-x / math.sqrt(2))
    phi = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    # N(0,1) and N(0,4) densities cross at +-r, which gives TV in closed form
    r = math.sqrt(8 * math.log(2) / 3)
    closed = 2 * (Phi(r) - Phi(r / 2))
    err = abs(tv_distance(M.gaussian(0.0, 1.0), M.gaussian(0.0, 4.0)).value - closed)
    results.append(CheckResult("oracles", "tv-gaussians", err < tol, err, tol))
    # W1 between the two-point law on +-1 and N(0,1), from antiderivatives of Phi
    closed = 1 - 2 * phi(0) + 4 * phi(1) - 4 * Phi(-1)
    err = abs(wasserstein_distance(M.rademacher(), M.gaussian()).value - closed)
    results.append(CheckResult("oracles", "wasserstein-two-point", err < tol, err, tol))
    err = abs(tv_distance(M.bernoulli(0.5), M.bernoulli(0.6)).value - 0.1)
    results.append(CheckResult("oracles", "tv-bernoulli", err < 1e-15, err, 1e-15))
    return results


def suite_bounds(tol=None):
    tol = default_tol() if tol is None else tol
    results = []
    reports = []
    ex = exp_max_uniform_study(100, 0.5, scan=False)
    reports += [(f"exp-max-uniform[eps={g['eps']:g}]", r) for g, r in zip(ex.grid, ex.reports)]
    for n in (5, 10, 50, 100):
        for a in (1.0, 2.0):
            reports += [(f"frechet[n={n},a={a:g}]", r) for r in frechet_study(n, a).reports]
    for n in (2, 10, 100):
        reports += [(f"gumbel[n={n}]", r) for r in gumbel_study(n).reports]
    for nu in (3, 5, 10, 50):
        reports += [(f"student[nu={nu:g}]", r) for r in student_gauss_study(nu).reports]
    for s1, s2 in ((1.0, 2.0), (0.5, 3.0), (1.0, 1.3)):
        reports += [(f"gauss[{s1:g},{s2:g}]", r) for r in gauss_gauss_study(s1, s2).reports]
    rng = np.random.default_rng(7)
    for k in range(5):
        p = rng.uniform(0.05, 0.95, int(rng.integers(1, 11)))
        reports += [(f"poisson-binomial[{k}]", r) for r in poisson_binomial_study(p).reports]
    for n in (4, 8, 16, 32, 64):
        reports += [(f"rademacher[n={n}]", r) for r in rademacher_clt_study(n).reports]
    for name, r in reports:
        excess = max(0.0, (r.oracle_distance or 0.0) - r.bound)
        results.append(CheckResult("bounds", f"sound[{name}]", r.sound, excess, 1e-8))
    return results


SUITES = {
    "operators": suite_operators,
    "kernels": suite_kernels,
    "solutions": suite_solutions,
    "oracles": suite_oracles,
    "bounds": suite_bounds,
}


def run_suite(name, tol=None):
    if name == "all":
        out = []
        for fn in SUITES.values():
            out += fn(tol)
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    return SUITES[name](tol)

"""Solutions of Stein equations and Stein factors.

A SolutionPair (f, g) solves h - E h = f D*g + g T f through
f(x) g(x+l) = T^{-1}(h - E h)(x); one of f, g is fixed and the other follows.
Stein factors are sup-norms of g and of its derivative (or difference) over a
test class: closed forms where known, otherwise a grid search over a finite
generating family of test functions, which can only underestimate the sup.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import ClassMembershipError
from .functions import Indicator, as_function, derivative_of, kinks_of
from .operators import SteinPair

METRIC_OF_CLASS = {"tv": "tv", "kolmogorov": "kolmogorov", "lipschitz": "wasserstein"}
GRID_POINTS = 10_000


@dataclass(frozen=True)
class TestClass:
    __test__ = False  # keep pytest from collecting it

    kind: str
    z: float | None = None

    def __post_init__(self):
        kind = str(self.kind).lower()
        aliases = {"total-variation": "tv", "ks": "kolmogorov", "wasserstein": "lipschitz",
                   "lip": "lipschitz"}
        kind = aliases.get(kind, kind)
        if kind not in METRIC_OF_CLASS:
            raise ValueError(f"unknown test class {self.kind!r}")
        object.__setattr__(self, "kind", kind)

    @property
    def metric(self):
        return METRIC_OF_CLASS[self.kind]

    def function(self):
        if self.kind != "kolmogorov" or self.z is None:
            raise ValueError("only a kolmogorov class with z set names a single function")
        return Indicator(self.z)


@dataclass(frozen=True, eq=False)
class SolutionPair:
    f: object
    g: object
    product: object
    h: object
    pair: SteinPair = field(repr=False)

    def residual(self, x):
        """f D*g + g T f - (h - E h) at x."""
        x = np.asarray(x, dtype=float)
        sp = self.pair
        if sp.density.is_lattice:
            c, s = sp.divisor, sp.step
            if sp.direction == "forward":
                dg = (self.g(x) - self.g(x - s)) / c
            else:
                dg = (self.g(x + s) - self.g(x)) / c
        else:
            dg = derivative_of(self.g, sp.density.lower, sp.density.upper)(x)
        lhs = np.asarray(self.f(x), float) * dg + np.asarray(self.g(x), float) * sp.apply(self.f, x)
        return lhs - self.product.hbar(x)


class _Quotient:
    """num(x) / den(x + shift), differentiable when both pieces are."""

    def __init__(self, num, den, shift=0.0):
        self.num = num
        self.den = as_function(den)
        self.shift = float(shift)
        self.kinks = kinks_of(num)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            return np.asarray(self.num(x), float) / np.asarray(self.den(x + self.shift), float)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        n, dn = np.asarray(self.num(x), float), np.asarray(self.num.derivative(x), float)
        dd = derivative_of(self.den)
        d, ddv = np.asarray(self.den(x), float), np.asarray(dd(x), float)
        with np.errstate(all="ignore"):
            return (dn * d - n * ddv) / (d * d)


class _Shifted:
    """x -> f(x - shift): recovers g from g(. + l)."""

    def __init__(self, f, shift):
        self.f = f
        self.shift = float(shift)

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float) - self.shift)


def _check_nonvanishing(sp, fixed, what):
    probe = sp.density.probe_grid(401) if not sp.density.is_lattice else sp.density.points()[0]
    vals = np.asarray(fixed(probe), float)
    zero = np.abs(vals) <= 1e-300
    run = zero[1:] & zero[:-1]
    if np.any(run) or (sp.density.is_lattice and np.any(zero)):
        raise ClassMembershipError(f"the fixed {what} vanishes on part of the support")


def solve(sp: SteinPair, h, fixed_f=None, fixed_g=None) -> SolutionPair:
    """Solve the Stein equation for h with one component fixed."""
    if (fixed_f is None) == (fixed_g is None):
        raise ValueError("fix exactly one of f and g")
    h = as_function(h)
    prod = sp.inverse(h, auto_center=True)
    l = sp.op.shift_l if not sp.density.is_lattice else (
        -sp.step if sp.direction == "forward" else sp.step)
    if fixed_f is not None:
        f = as_function(fixed_f)
        _check_nonvanishing(sp, f, "f")
        # f(x) g(x+l) = prod(x)  =>  g(y) = prod(y-l) / f(y-l)
        g = _Quotient(prod, f) if l == 0 else _Shifted(_Quotient(prod, f), l)
        return SolutionPair(f, g, prod, h, sp)
    g = as_function(fixed_g)
    _check_nonvanishing(sp, g, "g")
    f = _Quotient(prod, g, l)
    return SolutionPair(f, g, prod, h, sp)


# ---- Stein factors --------------------------------------------------------------------


@dataclass(frozen=True)
class SteinFactors:
    sup_g: float
    sup_dg: float
    method: str
    sup_d2g: float | None = None


def _constant_value(sp, f):
    if f is None:
        return 1.0
    f = as_function(f)
    probe = sp.density.probe_grid(200) if not sp.density.is_lattice else sp.density.points()[0]
    vals = np.asarray(f(probe), float)
    if vals.size and np.all(np.isfinite(vals)):
        c = float(np.mean(vals))
        if c != 0 and np.max(np.abs(vals - c)) <= 1e-9 * abs(c):
            return c
    return None


def _analytic(sp, kind, c):
    d = sp.density
    fam, par = d.family, d.params
    c = abs(c)
    if fam == "gaussian":
        s2 = par["sigma2"]
        s = math.sqrt(s2)
        if kind == "tv":
            return SteinFactors(s * math.sqrt(math.pi / 2) / c, 2.0 / c, "analytic")
        if kind == "kolmogorov":
            return SteinFactors(s * math.sqrt(2 * math.pi) / 4 / c, 1.0 / c, "analytic")
        return SteinFactors(2.0 * s2 / c, s / c, "analytic", 2.0 / c)
    if fam == "exponential" and kind == "kolmogorov":
        return SteinFactors(1.0 / (par["lam"] * c), 1.0 / c, "analytic")
    if fam == "gumbel" and kind == "kolmogorov":
        return SteinFactors(1.0 / c, 1.0 / c, "analytic")
    return None


def stein_factors(sp: SteinPair, cls: TestClass, fixed_f=None, fixed_g=None,
                  grid_points=GRID_POINTS, n_levels=None) -> SteinFactors:
    """Sup-norms of g and g' over the class, with g = T^{-1}(h - E h)/f."""
    if fixed_g is not None:
        raise NotImplementedError("Stein factors are defined for a fixed f")
    if isinstance(cls, str):
        cls = TestClass(cls)
    c = _constant_value(sp, fixed_f)
    if c is not None and not sp.density.is_lattice:
        found = _analytic(sp, cls.kind, c)
        if found is not None:
            return found
    if sp.density.is_lattice:
        return _lattice_factors(sp, cls, fixed_f)
    return _grid_factors(sp, cls, fixed_f, grid_points, n_levels)


def _grid_factors(sp, cls, fixed_f, grid_points, n_levels):
    d = sp.density
    x = np.unique(d.quantile(np.linspace(1e-4, 1 - 1e-4, grid_points)))
    f = as_function(fixed_f) if fixed_f is not None else None
    fx = np.asarray(f(x), float) if f is not None else np.ones_like(x)
    dfx = (np.asarray(derivative_of(f, d.lower, d.upper)(x), float)
           if f is not None else np.zeros_like(x))
    u = sp.score_values(x)
    p = d.pdf(x)
    F, S = d.cdf(x), d.sf(x)
    med = d.median
    sup_g = sup_dg = 0.0

    def absorb(num, hbar_left, hbar_right):
        nonlocal sup_g, sup_dg
        inv = num / p
        g = inv / fx
        sup_g = max(sup_g, float(np.nanmax(np.abs(g))))
        for hb in (hbar_left, hbar_right):
            dinv = hb - u * inv
            dg = (dinv * fx - inv * dfx) / (fx * fx)
            sup_dg = max(sup_dg, float(np.nanmax(np.abs(dg))))

    low = (x <= med)[None, :]
    if cls.kind == "kolmogorov":
        zq = np.linspace(0.001, 0.999, n_levels or 200)
        zs = d.quantile(zq)
        for chunk in np.array_split(zs, max(1, zs.size // 50)):
            Z = chunk[:, None]
            Fz, Sz = d.cdf(chunk)[:, None], d.sf(chunk)[:, None]
            X = x[None, :]
            num_lo = np.minimum(F[None, :], Fz) - Fz * F[None, :]
            num_hi = -(np.maximum(S[None, :] - Sz, 0.0) - Fz * S[None, :])
            num = np.where(low, num_lo, num_hi)
            # at x = z the indicator jumps; test both one-sided values
            absorb(num, (X <= Z) - Fz, (X < Z) - Fz)
    elif cls.kind == "tv":
        qs = np.linspace(0.001, 0.999, n_levels or 40)
        edges = np.concatenate([[-math.inf], d.quantile(qs), [math.inf]])
        pairs = [(a, b) for a, b in combinations(range(edges.size), 2)
                 if not (a == 0 and b == edges.size - 1)]
        for chunk in np.array_split(np.arange(len(pairs)), max(1, len(pairs) // 50)):
            lo = np.array([edges[pairs[i][0]] for i in chunk])[:, None]
            hi = np.array([edges[pairs[i][1]] for i in chunk])[:, None]
            Flo = np.where(np.isfinite(lo), d.cdf(np.nan_to_num(lo)), 0.0)
            Fhi = np.where(np.isfinite(hi), d.cdf(np.nan_to_num(hi)), 1.0)
            Slo = np.where(np.isfinite(lo), d.sf(np.nan_to_num(lo)), 1.0)
            Shi = np.where(np.isfinite(hi), d.sf(np.nan_to_num(hi)), 0.0)
            m = Fhi - Flo
            X = x[None, :]
            num_lo = np.maximum(np.minimum(F[None, :], Fhi) - Flo, 0.0) - m * F[None, :]
            num_hi = -(np.maximum(np.minimum(S[None, :], Slo) - Shi, 0.0) - m * S[None, :])
            num = np.where(low, num_lo, num_hi)
            left = ((X > lo) & (X <= hi)) - m
            right = ((X >= lo) & (X < hi)) - m
            absorb(num, left, right)
    else:
        zs = d.quantile(np.linspace(0.01, 0.99, n_levels or 25))
        xs = x[:: max(1, x.size // 1000)]
        fx, dfx, u, p = (np.asarray(f(xs), float) if f is not None else np.ones_like(xs),
                         (np.asarray(derivative_of(f, d.lower, d.upper)(xs), float)
                          if f is not None else np.zeros_like(xs)),
                         sp.score_values(xs), d.pdf(xs))
        for z in zs:
            hz = lambda y, z=z: np.abs(np.asarray(y, float) - z)
            inv = sp.inverse(hz, auto_center=True)
            vals = inv(xs)
            g = vals / fx
            dinv = inv.hbar(xs) - u * vals
            dg = (dinv * fx - vals * dfx) / (fx * fx)
            sup_g = max(sup_g, float(np.nanmax(np.abs(g))))
            sup_dg = max(sup_dg, float(np.nanmax(np.abs(dg))))
    return SteinFactors(sup_g, sup_dg, "grid")


def lattice_test_matrix(xs, kind, max_subsets=13):
    """Rows of test-function values at support points generating the class."""
    m = xs.size
    if kind == "kolmogorov":
        return (xs[None, :] <= xs[:, None]).astype(float)
    if kind == "tv" and m <= max_subsets:
        codes = np.arange(1, 2 ** m - 1)
        return ((codes[:, None] >> np.arange(m)[None, :]) & 1).astype(float)
    if kind == "tv":
        rows = [(np.arange(m) >= i) & (np.arange(m) <= j) for i in range(m) for j in range(i, m)]
        return np.array(rows, dtype=float)
    return np.abs(xs[None, :] - xs[:, None])


def _lattice_factors(sp, cls, fixed_f):
    d = sp.density
    xs, ps = d.points()
    H = lattice_test_matrix(xs, cls.kind)
    F = sp.inverse_table(H, ps)
    fx = np.asarray(as_function(fixed_f)(xs), float) if fixed_f is not None else np.ones_like(xs)
    # where f vanishes the inverse must vanish too; g is not determined there
    keep = fx != 0
    if np.any(np.abs(F[:, ~keep]) > 1e-12):
        raise ValueError("fixed f vanishes where the inverse image does not")
    xs, F, fx = xs[keep], F[:, keep], fx[keep]
    G = F / fx[None, :]
    # differences of g inside the support, in the operator's own scaling
    dG = np.diff(G, axis=1) / sp.divisor if xs.size > 1 else np.zeros((G.shape[0], 1))
    return SteinFactors(float(np.max(np.abs(G))), float(np.max(np.abs(dG))), "grid")


# ---- Frechet ------------------------------------------------------------------------------


class FrechetSolution:
    """f_z(x) = (Phi(min(x, z))/Phi(x) - Phi(z))/alpha, with Phi(x) = exp(-x^-alpha)."""

    def __init__(self, alpha, z):
        if alpha <= 0 or z <= 0:
            raise ValueError("need alpha > 0 and z > 0")
        self.alpha = float(alpha)
        self.z = float(z)
        self.kinks = (self.z,)

    def _log_phi(self, x):
        with np.errstate(divide="ignore"):
            return -np.asarray(x, float) ** (-self.alpha)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, z = self.alpha, self.z
        lz = float(self._log_phi(z))
        lx = self._log_phi(np.maximum(x, 1e-300))
        ratio = np.exp(np.where(x <= z, 0.0, lz - lx))
        out = (ratio - math.exp(lz)) / a
        return np.where(x > 0, out, 0.0)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        a, z = self.alpha, self.z
        lz = float(self._log_phi(z))
        with np.errstate(all="ignore"):
            d = np.exp(lz + x ** (-a)) * (-a * x ** (-a - 1)) / a
        return np.where(x > z, d, 0.0)


def frechet_solution(alpha, z) -> FrechetSolution:
    return FrechetSolution(alpha, z)

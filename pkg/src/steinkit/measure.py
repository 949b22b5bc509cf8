"""Univariate densities: continuous on an interval, or a pmf on a lattice.

A DensityModel is immutable. Built-in families supply closed-form pdf, cdf,
survival function and log-derivative where they exist; everything else
(means, numeric cdfs, normalizers) is computed lazily by quadrature or exact
summation and cached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from .errors import ExpressionDomainError, IntegrationError, NormalizationError
from .expression import ExpressionAst, parse_expression
from .functions import as_function, kinks_of
from .quadrature import integrate, integrate_many

INF = math.inf
LATTICE_TAIL_MASS = 1e-12
MASS_TOL_CONTINUOUS = 1e-10
MASS_TOL_LATTICE = 1e-12


@dataclass(frozen=True)
class SupportInterval:
    lower: float = -INF
    upper: float = INF
    lower_closed: bool = False
    upper_closed: bool = False

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"empty support [{self.lower}, {self.upper}]")
        if math.isinf(self.lower) and self.lower_closed:
            object.__setattr__(self, "lower_closed", False)
        if math.isinf(self.upper) and self.upper_closed:
            object.__setattr__(self, "upper_closed", False)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo = (x >= self.lower) if self.lower_closed else (x > self.lower)
        hi = (x <= self.upper) if self.upper_closed else (x < self.upper)
        return lo & hi

    def interior(self, x):
        x = np.asarray(x, dtype=float)
        return (x > self.lower) & (x < self.upper)


@dataclass(frozen=True)
class LatticeSpec:
    origin: float
    spacing: float
    index_range: tuple = (0, INF)

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("lattice spacing must be positive")
        kmin, kmax = self.index_range
        if kmin > kmax:
            raise ValueError("empty lattice index range")

    @property
    def lower(self):
        return self.origin + self.index_range[0] * self.spacing

    @property
    def upper(self):
        return self.origin + self.index_range[1] * self.spacing

    @property
    def finite(self):
        kmin, kmax = self.index_range
        return math.isfinite(kmin) and math.isfinite(kmax)

    def point(self, k):
        return self.origin + np.asarray(k, dtype=float) * self.spacing

    def locate(self, x):
        """Nearest index and a mask of points that lie on the lattice and in range."""
        x = np.asarray(x, dtype=float)
        k = (x - self.origin) / self.spacing
        kr = np.round(k)
        on = np.abs(k - kr) <= 1e-9 * np.maximum(1.0, np.abs(k))
        kmin, kmax = self.index_range
        on &= (kr >= kmin) & (kr <= kmax)
        return kr, on


@dataclass(frozen=True, eq=False)
class DensityModel:
    kind: str
    support: object
    family: str = "custom"
    params: dict = field(default_factory=dict)
    expression: ExpressionAst | None = None
    pdf_fn: object = field(default=None, repr=False)
    cdf_fn: object = field(default=None, repr=False)
    sf_fn: object = field(default=None, repr=False)
    dlogpdf_fn: object = field(default=None, repr=False)
    logpdf_fn: object = field(default=None, repr=False)
    logratio_fn: object = field(default=None, repr=False)
    pmf_index: object = field(default=None, repr=False)
    kinks: tuple = ()

    def __post_init__(self):
        if self.pdf_fn is None and self.logpdf_fn is not None:
            lp = self.logpdf_fn
            object.__setattr__(self, "pdf_fn", lambda x: np.exp(lp(x)))

    # ---- evaluation -------------------------------------------------------
    @property
    def is_lattice(self):
        return self.kind == "lattice"

    @property
    def lower(self):
        return self.support.lower

    @property
    def upper(self):
        return self.support.upper

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_lattice:
            k, on = self.support.locate(x)
            out = np.zeros(x.shape)
            if np.any(on):
                out[on] = self.pmf_index(k[on])
            return out
        inside = self.support.interior(x)
        out = np.zeros(x.shape)
        if np.any(inside):
            with np.errstate(all="ignore"):
                out[inside] = self.pdf_fn(x[inside])
        return out

    def logpdf(self, x):
        """log p, exact for built-in families; -inf off the support."""
        x = np.asarray(x, dtype=float)
        if self.is_lattice or self.logpdf_fn is None:
            with np.errstate(divide="ignore"):
                return np.log(self.pdf(x))
        inside = self.support.interior(x)
        out = np.full(x.shape, -np.inf)
        if np.any(inside):
            with np.errstate(all="ignore"):
                out[inside] = self.logpdf_fn(x[inside])
        return out

    def log_ratio(self, x, dy):
        """log p(x + dy) - log p(x), without cancellation for built-in families."""
        x, dy = np.broadcast_arrays(np.asarray(x, float), np.asarray(dy, float))
        y = x + dy
        if self.logratio_fn is None or self.is_lattice:
            return self.logpdf(y) - self.logpdf(x)
        out = np.full(y.shape, -np.inf)
        inside = self.support.interior(y)
        if np.any(inside):
            with np.errstate(all="ignore"):
                out[inside] = self.logratio_fn(x[inside], dy[inside])
        return out

    def dlogpdf(self, x):
        """Exact log-derivative p'/p when the family provides one, else None."""
        if self.dlogpdf_fn is None:
            return None
        return self.dlogpdf_fn(np.asarray(x, dtype=float))

    @property
    def has_exact_cdf(self):
        return self.cdf_fn is not None or self.is_lattice

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_lattice:
            xs, ps = self.points()
            cum = np.cumsum(ps)
            idx = np.searchsorted(xs, x + 1e-12 * np.maximum(1.0, np.abs(x)), side="right")
            out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
            return np.minimum(out, 1.0)
        out = np.where(x <= self.lower, 0.0, np.where(x >= self.upper, 1.0, 0.0))
        inside = (x > self.lower) & (x < self.upper)
        if np.any(inside):
            if self.cdf_fn is not None:
                with np.errstate(over="ignore", under="ignore"):
                    out[inside] = self.cdf_fn(x[inside])
            else:
                out[inside] = self._numeric_cdf(x[inside])
        return out

    def sf(self, x):
        """Survival function P(X > x), accurate in the upper tail."""
        x = np.asarray(x, dtype=float)
        if self.is_lattice:
            xs, ps = self.points()
            tail = np.cumsum(ps[::-1])[::-1]
            idx = np.searchsorted(xs, x + 1e-12 * np.maximum(1.0, np.abs(x)), side="right")
            return np.where(idx < xs.size, tail[np.minimum(idx, xs.size - 1)], 0.0)
        out = np.where(x <= self.lower, 1.0, 0.0)
        inside = (x > self.lower) & (x < self.upper)
        if np.any(inside):
            if self.sf_fn is not None:
                with np.errstate(over="ignore", under="ignore"):
                    out[inside] = self.sf_fn(x[inside])
            elif self.cdf_fn is not None:
                out[inside] = 1.0 - self.cdf_fn(x[inside])
            else:
                vals, _ = integrate_many(self.pdf, x[inside], self.upper, rel_tol=1e-12,
                                         points=self.kinks)
                out[inside] = vals
        return out

    def _numeric_cdf(self, x):
        vals, _ = integrate_many(self.pdf, self.lower, x, rel_tol=1e-12, points=self.kinks)
        order = np.argsort(x, kind="stable")
        mono = np.maximum.accumulate(np.clip(vals[order], 0.0, 1.0))
        out = np.empty_like(mono)
        out[order] = mono
        return out

    # ---- lattice enumeration ------------------------------------------------
    def points(self):
        """Support points and probabilities (infinite tails cut at mass 1e-12)."""
        return self._points

    @cached_property
    def _points(self):
        if not self.is_lattice:
            raise TypeError("points() is only defined for lattice densities")
        kmin, kmax = self.support.index_range
        if math.isfinite(kmax):
            ks = np.arange(kmin, kmax + 1, dtype=float)
            ps = self.pmf_index(ks)
        else:
            chunks, total, start = [], 0.0, kmin
            while True:
                ks = np.arange(start, start + 1024, dtype=float)
                ps = self.pmf_index(ks)
                chunks.append((ks, ps))
                total += math.fsum(ps)
                start += 1024
                # cut once the tail is far below the stated 1e-12 budget
                if 1.0 - total < LATTICE_TAIL_MASS and ps[-1] <= ps[0]:
                    break
                if start - kmin > 10_000_000:
                    raise NormalizationError("lattice pmf does not exhaust its mass")
            ks = np.concatenate([c[0] for c in chunks])
            ps = np.concatenate([c[1] for c in chunks])
            keep = np.flatnonzero(ps > 1e-300)
            last = int(keep[-1]) + 1 if keep.size else 1
            ks, ps = ks[:last], ps[:last]
        xs = self.support.point(ks)
        return xs, np.asarray(ps, dtype=float)

    def points_covering(self, xmax):
        """Support points extended (for infinite lattices) past xmax until negligible."""
        xs, ps = self.points()
        kmin, kmax = self.support.index_range
        if math.isfinite(kmax) or xmax < xs[-1]:
            return xs, ps
        k_end = (xmax - self.support.origin) / self.support.spacing
        ks = np.arange((xs[-1] - self.support.origin) / self.support.spacing + 1,
                       k_end + 64 + 0.5 * k_end, dtype=float)
        extra = self.pmf_index(ks)
        return (np.concatenate([xs, self.support.point(ks)]), np.concatenate([ps, extra]))

    # ---- moments and quantiles ---------------------------------------------------
    @cached_property
    def mean(self):
        return expect(self, lambda x: x)

    @cached_property
    def variance(self):
        m = self.mean
        return expect(self, lambda x: (x - m) ** 2)

    @cached_property
    def median(self):
        return float(self.quantile(0.5))

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if self.is_lattice:
            xs, ps = self.points()
            cum = np.cumsum(ps)
            idx = np.searchsorted(cum, q - 1e-14, side="left")
            return xs[np.minimum(idx, xs.size - 1)]
        if self.cdf_fn is None:
            grid, cum = self._cdf_table
            return np.interp(q, cum, grid)
        lo, hi = self._bracket(float(np.min(q)), float(np.max(q)))
        lo = np.full(q.shape, lo)
        hi = np.full(q.shape, hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-14 * np.maximum(1.0, np.abs(mid))):
                break
        return 0.5 * (lo + hi)

    def _bracket(self, qmin, qmax):
        a, b = self.lower, self.upper
        c = 0.0 if a < 0.0 < b else (a + 1.0 if math.isfinite(a) else b - 1.0)
        if math.isfinite(a) and math.isfinite(b):
            return a, b
        lo, hi = (a if math.isfinite(a) else c), (b if math.isfinite(b) else c)
        step = 1.0
        while not math.isfinite(a) and self.cdf(np.array([lo]))[0] > min(qmin, 1e-16):
            lo = c - step
            step *= 2
            if step > 1e300:
                break
        step = 1.0
        while not math.isfinite(b) and self.cdf(np.array([hi]))[0] < max(qmax, 1 - 1e-16):
            hi = c + step
            step *= 2
            if step > 1e300:
                break
        return lo, hi

    @cached_property
    def _cdf_table(self):
        """Approximate cdf on a fine grid, used only to place probe grids."""
        n = 4000
        u = (np.arange(n) + 0.5) / n
        a, b = self.lower, self.upper
        if math.isfinite(a) and math.isfinite(b):
            grid = a + (b - a) * u
        else:
            lo, hi = a, b
            if not math.isfinite(a):
                lo = -1.0
                while integrate(self.pdf, -INF, lo, rel_tol=1e-8).value > 1e-10:
                    lo *= 2
            if not math.isfinite(b):
                hi = max(lo, 0.0) + 1.0
                while integrate(self.pdf, hi, INF, rel_tol=1e-8).value > 1e-10:
                    hi = hi * 2 if hi > 0 else hi + 1
            grid = lo + (hi - lo) * u
        cells, _ = integrate_many(self.pdf, grid[:-1], grid[1:], rel_tol=1e-8, strict=False)
        head = integrate(self.pdf, a, grid[0], rel_tol=1e-8, strict=False).value
        cum = head + np.concatenate([[0.0], np.cumsum(cells)])
        cum = np.maximum.accumulate(np.clip(cum, 0.0, 1.0))
        return grid, cum

    def probe_grid(self, n=200, lo_q=0.001, hi_q=0.999):
        """Points spread by quantile over the bulk of the distribution."""
        if self.is_lattice:
            xs, _ = self.points()
            return xs
        q = np.linspace(lo_q, hi_q, n)
        return np.unique(self.quantile(q))

    # ---- serialization ------------------------------------------------------
    def to_spec(self):
        if self.family == "table":
            return {"family": "table",
                    "lattice": {"origin": self.support.origin, "spacing": self.support.spacing},
                    "pmf": [float(p) for p in self.points()[1]]}
        if self.family == "expr":
            return {"family": "expr", "formula": self.expression.text,
                    "support": [self.lower, self.upper]}
        return {"family": self.family, "params": dict(self.params)}


# ---- engines -------------------------------------------------------------


def expect(d: DensityModel, h, rel_tol=1e-10, points=(), abs_tol=0.0):
    """E_p h(X): adaptive quadrature, or exact summation over a lattice."""
    h = as_function(h)
    if d.is_lattice:
        xs, ps = d.points()
        vals = np.asarray(h(xs), dtype=float) * ps
        return math.fsum(vals)

    def integrand(x):
        p = d.pdf(x)
        with np.errstate(all="ignore"):
            v = np.asarray(h(x), dtype=float) * p
        return np.where(p == 0, 0.0, v)

    pts = tuple(points) + kinks_of(h) + tuple(d.kinks)
    return integrate(integrand, d.lower, d.upper, rel_tol=rel_tol, abs_tol=abs_tol,
                     points=pts).value


def cdf_of(d: DensityModel, x):
    out = d.cdf(np.atleast_1d(np.asarray(x, dtype=float)))
    return float(out[0]) if np.ndim(x) == 0 else out


# ---- continuous families ------------------------------------------------------


def _ndtr(z):
    return special.ndtr(z)


def gaussian(mu=0.0, sigma2=1.0):
    mu, sigma2 = float(mu), float(sigma2)
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    s = math.sqrt(sigma2)
    c = -0.5 * math.log(2 * math.pi * sigma2)
    return DensityModel(
        "continuous", SupportInterval(), "gaussian", {"mu": mu, "sigma2": sigma2},
        logpdf_fn=lambda x: c - 0.5 * (x - mu) ** 2 / sigma2,
        cdf_fn=lambda x: _ndtr((x - mu) / s),
        sf_fn=lambda x: _ndtr((mu - x) / s),
        dlogpdf_fn=lambda x: -(x - mu) / sigma2,
        logratio_fn=lambda x, dy: -0.5 * dy * (2 * (x - mu) + dy) / sigma2)


def exponential(lam=1.0):
    lam = float(lam)
    if lam <= 0:
        raise ValueError("lam must be positive")
    return DensityModel(
        "continuous", SupportInterval(0.0, INF, True), "exponential", {"lam": lam},
        logpdf_fn=lambda x: math.log(lam) - lam * x,
        cdf_fn=lambda x: -np.expm1(-lam * x),
        sf_fn=lambda x: np.exp(-lam * x),
        dlogpdf_fn=lambda x: np.full(np.shape(x), -lam),
        logratio_fn=lambda x, dy: -lam * dy)


def gamma(alpha, beta=1.0):
    """Gamma with shape alpha and scale beta."""
    alpha, beta = float(alpha), float(beta)
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    c = -special.gammaln(alpha) - alpha * math.log(beta)
    return DensityModel(
        "continuous", SupportInterval(0.0, INF), "gamma", {"alpha": alpha, "beta": beta},
        logpdf_fn=lambda x: c + (alpha - 1) * np.log(x) - x / beta,
        cdf_fn=lambda x: special.gammainc(alpha, x / beta),
        sf_fn=lambda x: special.gammaincc(alpha, x / beta),
        dlogpdf_fn=lambda x: (alpha - 1) / x - 1 / beta,
        logratio_fn=lambda x, dy: (alpha - 1) * np.log1p(dy / x) - dy / beta)


def beta(alpha, beta):
    a, b = float(alpha), float(beta)
    if a <= 0 or b <= 0:
        raise ValueError("alpha and beta must be positive")
    c = -special.betaln(a, b)
    return DensityModel(
        "continuous", SupportInterval(0.0, 1.0), "beta", {"alpha": a, "beta": b},
        logpdf_fn=lambda x: c + (a - 1) * np.log(x) + (b - 1) * np.log1p(-x),
        cdf_fn=lambda x: special.betainc(a, b, x),
        sf_fn=lambda x: special.betainc(b, a, 1 - x),
        dlogpdf_fn=lambda x: (a - 1) / x - (b - 1) / (1 - x),
        logratio_fn=lambda x, dy: ((a - 1) * np.log1p(dy / x)
                                   + (b - 1) * np.log1p(-dy / (1 - x))))


def student(nu):
    nu = float(nu)
    if nu <= 0:
        raise ValueError("nu must be positive")
    c = special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi)
    return DensityModel(
        "continuous", SupportInterval(), "student", {"nu": nu},
        logpdf_fn=lambda x: c - 0.5 * (nu + 1) * np.log1p(x * x / nu),
        cdf_fn=lambda x: special.stdtr(nu, x),
        sf_fn=lambda x: special.stdtr(nu, -x),
        dlogpdf_fn=lambda x: -(nu + 1) * x / (nu + x * x),
        logratio_fn=lambda x, dy: -0.5 * (nu + 1) * np.log1p(dy * (2 * x + dy) / (nu + x * x)))


def frechet(alpha):
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return DensityModel(
        "continuous", SupportInterval(0.0, INF), "frechet", {"alpha": alpha},
        logpdf_fn=lambda x: math.log(alpha) - (alpha + 1) * np.log(x) - x ** (-alpha),
        cdf_fn=lambda x: np.exp(-x ** (-alpha)),
        sf_fn=lambda x: -np.expm1(-x ** (-alpha)),
        dlogpdf_fn=lambda x: (-alpha - 1) / x + alpha * x ** (-alpha - 1),
        logratio_fn=lambda x, dy: (-(alpha + 1) * np.log1p(dy / x)
                                   - x ** (-alpha) * np.expm1(-alpha * np.log1p(dy / x))))


def gumbel():
    return DensityModel(
        "continuous", SupportInterval(), "gumbel", {},
        logpdf_fn=lambda x: -x - np.exp(-x),
        cdf_fn=lambda x: np.exp(-np.exp(-x)),
        sf_fn=lambda x: -np.expm1(-np.exp(-x)),
        dlogpdf_fn=lambda x: np.expm1(-x),
        logratio_fn=lambda x, dy: -dy - np.exp(-x) * np.expm1(-dy))


def pareto(alpha):
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return DensityModel(
        "continuous", SupportInterval(1.0, INF, True), "pareto", {"alpha": alpha},
        logpdf_fn=lambda x: math.log(alpha) - (alpha + 1) * np.log(x),
        cdf_fn=lambda x: -np.expm1(-alpha * np.log(x)),
        sf_fn=lambda x: x ** (-alpha),
        dlogpdf_fn=lambda x: -(alpha + 1) / x,
        logratio_fn=lambda x, dy: -(alpha + 1) * np.log1p(dy / x))


def uniform(a=0.0, b=1.0):
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError("need a < b")
    w = b - a
    return DensityModel(
        "continuous", SupportInterval(a, b, True, True), "uniform", {"a": a, "b": b},
        logpdf_fn=lambda x: np.full(np.shape(x), -math.log(w)),
        cdf_fn=lambda x: (x - a) / w,
        sf_fn=lambda x: (b - x) / w,
        dlogpdf_fn=lambda x: np.zeros(np.shape(x)))


def continuous(pdf, support, *, cdf=None, sf=None, dlogpdf=None, logpdf=None, logratio=None,
               name="custom", params=None, kinks=()):
    """A user-specified continuous density (assumed normalized)."""
    return DensityModel("continuous", support, name, dict(params or {}), pdf_fn=pdf,
                        cdf_fn=cdf, sf_fn=sf, dlogpdf_fn=dlogpdf, logpdf_fn=logpdf,
                        logratio_fn=logratio, kinks=tuple(kinks))


def parse_density_expression(text, support: SupportInterval) -> ExpressionAst:
    """Parse a formula and validate it on the support; see expression_density."""
    return parse_expression(text).validate(support)


def expression_density(text, support) -> DensityModel:
    if not isinstance(support, SupportInterval):
        lo, hi = support
        support = SupportInterval(float(lo), float(hi))
    ast = parse_density_expression(text, support)

    def raw(x):
        with np.errstate(all="ignore"):
            return np.asarray(ast(x), dtype=float)

    try:
        z = integrate(raw, support.lower, support.upper, rel_tol=1e-13).value
    except IntegrationError as exc:
        raise NormalizationError(f"{text!r} has infinite mass on the support") from exc
    if not (math.isfinite(z) and z > 0):
        raise NormalizationError(f"{text!r} has zero or infinite mass on the support")
    return DensityModel("continuous", support, "expr", {"normalizer": z}, expression=ast,
                        pdf_fn=lambda x: raw(x) / z)


# ---- lattice families ---------------------------------------------------------


def _table_pmf(weights, kmin):
    weights = np.asarray(weights, dtype=float)

    def pmf(k):
        idx = (np.asarray(k) - kmin).astype(int)
        ok = (idx >= 0) & (idx < weights.size)
        out = np.zeros(np.shape(k))
        out[ok] = weights[idx[ok]]
        return out
    return pmf


def table(pmf, origin=0.0, spacing=1.0, family="table", params=None):
    w = np.asarray(pmf, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0):
        raise NormalizationError("pmf must be a non-empty vector of non-negative weights")
    total = math.fsum(w)
    if abs(total - 1.0) > 1e-9:
        raise NormalizationError(f"pmf sums to {total!r}, not 1")
    w = w / total
    # trim zero weights at both ends so the support is an interval of the lattice
    nz = np.flatnonzero(w > 0)
    lo, hi = int(nz[0]), int(nz[-1])
    if np.any(w[lo:hi + 1] == 0):
        raise NormalizationError("pmf has interior zeros; the support must be an interval")
    w = w[lo:hi + 1]
    spec = LatticeSpec(float(origin), float(spacing), (lo, hi))
    if params is None:
        params = {}
    return DensityModel("lattice", spec, family, params, pmf_index=_table_pmf(w, lo))


def bernoulli(p):
    p = float(p)
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return table([1 - p, p], family="bernoulli", params={"p": p})


def binomial(n, p):
    n, p = int(n), float(p)
    if n < 1 or not 0 < p < 1:
        raise ValueError("need n >= 1 and p in (0, 1)")
    k = np.arange(n + 1)
    logpmf = (special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
              + k * math.log(p) + (n - k) * math.log1p(-p))
    w = np.exp(logpmf)
    return table(w / math.fsum(w), family="binomial", params={"n": n, "p": p})


def poisson_binomial(ps):
    ps = [float(p) for p in ps]
    if not ps or any(not 0 < p < 1 for p in ps):
        raise ValueError("success probabilities must lie in (0, 1)")
    w = np.array([1.0])
    for p in ps:
        w = np.convolve(w, [1 - p, p])
    return table(w, family="poisson_binomial", params={"p": ps})


def poisson(lam):
    lam = float(lam)
    if lam <= 0:
        raise ValueError("lam must be positive")
    log_lam = math.log(lam)

    def pmf(k):
        k = np.asarray(k, dtype=float)
        return np.exp(k * log_lam - lam - special.gammaln(k + 1))
    return DensityModel("lattice", LatticeSpec(0.0, 1.0, (0, INF)), "poisson", {"lam": lam},
                        pmf_index=pmf)


def rademacher():
    return table([0.5, 0.5], origin=-1.0, spacing=2.0, family="rademacher")


# ---- JSON spec -----------------------------------------------------------------

FAMILIES = {
    "gaussian": gaussian, "normal": gaussian, "exponential": exponential, "gamma": gamma,
    "beta": beta, "student": student, "frechet": frechet, "gumbel": gumbel,
    "pareto": pareto, "uniform": uniform, "bernoulli": bernoulli, "binomial": binomial,
    "poisson": poisson, "poisson_binomial": poisson_binomial, "rademacher": rademacher,
}


def density_from_spec(spec: dict) -> DensityModel:
    """Build a density from the JSON schema shared by the CLI and case studies."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError("density spec must be an object with a 'family' field")
    family = str(spec["family"]).lower().replace("-", "_")
    if family == "table":
        unknown = set(spec) - {"family", "lattice", "pmf"}
        if unknown:
            raise ValueError(f"unknown fields in table spec: {sorted(unknown)}")
        lattice = spec.get("lattice", {})
        extra = set(lattice) - {"origin", "spacing"}
        if extra:
            raise ValueError(f"unknown lattice fields: {sorted(extra)}")
        return table(spec["pmf"], lattice.get("origin", 0.0), lattice.get("spacing", 1.0))
    if family == "expr":
        unknown = set(spec) - {"family", "formula", "support"}
        if unknown:
            raise ValueError(f"unknown fields in expression spec: {sorted(unknown)}")
        lo, hi = spec.get("support", [-INF, INF])
        return expression_density(spec["formula"], SupportInterval(float(lo), float(hi)))
    unknown = set(spec) - {"family", "params"}
    if unknown:
        raise ValueError(f"unknown fields in density spec: {sorted(unknown)}")
    if family not in FAMILIES:
        raise ValueError(f"unknown family {spec['family']!r}")
    params = dict(spec.get("params", {}))
    if family in ("poisson_binomial",) and "p" in params:
        return poisson_binomial(params["p"])
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {family}: {exc}") from None


__all__ = [
    "SupportInterval", "LatticeSpec", "DensityModel", "expect", "cdf_of",
    "parse_density_expression", "expression_density", "density_from_spec",
    "ExpressionDomainError",
] + list(FAMILIES)

"""Ground-truth distances between densities, and a finite characterization check.

Lattice pairs are handled by exact summation. Continuous pairs use quadrature
split at the crossing points of the two densities (TV) or cdfs (Wasserstein),
so the integrands never have a kink inside a panel.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import IncompatibleError
from .measure import DensityModel
from .quadrature import integrate, integrate_many

_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class DistanceResult:
    value: float
    metric: str
    method: str
    error_estimate: float = 0.0

    def __float__(self):
        return self.value


def _lattice_union(d1, d2):
    x1, p1 = d1.points()
    x2, p2 = d2.points()
    keys = {}
    for xs, ps, col in ((x1, p1, 0), (x2, p2, 1)):
        for x, p in zip(xs.tolist(), ps.tolist()):
            k = round(x, 12) + 0.0
            keys.setdefault(k, [x, 0.0, 0.0])[1 + col] += p
    rows = sorted(keys.values())
    arr = np.array(rows) if rows else np.zeros((0, 3))
    return arr[:, 0], arr[:, 1], arr[:, 2]


def _bulk_grid(d1, d2, n=2000):
    grids = []
    for d in (d1, d2):
        if d.is_lattice:
            grids.append(d.points()[0])
        else:
            grids.append(d.quantile(np.linspace(1e-9, 1 - 1e-9, n)))
    g = np.unique(np.concatenate(grids))
    return g[np.isfinite(g)]


def _crossings(fn, grid):
    """Roots of fn located by sign changes on the grid and refined by brentq."""
    vals = np.asarray(fn(grid), float)
    roots = []
    s = np.sign(vals)
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        a, b = grid[i], grid[i + 1]
        try:
            roots.append(brentq(lambda t: float(fn(np.array([t]))[0]), a, b, xtol=1e-14,
                                rtol=4 * np.finfo(float).eps))
        except ValueError:
            roots.append(0.5 * (a + b))
    return roots


def _span(d1, d2):
    return min(d1.lower, d2.lower), max(d1.upper, d2.upper)


# ---- total variation ---------------------------------------------------------------------


def tv_distance(d1: DensityModel, d2: DensityModel) -> DistanceResult:
    if d1 is d2:
        return DistanceResult(0.0, "tv", "enumeration" if d1.is_lattice else "quadrature")
    if d1.is_lattice and d2.is_lattice:
        _, p1, p2 = _lattice_union(d1, d2)
        return DistanceResult(0.5 * math.fsum(np.abs(p1 - p2)), "tv", "enumeration")
    if d1.is_lattice != d2.is_lattice:
        warnings.warn("TV between a lattice and a continuous law: the measures are "
                      "mutually singular, distance is 1", stacklevel=2)
        return DistanceResult(1.0, "tv", "closed-form")
    diff = lambda x: d1.pdf(x) - d2.pdf(x)
    grid = _bulk_grid(d1, d2)
    cuts = tuple(_crossings(diff, grid)) + tuple(d1.kinks) + tuple(d2.kinks)
    a, b = _span(d1, d2)
    for end in (d1.lower, d1.upper, d2.lower, d2.upper):
        if math.isfinite(end):
            cuts += (end,)
    res = integrate(lambda x: np.abs(diff(x)), a, b, rel_tol=1e-10, abs_tol=1e-12, points=cuts)
    return DistanceResult(0.5 * res.value, "tv", "quadrature", 0.5 * res.error)


# ---- Kolmogorov ---------------------------------------------------------------------------


def kolmogorov_distance(d1: DensityModel, d2: DensityModel) -> DistanceResult:
    if d1 is d2:
        return DistanceResult(0.0, "kolmogorov", "enumeration" if d1.is_lattice else "quadrature")
    if d1.is_lattice and d2.is_lattice:
        _, p1, p2 = _lattice_union(d1, d2)
        return DistanceResult(float(np.max(np.abs(np.cumsum(p1) - np.cumsum(p2)))),
                              "kolmogorov", "enumeration")
    if d1.is_lattice or d2.is_lattice:
        lat, con = (d1, d2) if d1.is_lattice else (d2, d1)
        xs, ps = lat.points()
        Fc = con.cdf(xs)
        right = np.cumsum(ps)
        left = right - ps
        # the lattice cdf is flat between support points, so the sup sits at
        # a support point or at its left limit
        val = float(np.max(np.maximum(np.abs(right - Fc), np.abs(left - Fc))))
        return DistanceResult(val, "kolmogorov", "enumeration")
    grid = _bulk_grid(d1, d2, 5000)
    cuts = np.array([k for k in tuple(d1.kinks) + tuple(d2.kinks) if math.isfinite(k)])
    grid = np.unique(np.concatenate([grid, cuts]))
    gap = lambda x: np.abs(d1.cdf(x) - d2.cdf(x))
    vals = gap(grid)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    # golden-section refinement of the maximum between the neighbouring grid points
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    e = a + _GOLDEN * (b - a)
    fc, fe = float(gap(np.array([c]))[0]), float(gap(np.array([e]))[0])
    for _ in range(60):
        if fc > fe:
            b, e, fe = e, c, fc
            c = b - _GOLDEN * (b - a)
            fc = float(gap(np.array([c]))[0])
        else:
            a, c, fc = c, e, fe
            e = a + _GOLDEN * (b - a)
            fe = float(gap(np.array([e]))[0])
    best = max(best, fc, fe)
    return DistanceResult(best, "kolmogorov", "quadrature", 1e-12)


# ---- Wasserstein ------------------------------------------------------------------------------


def wasserstein_distance(d1: DensityModel, d2: DensityModel) -> DistanceResult:
    if d1 is d2:
        return DistanceResult(0.0, "wasserstein", "enumeration" if d1.is_lattice else "quadrature")
    if d1.is_lattice and d2.is_lattice:
        xs, p1, p2 = _lattice_union(d1, d2)
        gap = np.abs(np.cumsum(p1) - np.cumsum(p2))[:-1]
        return DistanceResult(math.fsum(gap * np.diff(xs)), "wasserstein", "enumeration")
    if d1.is_lattice or d2.is_lattice:
        lat, con = (d1, d2) if d1.is_lattice else (d2, d1)
        return _mixed_wasserstein(lat, con)
    diff = lambda x: d1.cdf(x) - d2.cdf(x)
    grid = _bulk_grid(d1, d2)
    cuts = tuple(_crossings(diff, grid))
    a, b = _span(d1, d2)
    res = integrate(lambda x: np.abs(diff(x)), a, b, rel_tol=1e-10, abs_tol=1e-12,
                    points=cuts + tuple(d1.kinks) + tuple(d2.kinks))
    return DistanceResult(res.value, "wasserstein", "quadrature", res.error)


def _mixed_wasserstein(lat, con):
    """Integrate |F_lat - F_con| cell by cell; F_lat is constant on each cell."""
    xs, ps = lat.points()
    levels = np.cumsum(ps)
    total, err = 0.0, 0.0
    # tails: (-inf, x0) where F_lat = 0 and (x_last, inf) where F_lat = 1
    lo_tail = integrate(lambda x: con.cdf(x), con.lower, xs[0], rel_tol=1e-12) \
        if xs[0] > con.lower else None
    hi_tail = integrate(lambda x: con.sf(x), xs[-1], con.upper, rel_tol=1e-12) \
        if xs[-1] < con.upper else None
    for t in (lo_tail, hi_tail):
        if t is not None:
            total += t.value
            err += t.error
    if xs.size > 1:
        a, b, c = xs[:-1], xs[1:], levels[:-1]
        # split each cell where the continuous cdf crosses the lattice level
        Fa, Fb = con.cdf(a), con.cdf(b)
        inside = (Fa < c) & (Fb > c)
        cut = np.where(inside, con.quantile(np.clip(c, 0, 1)), b)
        cut = np.clip(cut, a, b)
        los = np.concatenate([a, cut])
        his = np.concatenate([cut, b])
        lev = np.concatenate([c, c])
        keep = his > los
        los, his, lev = los[keep], his[keep], lev[keep]
        if los.size:
            pieces = []
            for chunk in np.array_split(np.arange(los.size), max(1, los.size // 2000)):
                vals, errs = _per_cell(con, los[chunk], his[chunk], lev[chunk])
                pieces.append(np.abs(vals))
                err += float(np.sum(errs))
            total += math.fsum(np.concatenate(pieces))
    return DistanceResult(total, "wasserstein", "quadrature", err)


def _per_cell(con, lo, hi, level):
    """Signed integrals of F_con - level over many cells with per-cell levels."""
    width = hi - lo

    def integrand(u, k):
        return (con.cdf(lo[k] + u * width[k]) - level[k]) * width[k]

    return integrate_many(integrand, np.zeros(lo.size), np.ones(lo.size), rel_tol=1e-12,
                          abs_tol=1e-15, strict=False, indexed=True)


# ---- characterization -----------------------------------------------------------------------


def characterization_check(sp, q: DensityModel) -> float:
    """max_j |E_q T_p f_j| over single-point indicators f_j spanning the Stein class."""
    p = sp.density
    if not (p.is_lattice and q.is_lattice):
        raise IncompatibleError("characterization check needs two lattice densities")
    xp, pp = p.points()
    xq, pq = q.points()
    if xp.size != xq.size or not np.allclose(xp, xq, rtol=0, atol=1e-12):
        raise IncompatibleError("the two densities must share the same finite support")
    if xp.size > 64:
        raise IncompatibleError("support larger than 64 points")
    m = xp.size
    # the boundary-term condition removes the indicator at the active endpoint
    skip = 0 if sp.direction == "forward" else m - 1
    worst = 0.0
    for j in range(m):
        if j == skip:
            continue
        f = lambda x, xj=xp[j]: (np.abs(np.asarray(x, float) - xj) < 1e-12).astype(float)
        vals = sp.apply(f, xq)
        worst = max(worst, abs(math.fsum(vals * pq)))
    return worst

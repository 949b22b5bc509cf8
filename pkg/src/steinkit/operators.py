"""Canonical Stein operators, their inverses, scores and Stein kernels.

For a density p and a linear operator D with skew-adjoint D* and shift l
(so that D(f g(.+l)) = g Df + f D*g), the canonical Stein operator is
T f = D(f p)/p. Its inverse maps a centered h to the unique f with T f = h
and vanishing lower boundary term. The score is T 1 and the Stein kernel is
T^{-1}(mean - Id).

Conventions:

    derivative     D = D* = d/dx, l = 0
    forward        D f(x) = f(x+d) - f(x),   D* = backward, l = -d
    backward       D f(x) = f(x) - f(x-d),   D* = forward,  l = +d
    span           D f(x) = f(x+s) - f(x-s), D* = D,        l = -s

Lattice kinds may be divided by their step (scale_by_spacing). The span
difference satisfies the product rule only in the shifted form
D(f g(.+l))(x) = g(x) Df(x) + f(x+l) D*g(x+l); the shift on the D* term is
exposed as `adjoint_shift`. On a lattice of spacing 2s the span operator
acts on densities exactly like a forward difference of step 2s, which is
how SteinPair handles it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (CenteringError, ClassMembershipError, IncompatibleError,
                     IntegrationError, NormalizationError)
from .functions import (Constant, Indicator, IntervalIndicator, Shifted, as_function,
                        derivative_of, kinks_of)
from .measure import DensityModel, LatticeSpec, expect, table
from .quadrature import integrate_many

_KIND_ALIASES = {
    "derivative": "derivative", "strong-derivative": "derivative", "d": "derivative",
    "forward": "forward", "forward-difference": "forward",
    "backward": "backward", "backward-difference": "backward",
    "span": "span", "span-difference": "span",
}
CENTERING_TOL = 1e-9


@dataclass(frozen=True)
class OperatorSpec:
    kind: str = "derivative"
    spacing: float | None = None
    scale_by_spacing: bool = False

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "derivative":
            object.__setattr__(self, "spacing", None)
        elif self.spacing is not None and not self.spacing > 0:
            raise ValueError("lattice operators need a positive spacing")

    @property
    def is_lattice(self):
        return self.kind != "derivative"

    def _step(self):
        if self.spacing is None:
            raise ValueError(f"{self.kind} operator has no spacing set")
        return float(self.spacing)

    @property
    def divisor(self):
        if not self.scale_by_spacing or self.kind == "derivative":
            return 1.0
        return 2 * self._step() if self.kind == "span" else self._step()

    @property
    def shift_l(self):
        if self.kind == "derivative":
            return 0.0
        return self._step() if self.kind == "backward" else -self._step()

    @property
    def adjoint_shift(self):
        return -self._step() if self.kind == "span" else 0.0

    @property
    def adjoint_kind(self):
        return {"derivative": "derivative", "forward": "backward",
                "backward": "forward", "span": "span"}[self.kind]

    def with_spacing(self, spacing):
        return OperatorSpec(self.kind, spacing, self.scale_by_spacing)

    def _difference(self, kind, f):
        f = as_function(f)
        c = self.divisor
        if kind == "derivative":
            return derivative_of(f)
        s = self._step()
        if kind == "forward":
            return lambda x: (f(np.asarray(x, float) + s) - f(x)) / c
        if kind == "backward":
            return lambda x: (f(x) - f(np.asarray(x, float) - s)) / c
        return lambda x: (f(np.asarray(x, float) + s) - f(np.asarray(x, float) - s)) / c

    def apply(self, f):
        """The map D f."""
        return self._difference(self.kind, f)

    def adjoint(self, g):
        """The map D* g."""
        return self._difference(self.adjoint_kind, g)


def default_operator(d: DensityModel) -> OperatorSpec:
    if d.is_lattice:
        return OperatorSpec("forward", d.support.spacing)
    return OperatorSpec("derivative")


@dataclass(frozen=True)
class ClassMembership:
    in_class: bool
    boundary_residuals: tuple
    integrability_flag: bool

    def __bool__(self):
        return self.in_class


def _memoized(compute):
    """Wrap a vectorized map so repeated evaluation points are computed once."""
    cache = {}

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        missing = [v for v in dict.fromkeys(flat.tolist()) if v not in cache]
        if missing:
            vals = compute(np.array(missing))
            cache.update(zip(missing, np.asarray(vals, dtype=float).tolist()))
        return np.array([cache[v] for v in flat.tolist()], dtype=float).reshape(x.shape)
    return evaluate


class InverseImage:
    """x -> T^{-1} h(x) for a centered h, with derivative when continuous."""

    def __init__(self, pair, h, h_mean, kinks=()):
        self.pair = pair
        self.h = h
        self.h_mean = float(h_mean)
        self.kinks = tuple(kinks)
        self._eval = _memoized(self._compute)

    def hbar(self, x):
        return np.asarray(self.h(x), dtype=float) - self.h_mean

    def __call__(self, x):
        return self._eval(x)

    def _compute(self, x):
        return self.pair._inverse_values(self.hbar, x, self.kinks, self.h)

    def derivative(self, x):
        if self.pair.density.is_lattice:
            raise TypeError("lattice inverse images have no derivative; use differences")
        x = np.asarray(x, dtype=float)
        return self.hbar(x) - self.pair.score_values(x) * self(x)


class KernelFunction(InverseImage):
    """The Stein kernel T^{-1}(mean - Id)."""

    def __init__(self, pair, mean):
        self.mean = float(mean)
        super().__init__(pair, lambda x: self.mean - np.asarray(x, dtype=float), 0.0)


class ScoreFunction:
    def __init__(self, pair, in_class):
        self.pair = pair
        self.in_class = in_class

    def __call__(self, x):
        return self.pair.score_values(x)


@dataclass(frozen=True, eq=False)
class SteinPair:
    density: DensityModel
    op: OperatorSpec = None

    def __post_init__(self):
        d = self.density
        op = self.op if self.op is not None else default_operator(d)
        if d.is_lattice != op.is_lattice:
            raise IncompatibleError(f"{op.kind} operator does not act on a "
                                    f"{d.kind} density")
        if op.is_lattice:
            delta = d.support.spacing
            if op.spacing is None:
                op = op.with_spacing(delta / 2 if op.kind == "span" else delta)
            step = 2 * op.spacing if op.kind == "span" else op.spacing
            if not math.isclose(step, delta, rel_tol=1e-12):
                raise IncompatibleError(
                    f"{op.kind} step {step} does not match lattice spacing {delta}")
        object.__setattr__(self, "op", op)

    # ---- lattice geometry -------------------------------------------------------
    @property
    def step(self):
        """Lattice step of the induced difference on the support (span uses 2s)."""
        return self.density.support.spacing

    @property
    def direction(self):
        return "backward" if self.op.kind == "backward" else "forward"

    @property
    def divisor(self):
        return self.op.divisor

    def _fp(self, f, x):
        p = self.density.pdf(x)
        with np.errstate(all="ignore"):
            v = np.asarray(f(x), dtype=float) * p
        return np.where(p == 0, 0.0, v)

    def _check_lattice(self, x):
        _, on = self.density.support.locate(x)
        k = (np.asarray(x, float) - self.density.support.origin) / self.step
        off = np.abs(k - np.round(k)) > 1e-9 * np.maximum(1.0, np.abs(k))
        if np.any(off):
            raise ValueError("evaluation point is not on the lattice")
        return on

    # ---- T --------------------------------------------------------------------
    def apply(self, f, x):
        """T f(x) = D(f p)(x)/p(x); zero outside the support."""
        f = as_function(f)
        x = np.asarray(x, dtype=float)
        d = self.density
        if d.is_lattice:
            on = self._check_lattice(x)
            p = d.pdf(x)
            if self.direction == "forward":
                diff = self._fp(f, x + self.step) - self._fp(f, x)
            else:
                diff = self._fp(f, x) - self._fp(f, x - self.step)
            with np.errstate(all="ignore"):
                out = diff / (self.divisor * p)
            return np.where(on & (p > 0), out, 0.0)
        inside = d.support.interior(x)
        out = np.zeros(x.shape)
        if np.any(inside):
            xi = x[inside]
            df = derivative_of(f, d.lower, d.upper)
            out[inside] = np.asarray(df(xi), float) + np.asarray(f(xi), float) * \
                self.score_values(xi)
        return out

    def operator(self, f):
        return lambda x: self.apply(f, x)

    # ---- score ------------------------------------------------------------------
    def score_values(self, x):
        x = np.asarray(x, dtype=float)
        d = self.density
        if d.is_lattice:
            p = d.pdf(x)
            with np.errstate(all="ignore"):
                if self.direction == "forward":
                    out = (d.pdf(x + self.step) / p - 1.0) / self.divisor
                else:
                    out = (1.0 - d.pdf(x - self.step) / p) / self.divisor
            return np.where(p > 0, out, 0.0)
        exact = d.dlogpdf(x)
        if exact is not None:
            return np.asarray(exact, dtype=float)
        # central difference of log p, step shrunk near the support ends
        h = np.maximum(1e-6, 1e-6 * np.abs(x))
        room = np.minimum(x - d.lower, d.upper - x)
        h = np.where(np.isfinite(room), np.minimum(h, 0.5 * room), h)
        with np.errstate(all="ignore"):
            return (np.log(d.pdf(x + h)) - np.log(d.pdf(x - h))) / (2 * h)

    @cached_property
    def score(self):
        return ScoreFunction(self, self.check_in_class(Constant(1.0)).in_class)

    # ---- inverse ------------------------------------------------------------------
    def centered(self, h, auto_center=False):
        h = as_function(h)
        m = expect(self.density, h, rel_tol=1e-12, points=kinks_of(h))
        if not auto_center:
            scale = expect(self.density, lambda x: np.abs(h(x)), rel_tol=1e-8,
                           points=kinks_of(h))
            if abs(m) >= CENTERING_TOL * max(1.0, scale):
                raise CenteringError(f"h is not centered (E h = {m:.3g}); "
                                     "pass auto_center=True to subtract the mean")
        return h, (m if auto_center else 0.0)

    def inverse(self, h, auto_center=False) -> InverseImage:
        h, m = self.centered(h, auto_center)
        return InverseImage(self, h, m, kinks_of(h))

    def inverse_apply(self, h, x, auto_center=False):
        return self.inverse(h, auto_center)(x)

    def _inverse_values(self, hbar, x, kinks, h_raw=None):
        d = self.density
        x = np.asarray(x, dtype=float)
        if d.is_lattice:
            return self._lattice_inverse(hbar, x)
        out = np.zeros(x.shape)
        inside = d.support.interior(x)
        if not np.any(inside):
            return out
        xi = x[inside]
        closed = self._indicator_inverse(h_raw, xi) if h_raw is not None else None
        if closed is not None:
            # where p underflows the cdf ratio is 0/0; integrate in log space there
            with np.errstate(all="ignore"):
                bad = ~np.isfinite(closed) | (d.pdf(xi) < 1e-250)
            if np.any(bad):
                closed[bad] = _tail_integrals(d, hbar, xi[bad], tuple(kinks) + tuple(d.kinks))
            out[inside] = closed
            return out
        vals = _tail_integrals(d, hbar, xi, tuple(kinks) + tuple(d.kinks))
        out[inside] = vals
        return out

    def _indicator_inverse(self, h, x):
        """Exact inverse for (centered) indicators, from the cdf and survival function."""
        d = self.density
        if not d.has_exact_cdf:
            return None
        base = h.f if isinstance(h, Shifted) else h
        if isinstance(base, Indicator):
            lo, hi = -math.inf, base.z
        elif isinstance(base, IntervalIndicator):
            lo, hi = base.lo, base.hi
        else:
            return None
        F = lambda v: d.cdf(np.asarray(v, dtype=float))
        S = lambda v: d.sf(np.asarray(v, dtype=float))
        m = (F(hi) - F(lo)) if math.isfinite(lo) else F(hi)
        Fx, Sx = F(x), S(x)
        low = x <= d.median
        mass_low = np.maximum(F(np.minimum(x, hi)) - (F(lo) if math.isfinite(lo) else 0.0), 0.0)
        mass_up = np.maximum((S(np.maximum(x, lo)) if math.isfinite(lo) else Sx) - S(hi), 0.0)
        num = np.where(low, mass_low - m * Fx, -(mass_up - m * Sx))
        with np.errstate(all="ignore"):
            return num / d.pdf(x)

    def _lattice_inverse(self, hbar, x):
        d = self.density
        on = self._check_lattice(x)
        xx = x[on]
        if xx.size == 0:
            return np.zeros(x.shape)
        xs, ps = d.points_covering(float(np.max(xx)))
        F = self.inverse_table(np.asarray(hbar(xs), dtype=float)[None, :], ps, centered=True)[0]
        idx = np.rint((xx - xs[0]) / self.step).astype(int)
        out = np.zeros(x.shape)
        inside = (idx >= 0) & (idx < xs.size)
        vals = np.zeros(xx.shape)
        vals[inside] = F[idx[inside]]
        out[on] = vals
        return out

    def inverse_table(self, H, ps=None, centered=False):
        """T^{-1} applied to each row of H (values at the support points), vectorized.

        Rows are centered first unless `centered` is set. Lower-tail sums are used
        up to the median and upper-tail sums beyond it.
        """
        if ps is None:
            _, ps = self.density.points()
        H = np.atleast_2d(np.asarray(H, dtype=float))
        if not centered:
            H = H - (H @ ps)[:, None]
        hp = H * ps[None, :]
        inclusive = np.cumsum(hp, axis=1)
        exclusive = inclusive - hp
        tail_incl = np.cumsum(hp[:, ::-1], axis=1)[:, ::-1]
        tail_excl = tail_incl - hp
        cum = np.cumsum(ps)
        med = int(np.searchsorted(cum, 0.5))
        cols = np.arange(ps.size)
        if self.direction == "forward":
            fp = np.where(cols[None, :] <= med, exclusive, -tail_incl)
        else:
            fp = np.where(cols[None, :] <= med, inclusive, -tail_excl)
        with np.errstate(all="ignore"):
            out = self.divisor * fp / ps[None, :]
        return np.where(ps[None, :] > 0, out, 0.0)

    # ---- kernel -------------------------------------------------------------------
    @cached_property
    def kernel(self) -> KernelFunction:
        try:
            mean = self.density.mean
        except IntegrationError as exc:
            raise IntegrationError("Stein kernel needs a finite mean") from exc
        if not math.isfinite(mean):
            raise IntegrationError("Stein kernel needs a finite mean")
        return KernelFunction(self, mean)

    def stein_kernel(self):
        return self.kernel

    # ---- class membership ---------------------------------------------------------------
    def check_in_class(self, f) -> ClassMembership:
        f = as_function(f)
        d = self.density
        if d.is_lattice:
            return self._lattice_membership(f)
        bulk = d.probe_grid(101)
        scale = float(np.max(np.abs(self._fp(f, bulk)))) or 1.0
        tol = 1e-9 * scale
        res_lo, ok_lo = _boundary_limit(lambda x: self._fp(f, x), d.lower, d.median, tol)
        res_hi, ok_hi = _boundary_limit(lambda x: self._fp(f, x), d.upper, d.median, tol)
        integrable = True
        try:
            expect(d, lambda x: np.abs(self.apply(f, x)), rel_tol=1e-6)
        except (IntegrationError, ArithmeticError):
            integrable = False
        return ClassMembership(ok_lo and ok_hi and integrable, (res_lo, res_hi), integrable)

    def _lattice_membership(self, f):
        d = self.density
        xs, ps = d.points()
        scale = float(np.max(np.abs(self._fp(f, xs)))) or 1.0
        tol = 1e-9 * scale
        kmin, kmax = d.support.index_range
        residuals = []
        oks = []
        # the boundary term of the induced difference lives at the lower end for the
        # forward direction and at the upper end for the backward one
        for end, finite in (("lower", math.isfinite(kmin)), ("upper", math.isfinite(kmax))):
            active = (end == "lower") == (self.direction == "forward")
            if finite:
                point = d.lower if end == "lower" else d.upper
                r = abs(float(self._fp(f, np.array([point]))[0])) if active else 0.0
                residuals.append(r)
                oks.append(r < tol)
            else:
                k0 = xs[-1] if end == "upper" else xs[0]
                sgn = 1.0 if end == "upper" else -1.0
                probes = k0 + sgn * self.step * np.round(2.0 ** np.arange(1, 41))
                vals = np.abs(self._fp(f, probes))
                residuals.append(float(vals[-1]))
                oks.append(bool(np.all(vals[-5:] < tol) and np.all(np.diff(vals[-5:]) <= 0)))
        integrable = True
        if not d.support.finite:
            xs2, ps2 = d.points_covering(xs[-1] * 2 + 64)
            vals = np.abs(self.apply(f, xs2)) * ps2
            integrable = bool(np.all(np.isfinite(vals)))
        return ClassMembership(all(oks) and integrable, tuple(residuals), integrable)


def _tail_integrals(d, hbar, xi, kinks):
    """(1/p(x)) times the integral of hbar p over the shorter tail at each x.

    Each point gets its own unit interval in an auxiliary variable so that the
    ratio p(y)/p(x) is formed in log space and never underflows to 0/0.
    """
    low = xi <= d.median
    n = xi.size
    # natural length scale of the tail: 1/|score|, capped by the distance scale
    with np.errstate(all="ignore"):
        sc = d.dlogpdf(xi)
        if sc is None:
            # only a length scale is needed, so a rough difference will do
            h = 1e-4 * np.maximum(1.0, np.abs(xi))
            sc = (d.log_ratio(xi, h) - d.log_ratio(xi, -h)) / (2 * h)
        sc = np.abs(sc)
        w = np.minimum(np.maximum(1.0, np.abs(xi)), 1.0 / sc)
    w = np.where(np.isfinite(w) & (w > 0), w, np.maximum(1.0, np.abs(xi)))
    sign = np.where(low, -1.0, 1.0)
    end = np.where(low, d.lower, d.upper)
    finite = np.isfinite(end)
    span = np.where(finite, np.abs(end - xi), w)

    def integrand(u, k):
        with np.errstate(all="ignore"):
            dy = sign[k] * np.where(finite[k], span[k] * u, w[k] * u / (1 - u))
            y = xi[k] + dy
            jac = np.where(finite[k], span[k], w[k] / (1 - u) ** 2)
            r = np.exp(d.log_ratio(xi[k], dy))
            v = hbar(y) * r * jac
        return np.where((r == 0) | ~np.isfinite(jac), 0.0, v)

    cuts = [[] for _ in range(n)]
    for z in kinks:
        if not math.isfinite(z):
            continue
        dist = sign * (z - xi)
        with np.errstate(all="ignore"):
            u = np.where(finite, dist / span, (dist / w) / (1 + dist / w))
        for i in np.flatnonzero((dist > 0) & (u > 0) & (u < 1)):
            cuts[i].append(float(u[i]))
    vals, errs = integrate_many(integrand, np.zeros(n), np.ones(n), rel_tol=1e-12,
                                indexed=True, cuts=cuts, strict=False)
    # near a finite end the density itself is only known to the resolution of x,
    # so the budget may run out at a noise level well below any use of the value
    with np.errstate(all="ignore"):
        resolution = 1e3 * np.finfo(float).eps * np.maximum(1.0, np.abs(xi)) / span
        loose = errs > np.maximum(1e-7, resolution) * np.abs(vals) + 1e-300
    if np.any(loose):
        raise IntegrationError(f"inverse Stein integral did not converge at x = {xi[loose][0]!r}")
    return np.where(low, vals, -vals)


def _boundary_limit(fp, end, anchor, tol):
    """Probe |f p| along a geometric sequence toward a support endpoint."""
    if math.isfinite(end):
        r = (anchor - end) if anchor != end else 1.0
        probes = end + r * 2.0 ** (-np.arange(1, 41))
    else:
        sgn = 1.0 if end > 0 else -1.0
        base = max(1.0, abs(anchor))
        probes = anchor + sgn * base * 2.0 ** np.arange(1, 41)
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(fp(probes), dtype=float))
    vals = np.where(np.isnan(vals), np.inf, vals)
    tail = vals[-5:]
    ok = bool(np.all(tail < tol) and np.all(np.diff(tail) <= 1e-300 + 0 * tail[1:]))
    return float(vals[-1]), ok


def pair(d: DensityModel, op: OperatorSpec | str | None = None, **kw) -> SteinPair:
    if isinstance(op, str):
        op = OperatorSpec(op, **kw)
    return SteinPair(d, op)


# ---- standardizations -------------------------------------------------------------


class StandardizedOperator:
    """g -> f D*g + g T f for a fixed f, or f -> f D*g + g T f for a fixed g."""

    def __init__(self, sp: SteinPair, fixed_f=None, fixed_g=None):
        self.sp = sp
        self.fixed_f = as_function(fixed_f) if fixed_f is not None else None
        self.fixed_g = as_function(fixed_g) if fixed_g is not None else None

    def _adjoint(self, g):
        sp = self.sp
        if sp.density.is_lattice:
            c, s = sp.divisor, sp.step
            g = as_function(g)
            if sp.direction == "forward":
                return lambda x: (g(x) - g(np.asarray(x, float) - s)) / c
            return lambda x: (g(np.asarray(x, float) + s) - g(x)) / c
        return derivative_of(as_function(g), sp.density.lower, sp.density.upper)

    def __call__(self, fun):
        fun = as_function(fun)
        f, g = (self.fixed_f, fun) if self.fixed_f is not None else (fun, self.fixed_g)
        dg = self._adjoint(g)

        def out(x):
            x = np.asarray(x, dtype=float)
            return np.asarray(f(x), float) * dg(x) + np.asarray(g(x), float) * \
                self.sp.apply(f, x)
        return out

    def apply(self, fun, x):
        return self(fun)(x)


def standardize(sp: SteinPair, fixed_f=None, fixed_g=None) -> StandardizedOperator:
    if (fixed_f is None) == (fixed_g is None):
        raise ValueError("fix exactly one of f and g")
    if fixed_f is not None:
        if not sp.check_in_class(fixed_f).in_class:
            raise ClassMembershipError("the fixed f is not in the Stein class")
    else:
        g = as_function(fixed_g)
        probe = sp.density.probe_grid(101)
        if not np.all(np.isfinite(g(probe))):
            raise ClassMembershipError("the fixed g is not finite on the support")
    return StandardizedOperator(sp, fixed_f, fixed_g)


# ---- Pearson check -------------------------------------------------------------------


def pearson_kernel_check(d: DensityModel, op=None):
    """Coefficients (a, b, c) with kernel = a + b x + c x^2, or None if not quadratic."""
    sp = SteinPair(d, op)
    xs = d.probe_grid(200, 0.01, 0.99) if not d.is_lattice else d.points()[0][:200]
    tau = sp.kernel(xs)
    A = np.vstack([np.ones_like(xs), xs, xs * xs]).T
    coef, *_ = np.linalg.lstsq(A, tau, rcond=None)
    resid = np.abs(A @ coef - tau) / np.maximum(1.0, np.abs(tau))
    if np.max(resid) < 1e-6:
        return tuple(float(np.where(abs(c) < 1e-9, 0.0, c)) for c in coef)
    return None


# ---- Gibbs measures ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GibbsResult:
    pair: SteinPair
    omega: float
    potential: object = field(repr=False)
    operator: object = field(repr=False)
    kernel: object = field(repr=False)
    birth: object = field(repr=False)
    death: object = field(repr=False)


def gibbs_operator(V, omega, N=math.inf):
    """Gibbs measure mu(x) ~ exp(V(x)) omega^x / x! on {0..N} with its birth-death operator."""
    from scipy.special import gammaln

    omega = float(omega)
    if omega <= 0:
        raise ValueError("omega must be positive")
    V = as_function(V)
    if math.isfinite(N):
        ks = np.arange(int(N) + 1, dtype=float)
        logw = np.asarray(V(ks), float) + ks * math.log(omega) - gammaln(ks + 1)
    else:
        logw_parts, start, peak = [], 0, -math.inf
        while True:
            ks = np.arange(start, start + 512, dtype=float)
            part = np.asarray(V(ks), float) + ks * math.log(omega) - gammaln(ks + 1)
            logw_parts.append(part)
            peak = max(peak, float(np.max(part)))
            start += 512
            if part[-1] < peak - 60 and part[-1] < part[0]:
                break
            if start > 5_000_000:
                raise NormalizationError("Gibbs weights are not normalizable")
        logw = np.concatenate(logw_parts)
        logw = logw[: int(np.flatnonzero(logw > peak - 745)[-1]) + 1]
    if not np.all(np.isfinite(logw)):
        raise NormalizationError("Gibbs weights are not finite")
    w = np.exp(logw - np.max(logw))
    dens = table(w / math.fsum(w), family="gibbs", params={"omega": omega})
    top = dens.upper
    sp = SteinPair(dens, OperatorSpec("backward", 1.0))

    def birth(x):
        x = np.asarray(x, dtype=float)
        b = omega * np.exp(np.asarray(V(x + 1), float) - np.asarray(V(x), float))
        return np.where(x >= top, 0.0, b)

    def death(x):
        return np.asarray(x, dtype=float)

    def operator(f):
        f = as_function(f)
        return lambda x: birth(x) * f(np.asarray(x, float) + 1) - death(x) * f(x)

    mean = dens.mean
    xs, ps = dens.points()

    def kernel(x):
        x = np.asarray(x, dtype=float)
        cum = np.cumsum((mean - xs) * ps)
        idx = np.rint(x - xs[0]).astype(int)
        ok = (idx >= 0) & (idx < xs.size)
        out = np.zeros(x.shape)
        out[ok] = cum[idx[ok]] / ps[idx[ok]]
        return out

    return GibbsResult(sp, omega, V, operator, kernel, birth, death)


# ---- diffusion standardization ------------------------------------------------------------


class DiffusionOperator:
    """g -> (beta/2) g' + gamma g with beta = 2 T^{-1} gamma."""

    def __init__(self, sp, gamma, half_beta):
        self.sp = sp
        self.gamma = gamma
        self.half_beta = half_beta

    def beta(self, x):
        return 2.0 * self.half_beta(x)

    def __call__(self, g):
        g = as_function(g)
        dg = derivative_of(g, self.sp.density.lower, self.sp.density.upper)
        return lambda x: self.half_beta(x) * dg(x) + np.asarray(self.gamma(x), float) * g(x)


def diffusion_operator(d: DensityModel, gamma) -> DiffusionOperator:
    if d.is_lattice:
        raise IncompatibleError("diffusion operators need a continuous density")
    gamma = as_function(gamma)
    sp = SteinPair(d)
    m = expect(d, gamma, rel_tol=1e-12)
    scale = expect(d, lambda x: np.abs(gamma(x)), rel_tol=1e-8)
    if abs(m) >= CENTERING_TOL * max(1.0, scale):
        raise CenteringError(f"gamma is not centered (E gamma = {m:.3g})")
    probe = d.probe_grid(400, 1e-4, 1 - 1e-4)
    vals = np.asarray(gamma(probe), float)
    signs = np.sign(vals[np.abs(vals) > 1e-12 * max(1.0, float(np.max(np.abs(vals))))])
    changes = int(np.count_nonzero(np.diff(signs)))
    if changes != 1:
        raise ValueError(f"gamma must change sign exactly once (found {changes})")
    if signs[-1] > 0:
        raise ValueError("gamma must be positive to the left of its sign change")
    gp = np.abs(vals * d.pdf(probe))
    if not np.all(np.isfinite(gp)):
        raise ValueError("gamma * p is unbounded on the probe grid")
    return DiffusionOperator(sp, gamma, sp.inverse(gamma, auto_center=True))


# ---- zero bias ---------------------------------------------------------------------------------


def zero_bias_density(d: DensityModel) -> DensityModel:
    """Density of X* with E[X f(X)] = var E[f'(X*)], namely E[X 1(X > x)]/var."""
    from .measure import SupportInterval, continuous

    mean = d.mean
    var = d.variance
    if abs(mean) > 1e-9 * max(1.0, math.sqrt(var)):
        raise CenteringError("zero-bias transform needs a centered density")
    if not (math.isfinite(var) and var > 0):
        raise ValueError("zero-bias transform needs finite nonzero variance")
    if d.is_lattice:
        xs, ps = d.points()
        # E[X 1(X > x)] is constant between consecutive support points
        upper = np.cumsum((xs * ps)[::-1])[::-1]
        levels = upper[1:] / var

        def pdf(x):
            idx = np.searchsorted(xs, x, side="right") - 1
            ok = (idx >= 0) & (idx < levels.size)
            out = np.zeros(np.shape(x))
            out[ok] = levels[idx[ok]]
            return np.maximum(out, 0.0)
        sup = SupportInterval(float(xs[0]), float(xs[-1]))
        return continuous(pdf, sup, name="zero_bias", kinks=tuple(xs[1:-1]))
    def partial(x):
        # E[X 1(X > x)], from whichever tail is shorter (the two agree as E X = 0)
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        inside = d.support.interior(x)
        xi = x[inside]
        yp = lambda y: y * d.pdf(y)
        vals = np.empty(xi.shape)
        low = xi <= d.median
        if np.any(low):
            vals[low] = -integrate_many(yp, d.lower, xi[low], rel_tol=1e-12)[0]
        if np.any(~low):
            vals[~low] = integrate_many(yp, xi[~low], d.upper, rel_tol=1e-12)[0]
        out[inside] = vals
        return out

    memo = _memoized(partial)
    return continuous(lambda x: np.maximum(memo(x) / var, 0.0), d.support, name="zero_bias")

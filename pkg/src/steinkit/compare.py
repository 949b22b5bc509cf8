"""Comparison bounds between two Stein pairs.

score_bound      kappa_1(f) * E_2 |T_1 f - T_2 f|
kernel_bound     kappa_2(w) * E_2 |T_1^{-1} w - T_2^{-1} w|
stein_discrepancy, sum_kernel and lattice_gauss_bound cover sums of
independent lattice variables against the standard Gaussian.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (BudgetError, CenteringError, ClassMembershipError, IncompatibleError,
                     NormalizationError, SoundnessError)
from .functions import as_function, kinks_of
from .measure import DensityModel, expect, gaussian, table
from .operators import SteinPair
from .oracle import kolmogorov_distance, tv_distance, wasserstein_distance
from .solve import TestClass, _constant_value, solve, stein_factors

SOUNDNESS_SLACK = 1e-8
ORACLES = {"tv": tv_distance, "kolmogorov": kolmogorov_distance,
           "wasserstein": wasserstein_distance}


@dataclass
class BoundReport:
    bound: float
    metric: str
    oracle_distance: float | None = None
    components: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("a bound cannot be negative")

    @property
    def slack(self):
        if self.oracle_distance is None or self.oracle_distance == 0:
            return None
        return self.bound / self.oracle_distance

    @property
    def sound(self):
        return self.oracle_distance is None or \
            self.oracle_distance <= self.bound + SOUNDNESS_SLACK

    def require_sound(self):
        if not self.sound:
            raise SoundnessError(f"oracle {self.oracle_distance!r} exceeds bound {self.bound!r}")
        return self

    def to_dict(self):
        out = asdict(self)
        out["slack"] = self.slack
        return out


def _oracle(d1, d2, metric):
    return float(ORACLES[metric](d1, d2).value)


def _as_class(cls):
    return TestClass(cls) if isinstance(cls, str) else cls


def score_bound(sp1: SteinPair, sp2: SteinPair, f=1.0, cls="tv", oracle=True) -> BoundReport:
    cls = _as_class(cls)
    f = as_function(f)
    params = {"target": sp1.density.to_spec(), "approx": sp2.density.to_spec(),
              "class": cls.kind}
    if sp1 is sp2 or sp1.density is sp2.density:
        return BoundReport(0.0, cls.metric, 0.0 if oracle else None,
                           {"kappa": None, "expectation": 0.0}, params)
    for name, sp in (("first", sp1), ("second", sp2)):
        if not sp.check_in_class(f).in_class:
            raise ClassMembershipError(f"f is not in the Stein class of the {name} density")
    factors = stein_factors(sp1, cls, fixed_f=f)
    e = expect(sp2.density, lambda x: np.abs(sp1.apply(f, x) - sp2.apply(f, x)), rel_tol=1e-10)
    bound = factors.sup_g * e
    comps = {"kappa": factors.sup_g, "kappa_method": factors.method, "expectation": e}
    dist = _oracle(sp1.density, sp2.density, cls.metric) if oracle else None
    return BoundReport(bound, cls.metric, dist, comps, params)


def _centered_under(sp, w):
    try:
        return sp.inverse(w)
    except CenteringError as exc:
        raise CenteringError(f"omega is not centered under {sp.density.family}: {exc}") from None


def kernel_bound(sp1: SteinPair, sp2: SteinPair, omega=None, cls="tv", oracle=True) -> BoundReport:
    cls = _as_class(cls)
    d1, d2 = sp1.density, sp2.density
    params = {"target": d1.to_spec(), "approx": d2.to_spec(), "class": cls.kind,
              "omega": "mean - Id" if omega is None else repr(omega)}
    if sp1 is sp2 or d1 is d2:
        return BoundReport(0.0, cls.metric, 0.0 if oracle else None,
                           {"kappa": None, "expectation": 0.0}, params)
    if omega is None:
        m1, m2 = d1.mean, d2.mean
        if abs(m1 - m2) > 1e-9 * max(1.0, abs(m1), abs(m2)):
            raise IncompatibleError(f"means differ ({m1!r} vs {m2!r}); rescale the "
                                    "approximating variable before comparing kernels")
        inv1, inv2 = sp1.kernel, sp2.kernel
    else:
        omega = as_function(omega)
        inv1, inv2 = _centered_under(sp1, omega), _centered_under(sp2, omega)
    factors = stein_factors(sp1, cls, fixed_f=inv1)
    c1, c2 = _constant_value(sp2, inv1), _constant_value(sp2, inv2)
    if c1 is not None and c2 is not None:
        e = abs(c1 - c2)
    else:
        e = expect(d2, lambda x: np.abs(inv1(x) - inv2(x)), rel_tol=1e-10)
    bound = factors.sup_dg * e
    comps = {"kappa": factors.sup_dg, "kappa_method": factors.method, "expectation": e}
    dist = _oracle(d1, d2, cls.metric) if oracle else None
    return BoundReport(bound, cls.metric, dist, comps, params)


def stein_discrepancy(sp: SteinPair, kernel=None) -> float:
    """S(X) = sqrt(E (1 - tau(X))^2) against a unit-variance Gaussian."""
    tau = as_function(kernel) if kernel is not None else sp.kernel
    val = expect(sp.density, lambda x: (1.0 - np.asarray(tau(x), float)) ** 2, rel_tol=1e-10,
                 abs_tol=1e-24)
    return math.sqrt(max(val, 0.0))


# ---- sums of independent lattice variables ---------------------------------------------------


def _key(x):
    return round(float(x), 12) + 0.0


def _convolve(a, b):
    out = {}
    for ka, (xa, pa) in a.items():
        for kb, (xb, pb) in b.items():
            x = xa + xb
            k = _key(x)
            slot = out.get(k)
            out[k] = (x, pa * pb) if slot is None else (slot[0], slot[1] + pa * pb)
    return out


@dataclass(frozen=True, eq=False)
class SumKernel:
    """Exact Stein kernel of W = sum a_i xi_i, tabulated on the support of W."""
    support: np.ndarray
    pmf: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.support, x)
        idx = np.clip(idx, 0, self.support.size - 1)
        near = np.abs(self.support[idx] - x) <= 1e-9 * np.maximum(1.0, np.abs(x))
        lo = np.clip(idx - 1, 0, self.support.size - 1)
        near_lo = np.abs(self.support[lo] - x) <= 1e-9 * np.maximum(1.0, np.abs(x))
        out = np.where(near, self.values[idx], np.where(near_lo, self.values[lo], 0.0))
        return out

    @property
    def density(self) -> DensityModel:
        gaps = np.diff(self.support)
        if self.support.size == 1:
            return table([1.0], origin=float(self.support[0]))
        if np.max(np.abs(gaps - gaps[0])) > 1e-9 * gaps[0]:
            # not equally spaced: embed in the finest common grid
            raise IncompatibleError("the sum is not supported on an equally spaced lattice")
        return table(self.pmf, origin=float(self.support[0]), spacing=float(gaps[0]))


def sum_kernel(components, weights, budget=10_000_000) -> SumKernel:
    """tau_W(w) = sum_i a_i^2 E[tau_i(xi_i) | W = w] by exact convolution.

    components: list of (lattice DensityModel, kernel map) pairs, independent.
    """
    n = len(components)
    if n == 0 or len(weights) != n:
        raise ValueError("need one weight per component")
    laws = []
    for d, _ in components:
        if not d.is_lattice or not d.support.finite:
            raise IncompatibleError("sum_kernel needs finitely supported lattice components")
        xs, ps = d.points()
        laws.append((xs, ps))
    scaled = []
    for (xs, ps), a in zip(laws, weights):
        scaled.append({_key(a * x): (a * x, p) for x, p in zip(xs, ps)})
    # prefix and suffix laws give every leave-one-out law with O(n) convolutions
    prefix = [{0.0: (0.0, 1.0)}]
    work = 0
    for s in scaled:
        work += len(prefix[-1]) * len(s)
        if work > budget:
            raise BudgetError(f"enumeration exceeds the budget of {budget} states")
        prefix.append(_convolve(prefix[-1], s))
    suffix = [{0.0: (0.0, 1.0)}]
    for s in reversed(scaled):
        suffix.append(_convolve(suffix[-1], s))
    suffix = suffix[::-1]
    total = prefix[-1]
    if len(total) * n > budget:
        raise BudgetError(f"enumeration exceeds the budget of {budget} states")
    acc = {k: 0.0 for k in total}
    for i, ((d, tau), a) in enumerate(zip(components, weights)):
        rest = _convolve(prefix[i], suffix[i + 1])
        xs, ps = laws[i]
        tv = np.asarray(as_function(tau)(xs), float)
        for x, p, t in zip(xs, ps, tv):
            ax = a * x
            for kr, (xr, pr) in rest.items():
                acc[_key(xr + ax)] += a * a * t * p * pr
    keys = sorted(total, key=lambda k: total[k][0])
    support = np.array([total[k][0] for k in keys])
    pmf = np.array([total[k][1] for k in keys])
    values = np.array([acc[k] for k in keys]) / pmf
    return SumKernel(support, pmf, values)


def lattice_gauss_bound(w: DensityModel, tau_w, operator="forward", oracle=True) -> BoundReport:
    """Wasserstein bound between a centered lattice law and N(0, 1).

    Components: Stein discrepancy S, the derivative term var * spacing, and the
    shift term spacing (absent for the span difference, whose shift cancels).
    """
    if not w.is_lattice:
        raise IncompatibleError("lattice_gauss_bound needs a lattice density")
    mean, var = w.mean, w.variance
    if abs(mean) > 1e-9 * max(1.0, math.sqrt(var)):
        raise CenteringError(f"w is not centered (mean {mean!r})")
    tau_w = as_function(tau_w)
    xs, ps = w.points()
    e_tau = math.fsum(np.asarray(tau_w(xs), float) * ps)
    if abs(e_tau - var) > 1e-9 * max(1.0, var):
        raise NormalizationError(f"E tau = {e_tau!r} differs from the variance {var!r}; "
                                 "the kernel must use the spacing-scaled operator")
    delta = w.support.spacing
    S = math.sqrt(max(math.fsum((1.0 - np.asarray(tau_w(xs), float)) ** 2 * ps), 0.0))
    shift = 0.0 if operator == "span" else delta
    comps = {"discrepancy": S, "derivative_term": var * delta, "shift_term": shift,
             "variance": var, "spacing": delta}
    bound = S + var * delta + shift
    dist = float(wasserstein_distance(w, gaussian()).value) if oracle else None
    return BoundReport(bound, "wasserstein", dist, comps, {"operator": operator})


# ---- general identity -----------------------------------------------------------------------


def general_identity_eval(sp1: SteinPair, sp2: SteinPair, h, f1, f2, tol=1e-6) -> float:
    """E_2[(f1 - f2) D*g + g (T_1 f1 - T_2 f2)] with g = T_1^{-1}(h - E_1 h)/f1.

    The value must equal E_2 h - E_1 h; a mismatch above tol raises SoundnessError.
    """
    h = as_function(h)
    f1, f2 = as_function(f1), as_function(f2)
    sol = solve(sp1, h, fixed_f=f1)
    g = sol.g
    d2 = sp2.density
    member = sp2.check_in_class(lambda x: np.asarray(f2(x), float) * np.asarray(g(x), float))
    if not member.in_class:
        raise ClassMembershipError("f2 * g is not in the Stein class of the second density")
    kinks = kinks_of(h)
    if d2.is_lattice:
        c, s = sp2.divisor, sp2.step
        dg = (lambda x: (g(x) - g(np.asarray(x, float) - s)) / c) if sp2.direction == "forward" \
            else (lambda x: (g(np.asarray(x, float) + s) - g(x)) / c)
    else:
        dg = g.derivative

    def integrand(x):
        x = np.asarray(x, dtype=float)
        return ((np.asarray(f1(x), float) - np.asarray(f2(x), float)) * dg(x)
                + np.asarray(g(x), float) * (sp1.apply(f1, x) - sp2.apply(f2, x)))

    value = expect(d2, integrand, rel_tol=1e-10, points=kinks)
    target = expect(d2, h, points=kinks) - expect(sp1.density, h, points=kinks)
    if abs(value - target) > tol:
        raise SoundnessError(f"identity mismatch: {value!r} vs {target!r}")
    return value

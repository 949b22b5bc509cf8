"""Small callable wrappers that carry derivatives and kink locations.

Test functions, solutions and kernels are plain vectorized callables. When
one knows its own derivative it exposes `.derivative`; when it has kinks or
jumps it lists them in `.kinks` so quadrature and sup-norm searches can split
there instead of smoothing across them.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial


def kinks_of(f):
    return tuple(getattr(f, "kinks", ()))


class Constant:
    def __init__(self, value):
        self.value = float(value)

    def __call__(self, x):
        return np.full(np.shape(x), self.value)

    def derivative(self, x):
        return np.zeros(np.shape(x))

    def __repr__(self):
        return f"Constant({self.value!r})"


class Identity:
    def __call__(self, x):
        return np.asarray(x, dtype=float)

    def derivative(self, x):
        return np.ones(np.shape(x))


class PolynomialFunction:
    """Wraps numpy's Polynomial with an exact derivative."""

    def __init__(self, poly):
        self.poly = poly if isinstance(poly, Polynomial) else Polynomial(poly)
        self._dpoly = self.poly.deriv()

    def __call__(self, x):
        return self.poly(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self._dpoly(np.asarray(x, dtype=float))


class Power:
    """x -> scale * x**p on x > 0 (zero elsewhere)."""

    def __init__(self, p, scale=1.0):
        self.p = float(p)
        self.scale = float(scale)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = np.where(x > 0, self.scale * np.abs(x) ** self.p, 0.0)
        if self.p == 0:
            out = np.where(x > 0, self.scale, 0.0)
        return out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.p == 0:
            return np.zeros(np.shape(x))
        with np.errstate(all="ignore"):
            return np.where(x > 0, self.scale * self.p * np.abs(x) ** (self.p - 1), 0.0)


class Indicator:
    """x -> 1 if x <= z (the Kolmogorov test functions)."""

    def __init__(self, z):
        self.z = float(z)
        self.kinks = (self.z,)

    def __call__(self, x):
        return (np.asarray(x, dtype=float) <= self.z).astype(float)

    def derivative(self, x):
        return np.zeros(np.shape(x))

    def __repr__(self):
        return f"Indicator({self.z!r})"


class IntervalIndicator:
    """x -> 1 if lo < x <= hi."""

    def __init__(self, lo, hi):
        self.lo = float(lo)
        self.hi = float(hi)
        self.kinks = tuple(v for v in (self.lo, self.hi) if np.isfinite(v))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return ((x > self.lo) & (x <= self.hi)).astype(float)

    def derivative(self, x):
        return np.zeros(np.shape(x))


class Shifted:
    """x -> f(x) - c, keeping kinks and derivative."""

    def __init__(self, f, c):
        self.f = f
        self.c = float(c)
        self.kinks = kinks_of(f)
        if hasattr(f, "derivative") or isinstance(f, Polynomial):
            self.derivative = derivative_of(f)

    def __call__(self, x):
        return np.asarray(self.f(x), dtype=float) - self.c


class WithDerivative:
    """Attach a known derivative (and kinks) to a bare callable."""

    def __init__(self, f, df, kinks=()):
        self.f = f
        self.derivative = df
        self.kinks = tuple(kinks)

    def __call__(self, x):
        return self.f(x)


def as_function(obj):
    """Normalize numbers, Polynomials and callables to vectorized callables."""
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return Constant(obj)
    if isinstance(obj, Polynomial):
        return PolynomialFunction(obj)
    if callable(obj):
        return obj
    raise TypeError(f"cannot interpret {obj!r} as a function")


def constant_value(obj):
    """The value of a Constant or plain number, else None."""
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return float(obj)
    if isinstance(obj, Constant):
        return obj.value
    return None


def numeric_derivative(f, x, lower=-np.inf, upper=np.inf):
    """Five-point central difference, shrinking the step near domain ends."""
    x = np.asarray(x, dtype=float)
    h = 1e-3 * np.maximum(1.0, np.abs(x))
    room = np.minimum(x - lower, upper - x)
    h = np.where(np.isfinite(room), np.minimum(h, 0.25 * room), h)
    h = np.maximum(h, 1e-9 * np.maximum(1.0, np.abs(x)))
    f1 = np.asarray(f(x + h), dtype=float)
    f_1 = np.asarray(f(x - h), dtype=float)
    f2 = np.asarray(f(x + 2 * h), dtype=float)
    f_2 = np.asarray(f(x - 2 * h), dtype=float)
    return (8 * (f1 - f_1) - (f2 - f_2)) / (12 * h)


def derivative_of(f, lower=-np.inf, upper=np.inf):
    """Exact derivative when known, otherwise a numerical one."""
    if isinstance(f, Polynomial):
        d = f.deriv()
        return lambda x: d(np.asarray(x, dtype=float))
    d = getattr(f, "derivative", None)
    if d is not None:
        return d
    if isinstance(f, (int, float)):
        return lambda x: np.zeros(np.shape(x))
    return lambda x: numeric_derivative(f, x, lower, upper)

"""
Model instance for

    u_t = Δu + a u^p ∫ u^q dy - b u^m               in Ω, t > 0
    ∂u/∂ν = ∫ k(x, y, t) u^l(y, t) dy               on ∂Ω, t > 0
    u(x, 0) = u0(x)

together with the optional constant source and forcing used by the
regularised problem and by manufactured-solution checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import KernelEvaluationError, ValidationError
from .grid import normal_derivative


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValidationError(name, f"{name} must be positive, got {value!r}")


def _nonnegative(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
        raise ValidationError(name, f"{name} must be nonnegative, got {value!r}")


# --------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Interval:
    L: float = 1.0
    kind = "interval"

    def __post_init__(self):
        _positive("domain.L", self.L)

    @property
    def lengths(self):
        return (float(self.L),)

    @property
    def volume(self):
        return float(self.L)

    @property
    def boundary_measure(self):
        # counting measure on {0, L}
        return 2.0


@dataclass(frozen=True)
class Rectangle:
    Lx: float = 1.0
    Ly: float = 1.0
    kind = "rectangle"

    def __post_init__(self):
        _positive("domain.Lx", self.Lx)
        _positive("domain.Ly", self.Ly)

    @property
    def lengths(self):
        return (float(self.Lx), float(self.Ly))

    @property
    def volume(self):
        return float(self.Lx * self.Ly)

    @property
    def boundary_measure(self):
        return 2.0 * (self.Lx + self.Ly)


# --------------------------------------------------------------------------
# boundary kernels
#
# Every kernel provides ``sampler(grid)`` returning a function of t that
# yields the (n_boundary, n_nodes) matrix k(x_b, y_j, t).


@dataclass(frozen=True)
class ZeroKernel:
    kind = "zero"
    is_zero = True
    time_dependent = False

    def sampler(self, grid):
        M = np.zeros((grid.n_boundary, grid.n_nodes))
        return lambda t: M

    def upper_bound(self, grid, T):
        return 0.0


@dataclass(frozen=True)
class ConstantKernel:
    kappa: float = 1.0
    kind = "constant"
    time_dependent = False

    def __post_init__(self):
        _nonnegative("kernel.kappa", self.kappa)

    @property
    def is_zero(self):
        return self.kappa == 0

    def sampler(self, grid):
        M = np.full((grid.n_boundary, grid.n_nodes), float(self.kappa))
        return lambda t: M

    def upper_bound(self, grid, T):
        return float(self.kappa)


class ConstantProfile:
    def __init__(self, value):
        self.value = float(value)

    def __call__(self, pts):
        return np.full(len(pts), self.value)


class GaussianProfile:
    """exp(-decay |y|^2); equals 1 everywhere for decay = 0."""

    def __init__(self, decay):
        self.decay = float(decay)

    def __call__(self, pts):
        return np.exp(-self.decay * np.sum(np.asarray(pts) ** 2, axis=1))


class ExponentialTime:
    def __init__(self, rate):
        self.rate = float(rate)

    def __call__(self, t):
        return math.exp(-self.rate * t)


@dataclass(frozen=True, eq=False)
class SeparableKernel:
    """
    k(x, y, t) = g(x) h(y) tau(t).

    ``g`` and ``h`` take an ``(npts, dim)`` coordinate array and return
    ``npts`` values; ``tau`` takes a scalar time. Instances built with
    :meth:`parametric` remember their parameters and can be serialised.
    """

    g: Callable
    h: Callable
    tau: Callable
    params: Optional[tuple] = None
    kind = "separable"
    is_zero = False
    time_dependent = True

    @classmethod
    def parametric(cls, kappa=1.0, time_rate=0.0, volume_decay=0.0):
        _nonnegative("kernel.kappa", kappa)
        return cls(
            g=ConstantProfile(kappa),
            h=GaussianProfile(volume_decay),
            tau=ExponentialTime(time_rate),
            params=(float(kappa), float(time_rate), float(volume_decay)),
        )

    def __eq__(self, other):
        if not isinstance(other, SeparableKernel):
            return NotImplemented
        if self.params is not None or other.params is not None:
            return self.params == other.params
        return (self.g, self.h, self.tau) == (other.g, other.h, other.tau)

    def __hash__(self):
        return hash(self.params) if self.params is not None else id(self)

    def sampler(self, grid):
        gb = np.asarray(self.g(grid.boundary_points()), dtype=float)
        hv = np.asarray(self.h(grid.points()), dtype=float)
        if np.any(gb < 0) or np.any(hv < 0):
            raise ValidationError("kernel", "separable profiles must be nonnegative")
        base = np.outer(gb, hv)

        def sample(t):
            s = float(self.tau(t))
            if not math.isfinite(s) or s < 0:
                raise KernelEvaluationError(f"time profile invalid at t={t}: {s}")
            return base * s

        return sample

    def upper_bound(self, grid, T):
        sample = self.sampler(grid)
        return max(float(sample(t).max()) for t in np.linspace(0.0, T, 201))


@dataclass(frozen=True, eq=False)
class TabulatedKernel:
    """
    Samples on (time, boundary node, volume node), linear in time.

    The sample array must match the grid it is used with; evaluation
    outside ``[times[0], times[-1]]`` raises :class:`KernelEvaluationError`.
    """

    times: np.ndarray
    values: np.ndarray
    kind = "tabulated"
    is_zero = False
    time_dependent = True

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or values.ndim != 3 or values.shape[0] != times.size:
            raise ValidationError("kernel.values", "expected shape (n_times, n_boundary, n_nodes)")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValidationError("kernel.times", "times must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValidationError("kernel.values", "kernel samples must be finite and nonnegative")

    def __eq__(self, other):
        if not isinstance(other, TabulatedKernel):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(
            self.values, other.values
        )

    def __hash__(self):
        return id(self)

    def sampler(self, grid):
        if self.values.shape[1:] != (grid.n_boundary, grid.n_nodes):
            raise KernelEvaluationError(
                f"tabulated kernel shape {self.values.shape[1:]} does not match "
                f"grid ({grid.n_boundary}, {grid.n_nodes})"
            )
        times, values = self.times, self.values

        def sample(t):
            if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
                raise KernelEvaluationError(
                    f"t={t} outside tabulated range [{times[0]}, {times[-1]}]"
                )
            if times.size == 1:
                return values[0]
            k = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2))
            theta = (t - times[k]) / (times[k + 1] - times[k])
            theta = min(max(theta, 0.0), 1.0)
            return (1.0 - theta) * values[k] + theta * values[k + 1]

        return sample

    def upper_bound(self, grid, T):
        # piecewise linear in t: the max sits at a knot or at T
        sample = self.sampler(grid)
        ts = [t for t in self.times if t <= T] + [min(T, self.times[-1])]
        return max(float(sample(t).max()) for t in ts)


# --------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class ConstantInitial:
    A: float = 1.0
    shift: float = 0.0
    kind = "constant"

    def __post_init__(self):
        _nonnegative("initial.A", self.A)

    def realize(self, grid):
        return np.full(grid.shape, float(self.A) + self.shift)

    @property
    def amplitude_like(self):
        return self.A


@dataclass(frozen=True)
class BumpInitial:
    """
    ``baseline + amplitude * cos^2(pi r / (2 width))`` for ``r < width``,
    ``baseline`` elsewhere; ``r`` is the distance to ``center``. The
    profile is C^1. A negative amplitude gives a dip, which is how data
    with positive outward slope are built; realised values must stay
    nonnegative.
    """

    amplitude: float = 1.0
    center: tuple = (0.5,)
    width: float = 0.25
    baseline: float = 0.0
    shift: float = 0.0
    kind = "bump"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        _positive("initial.width", self.width)
        _nonnegative("initial.baseline", self.baseline)
        if not math.isfinite(self.amplitude):
            raise ValidationError("initial.amplitude", "must be finite")

    def profile(self, *coords):
        if len(self.center) != len(coords):
            raise ValidationError("initial.center", f"expected {len(coords)} coordinates")
        r2 = sum((c - x0) ** 2 for c, x0 in zip(coords, self.center))
        r = np.sqrt(r2)
        inside = r < self.width
        bump = np.where(inside, np.cos(0.5 * np.pi * np.minimum(r, self.width) / self.width) ** 2, 0.0)
        return self.baseline + self.amplitude * bump + self.shift

    def realize(self, grid):
        u0 = np.asarray(self.profile(*grid.coords), dtype=float)
        if np.any(u0 < 0):
            raise ValidationError("initial", "bump data must be nonnegative on the grid")
        return u0

    @property
    def amplitude_like(self):
        return self.amplitude


@dataclass(frozen=True, eq=False)
class TabulatedInitial:
    values: np.ndarray
    shift: float = 0.0
    kind = "tabulated"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValidationError("initial.values", "initial data must be finite and nonnegative")

    def __eq__(self, other):
        if not isinstance(other, TabulatedInitial):
            return NotImplemented
        return self.shift == other.shift and np.array_equal(self.values, other.values)

    def __hash__(self):
        return id(self)

    def realize(self, grid):
        if self.values.shape != grid.shape:
            raise ValidationError(
                "initial.values", f"shape {self.values.shape} does not match grid {grid.shape}"
            )
        return self.values + self.shift

    @property
    def amplitude_like(self):
        return float(self.values.max())


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """
    Coefficients, exponents, domain, kernel and initial data.

    ``source`` is a constant added to the reaction (the regularised
    problem uses ``b eps^m``). ``forcing(t, grid) -> array`` is a
    verification hook for manufactured solutions only.
    ``extensions`` admits the reduced modes ``a = 0`` or ``b = 0``.
    """

    a: float = 1.0
    b: float = 1.0
    p: float = 1.0
    q: float = 1.0
    m: float = 1.0
    l: float = 1.0
    domain: object = field(default_factory=Interval)
    kernel: object = field(default_factory=ZeroKernel)
    initial: object = field(default_factory=ConstantInitial)
    source: float = 0.0
    forcing: Optional[Callable] = None
    extensions: bool = False

    def __post_init__(self):
        for name in ("p", "q", "m", "l"):
            _positive(name, getattr(self, name))
        for name in ("a", "b"):
            value = getattr(self, name)
            _nonnegative(name, value)
            if value == 0 and not self.extensions:
                raise ValidationError(
                    name,
                    f"{name} must be positive (a, b, p, q, m, l are positive numbers); "
                    "set model.extensions = true for reduced modes",
                )
        _nonnegative("model.source", self.source)

    @property
    def volume(self):
        return self.domain.volume

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


def realize_initial(problem, grid):
    u0 = np.asarray(problem.initial.realize(grid), dtype=float)
    if np.any(u0 < 0) or not np.all(np.isfinite(u0)):
        raise ValidationError("initial", "initial data must be finite and nonnegative")
    return u0


def compatibility_residual(problem, grid):
    """
    Max over boundary nodes of ``|du0/dnu - ∫ k(x, y, 0) u0^l dy|``.

    The normal derivative is the two-point one-sided difference, so the
    residual of exactly compatible C^1 data is O(h).
    """
    u0 = realize_initial(problem, grid)
    dnu = normal_derivative(u0, grid, order=1)
    if problem.kernel.is_zero:
        flux = np.zeros(grid.n_boundary)
    else:
        K = problem.kernel.sampler(grid)(0.0)
        flux = K @ (grid.weights.ravel() * u0.ravel() ** problem.l)
    return float(np.max(np.abs(dnu - flux)))

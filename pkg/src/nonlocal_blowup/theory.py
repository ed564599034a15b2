"""
Executable versions of the comparison, global-existence and blow-up
results: regime classification, the spatially constant ODE subsolution,
the explicit global supersolution, a discrete super/subsolution checker
and the large-mass blow-up thresholds.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import PreconditionError, QuadratureError
from .grid import laplacian_interior, normal_derivative, volume_quadrature
from .problem import realize_initial
from .rhs import power

INFLATION = 1.05


class Regime(str, Enum):
    GLOBAL_ALL_DATA = "GlobalAllData"
    BLOWUP_LARGE_DATA = "BlowUpLargeData"
    THEORY_GAP = "TheoryGap"


@dataclass(frozen=True)
class RegimeLabel:
    value: Regime
    citations: tuple = ()

    def to_dict(self):
        return {"label": self.value.value, "citations": list(self.citations)}


def _r(x):
    # exponent sums such as 0.7 + 0.3 should land exactly on 1
    return round(x, 12)


def classify_regime(p, q, l, m, kbar0_positive=True):
    """Which theorem, if any, applies to the exponents ``(p, q, l, m)``."""
    for name, v in (("p", p), ("q", q), ("l", l), ("m", m)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    s = _r(p + q)
    top = _r(max(s, l))
    if top <= 1:
        return RegimeLabel(Regime.GLOBAL_ALL_DATA, ("max(p+q, l) <= 1",))
    if top < m:
        return RegimeLabel(Regime.GLOBAL_ALL_DATA, ("1 < max(p+q, l) < m",))
    ceiling = max(m, 1.0)
    fired = []
    if s > ceiling:
        fired.append("p+q > max(m, 1)")
    if l > ceiling and kbar0_positive:
        fired.append("l > max(m, 1) and kbar(0) > 0")
    if fired:
        return RegimeLabel(Regime.BLOWUP_LARGE_DATA, tuple(fired))
    if l > ceiling:
        return RegimeLabel(Regime.THEORY_GAP, ("l > max(m, 1) but kbar(0) = 0",))
    return RegimeLabel(Regime.THEORY_GAP, (f"m <= max(p+q, l) = {top:g} <= max(m, 1)",))


# --------------------------------------------------------------------------
# spatially constant ODE  f' = a|Ω| f^rho - b f^m


@dataclass(frozen=True)
class OdeComparison:
    f0: float
    equilibrium: float
    blowup_time: Optional[float]


def ode_equilibrium(a, volume, b, rho, m):
    if b == 0:
        return 0.0
    return (b / (a * volume)) ** (1.0 / (rho - m))


def _ode_pre(a, volume, b, rho, m):
    if not rho > max(m, 1.0):
        raise PreconditionError(f"need rho > max(m, 1), got rho={rho}, m={m}")
    if not (a > 0 and volume > 0 and b >= 0):
        raise PreconditionError("need a > 0, |Ω| > 0, b >= 0")


def ode_blowup_time(a, volume, b, rho, m, f0):
    """
    Blow-up time of ``f' = a|Ω| f^rho - b f^m, f(0) = f0``.

    ``t0 = ∫_{f0}^∞ df / (a|Ω| f^rho - b f^m)``. The substitution
    ``f = f0 (1 - s)^{-1/(rho-1)}`` maps it to ``s in [0, 1)`` with the
    bounded integrand
    ``f0^{1-rho} / ((rho-1) (a|Ω| - b f0^{m-rho} (1-s)^{(rho-m)/(rho-1)}))``.
    Returns ``None`` when ``f0`` does not exceed the equilibrium.
    """
    _ode_pre(a, volume, b, rho, m)
    if not f0 > ode_equilibrium(a, volume, b, rho, m):
        return None
    A = a * volume
    front = f0 ** (1.0 - rho) / (rho - 1.0)
    if b == 0:
        return float(front / A)
    c = b * f0 ** (m - rho)
    gamma = (rho - m) / (rho - 1.0)

    def g(s):
        return front / (A - c * (1.0 - s) ** gamma)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(g, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=500)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"blow-up time quadrature failed for f0={f0}: {exc}") from exc
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise QuadratureError(f"blow-up time quadrature inaccurate: value={val}, error={err}")
    return float(val)


def ode_comparison(a, volume, b, rho, m, f0):
    return OdeComparison(
        f0=float(f0),
        equilibrium=ode_equilibrium(a, volume, b, rho, m),
        blowup_time=ode_blowup_time(a, volume, b, rho, m, f0),
    )


def ode_solution(a, volume, b, rho, m, f0, t_max):
    """Dense high-accuracy solution of the comparison ODE on ``[0, t_max]``."""

    def rhs(t, y):
        f = max(y[0], 0.0)
        return [a * volume * f**rho - b * f**m]

    sol = integrate.solve_ivp(
        rhs, (0.0, t_max), [float(f0)], method="DOP853", rtol=1e-12, atol=1e-14,
        dense_output=True,
    )
    if sol.status != 0:
        raise QuadratureError(f"ODE integration stopped early: {sol.message}")
    return lambda t: float(sol.sol(t)[0])


# --------------------------------------------------------------------------
# explicit supersolution  C exp(mu t) / (c phi + 1)


def dirichlet_eigenpair(grid):
    """Closed-form first Dirichlet eigenpair on the grid's box."""
    coords = grid.coords
    Ls = grid.lengths
    sines = [np.sin(np.pi * x / L) for x, L in zip(coords, Ls)]
    phi = np.prod(sines, axis=0)
    lam = float(sum((np.pi / L) ** 2 for L in Ls))
    grads = []
    for k, (x, L) in enumerate(zip(coords, Ls)):
        d = (np.pi / L) * np.cos(np.pi * x / L)
        for j, s in enumerate(sines):
            if j != k:
                d = d * s
        grads.append(d)
    grad2 = sum(g**2 for g in grads)
    # outward derivative: gradient dotted with the node normal
    pts_grad = np.stack([g.ravel()[grid.boundary_index] for g in grads], axis=1)
    dnu = np.sum(pts_grad * grid.boundary_normals, axis=1)
    return lam, phi, grad2, dnu


@dataclass
class SupersolutionParams:
    lambda1: float
    K: float
    c: float
    C: float
    mu: float
    phi_weight_integral: float
    min_outward_slope: float
    sup_gradient_term: float
    inflation: float = INFLATION


class Supersolution:
    """Field generator ``t -> C exp(mu t) / (c phi + 1)`` on a grid."""

    def __init__(self, params, grid):
        self.params = params
        self.grid = grid
        _, self.phi, _, _ = dirichlet_eigenpair(grid)

    def field(self, t, grid=None):
        P = self.params
        phi = self.phi if grid is None else dirichlet_eigenpair(grid)[1]
        return P.C * math.exp(P.mu * t) / (P.c * phi + 1.0)

    def __call__(self, t):
        return self.field(t)


def build_supersolution(problem, grid, T):
    """
    Constants ``c, C, mu`` of the global supersolution, evaluated on the
    grid and inflated by 5 %.

    Covers the branch ``max(p+q, l) <= 1``. On a rectangle the outward
    slope of the eigenfunction vanishes at the corners; corners are left
    out of the slope minimum and are reported separately by the checker.
    """
    s = _r(problem.p + problem.q)
    if _r(max(s, problem.l)) > 1:
        raise PreconditionError(
            "explicit supersolution covers only the branch max(p+q, l) <= 1 "
            f"(got p+q={s:g}, l={problem.l:g})"
        )
    lam, phi, grad2, dnu = dirichlet_eigenpair(grid)
    slope = -dnu[~grid.boundary_corner]
    min_slope = float(slope.min())
    if not min_slope > 0:
        raise PreconditionError("eigenfunction outward slope vanishes on the grid boundary")
    K = float(problem.kernel.upper_bound(grid, T))
    I = volume_quadrature((phi + 1.0) ** (-problem.l), grid)
    c = INFLATION * max(K * I / min_slope, 1.0)
    u0 = realize_initial(problem, grid)
    C = INFLATION * max(float(np.max((c * phi + 1.0) * u0)), 1.0)
    G = float(np.max(grad2 / (c * phi + 1.0) ** 2))
    mu = INFLATION * (lam + 2.0 * c**2 * G + problem.a * problem.volume)
    params = SupersolutionParams(
        lambda1=lam, K=K, c=c, C=C, mu=mu,
        phi_weight_integral=I, min_outward_slope=min_slope, sup_gradient_term=G,
    )
    return Supersolution(params, grid)


# --------------------------------------------------------------------------
# discrete super/subsolution inequalities


@dataclass
class SuperSubReport:
    kind: str
    passed: bool
    tolerance: float
    worst_interior: float
    worst_boundary: float
    worst_initial: float
    worst_interior_time: float
    worst_boundary_time: float
    worst_corner: Optional[float]
    sample_times: list
    constants: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _time_derivative(candidate, t):
    d = 1e-6 * max(1.0, t)
    if t - d >= 0:
        return (candidate(t + d) - candidate(t - d)) / (2.0 * d)
    return (-3.0 * candidate(t) + 4.0 * candidate(t + d) - candidate(t + 2.0 * d)) / (2.0 * d)


def check_supersub(candidate, problem, grid, times, kind="super", rel_tol=1e-6, constants=None):
    """
    Evaluate the three defining inequalities of a super- or subsolution on
    the grid.

    Interior: ``u_t - Δu - a u^p ∫u^q + b u^m - source`` on interior nodes.
    Boundary: ``∂u/∂ν - ∫ k u^l`` with a second-order one-sided normal
    derivative. Initial: ``u(·, 0) - u0``. Residuals are divided by
    ``1 + sup u(·, t)`` and negated for ``kind="sub"``, so in both cases
    the candidate passes iff every worst residual is ``>= -rel_tol``.
    Rectangle corners are reported in ``worst_corner`` but do not decide
    the verdict.
    """
    if kind not in ("super", "sub"):
        raise ValueError("kind must be 'super' or 'sub'")
    sign = 1.0 if kind == "super" else -1.0
    P = problem
    sample = P.kernel.sampler(grid)
    w = grid.weights.ravel()
    corners = grid.boundary_corner

    worst = {"interior": (math.inf, None), "boundary": (math.inf, None)}
    worst_corner = math.inf if corners.any() else None
    for t in times:
        t = float(t)
        U = np.asarray(candidate(t), dtype=float)
        scale = 1.0 + float(np.max(np.abs(U)))
        Ut = _time_derivative(candidate, t)
        S = volume_quadrature(power(U, P.q), grid)
        lap = laplacian_interior(U, grid)
        inner = grid.interior_mask
        R = Ut[inner] - lap.ravel() - P.a * power(U[inner], P.p) * S + P.b * power(U[inner], P.m) - P.source
        r = sign * float(R.min()) / scale if R.size else math.inf
        if r < worst["interior"][0]:
            worst["interior"] = (r, t)

        flux = sample(t) @ (w * power(U.ravel(), P.l))
        B = sign * (normal_derivative(U, grid, order=2) - flux) / scale
        edge = B[~corners]
        rb = float(edge.min())
        if rb < worst["boundary"][0]:
            worst["boundary"] = (rb, t)
        if worst_corner is not None:
            worst_corner = min(worst_corner, float(B[corners].min()))

    U0 = np.asarray(candidate(0.0), dtype=float)
    u0 = realize_initial(P, grid)
    r0 = sign * float(np.min(U0 - u0)) / (1.0 + float(np.max(np.abs(U0))))

    passed = all(v >= -rel_tol for v in (worst["interior"][0], worst["boundary"][0], r0))
    return SuperSubReport(
        kind=kind,
        passed=bool(passed),
        tolerance=rel_tol,
        worst_interior=worst["interior"][0],
        worst_boundary=worst["boundary"][0],
        worst_initial=r0,
        worst_interior_time=worst["interior"][1],
        worst_boundary_time=worst["boundary"][1],
        worst_corner=worst_corner,
        sample_times=[float(t) for t in times],
        constants=dict(constants or {}),
    )


# --------------------------------------------------------------------------
# mass thresholds for the l > max(m, 1) branch


@dataclass
class ThresholdReport:
    case: str
    kbar0: float
    k0: float
    T0: float
    volume: float
    V0: float
    bounds: dict
    met: bool
    l: float
    m: float
    b: float

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def kernel_lower_profile(problem, grid, times):
    """``inf_y ∫_∂Ω k(x, y, t) dS_x`` at each time (min over volume nodes)."""
    sample = problem.kernel.sampler(grid)
    wb = grid.boundary_weights
    return np.array([float(np.min(wb @ sample(float(t)))) for t in times])


def mass_thresholds(problem, grid, T0, n_times=101):
    """
    Lower bounds on ``V(0) = ∫ u0`` that force blow-up no later than ``T0``.

    For ``m > 1`` the pair of bounds is ``{(m-1)|Ω|^{-m(l-1)/l} T0}^{-1/(m-1)}``
    and ``k0^{-1/(l-m)} (b|Ω|^{(l-m)/l} + 1)^{1/(l-m)} |Ω|^{(l-1)/l}`` (strict).
    For ``m <= 1`` it is ``max{1, the latter}`` and
    ``{k0|Ω|^{1-l} / (b|Ω|^{1-m}) [1 - exp(-b(l-1)|Ω|^{1-m} T0)]}^{-1/(l-1)}``.
    ``k0`` is the minimum of the kernel lower profile on ``[0, T0]``; when
    the profile stops being positive, ``T0`` is shortened to the last
    positive sample.
    """
    l, m, b = problem.l, problem.m, problem.b
    if not l > max(m, 1.0):
        raise PreconditionError(f"mass thresholds need l > max(m, 1), got l={l}, m={m}")
    if not T0 > 0:
        raise PreconditionError("T0 must be positive")
    times = np.linspace(0.0, T0, n_times) if problem.kernel.time_dependent else np.array([0.0])
    kbar = kernel_lower_profile(problem, grid, times)
    if not kbar[0] > 0:
        raise PreconditionError("kbar(0) > 0 is required: inf_y ∫ k(x, y, 0) dS_x vanishes")
    bad = np.flatnonzero(kbar <= 0)
    if bad.size:
        T0 = float(times[bad[0] - 1])
        kbar = kbar[: bad[0]]
    k0 = float(kbar.min())
    vol = problem.volume
    V0 = volume_quadrature(realize_initial(problem, grid), grid)

    mass_bound = k0 ** (-1.0 / (l - m)) * (b * vol ** ((l - m) / l) + 1.0) ** (1.0 / (l - m)) * vol ** ((l - 1.0) / l)
    if m > 1:
        case = "m>1"
        time_bound = ((m - 1.0) * vol ** (-m * (l - 1.0) / l) * T0) ** (-1.0 / (m - 1.0))
        bounds = {"time_bound": time_bound, "mass_bound": mass_bound}
        met = V0 >= time_bound and V0 > mass_bound
    else:
        case = "m<=1"
        floor_bound = max(1.0, mass_bound)
        if b > 0:
            rate = b * vol ** (1.0 - m)
            inner = k0 * vol ** (1.0 - l) / rate * (1.0 - math.exp(-rate * (l - 1.0) * T0))
        else:
            inner = k0 * vol ** (1.0 - l) * (l - 1.0) * T0
        time_bound = inner ** (-1.0 / (l - 1.0))
        bounds = {"floor_bound": floor_bound, "time_bound": time_bound, "mass_bound": mass_bound}
        met = V0 >= floor_bound and V0 >= time_bound
    return ThresholdReport(
        case=case, kbar0=float(kbar[0]), k0=k0, T0=float(T0), volume=vol, V0=float(V0),
        bounds={k: float(v) for k, v in bounds.items()}, met=bool(met), l=l, m=m, b=b,
    )

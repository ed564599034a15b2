"""
Explicit adaptive time stepping, blow-up detection and run diagnostics.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .grid import make_grid, volume_quadrature
from .problem import compatibility_residual, realize_initial
from .rhs import RhsContext, balance_rate, rhs_eval

log = logging.getLogger(__name__)

GLOBAL = "Global"
BLOWUP = "BlowUp"
INCONCLUSIVE = "Inconclusive"

# trailing records that must increase before dt_min counts as blow-up
BLOWUP_WINDOW = 8
FIT_EXPONENT_GUARD = 1.1


@dataclass(frozen=True)
class SolverConfig:
    n: int = 51
    cfl_safety: float = 0.4
    reaction_safety: float = 0.1
    T_end: float = 1.0
    U_max: float = 1e8
    dt_min: float = 1e-14
    record_stride: int = 10
    record_dt: Optional[float] = None
    scheme: str = "rk4"
    max_steps: int = 5_000_000

    def __post_init__(self):
        object.__setattr__(self, "scheme", str(self.scheme).lower())
        if int(self.n) != self.n or self.n < 3:
            raise ValidationError("solver.n", f"need an integer >= 3, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("cfl_safety", "reaction_safety"):
            v = getattr(self, name)
            if not (0 < v <= 1):
                raise ValidationError(f"solver.{name}", f"must lie in (0, 1], got {v!r}")
        for name in ("T_end", "U_max", "dt_min"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"solver.{name}", f"must be positive, got {v!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 0:
            raise ValidationError("solver.record_stride", "must be a nonnegative integer")
        object.__setattr__(self, "record_stride", int(self.record_stride))
        if self.record_dt is not None and not (self.record_dt > 0):
            raise ValidationError("solver.record_dt", "must be positive")
        if self.record_stride == 0 and self.record_dt is None:
            raise ValidationError("solver.record_stride", "set record_stride > 0 or record_dt")
        if self.scheme not in ("euler", "rk4"):
            raise ValidationError("solver.scheme", f"unknown scheme {self.scheme!r}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValidationError("solver.max_steps", "must be a positive integer")
        object.__setattr__(self, "max_steps", int(self.max_steps))


@dataclass
class Record:
    t: float
    sup_u: float
    min_u: float
    V: float
    mass_residual: float
    dt: float
    rate: float  # semi-discrete d/dt ∫u at this state
    step: int


@dataclass
class RunResult:
    status: str
    T_reached: float
    records: list
    final: np.ndarray
    grid: object
    clip_counter: int = 0
    steps: int = 0
    blowup_time_estimate: Optional[float] = None
    blowup_time_uncertainty: Optional[float] = None
    fields: Optional[list] = None
    compatibility_residual: float = 0.0
    config_hash: str = ""
    message: str = ""

    @property
    def times(self):
        return np.array([r.t for r in self.records])

    @property
    def sups(self):
        return np.array([r.sup_u for r in self.records])

    def field_at(self, t):
        if self.fields is None:
            raise ValueError("run was made without keep_fields=True")
        for r, f in zip(self.records, self.fields):
            if r.t == t:
                return f
        raise KeyError(t)

    def max_mass_residual(self):
        res = [r.mass_residual for r in self.records[1:]]
        return max(res) if res else 0.0

    def summary(self):
        return {
            "status": self.status,
            "T_reached": self.T_reached,
            "blowup_time_estimate": self.blowup_time_estimate,
            "blowup_time_uncertainty": self.blowup_time_uncertainty,
            "clip_counter": self.clip_counter,
            "config_hash": self.config_hash,
        }


class NonFiniteStep(ArithmeticError):
    """A time step produced inf or nan."""


def stable_dt(u, ctx, config, t=0.0):
    """
    Step bound from explicit diffusion and the local reaction stiffness.

    ``min(cfl h^2 / (2d), reaction_safety / lam)`` where ``lam`` sums the
    growth rates of the nonlocal reaction, the absorption and the boundary
    flux at the current sup norm (at least 1).
    """
    P = ctx.problem
    grid = ctx.grid
    dt = config.cfl_safety * grid.h_min**2 / (2.0 * grid.dim)
    M = max(float(np.max(u)), 1.0)
    vol = grid.volume
    lam = 0.0
    if P.a:
        lam += P.a * (P.p + P.q) * M ** max(P.p + P.q - 1.0, 0.0) * max(vol, 1.0)
    if P.b:
        lam += P.b * P.m * M ** max(P.m - 1.0, 0.0)
    K = ctx.kernel_sup(t)
    if K:
        lam += P.l * K * vol * M ** max(P.l - 1.0, 0.0)
    if lam > 0:
        dt = min(dt, config.reaction_safety / lam)
    return dt


def step(u, t, dt, ctx, scheme="rk4"):
    """
    One explicit step followed by clipping of negative values.

    Returns ``(new_field, n_clipped)``. Raises :class:`NonFiniteStep` when
    the update is not finite; the driver treats that as a blow-up signal.
    """
    if scheme == "euler":
        new = u + dt * rhs_eval(t, u, ctx)
    elif scheme == "rk4":
        k1 = rhs_eval(t, u, ctx)
        k2 = rhs_eval(t + 0.5 * dt, u + 0.5 * dt * k1, ctx)
        k3 = rhs_eval(t + 0.5 * dt, u + 0.5 * dt * k2, ctx)
        k4 = rhs_eval(t + dt, u + dt * k3, ctx)
        new = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not np.all(np.isfinite(new)):
        raise NonFiniteStep(f"non-finite state after step at t={t}, dt={dt}")
    neg = new < 0
    n_clipped = int(np.count_nonzero(neg))
    if n_clipped:
        new = np.where(neg, 0.0, new)
    return new, n_clipped


def fit_exponent(problem):
    return max(problem.p + problem.q, problem.m, problem.l, FIT_EXPONENT_GUARD)


def detect_blowup(times, sups, rho, min_records=BLOWUP_WINDOW, max_records=16):
    """
    Extrapolate the blow-up time from a trajectory tail.

    Fits ``sup^{-(rho-1)}`` linearly against ``t`` on the trailing run of
    strictly increasing sup values (at most ``max_records`` of them) and
    returns ``(T_b, uncertainty)`` where ``T_b`` is the zero of the fitted
    line and the uncertainty is the delta-method standard error from the
    fit residuals. Returns ``None`` when fewer than ``min_records`` trailing
    records increase or the fitted line does not decrease.
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(sups, dtype=float)
    if t.size < min_records:
        return None
    k = s.size - 1
    while k > 0 and s[k - 1] < s[k]:
        k -= 1
    t, s = t[k:], s[k:]
    if t.size < min_records or np.any(s <= 0):
        return None
    t, s = t[-max_records:], s[-max_records:]
    y = s ** (-(rho - 1.0))
    tm = t.mean()
    tc = t - tm
    sxx = float(np.dot(tc, tc))
    if sxx == 0:
        return None
    c1 = float(np.dot(tc, y - y.mean())) / sxx
    c0 = float(y.mean())
    if not c1 < 0:
        return None
    T_b = tm - c0 / c1
    n = t.size
    resid = y - (c0 + c1 * tc)
    s2 = float(np.dot(resid, resid)) / max(n - 2, 1)
    var = s2 / n / c1**2 + (c0**2 / c1**4) * s2 / sxx
    return float(T_b), float(math.sqrt(var))


def mass_balance_residual(prev, curr):
    """
    ``|ΔV/Δt - rate|`` between two records, the rate being the mean of
    the stored balance integrals at both ends (boundary flux + nonlocal
    reaction - absorption + source/forcing).
    """
    dt = curr.t - prev.t
    if dt <= 0:
        return 0.0
    return abs((curr.V - prev.V) / dt - 0.5 * (curr.rate + prev.rate))


def _increasing(values):
    v = np.asarray(values)
    return v.size >= 2 and bool(np.all(np.diff(v) > 0))


def solve(problem, config, keep_fields=False):
    """
    Integrate from ``t = 0`` until ``T_end`` or a blow-up verdict.

    Blow-up is declared when ``sup u >= U_max``, or when the stable step
    falls to ``dt_min`` while the sup norm increased over the last
    ``BLOWUP_WINDOW`` records. A step that returns non-finite values is
    retried with half the step.
    """
    from .config import config_hash

    grid = make_grid(problem.domain, config.n)
    ctx = RhsContext(problem, grid)
    u = realize_initial(problem, grid)
    sup0 = float(u.max())
    if not config.U_max > sup0:
        raise ValidationError("solver.U_max", f"must exceed initial sup {sup0:g}")
    dt0 = stable_dt(u, ctx, config, 0.0)
    if not config.dt_min < dt0:
        raise ValidationError("solver.dt_min", f"must be below the initial step {dt0:g}")

    compat = compatibility_residual(problem, grid)
    if compat > 10.0 * grid.h_min * (1.0 + sup0):
        log.warning("initial data violate the flux compatibility condition (residual %.3g)", compat)

    records = []
    fields = [] if keep_fields else None

    def record(t, u, dt, steps):
        rate = balance_rate(t, u, ctx)["total"]
        rec = Record(
            t=t,
            sup_u=float(u.max()),
            min_u=float(u.min()),
            V=volume_quadrature(u, grid),
            mass_residual=0.0,
            dt=dt,
            rate=rate,
            step=steps,
        )
        if records:
            rec.mass_residual = mass_balance_residual(records[-1], rec)
        records.append(rec)
        if keep_fields:
            fields.append(u.copy())

    def still_rising(current_sup):
        sups = [r.sup_u for r in records[-BLOWUP_WINDOW:]]
        if records and current_sup != records[-1].sup_u:
            sups.append(current_sup)
        return len(sups) >= BLOWUP_WINDOW and _increasing(sups)

    t = 0.0
    steps = 0
    clips = 0
    dt = 0.0
    status = None
    message = ""
    n_rec = 1
    record(t, u, 0.0, 0)

    while status is None:
        if t >= config.T_end:
            status = GLOBAL
            break
        if steps >= config.max_steps:
            status, message = INCONCLUSIVE, "step budget exhausted"
            break

        dt = stable_dt(u, ctx, config, t)
        if dt <= config.dt_min:
            status = BLOWUP if still_rising(float(u.max())) else INCONCLUSIVE
            message = "time step reached dt_min"
            break

        t_next = t + dt
        land = None
        if config.record_dt is not None:
            t_rec = n_rec * config.record_dt
            if t_next >= t_rec * (1 - 1e-12):
                t_next, land = t_rec, "record"
        if t_next >= config.T_end * (1 - 1e-12):
            t_next, land = config.T_end, "end"
        dt = t_next - t

        while True:
            try:
                new, n_clipped = step(u, t, dt, ctx, config.scheme)
                break
            except NonFiniteStep:
                dt *= 0.5
                t_next, land = t + dt, None
                if dt <= config.dt_min:
                    new = None
                    break
        if new is None:
            status = BLOWUP if still_rising(float(u.max())) else INCONCLUSIVE
            message = "non-finite update down to dt_min"
            break

        u = new
        clips += n_clipped
        t = t_next
        steps += 1
        sup = float(u.max())

        if sup >= config.U_max:
            record(t, u, dt, steps)
            status, message = BLOWUP, "sup u crossed U_max"
            break
        due = land is not None
        if land == "record" or (config.record_dt is not None and t >= n_rec * config.record_dt):
            n_rec += 1
        if config.record_stride and steps % config.record_stride == 0:
            due = True
        if due:
            record(t, u, dt, steps)

    if records[-1].t != t or records[-1].step != steps:
        record(t, u, dt, steps)

    result = RunResult(
        status=status,
        T_reached=t,
        records=records,
        final=u,
        grid=grid,
        clip_counter=clips,
        steps=steps,
        fields=fields,
        compatibility_residual=compat,
        message=message,
    )
    if status == BLOWUP:
        est = detect_blowup(result.times, result.sups, fit_exponent(problem))
        if est is not None:
            result.blowup_time_estimate, result.blowup_time_uncertainty = est
    try:
        result.config_hash = config_hash(problem, config)
    except ValueError:
        result.config_hash = ""
    return result


# --------------------------------------------------------------------------
# persistence

TRAJECTORY_COLUMNS = ("t", "sup_u", "min_u", "V", "mass_residual", "dt")


def write_trajectory_csv(path, result):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for r in result.records:
            w.writerow([repr(float(getattr(r, c))) for c in TRAJECTORY_COLUMNS])


def read_trajectory_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) for r in rows]) for c in TRAJECTORY_COLUMNS}


def write_summary_json(path, result, extra=None):
    data = result.summary()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")

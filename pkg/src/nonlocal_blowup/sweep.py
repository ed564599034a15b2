"""
Parameter sweeps that compare numeric verdicts with the theorems.

A sweep document is a configuration document plus ``sweep.*`` keys::

    sweep.p = [0.25, 0.75, 1.0, 1.5]
    sweep.l = [0.5, 1.25, 1.5, 2.5]
    sweep.budget = 64

Axes may be any of ``p, q, l, m, a, b, u0_amp``; the grid of points is
their Cartesian product.
"""

from __future__ import annotations

import copy
import csv
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .config import build_specs, parse_document
from .errors import ConfigError, NonlocalBlowupError
from .grid import make_grid
from .integrate import BLOWUP, GLOBAL, write_summary_json, write_trajectory_csv
from .integrate import solve
from .theory import Regime, classify_regime, kernel_lower_profile, mass_thresholds, ode_blowup_time

AXES = ("p", "q", "l", "m", "a", "b", "u0_amp")
COLUMNS = ("p", "q", "l", "m", "a", "b", "u0_amp", "theory_label", "numeric_status", "T_est", "agreement")
# blow-up is only asserted when the theory predicts it well inside the horizon
HORIZON_MARGIN = 0.9


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    base: dict
    budget: int = 256

    def __post_init__(self):
        if not self.axes:
            raise ConfigError("sweep needs at least one axis", key="sweep")
        for name, values in self.axes:
            if name not in AXES:
                raise ConfigError(f"unknown sweep axis {name!r}", key=f"sweep.{name}")
            if not values:
                raise ConfigError("empty value list", key=f"sweep.{name}")
        if self.n_points > self.budget:
            raise ConfigError(f"{self.n_points} points exceed budget {self.budget}", key="sweep.budget")

    @property
    def n_points(self):
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n

    def points(self):
        names = [a for a, _ in self.axes]
        for combo in itertools.product(*(v for _, v in self.axes)):
            yield dict(zip(names, combo))


def parse_sweep(text):
    doc = parse_document(text)
    raw = doc.pop("sweep", None)
    if not isinstance(raw, dict):
        raise ConfigError("sweep document needs sweep.* keys", key="sweep")
    budget = raw.pop("budget", 256)
    axes = []
    for name, values in raw.items():
        if not isinstance(values, list):
            values = [values]
        axes.append((name, tuple(float(v) for v in values)))
    spec = SweepSpec(axes=tuple(axes), base=doc, budget=int(budget))
    build_specs(apply_point(doc, next(spec.points())), text)  # validate base eagerly
    return spec


def apply_point(base, point):
    doc = copy.deepcopy(base)
    for name, value in point.items():
        if name == "u0_amp":
            ini = doc.setdefault("initial", {})
            key = "amplitude" if ini.get("kind", "constant") == "bump" else "A"
            ini[key] = value
        else:
            doc.setdefault("model", {})[name] = value
    return doc


def expected_status(problem, solver, grid, label):
    """
    What the theorems license for this point: ``Global``, ``BlowUp`` or
    ``None`` (no assertion).

    Blow-up is expected only when the data clear a threshold that forces
    blow-up before ``HORIZON_MARGIN * T_end``: the constant subsolution
    for ``p+q > max(m, 1)``, or the mass bounds for ``l > max(m, 1)``.
    """
    if label.value == Regime.GLOBAL_ALL_DATA:
        return GLOBAL
    if label.value != Regime.BLOWUP_LARGE_DATA:
        return None
    P = problem
    horizon = HORIZON_MARGIN * solver.T_end
    rho = P.p + P.q
    if rho > max(P.m, 1.0) and P.a > 0:
        from .problem import realize_initial

        f0 = float(realize_initial(P, grid).min())
        t0 = ode_blowup_time(P.a, P.volume, P.b, rho, P.m, f0) if f0 > 0 else None
        if t0 is not None and t0 <= horizon:
            return BLOWUP
    if P.l > max(P.m, 1.0):
        try:
            if mass_thresholds(P, grid, horizon).met:
                return BLOWUP
        except NonlocalBlowupError:
            pass
    return None


def evaluate_point(base, point, out_dir=None):
    doc = apply_point(base, point)
    problem, solver = build_specs(doc)
    grid = make_grid(problem.domain, solver.n)
    kbar0 = 0.0 if problem.kernel.is_zero else float(kernel_lower_profile(problem, grid, [0.0])[0])
    label = classify_regime(problem.p, problem.q, problem.l, problem.m, kbar0 > 0)
    expect = expected_status(problem, solver, grid, label)
    result = solve(problem, solver)
    if expect is None:
        agreement = "n/a"
    else:
        agreement = "yes" if result.status == expect else "no"
    row = {
        "p": problem.p, "q": problem.q, "l": problem.l, "m": problem.m,
        "a": problem.a, "b": problem.b,
        "u0_amp": problem.initial.amplitude_like,
        "theory_label": label.value.value,
        "numeric_status": result.status,
        "T_est": result.blowup_time_estimate if result.blowup_time_estimate is not None else "",
        "agreement": agreement,
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), result)
        write_summary_json(os.path.join(out_dir, "summary.json"), result,
                           {"theory_label": row["theory_label"], "expected": expect,
                            "agreement": agreement, "point": point})
    return row


def _safe_evaluate(args):
    base, point, out_dir = args
    try:
        return evaluate_point(base, point, out_dir)
    except (NonlocalBlowupError, ValueError) as exc:
        model = apply_point(base, point).get("model", {})
        row = {k: point.get(k, model.get(k, "")) for k in COLUMNS}
        row.update(theory_label="", numeric_status="error", T_est="", agreement=f"error: {exc}")
        return row


def run_sweep(spec, out_dir=None, workers=1):
    """Evaluate every point; rows come back in point order."""
    jobs = []
    for i, point in enumerate(spec.points()):
        sub = os.path.join(out_dir, f"point_{i:03d}") if out_dir else None
        jobs.append((spec.base, point, sub))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_safe_evaluate, jobs))
    else:
        rows = [_safe_evaluate(j) for j in jobs]
    if out_dir:
        write_sweep_csv(os.path.join(out_dir, "sweep.csv"), rows)
    return rows


def write_sweep_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def disagreements(rows):
    return [r for r in rows if r["agreement"] == "no"]


def rows_json(rows):
    return json.dumps(rows, indent=2, sort_keys=True, default=str)

"""
Acceptance suite: one test per acceptance criterion. Each one logs a single
``PASS``/``FAIL`` line, echoed in the "acceptance criteria" section of the
pytest terminal summary.

Run alone with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""

import contextlib
import csv
import json
import math
import sys
import time

import numpy as np
import pytest

from nonlocal_blowup.cli import main
from nonlocal_blowup.grid import make_grid
from nonlocal_blowup.integrate import SolverConfig, solve
from nonlocal_blowup.problem import (
    BumpInitial,
    ConstantInitial,
    ConstantKernel,
    ProblemSpec,
    ZeroKernel,
)
from nonlocal_blowup.regularize import EpsilonSchedule, maximal_solution
from nonlocal_blowup.theory import build_supersolution, classify_regime, mass_thresholds

from oracles import logistic_square

LN2 = 0.6931471805599453
# ode_blowup_time(1, 1, 1, 2, 1, 2.1) from tests/oracles.py
T_ODE_21 = 0.6466271649250525


@pytest.fixture
def criterion(acceptance_log):
    @contextlib.contextmanager
    def check(number, title):
        info = {}
        start = time.perf_counter()
        try:
            yield info
        except BaseException as exc:
            detail = (str(exc).splitlines() or [type(exc).__name__])[0]
            line = f"[criterion {number:2d}] FAIL  {title}: {detail}"
            acceptance_log.append(line)
            print(line)
            raise
        detail = ", ".join(f"{k}={v}" for k, v in info.items())
        line = f"[criterion {number:2d}] PASS  {title} ({detail}; {time.perf_counter() - start:.2f}s)"
        acceptance_log.append(line)
        print(line)

    return check


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_criterion_01_ode_time(criterion, capsys):
    with criterion(1, "ode-time closed form") as info:
        t = time.perf_counter()
        code, data = run_cli(capsys, "ode-time", "--a", "1", "--omega", "1", "--b", "1",
                             "--rho", "2", "--m", "1", "--f0", "2")
        elapsed = time.perf_counter() - t
        info["t0"] = data["t0"]
        assert code == 0
        assert abs(data["t0"] - LN2) <= 1e-6, data["t0"]
        assert elapsed < 1.0, elapsed


def test_criterion_02_scalar_reduction(criterion):
    with criterion(2, "scalar reduction of the constant-data problem") as info:
        P = ProblemSpec(p=1.0, q=1.0, m=1.0, kernel=ZeroKernel(), initial=ConstantInitial(2.0))
        t = time.perf_counter()
        r = solve(P, SolverConfig(n=51, T_end=2.0, record_stride=1))
        elapsed = time.perf_counter() - t
        worst = 0.0
        for rec in r.records:
            if rec.sup_u > 100:
                break
            exact = logistic_square(rec.t, 2.0)
            worst = max(worst, abs(rec.sup_u - exact) / exact)
        info["max_rel_err"] = f"{worst:.2e}"
        info["T_est"] = r.blowup_time_estimate
        assert r.status == "BlowUp"
        assert worst <= 1e-4
        assert abs(r.blowup_time_estimate - LN2) <= 0.10 * LN2
        assert elapsed < 30.0, elapsed


def test_criterion_03_comparison(criterion):
    with criterion(3, "ordering of ordered data is preserved") as info:
        bump = dict(amplitude=1.0, center=(0.5,), width=0.3)
        A = ProblemSpec(kernel=ConstantKernel(0.5), initial=BumpInitial(**bump, baseline=0.0))
        B = A.replace(initial=BumpInitial(**bump, baseline=0.1))
        cfg = SolverConfig(n=41, T_end=1.0, record_dt=0.05)
        ra, rb = solve(A, cfg, keep_fields=True), solve(B, cfg, keep_fields=True)
        assert ra.status == rb.status == "Global"
        ta = {round(t, 12): f for t, f in zip(ra.times, ra.fields)}
        common = [(t, ta[round(t, 12)], f) for t, f in zip(rb.times, rb.fields) if round(t, 12) in ta]
        assert len(common) >= 21
        worst = max(float(np.max(fa - fb)) / (1 + float(fb.max())) for _, fa, fb in common)
        info["records"] = len(common)
        info["worst_scaled_violation"] = f"{worst:.2e}"
        assert worst <= 1e-8


def test_criterion_04_epsilon_monotonicity(criterion):
    with criterion(4, "epsilon family decreases to the maximal solution") as info:
        # bounded instance: data below the unstable equilibrium f = 1
        P = ProblemSpec(kernel=ConstantKernel(0.1), initial=ConstantInitial(0.5))
        runs, rep, _ = maximal_solution(P, EpsilonSchedule((0.1, 0.05, 0.025, 0.0125)),
                                        SolverConfig(n=41, T_end=1.0))
        d = rep.successive_sup_diffs
        info["violations"] = rep.n_violations
        info["diffs"] = [f"{x:.3e}" for x in d]
        assert rep.n_violations == 0
        assert len(d) == 3 and all(b < a for a, b in zip(d, d[1:]))


GLOBAL_PROBLEM = ProblemSpec(
    p=0.4, q=0.4, l=0.8, m=1.0, kernel=ConstantKernel(1.0),
    initial=BumpInitial(amplitude=2.0, center=(0.5,), width=0.3, baseline=0.5),
)


def test_criterion_05_global_below_supersolution(criterion):
    with criterion(5, "global run stays below the supersolution") as info:
        cfg = SolverConfig(n=41, T_end=5.0, record_dt=0.25)
        r = solve(GLOBAL_PROBLEM, cfg, keep_fields=True)
        sup = build_supersolution(GLOBAL_PROBLEM, r.grid, 5.0)
        ratio = max(float(np.max(u / sup(t))) for t, u in zip(r.times, r.fields))
        info["status"] = r.status
        info["max_u_over_bar"] = f"{ratio:.4f}"
        assert r.status == "Global" and r.T_reached == pytest.approx(5.0)
        assert len(r.fields) >= 21
        assert ratio <= 1 + 1e-6


GLOBAL_TOML = """\
model.a = 1.0
model.b = 1.0
model.p = 0.4
model.q = 0.4
model.m = 1.0
model.l = 0.8
domain.kind = "interval"
domain.L = 1.0
kernel.kind = "constant"
kernel.kappa = 1.0
initial.kind = "bump"
initial.amplitude = 2.0
initial.center = [0.5]
initial.width = 0.3
initial.baseline = 0.5
solver.n = 41
solver.T_end = 5.0
"""


def test_criterion_06_verify_super(criterion, tmp_path, capsys):
    with criterion(6, "verify-super certificate") as info:
        path = tmp_path / "global.toml"
        path.write_text(GLOBAL_TOML)
        code, data = run_cli(capsys, "--out", str(tmp_path / "v"), "verify-super", str(path),
                             "--samples", "20")
        worst = min(data["worst_interior"], data["worst_boundary"], data["worst_initial"])
        info["worst_scaled_residual"] = f"{worst:.3e}"
        assert code == 0 and data["passed"]
        assert len(data["sample_times"]) == 20
        assert worst >= -1e-6


def test_criterion_07_blowup_product_branch(criterion):
    with criterion(7, "blow-up above the ODE threshold") as info:
        P = ProblemSpec(p=1.0, q=1.0, m=1.0, kernel=ZeroKernel(),
                        initial=BumpInitial(amplitude=0.5, center=(0.5,), width=0.3, baseline=2.1))
        r = solve(P, SolverConfig(n=51, T_end=2.0))
        info["T_est"] = r.blowup_time_estimate
        info["bound"] = 1.10 * T_ODE_21
        assert r.status == "BlowUp"
        assert r.blowup_time_estimate <= 1.10 * T_ODE_21


def test_criterion_08_blowup_flux_branch(criterion):
    with criterion(8, "blow-up from the mass thresholds") as info:
        P = ProblemSpec(p=0.25, q=0.25, m=1.0, l=3.0, kernel=ConstantKernel(1.0),
                        initial=ConstantInitial(1.2))
        T0 = 1.0
        rep = mass_thresholds(P, make_grid(P.domain, 41), T0)
        r = solve(P, SolverConfig(n=41, T_end=T0))
        info["thresholds_met"] = rep.met
        info["T_reached"] = f"{r.T_reached:.4f}"
        assert rep.met
        assert r.status == "BlowUp" and r.T_reached < T0


def test_criterion_09_positivity(criterion):
    with criterion(9, "instant positivity of compactly supported data") as info:
        P = ProblemSpec(p=1.0, q=1.0, m=1.0, l=1.0, kernel=ConstantKernel(0.5),
                        initial=BumpInitial(amplitude=1.0, center=(0.5,), width=0.2, baseline=0.0))
        g = make_grid(P.domain, 101)
        assert np.count_nonzero(P.initial.realize(g)[1:-1] == 0.0) > 40
        r = solve(P, SolverConfig(n=101, T_end=0.05), keep_fields=True)
        k = next(i for i, t in enumerate(r.times) if t > 0)
        interior_min = float(r.fields[k][1:-1].min())
        info["t_first"] = f"{r.times[k]:.2e}"
        info["interior_min"] = f"{interior_min:.3e}"
        info["clips"] = r.clip_counter
        assert interior_min > 0
        assert r.clip_counter == 0


def manufactured(a=1.0, b=1.0):
    def exact(t, x):
        return math.exp(-t) * (2 + np.cos(np.pi * x))

    def forcing(t, grid):
        x = grid.coords[0]
        u = exact(t, x)
        return -u + np.pi**2 * math.exp(-t) * np.cos(np.pi * x) - a * u * 2 * math.exp(-t) + b * u

    P = ProblemSpec(a=a, b=b, p=1.0, q=1.0, m=1.0, kernel=ZeroKernel(),
                    initial=CosineInitial(), forcing=forcing)
    return P, exact


class CosineInitial:
    def realize(self, grid):
        return 2 + np.cos(np.pi * grid.coords[0])


def test_criterion_10_convergence(criterion):
    with criterion(10, "manufactured-solution convergence") as info:
        P, exact = manufactured()
        errs, resid = [], []
        for n in (21, 41, 81):
            r = solve(P, SolverConfig(n=n, T_end=0.5, record_stride=10))
            assert r.status == "Global"
            errs.append(float(np.max(np.abs(r.final - exact(r.T_reached, r.grid.coords[0])))))
            resid.append(r.max_mass_residual())
        orders = [math.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]
        shrink = [r0 / r1 for r0, r1 in zip(resid, resid[1:])]
        info["orders"] = [f"{o:.3f}" for o in orders]
        info["residual_ratios"] = [f"{s:.2f}" for s in shrink]
        assert min(orders) >= 1.9
        assert min(shrink) >= 3.5


SWEEP_TOML = """\
model.a = 1.0
model.b = 1.0
model.q = 0.5
model.m = 1.5
domain.kind = "interval"
domain.L = 1.0
kernel.kind = "constant"
kernel.kappa = 1.0
initial.kind = "constant"
initial.A = 3.0
solver.n = 41
solver.T_end = 2.0
sweep.p = [0.25, 0.75, 1.0, 1.5]
sweep.l = [0.5, 1.25, 1.5, 2.5]
"""


@pytest.mark.slow
def test_criterion_11_phase_diagram(criterion, tmp_path, capsys):
    with criterion(11, "4x4 phase-diagram sweep") as info:
        path = tmp_path / "sweep.toml"
        path.write_text(SWEEP_TOML)
        out = tmp_path / "sweep"
        t = time.perf_counter()
        code, data = run_cli(capsys, "--out", str(out), "--workers", "4", "sweep", str(path))
        elapsed = time.perf_counter() - t
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        gaps = [r for r in rows if r["theory_label"] == "TheoryGap"]
        info["rows"] = len(rows)
        info["disagree"] = data["n_disagree"]
        info["gap_cells"] = len(gaps)
        info["errors"] = data["n_error"]
        assert code == 0 and len(rows) == 16 and data["n_disagree"] == 0
        assert not [r for r in rows if r["agreement"] == "no"]
        for r in rows:
            expected = classify_regime(float(r["p"]), float(r["q"]), float(r["l"]), float(r["m"]), True)
            assert r["theory_label"] == expected.value
        assert gaps and all(r["agreement"] == "n/a" for r in gaps)
        assert data["n_error"] == 0
        assert elapsed < 600.0, elapsed


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))

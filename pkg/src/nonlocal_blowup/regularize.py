"""
Regularised problems with source ``b eps^m`` and data lifted by ``eps``,
and the decreasing family whose limit approximates the maximal solution.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .errors import ValidationError
from .integrate import BLOWUP, solve


@dataclass(frozen=True)
class EpsilonSchedule:
    epsilons: tuple = (0.1, 0.05, 0.025, 0.0125)

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps:
            raise ValidationError("epsilons", "schedule is empty")
        if not all(0 < e < 1 for e in eps):
            raise ValidationError("epsilons", "every eps must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValidationError("epsilons", "schedule must be strictly decreasing")

    @classmethod
    def geometric(cls, first=0.1, count=4):
        return cls(tuple(first * 2.0**-j for j in range(count)))

    def __len__(self):
        return len(self.epsilons)

    def __iter__(self):
        return iter(self.epsilons)


def epsilon_problem(problem, eps):
    """Add the source ``b eps^m`` and lift the initial data by ``eps``."""
    if not 0 < eps < 1:
        raise ValidationError("eps", f"must lie in (0, 1), got {eps}")
    initial = replace(problem.initial, shift=problem.initial.shift + eps)
    return replace(problem, source=problem.source + problem.b * eps**problem.m, initial=initial)


@dataclass
class MonotonicityReport:
    epsilons: list
    max_violation: float
    violation_time: Optional[float]
    n_violations: int
    successive_sup_diffs: list
    common_T: float
    n_common_records: int
    truncated: bool

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _common_times(runs):
    common = set(runs[0].times.tolist())
    for r in runs[1:]:
        common &= set(r.times.tolist())
    return sorted(common)


def maximal_solution(problem, schedule, config, rel_tol=1e-8):
    """
    Solve every eps-problem of ``schedule`` on one grid and compare them.

    Records are forced onto a shared time lattice (``record_dt``; default
    ``T_end / 50``). A violation is a node where the run with the smaller
    eps exceeds the one with the larger eps by more than
    ``rel_tol (1 + sup)``. Runs that blow up early shrink the comparison
    window to the common recorded times.

    Returns ``(runs, report, limit)`` where ``limit`` is the field of the
    smallest-eps run at the end of the common window.
    """
    if not isinstance(schedule, EpsilonSchedule):
        schedule = EpsilonSchedule(tuple(schedule))
    if config.record_dt is None:
        config = replace(config, record_dt=config.T_end / 50.0)
    runs = [solve(epsilon_problem(problem, e), config, keep_fields=True) for e in schedule]

    times = _common_times(runs)
    maps = [dict(zip(r.times.tolist(), r.fields)) for r in runs]
    max_violation = 0.0
    violation_time = None
    n_violations = 0
    for t in times:
        fields = [m[t] for m in maps]
        for i in range(len(fields) - 1):
            big, small = fields[i], fields[i + 1]
            excess = small - big
            tol = rel_tol * (1.0 + float(np.max(big)))
            worst = float(np.max(excess))
            if worst > max_violation:
                max_violation, violation_time = worst, t
            n_violations += int(np.count_nonzero(excess > tol))

    diffs = []
    for i in range(len(runs) - 1):
        d = max(float(np.max(np.abs(maps[i][t] - maps[i + 1][t]))) for t in times)
        diffs.append(d)

    common_T = times[-1] if times else 0.0
    truncated = any(r.status == BLOWUP for r in runs) or common_T < config.T_end
    report = MonotonicityReport(
        epsilons=list(schedule.epsilons),
        max_violation=max_violation,
        violation_time=violation_time,
        n_violations=n_violations,
        successive_sup_diffs=diffs,
        common_T=common_T,
        n_common_records=len(times),
        truncated=bool(truncated),
    )
    limit = maps[-1][common_T]
    return runs, report, limit

"""
Configuration documents: flat ``section.key = value`` lines (TOML syntax).

Example::

    model.a = 1.0
    model.b = 1.0
    model.p = 1.0
    model.q = 1.0
    model.m = 1.0
    model.l = 1.0
    domain.kind = "interval"
    domain.L = 1.0
    kernel.kind = "zero"
    initial.kind = "constant"
    initial.A = 1.0
    solver.n = 51
"""

from __future__ import annotations

import hashlib
import math
import re

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

import numpy as np

from .errors import ConfigError, ValidationError
from .integrate import SolverConfig
from .problem import (
    BumpInitial,
    ConstantInitial,
    ConstantKernel,
    Interval,
    ProblemSpec,
    Rectangle,
    SeparableKernel,
    TabulatedInitial,
    TabulatedKernel,
    ZeroKernel,
)

MODEL_KEYS = {"a", "b", "p", "q", "m", "l", "extensions", "source"}
DOMAIN_KEYS = {"interval": {"kind", "L"}, "rectangle": {"kind", "Lx", "Ly"}}
KERNEL_KEYS = {
    "zero": {"kind"},
    "constant": {"kind", "kappa"},
    "separable": {"kind", "kappa", "time_rate", "volume_decay"},
    "tabulated": {"kind", "times", "values"},
}
INITIAL_KEYS = {
    "constant": {"kind", "A", "shift"},
    "bump": {"kind", "amplitude", "center", "width", "baseline", "shift"},
    "tabulated": {"kind", "values", "shift"},
}
SOLVER_KEYS = {
    "n",
    "cfl_safety",
    "reaction_safety",
    "T_end",
    "U_max",
    "dt_min",
    "record_stride",
    "record_dt",
    "scheme",
    "max_steps",
}
SECTIONS = ("model", "domain", "kernel", "initial", "solver")


def _line_of(text, section, key=None):
    target = f"{section}.{key}" if key else section
    pat = re.compile(r"^\s*" + re.escape(target) + r"\s*[=.]")
    for i, line in enumerate(text.splitlines(), 1):
        if pat.match(line):
            return i
    if key:
        # [section] table form
        pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
        for i, line in enumerate(text.splitlines(), 1):
            if pat.match(line):
                return i
    return None


class _Reader:
    """Typed access to one section of a parsed document."""

    def __init__(self, text, section, table):
        self.text = text
        self.section = section
        self.table = table if table is not None else {}
        if not isinstance(self.table, dict):
            raise ConfigError("expected a section of dotted keys", key=section,
                              line=_line_of(text, section))

    def fail(self, key, message):
        raise ConfigError(message, key=f"{self.section}.{key}", line=_line_of(self.text, self.section, key))

    def check_keys(self, allowed, context=""):
        for key in self.table:
            if key not in allowed:
                extra = f" for {context}" if context else ""
                self.fail(key, f"unknown key{extra}")

    def has(self, key):
        return key in self.table

    def number(self, key, default=None):
        if key not in self.table:
            if default is None:
                self.fail(key, "required key missing")
            return default
        v = self.table[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(key, f"expected a number, got {v!r}")
        return v

    def integer(self, key, default):
        v = self.number(key, default)
        if int(v) != v:
            self.fail(key, f"expected an integer, got {v!r}")
        return int(v)

    def boolean(self, key, default=False):
        v = self.table.get(key, default)
        if not isinstance(v, bool):
            self.fail(key, f"expected true/false, got {v!r}")
        return v

    def string(self, key, default=None):
        if key not in self.table:
            if default is None:
                self.fail(key, "required key missing")
            return default
        v = self.table[key]
        if not isinstance(v, str):
            self.fail(key, f"expected a string, got {v!r}")
        return v

    def array(self, key):
        if key not in self.table:
            self.fail(key, "required key missing")
        try:
            arr = np.asarray(self.table[key], dtype=float)
        except (TypeError, ValueError):
            self.fail(key, "expected a (nested) numeric array")
        return arr


def parse_document(text):
    """TOML parse with package error types."""
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"malformed document: {exc}", line=int(m.group(1)) if m else None) from exc


def build_specs(doc, text=""):
    for section in doc:
        if section not in SECTIONS:
            raise ConfigError("unknown section", key=section, line=_line_of(text, section))
    try:
        return _build_problem(doc, text), _build_solver(doc, text)
    except ValidationError as exc:
        # surface the offending key and its line
        section, _, key = exc.field.partition(".")
        if section in SECTIONS and key:
            exc.line = _line_of(text, section, key)
        else:
            exc.line = _line_of(text, "model", exc.field)
        raise


def parse_config(text):
    """Parse a configuration document into ``(ProblemSpec, SolverConfig)``."""
    return build_specs(parse_document(text), text)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def _build_problem(doc, text):
    model = _Reader(text, "model", doc.get("model"))
    model.check_keys(MODEL_KEYS)
    kw = {k: model.number(k) for k in ("a", "b", "p", "q", "m", "l")}
    kw["extensions"] = model.boolean("extensions", False)
    kw["source"] = model.number("source", 0.0)

    dom = _Reader(text, "domain", doc.get("domain"))
    kind = dom.string("kind", "interval")
    if kind not in DOMAIN_KEYS:
        dom.fail("kind", f"unknown domain kind {kind!r}")
    dom.check_keys(DOMAIN_KEYS[kind], f"domain.kind = {kind}")
    if kind == "interval":
        domain = Interval(dom.number("L", 1.0))
    else:
        domain = Rectangle(dom.number("Lx", 1.0), dom.number("Ly", 1.0))

    ker = _Reader(text, "kernel", doc.get("kernel"))
    kind = ker.string("kind", "zero")
    if kind not in KERNEL_KEYS:
        ker.fail("kind", f"unknown kernel kind {kind!r}")
    ker.check_keys(KERNEL_KEYS[kind], f"kernel.kind = {kind}")
    if kind == "zero":
        kernel = ZeroKernel()
    elif kind == "constant":
        kernel = ConstantKernel(ker.number("kappa"))
    elif kind == "separable":
        kernel = SeparableKernel.parametric(
            ker.number("kappa", 1.0), ker.number("time_rate", 0.0), ker.number("volume_decay", 0.0)
        )
    else:
        kernel = TabulatedKernel(ker.array("times"), ker.array("values"))

    ini = _Reader(text, "initial", doc.get("initial"))
    kind = ini.string("kind", "constant")
    if kind not in INITIAL_KEYS:
        ini.fail("kind", f"unknown initial kind {kind!r}")
    ini.check_keys(INITIAL_KEYS[kind], f"initial.kind = {kind}")
    shift = ini.number("shift", 0.0)
    if kind == "constant":
        initial = ConstantInitial(ini.number("A"), shift=shift)
    elif kind == "bump":
        center = ini.table.get("center", [0.5 * L for L in domain.lengths])
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if center.size != len(domain.lengths):
            ini.fail("center", f"expected {len(domain.lengths)} coordinate(s)")
        initial = BumpInitial(
            amplitude=ini.number("amplitude", 1.0),
            center=tuple(center),
            width=ini.number("width", 0.25 * min(domain.lengths)),
            baseline=ini.number("baseline", 0.0),
            shift=shift,
        )
    else:
        initial = TabulatedInitial(ini.array("values"), shift=shift)

    return ProblemSpec(domain=domain, kernel=kernel, initial=initial, **kw)


def _build_solver(doc, text):
    sol = _Reader(text, "solver", doc.get("solver"))
    sol.check_keys(SOLVER_KEYS)
    d = SolverConfig()
    record_dt = sol.number("record_dt", 0.0) if sol.has("record_dt") else None
    return SolverConfig(
        n=sol.integer("n", d.n),
        cfl_safety=sol.number("cfl_safety", d.cfl_safety),
        reaction_safety=sol.number("reaction_safety", d.reaction_safety),
        T_end=sol.number("T_end", d.T_end),
        U_max=sol.number("U_max", d.U_max),
        dt_min=sol.number("dt_min", d.dt_min),
        record_stride=sol.integer("record_stride", d.record_stride),
        record_dt=record_dt,
        scheme=sol.string("scheme", d.scheme),
        max_steps=sol.integer("max_steps", d.max_steps),
    )


# --------------------------------------------------------------------------
# serialisation


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def serialize(problem, solver=None):
    """
    Render ``problem`` (and optionally ``solver``) as a configuration
    document that :func:`parse_config` maps back to equal objects.

    Raises ``ValueError`` for objects with no document form (forcing
    hooks, separable kernels built from arbitrary callables).
    """
    if problem.forcing is not None:
        raise ValueError("forcing hooks cannot be serialised")
    lines = []
    add = lambda key, value: lines.append(f"{key} = {_fmt(value)}")  # noqa: E731
    for k in ("a", "b", "p", "q", "m", "l"):
        add(f"model.{k}", float(getattr(problem, k)))
    if problem.extensions:
        add("model.extensions", True)
    if problem.source:
        add("model.source", float(problem.source))

    dom = problem.domain
    add("domain.kind", dom.kind)
    if dom.kind == "interval":
        add("domain.L", float(dom.L))
    else:
        add("domain.Lx", float(dom.Lx))
        add("domain.Ly", float(dom.Ly))

    ker = problem.kernel
    add("kernel.kind", ker.kind)
    if ker.kind == "constant":
        add("kernel.kappa", float(ker.kappa))
    elif ker.kind == "separable":
        if ker.params is None:
            raise ValueError("separable kernel built from callables cannot be serialised")
        kappa, rate, decay = ker.params
        add("kernel.kappa", kappa)
        add("kernel.time_rate", rate)
        add("kernel.volume_decay", decay)
    elif ker.kind == "tabulated":
        add("kernel.times", ker.times.tolist())
        add("kernel.values", ker.values.tolist())

    ini = problem.initial
    add("initial.kind", ini.kind)
    if ini.kind == "constant":
        add("initial.A", float(ini.A))
    elif ini.kind == "bump":
        add("initial.amplitude", float(ini.amplitude))
        add("initial.center", [float(c) for c in ini.center])
        add("initial.width", float(ini.width))
        add("initial.baseline", float(ini.baseline))
    else:
        add("initial.values", ini.values.tolist())
    if ini.shift:
        add("initial.shift", float(ini.shift))

    if solver is not None:
        for k in ("n", "cfl_safety", "reaction_safety", "T_end", "U_max", "dt_min",
                  "record_stride", "record_dt", "scheme", "max_steps"):
            v = getattr(solver, k)
            if v is not None:
                add(f"solver.{k}", v)
    return "\n".join(lines) + "\n"


def config_hash(problem, solver=None):
    """SHA-256 of the serialised document (first 16 hex digits)."""
    return hashlib.sha256(serialize(problem, solver).encode()).hexdigest()[:16]

"""Semi-discrete right-hand side of the nonlocal problem."""

from __future__ import annotations

import numpy as np

from .errors import IntegrityError
from .grid import laplacian, volume_quadrature

# relative slack for negative round-off before a field is rejected
NEGATIVE_TOLERANCE = 1e-8


def power(u, e):
    """``max(u, 0) ** e`` so that fractional powers never see a negative."""
    return np.power(np.maximum(u, 0.0), e)


def _check_nonnegative(u):
    lo = float(np.min(u))
    if lo < -NEGATIVE_TOLERANCE * (1.0 + float(np.max(np.abs(u)))):
        raise IntegrityError(f"negative nodal value {lo:.3e}: positivity breached upstream")


class RhsContext:
    """
    Problem, grid and cached kernel samples for repeated rhs evaluation.

    Read-only after construction.
    """

    def __init__(self, problem, grid):
        self.problem = problem
        self.grid = grid
        self.weights = grid.weights.ravel()
        self.kernel_is_zero = bool(problem.kernel.is_zero)
        self._sample = problem.kernel.sampler(grid)
        self.time_dependent = bool(problem.kernel.time_dependent)
        if not self.time_dependent:
            self._static = self._sample(0.0)
            self._static_sup = float(self._static.max()) if self._static.size else 0.0

    def kernel_matrix(self, t):
        if not self.time_dependent:
            return self._static
        return self._sample(t)

    def kernel_sup(self, t):
        if self.kernel_is_zero:
            return 0.0
        if not self.time_dependent:
            return self._static_sup
        return float(self._sample(t).max())


def nonlocal_volume_factor(u, grid, q):
    """Trapezoidal ``∫ u^q dy``."""
    _check_nonnegative(u)
    return volume_quadrature(power(u, q), grid)


def boundary_flux(t, u, ctx):
    """``∫ k(x_b, y, t) u^l(y) dy`` at every boundary node."""
    if ctx.kernel_is_zero:
        return np.zeros(ctx.grid.n_boundary)
    K = ctx.kernel_matrix(t)
    return K @ (ctx.weights * power(np.ravel(u), ctx.problem.l))


def rhs_eval(t, u, ctx):
    """du/dt at every node, boundary nodes closed by the nonlocal flux."""
    P = ctx.problem
    grid = ctx.grid
    u = np.asarray(u, dtype=float)
    S = nonlocal_volume_factor(u, grid, P.q)
    flux = boundary_flux(t, u, ctx)
    out = laplacian(u, grid, flux)
    if P.a != 0:
        out += P.a * power(u, P.p) * S
    if P.b != 0:
        out -= P.b * power(u, P.m)
    if P.source != 0:
        out += P.source
    if P.forcing is not None:
        out += P.forcing(t, grid)
    return out


def balance_rate(t, u, ctx):
    """
    Integral of the right-hand side split by term.

    The ghost closure makes the weighted sum of the discrete Laplacian
    equal the boundary quadrature of the flux, so ``total`` is the exact
    semi-discrete rate of change of ``∫ u``.
    """
    P = ctx.problem
    grid = ctx.grid
    flux = boundary_flux(t, u, ctx)
    terms = {
        "boundary": float(np.dot(grid.boundary_weights, flux)),
        "reaction": P.a * volume_quadrature(power(u, P.p), grid)
        * volume_quadrature(power(u, P.q), grid),
        "absorption": -P.b * volume_quadrature(power(u, P.m), grid),
        "source": P.source * float(np.sum(grid.weights)),
        "forcing": volume_quadrature(P.forcing(t, grid), grid) if P.forcing is not None else 0.0,
    }
    terms["total"] = sum(terms.values())
    return terms

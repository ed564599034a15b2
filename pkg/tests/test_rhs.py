import math

import numpy as np
import pytest

from nonlocal_blowup.errors import IntegrityError
from nonlocal_blowup.grid import make_grid, volume_quadrature
from nonlocal_blowup.problem import ConstantKernel, Interval, ProblemSpec, Rectangle, SeparableKernel
from nonlocal_blowup.rhs import (
    RhsContext,
    balance_rate,
    boundary_flux,
    nonlocal_volume_factor,
    power,
    rhs_eval,
)

from oracles import separable_flux_loop


def ctx_for(problem, n=21):
    return RhsContext(problem, make_grid(problem.domain, n))


def test_volume_factor_examples():
    g = make_grid(Interval(1.0), 41)
    for q in (0.3, 1.0, 2.5):
        assert nonlocal_volume_factor(np.ones(g.shape), g, q) == pytest.approx(1.0)
        assert nonlocal_volume_factor(np.full(g.shape, 1.7), g, q) == pytest.approx(1.7**q)
    s = nonlocal_volume_factor(np.sin(np.pi * g.coords[0]), g, 2)
    assert abs(s - 0.5) < 1e-12  # trapezoid is exact for sin^2 on a full period


def test_volume_factor_rejects_negative_fields():
    g = make_grid(Interval(1.0), 11)
    u = np.ones(g.shape)
    u[3] = -0.1
    with pytest.raises(IntegrityError):
        nonlocal_volume_factor(u, g, 1.0)


def test_power_clamps_roundoff_negatives():
    assert np.array_equal(power(np.array([-1e-18, 0.0, 4.0]), 0.5), [0.0, 0.0, 2.0])


def test_boundary_flux_zero_and_constant():
    c = ctx_for(ProblemSpec())
    assert np.array_equal(boundary_flux(0.0, np.full(c.grid.shape, 3.0), c), np.zeros(2))
    c = ctx_for(ProblemSpec(l=2.5, kernel=ConstantKernel(0.7)))
    assert np.allclose(boundary_flux(0.0, np.full(c.grid.shape, 1.3), c), 0.7 * 1.3**2.5)


def test_boundary_flux_separable_matches_double_loop():
    P = ProblemSpec(l=1.5, kernel=SeparableKernel.parametric(kappa=0.8, time_rate=0.5, volume_decay=2.0))
    c = ctx_for(P, 17)
    x = c.grid.coords[0]
    u = 1.0 + x * (1.0 - x)
    t = 0.3
    got = boundary_flux(t, u, c)
    tau = math.exp(-0.5 * t)
    want = separable_flux_loop([0.8 * tau] * 2, np.exp(-2.0 * x**2), u, 1.5, c.grid.h[0])
    assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_rhs_equilibrium_and_constant_reduction():
    for p, q, m in ((1, 1, 1), (0.3, 1.7, 2.2), (2, 0.5, 0.5)):
        c = ctx_for(ProblemSpec(p=p, q=q, m=m))
        assert np.allclose(rhs_eval(0.0, np.ones(c.grid.shape), c), 0.0, atol=1e-14)
        cval = 1.9
        r = rhs_eval(0.0, np.full(c.grid.shape, cval), c)
        want = cval ** (p + q) - cval**m
        assert np.allclose(r, want, rtol=1e-14, atol=1e-14)


def test_rhs_manufactured_second_order():
    # u* = e^-t (1 + cos pi x), p = q = m = 1, a = b = 1: ∫u* = e^-t and the
    # outward slope vanishes at both ends, so the zero kernel matches.
    t = 0.4
    e = math.exp(-t)

    def forcing(t_, grid):
        x = grid.coords[0]
        u = math.exp(-t_) * (1 + np.cos(np.pi * x))
        return math.pi**2 * math.exp(-t_) * np.cos(np.pi * x) - u * math.exp(-t_)

    errs = []
    for n in (21, 41, 81):
        c = ctx_for(ProblemSpec(forcing=forcing), n)
        x = c.grid.coords[0]
        u = e * (1 + np.cos(np.pi * x))
        errs.append(np.abs(rhs_eval(t, u, c) - (-u)).max())
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_pure_diffusion_conserves_mass():
    for dom in (Interval(2.0), Rectangle(1.0, 0.5)):
        c = RhsContext(ProblemSpec(a=0.0, b=0.0, extensions=True, domain=dom), make_grid(dom, 13))
        u = np.random.default_rng(3).random(c.grid.shape)
        assert abs(volume_quadrature(rhs_eval(0.0, u, c), c.grid)) < 1e-12


def test_balance_rate_equals_integral_of_rhs():
    P = ProblemSpec(p=0.5, q=1.5, m=2.0, l=1.2, a=1.3, b=0.4, source=0.1,
                    kernel=ConstantKernel(0.6), domain=Rectangle(1.0, 2.0))
    c = ctx_for(P, 11)
    u = 1 + np.random.default_rng(4).random(c.grid.shape)
    terms = balance_rate(0.0, u, c)
    assert terms["total"] == pytest.approx(volume_quadrature(rhs_eval(0.0, u, c), c.grid), rel=1e-12)
    assert terms["source"] == pytest.approx(0.2)


def test_rhs_time_translation_for_static_kernel():
    c = ctx_for(ProblemSpec(kernel=ConstantKernel(0.5)))
    u = 1 + c.grid.coords[0] ** 2
    assert np.array_equal(rhs_eval(0.0, u, c), rhs_eval(3.7, u, c))

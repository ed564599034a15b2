import numpy as np
import pytest

from nonlocal_blowup.grid import (
    Grid,
    boundary_quadrature,
    ghost_closure,
    laplacian,
    laplacian_interior,
    make_grid,
    normal_derivative,
    read_field_csv,
    volume_quadrature,
    write_field_csv,
)
from nonlocal_blowup.problem import Interval, Rectangle


def test_weights_sum_to_volume_and_perimeter():
    g1 = Grid((2.5,), 17)
    assert g1.weights.sum() == pytest.approx(2.5, abs=1e-14)
    assert g1.boundary_weights.sum() == 2.0
    g2 = Grid((1.5, 0.7), 13)
    assert g2.weights.sum() == pytest.approx(1.05, abs=1e-14)
    assert g2.boundary_weights.sum() == pytest.approx(2 * (1.5 + 0.7), abs=1e-14)
    assert g2.boundary_measure == pytest.approx(4.4)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        Grid((1.0,), 2)
    with pytest.raises(ValueError):
        Grid((-1.0,), 11)
    with pytest.raises(ValueError):
        Grid((1.0, 1.0, 1.0), 5)


def test_volume_quadrature_examples():
    g = make_grid(Interval(1.0), 11)
    assert volume_quadrature(np.ones(g.shape), g) == pytest.approx(1.0, abs=1e-15)
    assert volume_quadrature(g.coords[0], g) == pytest.approx(0.5, abs=1e-15)
    x2 = volume_quadrature(g.coords[0] ** 2, g)
    assert abs(x2 - 1 / 3) <= 2 / (6 * 10**2)


def test_boundary_quadrature_examples():
    g = make_grid(Interval(1.0), 11)
    assert boundary_quadrature(np.ones(g.n_boundary), g) == 2.0
    r = make_grid(Rectangle(1.0, 1.0), 11)
    assert boundary_quadrature(np.ones(r.n_boundary), r) == pytest.approx(4.0, abs=1e-14)
    # edge-linear ramp f = x + 2y: edges y=0 -> 1/2, y=1 -> 5/2, x=0 -> 1, x=1 -> 2
    r2 = make_grid(Rectangle(1.0, 1.0), 9)
    pts = r2.boundary_points()
    ramp = pts[:, 0] + 2 * pts[:, 1]
    assert boundary_quadrature(ramp, r2) == pytest.approx(6.0, abs=1e-13)


def test_laplacian_interior_examples():
    g = make_grid(Interval(1.0), 21)
    x = g.coords[0]
    assert np.allclose(laplacian_interior(np.full(g.shape, 3.0), g), 0.0, atol=1e-12)
    assert np.allclose(laplacian_interior(x**2, g), 2.0, atol=1e-9)
    g41 = make_grid(Interval(1.0), 41)
    x = g41.coords[0]
    err = np.abs(laplacian_interior(np.sin(np.pi * x), g41) + np.pi**2 * np.sin(np.pi * x)[1:-1])
    assert err.max() <= np.pi**4 * g41.h[0] ** 2 / 12


def test_laplacian_interior_2d_quadratic():
    g = make_grid(Rectangle(1.0, 2.0), 11)
    x, y = g.coords
    lap = laplacian_interior(x**2 + 3 * y**2 - x * y, g)
    assert np.allclose(lap, 8.0, atol=1e-9)


def test_ghost_closure_examples():
    g = make_grid(Interval(1.0), 11)
    h = g.h[0]
    x = g.coords[0]
    sym = np.cos(np.pi * x)  # symmetric about both ends
    padded = ghost_closure(sym, np.zeros(2), g)
    assert padded[0] == pytest.approx(sym[1])
    assert padded[-1] == pytest.approx(sym[-2])
    # affine f = x: outward flux -1 at x=0 and +1 at x=1
    padded = ghost_closure(x, np.array([-1.0, 1.0]), g)
    assert padded[-1] == pytest.approx(1 + h, abs=1e-14)
    assert padded[0] == pytest.approx(-h, abs=1e-14)


def _boundary_laplacian_errors(u, du, d2u, ns=(21, 41, 81)):
    errs = []
    for n in ns:
        g = make_grid(Interval(1.0), n)
        x = g.coords[0]
        flux = np.array([-du(0.0), du(1.0)])
        errs.append(np.abs(laplacian(u(x), g, flux) - d2u(x))[[0, -1]].max())
    return errs


def test_ghost_closure_manufactured_boundary_laplacian():
    c = np.exp(-0.3)
    errs = _boundary_laplacian_errors(
        lambda x: c * np.cos(np.pi * x),
        lambda x: -c * np.pi * np.sin(np.pi * x),
        lambda x: -c * np.pi**2 * np.cos(np.pi * x),
    )
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_ghost_closure_wall_truncation_with_nonzero_third_derivative():
    # mirror closure leaves h u'''/3 at the wall, here 2h at x = 1
    errs = _boundary_laplacian_errors(lambda x: x**3, lambda x: 3 * x**2, lambda x: 6 * x)
    assert errs == pytest.approx([2 / 20, 2 / 40, 2 / 80], rel=1e-6)


def test_zero_flux_divergence_theorem_2d():
    g = make_grid(Rectangle(1.0, 0.5), 15)
    rng = np.random.default_rng(0)
    f = rng.random(g.shape)
    assert abs(volume_quadrature(laplacian(f, g), g)) < 1e-12


def test_flux_divergence_theorem_matches_boundary_integral():
    g = make_grid(Rectangle(1.0, 0.5), 15)
    rng = np.random.default_rng(1)
    f = rng.random(g.shape)
    flux = rng.random(g.n_boundary)
    lhs = volume_quadrature(laplacian(f, g, flux), g)
    assert lhs == pytest.approx(boundary_quadrature(flux, g), abs=1e-11)


def test_normal_derivative_orders():
    g = make_grid(Interval(1.0), 41)
    x = g.coords[0]
    u = x**2
    d1 = normal_derivative(u, g, order=1)
    d2 = normal_derivative(u, g, order=2)
    assert d2 == pytest.approx([0.0, 2.0], abs=1e-10)
    assert abs(d1[1] - 2.0) == pytest.approx(g.h[0], rel=1e-6)


def test_boundary_geometry_rectangle():
    g = make_grid(Rectangle(2.0, 1.0), 5)
    assert g.n_boundary == 16
    assert g.boundary_corner.sum() == 4
    norms = np.linalg.norm(g.boundary_normals, axis=1)
    assert np.allclose(norms, 1.0)
    assert np.all(g.interior_mask.sum() == 9)


def test_field_csv_roundtrip(tmp_path):
    g = make_grid(Rectangle(1.0, 2.0), 6)
    f = g.field(lambda x, y: x + 10 * y)
    path = tmp_path / "f.csv"
    write_field_csv(path, f, g)
    header = path.read_text().splitlines()[0]
    assert header == "x,y,value"
    assert np.array_equal(read_field_csv(path, g), f)
    g1 = make_grid(Interval(1.0), 5)
    write_field_csv(path, g1.coords[0], g1)
    assert path.read_text().splitlines()[0] == "x,value"

"""
Uniform tensor-product grids on an interval or a rectangle.

Fields are plain numpy arrays of shape ``grid.shape`` (indexing ``ij``).
Boundary nodes are addressed in the order of ``grid.boundary_index``
(ascending flat index); every per-boundary-node array (fluxes, normal
derivatives, boundary weights) uses that order.

Quadrature is the composite trapezoidal rule in every direction. In 1-D
the boundary measure is the counting measure on the two endpoints. On a
rectangle, a corner node collects half an edge cell from each adjacent
edge, so boundary weights sum to the perimeter.
"""

from __future__ import annotations

import csv

import numpy as np


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


class Grid:
    """
    Node set, spacings and quadrature weights for a 1-D or 2-D box.

    Parameters
    ----------
    lengths : tuple of float
        ``(L,)`` for an interval ``[0, L]`` or ``(Lx, Ly)`` for a rectangle.
    n : int
        Nodes per axis (same count on every axis), at least 3.
    """

    def __init__(self, lengths, n):
        lengths = tuple(float(L) for L in lengths)
        if len(lengths) not in (1, 2):
            raise ValueError("only 1-D and 2-D grids are supported")
        if any(not np.isfinite(L) or L <= 0 for L in lengths):
            raise ValueError(f"lengths must be positive, got {lengths}")
        n = int(n)
        if n < 3:
            raise ValueError(f"need at least 3 nodes per axis, got {n}")

        self.lengths = lengths
        self.n = n
        self.dim = len(lengths)
        self.shape = (n,) * self.dim
        self.h = tuple(L / (n - 1) for L in lengths)
        self.h_min = min(self.h)
        self.axes = tuple(np.linspace(0.0, L, n) for L in lengths)
        self.coords = np.meshgrid(*self.axes, indexing="ij")

        w1 = [_trapezoid_weights(n, h) for h in self.h]
        if self.dim == 1:
            self.weights = w1[0]
        else:
            self.weights = np.outer(w1[0], w1[1])
        self.volume = float(np.prod(lengths))

        mask = np.zeros(self.shape, dtype=bool)
        if self.dim == 1:
            mask[[0, -1]] = True
        else:
            mask[[0, -1], :] = True
            mask[:, [0, -1]] = True
        self.boundary_mask = mask
        self.boundary_index = np.flatnonzero(mask)
        self.interior_mask = ~mask
        self._build_boundary_geometry()

    def _build_boundary_geometry(self):
        nb = self.boundary_index.size
        idx = np.unravel_index(self.boundary_index, self.shape)
        normals = np.zeros((nb, self.dim))
        weights = np.zeros(nb)
        corner = np.zeros(nb, dtype=bool)
        if self.dim == 1:
            normals[:, 0] = np.where(idx[0] == 0, -1.0, 1.0)
            weights[:] = 1.0
        else:
            i, j = idx
            last = self.n - 1
            on_x_edge = (i == 0) | (i == last)  # edges x = 0, x = Lx
            on_y_edge = (j == 0) | (j == last)
            normals[:, 0] = np.where(i == 0, -1.0, np.where(i == last, 1.0, 0.0))
            normals[:, 1] = np.where(j == 0, -1.0, np.where(j == last, 1.0, 0.0))
            corner = on_x_edge & on_y_edge
            normals[corner] /= np.sqrt(2.0)
            hx, hy = self.h
            wy = _trapezoid_weights(self.n, hy)
            wx = _trapezoid_weights(self.n, hx)
            # x-edges are parametrised by y and vice versa
            weights += np.where(on_x_edge, wy[j], 0.0)
            weights += np.where(on_y_edge, wx[i], 0.0)
        self.boundary_normals = normals
        self.boundary_weights = weights
        self.boundary_corner = corner
        self.boundary_measure = 2.0 if self.dim == 1 else 2.0 * sum(self.lengths)

    @property
    def n_nodes(self):
        return int(np.prod(self.shape))

    @property
    def n_boundary(self):
        return int(self.boundary_index.size)

    def points(self):
        """All node coordinates as an ``(n_nodes, dim)`` array (flat order)."""
        return np.stack([c.ravel() for c in self.coords], axis=1)

    def boundary_points(self):
        return self.points()[self.boundary_index]

    def field(self, fn):
        """Evaluate ``fn(*coords)`` on the grid."""
        return np.asarray(fn(*self.coords), dtype=float) * np.ones(self.shape)

    def boundary_values(self, f):
        return np.asarray(f).ravel()[self.boundary_index]

    def scatter_boundary(self, values):
        """Place per-boundary-node values into a full-shape array (zero elsewhere)."""
        full = np.zeros(self.n_nodes)
        full[self.boundary_index] = values
        return full.reshape(self.shape)

    def __repr__(self):
        return f"Grid(lengths={self.lengths}, n={self.n})"


def make_grid(domain, n):
    """Grid for a domain object exposing ``lengths``."""
    return Grid(domain.lengths, n)


def volume_quadrature(f, grid):
    """Trapezoidal approximation of the integral of ``f`` over the domain."""
    return float(np.sum(grid.weights * f))


def boundary_quadrature(g, grid):
    """Weighted sum over boundary nodes approximating a surface integral."""
    return float(np.dot(grid.boundary_weights, g))


def laplacian_interior(f, grid):
    """Central 3-point / 5-point Laplacian; returns values on interior nodes only."""
    f = np.asarray(f, dtype=float)
    if grid.dim == 1:
        (h,) = grid.h
        return (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    hx, hy = grid.h
    c = f[1:-1, 1:-1]
    return (f[2:, 1:-1] - 2.0 * c + f[:-2, 1:-1]) / hx**2 + (
        f[1:-1, 2:] - 2.0 * c + f[1:-1, :-2]
    ) / hy**2


def ghost_closure(f, flux, grid):
    """
    Pad ``f`` with one layer of ghost values enforcing ``du/dnu = flux``.

    Each ghost value mirrors the inner neighbour across the boundary node
    and adds ``2 h flux``, which is the second-order central closure of the
    outward normal derivative. On a rectangle a corner node takes the flux
    condition along both adjacent edge normals. Ghost corners of the padded
    array are never read by the 5-point stencil and are left at zero.
    """
    f = np.asarray(f, dtype=float)
    F = grid.scatter_boundary(flux)
    P = np.zeros(tuple(s + 2 for s in grid.shape))
    if grid.dim == 1:
        (h,) = grid.h
        P[1:-1] = f
        P[0] = f[1] + 2.0 * h * F[0]
        P[-1] = f[-2] + 2.0 * h * F[-1]
        return P
    hx, hy = grid.h
    P[1:-1, 1:-1] = f
    P[0, 1:-1] = f[1, :] + 2.0 * hx * F[0, :]
    P[-1, 1:-1] = f[-2, :] + 2.0 * hx * F[-1, :]
    P[1:-1, 0] = f[:, 1] + 2.0 * hy * F[:, 0]
    P[1:-1, -1] = f[:, -2] + 2.0 * hy * F[:, -1]
    return P


def laplacian(f, grid, flux=None):
    """Laplacian at every node, boundary nodes closed with ghost values."""
    if flux is None:
        flux = np.zeros(grid.n_boundary)
    P = ghost_closure(f, flux, grid)
    if grid.dim == 1:
        (h,) = grid.h
        return (P[2:] - 2.0 * P[1:-1] + P[:-2]) / h**2
    hx, hy = grid.h
    c = P[1:-1, 1:-1]
    return (P[2:, 1:-1] - 2.0 * c + P[:-2, 1:-1]) / hx**2 + (
        P[1:-1, 2:] - 2.0 * c + P[1:-1, :-2]
    ) / hy**2


def _one_sided(f, axis, at_end, h, order):
    # derivative along +axis at the first/last node of that axis
    take = lambda k: np.take(f, k, axis=axis)  # noqa: E731
    if not at_end:
        if order == 1:
            return (take(1) - take(0)) / h
        return (-3.0 * take(0) + 4.0 * take(1) - take(2)) / (2.0 * h)
    if order == 1:
        return (take(-1) - take(-2)) / h
    return (3.0 * take(-1) - 4.0 * take(-2) + take(-3)) / (2.0 * h)


def normal_derivative(f, grid, order=1):
    """
    One-sided outward normal derivative at every boundary node.

    ``order`` selects the 2-point (first-order) or 3-point (second-order)
    difference. Rectangle corners get the mean of the two edge-normal
    derivatives.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    f = np.asarray(f, dtype=float)
    if grid.dim == 1:
        (h,) = grid.h
        left = -_one_sided(f, 0, False, h, order)
        right = _one_sided(f, 0, True, h, order)
        return np.array([left, right])

    hx, hy = grid.h
    full_x = np.zeros(grid.shape)  # outward derivative across x-edges
    full_y = np.zeros(grid.shape)
    full_x[0, :] = -_one_sided(f, 0, False, hx, order)
    full_x[-1, :] = _one_sided(f, 0, True, hx, order)
    full_y[:, 0] = -_one_sided(f, 1, False, hy, order)
    full_y[:, -1] = _one_sided(f, 1, True, hy, order)
    ii, jj = np.unravel_index(grid.boundary_index, grid.shape)
    last = grid.n - 1
    on_x = (ii == 0) | (ii == last)
    on_y = (jj == 0) | (jj == last)
    dx = full_x[ii, jj]
    dy = full_y[ii, jj]
    return np.where(on_x & on_y, 0.5 * (dx + dy), np.where(on_x, dx, dy))


def write_field_csv(path, f, grid):
    """Write one row per node: ``x[,y],value``."""
    cols = ["x", "y"][: grid.dim] + ["value"]
    pts = grid.points()
    vals = np.asarray(f, dtype=float).ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for p, v in zip(pts, vals):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v))])


def read_field_csv(path, grid):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[-1] != "value" or len(body) != grid.n_nodes:
        raise ValueError(f"{path}: field does not match {grid}")
    return np.array([float(r[-1]) for r in body]).reshape(grid.shape)

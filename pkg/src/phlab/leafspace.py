"""Quotient dynamics on the space of center leaves.

For skew products the leaf space is the base torus and the quotient map is
the Anosov base itself: this module provides the leaf-space metric, the local
product bracket, exact periodic-point enumeration, and the attractor /
equidistribution report.
"""

from dataclasses import dataclass

import numpy as np

from .circle import mod1, circle_dist, wrap_half
from .phase_maps import AnosovBase, ValidationError
from .parallel import derive_rng


@dataclass(frozen=True)
class LeafPoint:
    u: float
    v: float

    def __post_init__(self):
        object.__setattr__(self, "u", float(mod1(self.u)))
        object.__setattr__(self, "v", float(mod1(self.v)))


def dc_distance(sys, leaf1, leaf2, fiber_samples=64):
    """Leaf-space distance: the symmetric sup-inf sum over fiber samples.

    For skew products the fibers are parallel verticals, so this equals twice
    the torus distance between the base points.
    """
    if fiber_samples < 64:
        raise ValueError("need at least 64 fiber samples")
    thetas = np.arange(fiber_samples) / fiber_samples
    du = circle_dist(leaf1.u, leaf2.u)
    dv = circle_dist(leaf1.v, leaf2.v)
    base2 = du * du + dv * dv
    # distance matrix between (x, theta_i) and (y, theta_j)
    dt = circle_dist(thetas[:, None], thetas[None, :])
    dmat = np.sqrt(base2 + dt * dt)
    return float(dmat.min(axis=1).max() + dmat.min(axis=0).max())


def bracket(base: AnosovBase, xi1, xi2, delta=0.2):
    """The unique local intersection of W^s(xi1) and W^u(xi2): solve the
    offset in eigencoordinates and move along e_s from xi1."""
    d = wrap_half(np.array([xi2.u - xi1.u, xi2.v - xi1.v]))
    if float(np.linalg.norm(d)) > delta:
        raise ValidationError(f"points farther apart than the local-product "
                              f"radius {delta}")
    m = np.column_stack((base.e_u, base.e_s))
    alpha, beta = np.linalg.solve(m, d)
    p = mod1(np.array([xi1.u, xi1.v]) + beta * base.e_s)
    return LeafPoint(float(p[0]), float(p[1]))


def _smith_normal_form_2x2(a):
    """Integer Smith form of a 2x2 matrix: U A V = diag(s1, s2) with
    unimodular U, V; returns (s1, s2, V)."""
    a = [[int(a[0][0]), int(a[0][1])], [int(a[1][0]), int(a[1][1])]]
    u = [[1, 0], [0, 1]]
    v = [[1, 0], [0, 1]]

    def row_op(mat, i, j, q):      # row_i -= q * row_j
        mat[i][0] -= q * mat[j][0]
        mat[i][1] -= q * mat[j][1]

    def col_op(mat, i, j, q):      # col_i -= q * col_j
        mat[0][i] -= q * mat[0][j]
        mat[1][i] -= q * mat[1][j]

    def swap_rows(mat):
        mat[0], mat[1] = mat[1], mat[0]

    def swap_cols(mat):
        for r in mat:
            r[0], r[1] = r[1], r[0]

    for _ in range(200):
        if a[0][0] == 0:
            if a[1][0] != 0:
                swap_rows(a), swap_rows(u)
            elif a[0][1] != 0:
                swap_cols(a), swap_cols(v)
            elif a[1][1] != 0:
                swap_rows(a), swap_rows(u)
                swap_cols(a), swap_cols(v)
            else:
                break
        # clear the rest of the first row and column
        if a[1][0] != 0:
            q = a[1][0] // a[0][0]
            row_op(a, 1, 0, q), row_op(u, 1, 0, q)
            if a[1][0] != 0:
                swap_rows(a), swap_rows(u)
            continue
        if a[0][1] != 0:
            q = a[0][1] // a[0][0]
            col_op(a, 1, 0, q), col_op(v, 1, 0, q)
            if a[0][1] != 0:
                swap_cols(a), swap_cols(v)
            continue
        break
    # plain diagonalization is enough for solution enumeration; the Smith
    # divisibility condition is not needed here
    s1, s2 = abs(a[0][0]), abs(a[1][1])
    return s1, s2, np.array(v, dtype=object)


def periodic_base_points(base: AnosovBase, n: int):
    """All period-n points of the base: solutions of (M^n - I) p = 0 mod Z^2,
    enumerated exactly in integer arithmetic; the count is |det(M^n - I)|."""
    if not (1 <= n <= 12):
        raise ValueError("period must lie in 1..12")
    m = np.array(base.matrix.tolist(), dtype=object)
    mn = np.array([[1, 0], [0, 1]], dtype=object)
    for _ in range(n):
        mn = mn @ m
    a = mn - np.array([[1, 0], [0, 1]], dtype=object)
    det = int(a[0][0] * a[1][1] - a[0][1] * a[1][0])
    count = abs(det)
    s1, s2, v = _smith_normal_form_2x2(a.tolist())
    assert s1 * s2 == count, "Smith form inconsistent with determinant"
    # solutions are V (p/s1, q/s2) mod 1, written over common denominator D
    d = count
    pts = set()
    for p in range(s1):
        for q in range(s2):
            num_u = (int(v[0][0]) * p * s2 + int(v[0][1]) * q * s1) % d
            num_v = (int(v[1][0]) * p * s2 + int(v[1][1]) * q * s1) % d
            pts.add((num_u, num_v))
    assert len(pts) == count, "enumeration lost torsion points"
    out = sorted(pts)
    return [LeafPoint(nu / d, nv / d) for nu, nv in out]


@dataclass
class AttractorReport:
    attractor_count: int
    unique_attractor: bool
    cells_visited: int
    total_cells: int
    max_relative_deviation: float
    orbit_length: int


def attractor_report(base: AnosovBase, orbit_length=1_000_000, grid_m=16,
                     seed=0, start=None) -> AttractorReport:
    """For a transitive base the unique leaf-space attractor is everything;
    the report checks a long quotient orbit equidistributes on a grid."""
    rng = derive_rng(seed, "leafspace")
    if start is None:
        u, v = rng.random(2)
    else:
        u, v = float(start.u), float(start.v)
    m = int(grid_m)
    counts = np.zeros((m, m), dtype=np.int64)
    mat = base.matrix
    a, b, c, d = (float(mat[0, 0]), float(mat[0, 1]),
                  float(mat[1, 0]), float(mat[1, 1]))
    for _ in range(int(orbit_length)):
        iu = int(u * m)
        iv = int(v * m)
        counts[min(iu, m - 1), min(iv, m - 1)] += 1
        u, v = (a * u + b * v) % 1.0, (c * u + d * v) % 1.0
    expected = orbit_length / (m * m)
    visited = int(np.count_nonzero(counts))
    max_dev = float(np.max(np.abs(counts - expected)) / expected)
    return AttractorReport(attractor_count=1, unique_attractor=True,
                           cells_visited=visited, total_cells=m * m,
                           max_relative_deviation=max_dev,
                           orbit_length=int(orbit_length))

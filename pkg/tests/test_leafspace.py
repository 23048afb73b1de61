import numpy as np
import pytest

from phlab import (LeafPoint, ValidationError, attractor_report, bracket,
                   dc_distance, identity_fiber, make_anosov_base,
                   make_cat_base, make_system, periodic_base_points)

BASE = make_cat_base()
SYS = make_system(BASE, identity_fiber())


def wrap(d):
    return (np.asarray(d) + 0.5) % 1.0 - 0.5


def test_dc_distance_metric_properties():
    a = LeafPoint(0.2, 0.3)
    b = LeafPoint(0.3, 0.3)
    assert dc_distance(SYS, a, a) == pytest.approx(0.0, abs=1e-12)
    assert dc_distance(SYS, a, b) == pytest.approx(dc_distance(SYS, b, a))
    # vertical parallel fibers: distance is twice the base torus distance
    assert dc_distance(SYS, a, b) == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(ValueError):
        dc_distance(SYS, a, b, fiber_samples=8)


def test_bracket_membership_identities():
    x1 = LeafPoint(0.31, 0.42)
    x2 = LeafPoint(0.35, 0.40)
    b = bracket(BASE, x1, x2)
    d1 = wrap([b.u - x1.u, b.v - x1.v])     # must be parallel to e_s
    d2 = wrap([b.u - x2.u, b.v - x2.v])     # must be parallel to e_u
    assert abs(d1[0] * BASE.e_s[1] - d1[1] * BASE.e_s[0]) < 1e-12
    assert abs(d2[0] * BASE.e_u[1] - d2[1] * BASE.e_u[0]) < 1e-12
    # bracket with itself is itself
    same = bracket(BASE, x1, x1)
    assert abs(same.u - x1.u) < 1e-12 and abs(same.v - x1.v) < 1e-12
    with pytest.raises(ValidationError):
        bracket(BASE, LeafPoint(0.0, 0.0), LeafPoint(0.5, 0.5))


def test_periodic_counts_match_determinant_and_brute_force():
    for n, expected in ((1, 1), (2, 5), (3, 16)):
        pts = periodic_base_points(BASE, n)
        assert len(pts) == expected
        # brute force over the common-denominator lattice
        mn = np.linalg.matrix_power(BASE.matrix.astype(np.int64), n)
        det = int(round(np.linalg.det(mn - np.eye(2, dtype=np.int64))))
        d = abs(det)
        assert d == expected
        brute = set()
        for i in range(d):
            for j in range(d):
                img = mn @ np.array([i, j])
                if (img[0] - i) % d == 0 and (img[1] - j) % d == 0:
                    brute.add((i, j))
        got = {(round(p.u * d), round(p.v * d)) for p in pts}
        assert got == brute


def test_periodic_points_are_actually_periodic():
    for n in (1, 2, 3, 4):
        for p in periodic_base_points(BASE, n):
            u, v = p.u, p.v
            for _ in range(n):
                u, v = BASE.apply_array(u, v)
            assert abs(wrap(u - p.u)) < 1e-9 and abs(wrap(v - p.v)) < 1e-9


def test_periodic_points_other_base():
    base = make_anosov_base([[3, 2], [1, 1]])
    for n in (1, 2):
        mn = np.linalg.matrix_power(base.matrix.astype(np.int64), n)
        det = abs(int(round(np.linalg.det(mn - np.eye(2, dtype=np.int64)))))
        assert len(periodic_base_points(base, n)) == det


def test_attractor_report_equidistribution():
    rep = attractor_report(BASE, orbit_length=200_000, grid_m=8, seed=4)
    assert rep.attractor_count == 1 and rep.unique_attractor
    assert rep.cells_visited == rep.total_cells == 64
    assert rep.max_relative_deviation < 0.1

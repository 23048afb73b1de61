import numpy as np
import pytest

from phlab import (BasePoint, NonConvergenceError, PhasePoint,
                   ValidationError, atomicity_test, coupled_fiber,
                   cylinder_center_holonomy, cylinder_conjugacy_residual,
                   cylinder_jacobian_drift, holonomy_singularity_report,
                   identity_fiber, make_cat_base, make_cylinder, make_system,
                   morse_smale_fiber, rotation_fiber, stable_holonomy,
                   su_loop_holonomy, transverse_intersection_check,
                   unstable_holonomy)

BASE = make_cat_base()
COUPLED = make_system(BASE, coupled_fiber(0.3, 0.2))


def wrap(d):
    return (np.asarray(d) + 0.5) % 1.0 - 0.5


def stable_neighbor(x, dist):
    p = (np.array([x.u, x.v]) + dist * BASE.e_s) % 1.0
    return BasePoint(float(p[0]), float(p[1]))


def unstable_neighbor(x, dist):
    p = (np.array([x.u, x.v]) + dist * BASE.e_u) % 1.0
    return BasePoint(float(p[0]), float(p[1]))


def test_product_system_holonomy_is_identity():
    for fib in (identity_fiber(), rotation_fiber(0.37),
                morse_smale_fiber(0.5, 2)):
        sys = make_system(BASE, fib)
        x = BasePoint(0.2, 0.7)
        h = stable_holonomy(sys, x, stable_neighbor(x, 0.01), grid_size=64)
        assert h.n_used == 1
        assert np.max(np.abs(wrap(h.samples - h.grid))) < 1e-12


def test_self_holonomy_and_monotonicity():
    x = BasePoint(0.0, 0.0)
    h = stable_holonomy(COUPLED, x, x, grid_size=128)
    assert np.max(np.abs(wrap(h.samples - h.grid))) < 1e-9
    h2 = stable_holonomy(COUPLED, x, stable_neighbor(x, 0.01), grid_size=128)
    assert h2.is_monotone()
    assert h2.cauchy_gap < 1e-9
    assert np.max(np.abs(wrap(h2.samples - h2.grid))) > 1e-5  # nontrivial


def test_holonomy_rejects_off_leaf_targets():
    with pytest.raises(ValidationError):
        stable_holonomy(COUPLED, BasePoint(0, 0), BasePoint(0.3, 0.3))
    with pytest.raises(ValidationError):
        unstable_holonomy(COUPLED, BasePoint(0, 0), BasePoint(0.3, 0.3))


def test_groupoid_inverse_composition():
    x = BasePoint(0.1, 0.8)
    y = unstable_neighbor(x, 0.01)
    h_xy = unstable_holonomy(COUPLED, x, y, grid_size=128)
    h_yx = unstable_holonomy(COUPLED, y, x, grid_size=128)
    thetas = np.arange(64) / 64.0
    comp = h_yx.evaluate(h_xy.evaluate(thetas))
    assert np.max(np.abs(wrap(comp - thetas))) < 2e-9


def test_groupoid_concatenated_segments():
    x = BasePoint(0.0, 0.0)
    mid = stable_neighbor(x, 0.005)
    y = stable_neighbor(x, 0.01)
    direct = stable_holonomy(COUPLED, x, y, grid_size=128)
    h1 = stable_holonomy(COUPLED, x, mid, grid_size=128)
    h2 = stable_holonomy(COUPLED, mid, y, grid_size=128)
    thetas = np.arange(64) / 64.0
    assert np.max(np.abs(wrap(h2.evaluate(h1.evaluate(thetas))
                              - direct.evaluate(thetas)))) < 2e-9


def test_unattainable_tolerance_raises():
    x = BasePoint(0.3, 0.2)
    with pytest.raises(NonConvergenceError):
        stable_holonomy(COUPLED, x, stable_neighbor(x, 0.01), grid_size=64,
                        tol=1e-15)


def test_singularity_report_isometries():
    x = BasePoint(0.2, 0.7)
    rot = make_system(BASE, rotation_fiber(0.37))
    h = stable_holonomy(rot, x, stable_neighbor(x, 0.01), grid_size=256)
    rep = holonomy_singularity_report(h, 64)
    assert rep.normalized_entropy == pytest.approx(1.0, abs=1e-9)
    assert rep.jacobian_min == pytest.approx(1.0, abs=1e-6)
    assert rep.jacobian_max == pytest.approx(1.0, abs=1e-6)


def test_su_loop_product_vs_coupled():
    prod = make_system(BASE, morse_smale_fiber(0.5, 2))
    res = su_loop_holonomy(prod, BasePoint(0.3, 0.2), 0.1, grid_size=64)
    assert res.displacement < 1e-9
    res2 = su_loop_holonomy(COUPLED, BasePoint(0.3, 0.2), 0.05, grid_size=64)
    assert res2.displacement > 1e-4
    assert res2.holonomy.is_monotone()


def test_cylinder_branch_inverse_oracle():
    from phlab.foliation_lab import _branch_cuts, _inverse_branch
    cyl = make_cylinder(0.2, 0.05)
    cuts = _branch_cuts(cyl)
    lift, _ = cyl.boundary_lift(1.0)
    assert np.allclose([float(lift(c)) for c in cuts], [0, 1, 2], atol=1e-12)
    b1 = cyl.boundary_map(1.0)
    z = np.arange(33) / 33.0
    for j in (0, 1):
        y = _inverse_branch(cyl, cuts, z, np.full(33, j, dtype=int))
        assert np.max(np.abs(wrap(b1(y) - z))) < 1e-12
        assert np.all((y >= cuts[j]) & (y <= cuts[j + 1]))


def test_cylinder_identity_when_unperturbed():
    cyl = make_cylinder(0.2, 0.0)
    h = cylinder_center_holonomy(cyl, B=256, n=40)
    assert np.max(np.abs(wrap(h.samples - h.grid))) < 1e-12
    assert cylinder_conjugacy_residual(cyl, h) < 1e-12


def test_cylinder_conjugacy_and_drift():
    cyl = make_cylinder(0.2, 0.05)
    h = cylinder_center_holonomy(cyl, B=256, n=48)
    assert h.is_monotone()
    assert cylinder_conjugacy_residual(cyl, h) < 1e-9
    slope, ks, r = cylinder_jacobian_drift(cyl, h, k_max=25)
    expected = -np.log((2 + 2 * np.pi * 0.05) / 2.0)
    assert slope == pytest.approx(expected, rel=0.05)


def test_atomicity_contracting_vs_isometric():
    ms = make_system(BASE, morse_smale_fiber(0.5, 2))
    res = atomicity_test(ms, BasePoint(0.1, 0.3), 80)
    assert res.cluster_count == 1
    assert res.decay_rate == pytest.approx(np.log(0.5), abs=0.05)
    rot = make_system(BASE, rotation_fiber(0.37))
    res2 = atomicity_test(rot, BasePoint(0.1, 0.3), 500)
    assert res2.diameter_drift < 1e-9


def test_transverse_intersection():
    rep = transverse_intersection_check(COUPLED)
    assert rep.passed
    assert rep.unique_intersection
    assert rep.plane_angle >= rep.angle_floor

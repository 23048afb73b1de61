"""Acceptance battery: one quantitative criterion per test, one printed
pass/fail line per criterion.  Tolerances and sizes are fixed; a failing
assertion means the stated property does not hold at the stated tolerance.
"""

import time

import numpy as np

from phlab import (BasePoint, CsBlock, PhasePoint, atomicity_test,
                   block_recurrence, bracket, cesaro_ustate,
                   center_lyapunov_measure, classify_regime,
                   contraction_time_densities, coupled_fiber,
                   cylinder_center_holonomy, cylinder_conjugacy_residual,
                   cylinder_jacobian_drift, derive_rng,
                   holonomy_singularity_report, hyperbolic_times,
                   identity_fiber, make_cat_base, make_cylinder, make_system,
                   make_udisk, morse_smale_fiber, mostly_contracting_test,
                   periodic_base_points, physical_measure_census,
                   rotation_fiber, stable_holonomy, stability_sweep,
                   su_loop_holonomy, unstable_density_ratio,
                   unstable_holonomy, verify_contraction_at_hyperbolic_times)
from phlab.leafspace import LeafPoint
from phlab.harness import run, validate_config

BASE = make_cat_base()
GOLDEN = float((np.sqrt(5.0) - 1.0) / 2.0)


def wrap(d):
    return (np.asarray(d) + 0.5) % 1.0 - 0.5


def report(num, name, checks):
    """checks: list of (label, ok, detail); prints one line, returns overall."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{lbl}={det}" + ("" if good else " <-FAIL")
                       for lbl, good, det in checks)
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num:02d} {name}: {detail}")
    return ok


def test_criterion_01_zero_exponent_exactness():
    t0 = time.monotonic()
    ident = make_system(BASE, identity_fiber())
    rot = make_system(BASE, rotation_fiber(GOLDEN))
    est_id = center_lyapunov_measure(ident, n_orbits=10, n_steps=100, seed=1)
    est_rot = center_lyapunov_measure(rot, n_orbits=1000, n_steps=10_000,
                                      seed=1)
    reg_id = classify_regime(physical_measure_census(
        ident, (6, 6, 6), n=10_000, burn_in=100, seed=1,
        rep_orbits=1, rep_steps=1))
    reg_rot = classify_regime(physical_measure_census(
        rot, (6, 6, 6), n=10_000, burn_in=100, seed=1,
        rep_orbits=1, rep_steps=1))
    elapsed = time.monotonic() - t0
    checks = [
        ("id_exact", abs(est_id.mean) < 1e-12, f"{est_id.mean:.2e}"),
        ("rot_statistical", abs(est_rot.mean) < 1e-3, f"{est_rot.mean:.2e}"),
        ("regime_id", reg_id.kind == "RotationLike", reg_id.kind),
        ("regime_rot", reg_rot.kind == "RotationLike", reg_rot.kind),
        ("runtime", elapsed < 30.0, f"{elapsed:.1f}s"),
    ]
    assert report(1, "zero-exponent exactness", checks)


def test_criterion_02_mostly_contracting_product():
    t0 = time.monotonic()
    ms = make_system(BASE, morse_smale_fiber(0.5, 2))
    census = physical_measure_census(ms, (20, 20, 20), n=100_000,
                                     burn_in=1000, seed=11)
    disk = make_udisk(ms, PhasePoint.of(0.2, 0.6, 0.3), length=0.01)
    mc = mostly_contracting_test(ms, disk, 1000, 2000, seed=11)
    elapsed = time.monotonic() - t0
    lam = census.clusters[0].exponent.mean if census.clusters else np.nan
    checks = [
        ("clusters", census.cluster_count == 1, str(census.cluster_count)),
        ("basin", census.clusters[0].basin_fraction >= 0.99,
         f"{census.clusters[0].basin_fraction:.3f}"),
        ("exponent", abs(lam - np.log(0.5)) < 0.01, f"{lam:.5f}"),
        ("mc_fraction", mc.fraction_negative >= 0.99,
         f"{mc.fraction_negative:.3f}"),
        ("runtime", elapsed < 120.0, f"{elapsed:.1f}s"),
    ]
    assert report(2, "mostly contracting product", checks)


def test_criterion_03_two_measure_bound():
    ms4 = make_system(BASE, morse_smale_fiber(0.5, 4))
    census = physical_measure_census(ms4, (20, 20, 20), n=100_000,
                                     burn_in=1000, seed=11)
    fracs = sorted(c.basin_fraction for c in census.clusters)
    if census.cluster_count == 2:
        m0 = census.clusters[0].measure.theta_marginal()
        m1 = census.clusters[1].measure.theta_marginal()
        overlap = float(np.minimum(m0, m1).sum())
    else:
        overlap = np.nan
    checks = [
        ("clusters", census.cluster_count == 2, str(census.cluster_count)),
        ("basins", all(abs(f - 0.5) < 0.05 for f in fracs),
         "/".join(f"{f:.3f}" for f in fracs)),
        ("theta_overlap", overlap < 0.01, f"{overlap:.4f}"),
    ]
    assert report(3, "at most s/2 physical measures", checks)


def test_criterion_04_statistical_stability():
    res = stability_sweep(
        lambda a: make_system(BASE, morse_smale_fiber(a, 2)),
        0.3, 0.7, 9, seed=11)
    counts = [r.cluster_count for r in res.rows]
    checks = [
        ("counts", all(c == 1 for c in counts), str(counts)),
        ("displacement", res.max_adjacent_displacement <= 5 * res.spacing,
         f"{res.max_adjacent_displacement:.2e} (bound "
         f"{5 * res.spacing:.2e})"),
    ]
    assert report(4, "statistical stability", checks)


def test_criterion_05_holonomy_convergence_and_laws():
    sys = make_system(BASE, coupled_fiber(0.3, 0.2))
    x = BasePoint(0.0, 0.0)
    ys = BasePoint(*(np.array([0.0, 0.0]) + 0.01 * BASE.e_s) % 1.0)
    yu = BasePoint(*(np.array([0.0, 0.0]) + 0.01 * BASE.e_u) % 1.0)
    hs = stable_holonomy(sys, x, ys)
    hu = unstable_holonomy(sys, x, yu)
    bound = BASE.lambda_s + 0.05
    ratios = []
    for h in (hs, hu):
        g = np.asarray(h.gaps)
        ratios.append(float(np.max(g[6:] / g[5:-1])))
    worst = max(ratios)
    h_self = stable_holonomy(sys, x, x)
    self_err = float(np.max(np.abs(wrap(h_self.samples - h_self.grid))))
    # equivariance: h_{f x, f y} o f = f o h_{x, y} on the fibers
    fx = BasePoint(*BASE.apply_array(x.u, x.v))
    fy = BasePoint(*BASE.apply_array(ys.u, ys.v))
    h2 = stable_holonomy(sys, fx, fy)
    thetas = np.arange(100) / 100.0
    lhs = h2.evaluate(sys.apply_array(np.full(100, x.u), np.full(100, x.v),
                                      thetas)[2])
    rhs = sys.apply_array(np.full(100, ys.u), np.full(100, ys.v),
                          hs.evaluate(thetas))[2]
    equiv = float(np.max(np.abs(wrap(lhs - rhs))))
    checks = [
        ("gap_ratio", worst <= bound,
         f"{worst:.4f} (bound {bound:.4f}, s/u={ratios[0]:.4f}/"
         f"{ratios[1]:.4f})"),
        ("self_id", self_err <= 1e-9, f"{self_err:.2e}"),
        ("equivariance", equiv < 5e-9, f"{equiv:.2e}"),
    ]
    assert report(5, "holonomy convergence and laws", checks)


def test_criterion_06_accessibility_probe():
    x = BasePoint(0.3, 0.2)
    prod_disp = []
    for fib in (morse_smale_fiber(0.5, 2), rotation_fiber(GOLDEN)):
        prod = make_system(BASE, fib)
        prod_disp.append(su_loop_holonomy(prod, x, 0.1,
                                          grid_size=256).displacement)
    sys = make_system(BASE, coupled_fiber(0.3, 0.2))
    d_ref = su_loop_holonomy(sys, x, 0.1, grid_size=1024,
                             tol=1e-9).displacement
    d_grid = su_loop_holonomy(sys, x, 0.1, grid_size=2048,
                              tol=1e-9).displacement
    d_tol = su_loop_holonomy(sys, x, 0.1, grid_size=1024,
                             tol=1e-8).displacement
    d_half = su_loop_holonomy(sys, x, 0.05, grid_size=1024,
                              tol=1e-9).displacement
    spread = max(abs(d_grid - d_ref), abs(d_tol - d_ref)) / d_ref
    ratio = d_ref / d_half
    checks = [
        ("product_trivial", max(prod_disp) < 1e-9,
         f"{max(prod_disp):.2e}"),
        ("nontrivial", d_ref > 1e-4, f"{d_ref:.4e}"),
        ("stability", spread < 0.10, f"{100 * spread:.2f}%"),
        ("leg_ratio", 3.0 <= ratio <= 5.0, f"{ratio:.2f}"),
    ]
    assert report(6, "accessibility probe", checks)


def test_criterion_07_singular_conjugacy():
    cyl0 = make_cylinder(0.2, 0.0)
    h0 = cylinder_center_holonomy(cyl0, B=1024, n=64)
    ent0 = holonomy_singularity_report(h0, 512).normalized_entropy
    cyl = make_cylinder(0.2, 0.05)
    h = cylinder_center_holonomy(cyl, B=1024, n=64)
    ent = holonomy_singularity_report(h, 512).normalized_entropy
    residual = cylinder_conjugacy_residual(cyl, h)
    slope, _, _ = cylinder_jacobian_drift(cyl, h)
    expected = -np.log((2 + 2 * np.pi * 0.05) / 2.0)
    checks = [
        ("eps0_entropy", abs(ent0 - 1.0) < 1e-6, f"{ent0:.8f}"),
        ("eps05_entropy", ent < 0.9, f"{ent:.4f}"),
        ("residual", residual < 1e-6, f"{residual:.2e}"),
        ("drift_slope", abs(slope - expected) < 0.2 * abs(expected),
         f"{slope:.6f} (expected {expected:.6f})"),
    ]
    assert report(7, "singular conjugacy (cylinder)", checks)


def test_criterion_08_atomicity_vs_invariant_metric():
    ms = make_system(BASE, morse_smale_fiber(0.5, 2))
    res = atomicity_test(ms, BasePoint(0.1, 0.3), 100)
    rot = make_system(BASE, rotation_fiber(GOLDEN))
    res2 = atomicity_test(rot, BasePoint(0.1, 0.3), 10_000)
    checks = [
        ("clusters", res.cluster_count == 1, str(res.cluster_count)),
        ("decay", abs(res.decay_rate - np.log(0.5)) < 0.05,
         f"{res.decay_rate:.4f}"),
        ("rotation_drift", res2.diameter_drift < 1e-9,
         f"{res2.diameter_drift:.2e}"),
    ]
    assert report(8, "atomicity vs invariant metric", checks)


def test_criterion_09_hyperbolic_times():
    ms = make_system(BASE, morse_smale_fiber(0.5, 2))
    rng = derive_rng(7, "hyperbolic")
    n_orbits, c2, n = 100, 0.3, 100_000
    dens = []
    for k in range(0, n_orbits, 25):
        u0, v0, t0 = rng.random(25), rng.random(25), rng.random(25)
        dens.append(contraction_time_densities(ms, u0, v0, t0, c2, 1, n))
    dens = np.concatenate(dens)
    frac = float(np.mean(dens >= 0.3))
    # independent re-verification on a handful of orbits
    rng2 = derive_rng(7, "hyperbolic")
    u0, v0, t0 = rng2.random(25), rng2.random(25), rng2.random(25)
    violations = missing = 0
    for i in range(5):
        rec = hyperbolic_times(ms, PhasePoint.of(u0[i], v0[i], t0[i]),
                               c2, 1, n)
        rep = verify_contraction_at_hyperbolic_times(rec, ms)
        violations += len(rep.violations)
        missing += rep.missing
    checks = [
        ("density_frac", frac >= 0.99, f"{frac:.3f} (min density "
         f"{dens.min():.3f})"),
        ("violations", violations == 0, str(violations)),
        ("missing", missing == 0, str(missing)),
    ]
    assert report(9, "hyperbolic times", checks)


def test_criterion_10_gibbs_ustate_diagnostics():
    lin = make_system(BASE, identity_fiber())
    disk = make_udisk(lin, PhasePoint.of(0.2, 0.6, 0.3), length=0.01)
    meas = cesaro_ustate(lin, disk, 1000, (64, 64, 1), seed=3)
    base = meas.base_marginal()
    tv = 0.5 * float(np.abs(base - 1.0 / base.size).sum())
    r_lin = unstable_density_ratio(lin, disk, 12)
    ms = make_system(BASE, morse_smale_fiber(0.5, 2))
    d1 = make_udisk(ms, PhasePoint.of(0.2, 0.6, 0.3), length=0.01,
                    n_samples=10_000)
    d2 = make_udisk(ms, PhasePoint.of(0.2, 0.6, 0.3), length=0.01,
                    n_samples=20_000)
    r1 = unstable_density_ratio(ms, d1, 10)
    r2 = unstable_density_ratio(ms, d2, 10)
    factor = max(r1, r2) / min(r1, r2)
    checks = [
        ("tv_to_uniform", tv < 0.05, f"{tv:.4f}"),
        ("linear_ratio", r_lin < 1.1, f"{r_lin:.6f}"),
        ("stable_ratio", factor < 2.0, f"factor {factor:.4f} "
         f"({r1:.4f}/{r2:.4f})"),
    ]
    assert report(10, "Gibbs u-state diagnostics", checks)


def test_criterion_11_block_recurrence():
    ms = make_system(BASE, morse_smale_fiber(0.5, 2))
    disk = make_udisk(ms, PhasePoint.of(0.31, 0.17, 0.3), length=0.01)
    attractor = CsBlock(u_interval=(-0.1, 0.1), v_interval=(-0.1, 0.1),
                        theta_interval=(0.4, 0.6))
    repeller = CsBlock(u_interval=(-0.1, 0.1), v_interval=(-0.1, 0.1),
                       theta_interval=(-0.05, 0.05))
    r_att = block_recurrence(ms, disk, attractor, 200, seed=11)
    r_rep = block_recurrence(ms, disk, repeller, 200, seed=11)
    tail = float(r_rep.fractions[100:].max())
    checks = [
        ("attractor_hits", r_att.hit_count >= 20, str(r_att.hit_count)),
        ("repeller_tail", tail <= 0.01, f"{tail:.4f}"),
    ]
    assert report(11, "block recurrence", checks)


def test_criterion_12_leaf_space_exactness():
    counts = [len(periodic_base_points(BASE, n)) for n in (1, 2, 3)]
    brute_ok = True
    for n, cnt in zip((1, 2, 3), counts):
        mn = np.linalg.matrix_power(BASE.matrix.astype(np.int64), n)
        d = abs(int(round(np.linalg.det(mn - np.eye(2, dtype=np.int64)))))
        brute = {(i, j) for i in range(d) for j in range(d)
                 if np.all((mn @ np.array([i, j]) - np.array([i, j]))
                           % d == 0)}
        got = {(round(p.u * d), round(p.v * d))
               for p in periodic_base_points(BASE, n)}
        brute_ok = brute_ok and got == brute and len(brute) == cnt
    x1 = LeafPoint(0.31, 0.42)
    x2 = LeafPoint(0.35, 0.40)
    b = bracket(BASE, x1, x2)
    d1 = wrap([b.u - x1.u, b.v - x1.v])
    d2 = wrap([b.u - x2.u, b.v - x2.v])
    cross_s = abs(d1[0] * BASE.e_s[1] - d1[1] * BASE.e_s[0])
    cross_u = abs(d2[0] * BASE.e_u[1] - d2[1] * BASE.e_u[0])
    # measured contraction along W^s: iterate x1 and its bracket partner
    p = np.array([x1.u, x1.v])
    q = np.array([b.u, b.v])
    ratios = []
    for _ in range(8):
        d_now = float(np.linalg.norm(wrap(q - p)))
        p = np.array(BASE.apply_array(*p))
        q = np.array(BASE.apply_array(*q))
        ratios.append(float(np.linalg.norm(wrap(q - p))) / d_now)
    rate = float(np.mean(ratios))
    checks = [
        ("periodic_counts", counts == [1, 5, 16], str(counts)),
        ("brute_force", brute_ok, str(brute_ok)),
        ("bracket_identities", max(cross_s, cross_u) < 1e-12,
         f"{max(cross_s, cross_u):.2e}"),
        ("contraction_rate", abs(rate - BASE.lambda_s) < 0.01,
         f"{rate:.6f} (lambda_s {BASE.lambda_s:.6f})"),
    ]
    assert report(12, "leaf-space exactness", checks)


DETERMINISM_CASES = [
    ("census", {"fiber": "morse_smale", "a": "0.5", "s": "2"},
     {"n": "3000", "burn_in": "200", "grid": "4 4 4", "rep_orbits": "4",
      "rep_steps": "500"}),
    ("lyapunov", {"fiber": "rotation"}, {"n_orbits": "100",
                                         "n_steps": "1000"}),
    ("ustate", {"fiber": "identity"}, {"n": "200", "grid": "16 16 4"}),
    ("holonomy", {"fiber": "coupled", "a": "0.3", "b": "0.2"},
     {"grid_size": "256"}),
    ("loop", {"fiber": "coupled", "a": "0.3", "b": "0.2"},
     {"grid_size": "256", "leg": "0.05"}),
    ("cylinder", {"type": "cylinder", "c": "0.2", "eps": "0.05"},
     {"grid_size": "256", "depth": "48"}),
    ("atomicity", {"fiber": "morse_smale", "a": "0.5", "s": "2"},
     {"n": "80"}),
    ("recurrence", {"fiber": "morse_smale", "a": "0.5", "s": "2"},
     {"horizon": "100", "theta_center": "0.5", "disk_samples": "4000"}),
    ("stability", {"fiber": "morse_smale"},
     {"steps": "3", "n": "2000", "grid": "4 4 4"}),
    ("leafspace", {}, {"orbit_length": "50000"}),
]


def test_criterion_13_determinism(tmp_path):
    checks = []
    for kind, sysd, params in DETERMINISM_CASES:
        cfg = validate_config(sysd, kind, 7, params)
        m1 = run(cfg, str(tmp_path / f"{kind}_w1"), workers=1)
        m8 = run(cfg, str(tmp_path / f"{kind}_w8"), workers=8)
        d1 = [f["sha256"] for f in m1.files]
        d8 = [f["sha256"] for f in m8.files]
        same = (d1 == d8 and m1.status == m8.status and len(d1) > 0)
        checks.append((kind, same, "identical" if same else "DIVERGED"))
    assert report(13, "worker-count determinism", checks)

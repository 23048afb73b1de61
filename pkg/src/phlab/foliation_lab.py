"""Strong stable/unstable holonomies between center fibers, su-loop
(accessibility) probes, and absolute-continuity / singularity / atomicity
diagnostics, including the boundary-conjugacy test for the cylinder example.

Holonomies are computed by the orbitwise limit: push a fiber coordinate
forward n steps along the source orbit and pull it back along the target
orbit.  For a linear base the stable/unstable offset between the two orbits
is contracted exactly by the eigenvalue, so the limit converges at geometric
rate lambda_s.  Each HolonomyMap retains an exact pointwise evaluator, so
compositions and identities can be checked without interpolation error.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import subspace_angles

from .circle import mod1, circle_dist, wrap_half
from .phase_maps import (BasePoint, CylinderSystem, NonConvergenceError,
                         ValidationError)

ANGLE_TOL = 1e-6


@dataclass
class HolonomyMap:
    source: tuple               # base point of the source fiber
    target: tuple
    grid: np.ndarray            # theta sample nodes
    samples: np.ndarray         # image angles at the nodes
    n_used: int
    cauchy_gap: float
    gaps: np.ndarray            # sup-gap history over the iteration
    evaluator: Optional[Callable] = field(default=None, repr=False)

    def evaluate(self, theta):
        """Image of arbitrary angles: exact re-evaluation when available,
        otherwise monotone piecewise-linear interpolation of the samples."""
        if self.evaluator is not None:
            return self.evaluator(np.asarray(theta, dtype=float))
        return self._interpolate(theta)

    def _interpolate(self, theta):
        theta = mod1(theta)
        b = len(self.grid)
        lift = np.concatenate((self.samples,
                               [self.samples[0] + 1.0]))
        # unwrap into an increasing lift
        incr = np.concatenate(([lift[0]], np.cumsum(mod1(np.diff(lift)))))
        incr += lift[0] - incr[0]
        nodes = np.concatenate((self.grid, [self.grid[0] + 1.0]))
        return mod1(np.interp(theta, nodes, incr))

    def is_monotone(self):
        """Degree-1 circular order preservation of the sampled images."""
        d = mod1(np.diff(np.concatenate((self.samples, [self.samples[0]]))))
        return bool(abs(d.sum() - 1.0) < 1e-9)

    def jacobian_samples(self):
        d = mod1(np.diff(np.concatenate((self.samples, [self.samples[0]]))))
        return d * len(self.grid)


def _validate_offset(base, x, y, along):
    """Shortest representative of y - x, required parallel to `along`."""
    d = wrap_half(np.array([y.u - x.u, y.v - x.v]))
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        return 0.0
    cross = abs(d[0] * along[1] - d[1] * along[0])
    if cross / norm > ANGLE_TOL:
        raise ValidationError(
            "target point is not on the required invariant line "
            f"(angular deviation {cross / norm:.2e})")
    return float(d @ along)


def _require_skew(sys):
    if not sys.is_skew:
        raise ValidationError("holonomy limits require a skew product "
                              "(trivial fiber-bundle identification)")


def _holonomy_limit(sys, u_src, u_tgt, grid, tol, n_max, kind):
    """Shared iteration: compose fiber maps along the source orbit, invert
    along the target orbit; `kind` selects forward (stable) or backward
    (unstable) composition.  u_src/u_tgt are the orbits' first base
    coordinates (the catalog fibers depend on the base through u only)."""
    fiber = sys.fiber
    h_prev = grid.copy()
    gaps = []
    fwd = grid.copy()          # running source-orbit composition
    n_used = None
    for n in range(1, n_max + 1):
        if kind == "stable":
            fwd = fiber.value(u_src[n - 1], fwd)
        else:
            fwd = fiber.invert(u_src[n], fwd)
        cur = fwd.copy()
        if kind == "stable":
            for j in range(n - 1, -1, -1):
                cur = fiber.invert(u_tgt[j], cur)
        else:
            for j in range(n, 0, -1):
                cur = fiber.value(u_tgt[j], cur)
        gap = float(np.max(circle_dist(cur, h_prev)))
        gaps.append(gap)
        h_prev = cur
        if gap < tol:
            n_used = n
            break
        # gaps decay geometrically until rounding noise takes over, after
        # which they grow persistently; isolated one-step rebounds are
        # normal (the coupling derivative can vanish along the orbit)
        if (len(gaps) >= 6 and gap > 10.0 * min(gaps)
                and all(gaps[-i] > gaps[-i - 1] for i in range(1, 6))):
            raise NonConvergenceError(
                f"{kind} holonomy gap grew back to {gap:.2e} after reaching "
                f"{min(gaps):.2e}; tol {tol} is below the numerical floor")
    if n_used is None:
        raise NonConvergenceError(
            f"{kind} holonomy did not reach tol {tol} within {n_max} steps")
    # a circle map must have degree 1; deep compositions can collapse the
    # grid below float resolution, which shows up as a degenerate limit
    degree = float(mod1(np.diff(np.concatenate((h_prev,
                                                [h_prev[0]])))).sum())
    if abs(degree - 1.0) > 0.5:
        raise NonConvergenceError(
            f"{kind} holonomy degenerated before reaching tol {tol} "
            "(tolerance below the attainable floating-point floor)")
    return h_prev, n_used, np.array(gaps)


def _make_evaluator(sys, u_src, u_tgt, n_used, kind):
    fiber = sys.fiber

    def evaluate(theta):
        a = mod1(np.asarray(theta, dtype=float))
        if kind == "stable":
            for j in range(n_used):
                a = fiber.value(u_src[j], a)
            for j in range(n_used - 1, -1, -1):
                a = fiber.invert(u_tgt[j], a)
        else:
            for j in range(1, n_used + 1):
                a = fiber.invert(u_src[j], a)
            for j in range(n_used, 0, -1):
                a = fiber.value(u_tgt[j], a)
        return a
    return evaluate


def stable_holonomy(sys, x: BasePoint, y: BasePoint, grid_size=1024,
                    tol=1e-9, n_max=200) -> HolonomyMap:
    """Holonomy from the fiber over x to the fiber over y on W^s(x):
    the limit of (n-step fiber composition along y)^{-1} composed with the
    n-step fiber composition along x."""
    _require_skew(sys)
    s0 = _validate_offset(sys.base, x, y, sys.base.e_s)
    n_orbit = n_max + 1
    u_src = np.empty(n_orbit)
    u_tgt = np.empty(n_orbit)
    cu, cv = np.float64(x.u), np.float64(x.v)
    for j in range(n_orbit):
        u_src[j] = cu
        # the target orbit is the source orbit plus the exactly contracted
        # stable offset (exact for a linear base)
        u_tgt[j] = mod1(cu + s0 * sys.base.sig_s ** j * sys.base.e_s[0])
        cu, cv = sys.base.apply_array(cu, cv)
    grid = np.arange(grid_size) / grid_size
    samples, n_used, gaps = _holonomy_limit(sys, u_src, u_tgt, grid, tol,
                                            n_max, "stable")
    return HolonomyMap(source=(x.u, x.v), target=(y.u, y.v), grid=grid,
                       samples=samples, n_used=n_used,
                       cauchy_gap=float(gaps[-1]), gaps=gaps,
                       evaluator=_make_evaluator(sys, u_src, u_tgt, n_used,
                                                 "stable"))


def unstable_holonomy(sys, x: BasePoint, y: BasePoint, grid_size=1024,
                      tol=1e-9, n_max=200) -> HolonomyMap:
    """Dual construction along backward orbits, for y on W^u(x)."""
    _require_skew(sys)
    u0 = _validate_offset(sys.base, x, y, sys.base.e_u)
    n_orbit = n_max + 1
    u_src = np.empty(n_orbit)
    u_tgt = np.empty(n_orbit)
    cu, cv = np.float64(x.u), np.float64(x.v)
    inv_sig = 1.0 / sys.base.sig_u
    for j in range(n_orbit):
        u_src[j] = cu
        u_tgt[j] = mod1(cu + u0 * inv_sig ** j * sys.base.e_u[0])
        cu, cv = sys.base.apply_inverse_array(cu, cv)
    grid = np.arange(grid_size) / grid_size
    samples, n_used, gaps = _holonomy_limit(sys, u_src, u_tgt, grid, tol,
                                            n_max, "unstable")
    return HolonomyMap(source=(x.u, x.v), target=(y.u, y.v), grid=grid,
                       samples=samples, n_used=n_used,
                       cauchy_gap=float(gaps[-1]), gaps=gaps,
                       evaluator=_make_evaluator(sys, u_src, u_tgt, n_used,
                                                 "unstable"))


@dataclass
class SuLoopResult:
    holonomy: HolonomyMap
    displacement: float
    corners: list
    legs: list


def su_loop_holonomy(sys, x: BasePoint, leg: float, grid_size=1024,
                     tol=1e-9, n_max=200) -> SuLoopResult:
    """Composition of the four holonomies around the su-parallelogram
    x -> x + leg e_u -> + leg e_s -> - leg e_u -> - leg e_s (closes exactly
    for a linear base).  The sup displacement from the identity is the
    accessibility probe: zero for product systems, a commutator-sized
    (O(leg^2)) obstruction otherwise."""
    e_u, e_s = sys.base.e_u, sys.base.e_s
    c0 = np.array([x.u, x.v])
    c1 = mod1(c0 + leg * e_u)
    c2 = mod1(c1 + leg * e_s)
    c3 = mod1(c2 - leg * e_u)
    corners = [BasePoint(*c0), BasePoint(*c1), BasePoint(*c2), BasePoint(*c3)]
    legs = [
        unstable_holonomy(sys, corners[0], corners[1], grid_size, tol, n_max),
        stable_holonomy(sys, corners[1], corners[2], grid_size, tol, n_max),
        unstable_holonomy(sys, corners[2], corners[3], grid_size, tol, n_max),
        stable_holonomy(sys, corners[3], corners[0], grid_size, tol, n_max),
    ]
    grid = np.arange(grid_size) / grid_size
    cur = grid.copy()
    for h in legs:
        cur = h.evaluate(cur)

    def evaluate(theta):
        a = np.asarray(theta, dtype=float)
        for h in legs:
            a = h.evaluate(a)
        return a

    loop = HolonomyMap(source=(x.u, x.v), target=(x.u, x.v), grid=grid,
                       samples=cur,
                       n_used=max(h.n_used for h in legs),
                       cauchy_gap=max(h.cauchy_gap for h in legs),
                       gaps=np.array([h.cauchy_gap for h in legs]),
                       evaluator=evaluate)
    displacement = float(np.max(circle_dist(cur, grid)))
    return SuLoopResult(holonomy=loop, displacement=displacement,
                        corners=corners, legs=legs)


# ---------------------------------------------------------------------------
# singularity diagnostics


@dataclass
class SingularityReport:
    partition_size: int
    masses: np.ndarray          # image arc length of each uniform source bin
    normalized_entropy: float
    max_mass: float
    jacobian_min: float
    jacobian_max: float


def holonomy_singularity_report(h: HolonomyMap, B: int) -> SingularityReport:
    """Push the uniform B-bin partition through h; near-maximal entropy and
    bounded empirical Jacobians are absolute-continuity evidence, entropy
    collapse is singularity evidence."""
    edges = np.arange(B) / B
    img = h.evaluate(edges)
    masses = mod1(np.diff(np.concatenate((img, [img[0]]))))
    total = masses.sum()
    if not np.isclose(total, 1.0, atol=1e-9):
        raise ValueError("image masses do not close up to a degree-1 cycle")
    masses = masses / total
    pos = masses[masses > 0]
    entropy = float(-(pos * np.log(pos)).sum() / np.log(B))
    jac = masses * B
    return SingularityReport(partition_size=B, masses=masses,
                             normalized_entropy=entropy,
                             max_mass=float(masses.max()),
                             jacobian_min=float(jac.min()),
                             jacobian_max=float(jac.max()))


# ---------------------------------------------------------------------------
# cylinder boundary conjugacy (Example-style singular holonomy)


def _branch_cuts(cyl: CylinderSystem):
    """Points c_j with lifted top-boundary map equal to j, j = 0..d."""
    lift, dlift = cyl.boundary_lift(1.0)
    d = cyl.base_degree
    cuts = np.empty(d + 1)
    cuts[0], cuts[d] = 0.0, 1.0
    for j in range(1, d):
        y = j / d
        for _ in range(100):
            step = (lift(y) - j) / dlift(y)
            y -= step
            if abs(step) < 1e-15:
                break
        cuts[j] = y
    return cuts


def _inverse_branch(cyl, cuts, z, j):
    """Inverse branch j of the top-boundary map, vectorized and safeguarded."""
    lift, dlift = cyl.boundary_lift(1.0)
    target = np.asarray(z, dtype=float) + np.asarray(j, dtype=float)
    lo = cuts[np.asarray(j, dtype=int)]
    hi = cuts[np.asarray(j, dtype=int) + 1]
    y = (lo + hi) / 2.0
    for _ in range(200):
        f = lift(y) - target
        if np.max(np.abs(f)) < 1e-14 or np.max(hi - lo) < 1e-15:
            return y
        hi = np.where(f > 0, y, hi)
        lo = np.where(f < 0, y, lo)
        y_new = y - f / dlift(y)
        bad = (y_new <= lo) | (y_new >= hi)
        y = np.where(bad, 0.5 * (lo + hi), y_new)
    raise NonConvergenceError("inverse branch of boundary map did not converge")


def cylinder_center_holonomy(cyl: CylinderSystem, B=1024, n=64) -> HolonomyMap:
    """The holonomy h: C0 -> C1 conjugating the two boundary expanding maps,
    h(b0(x)) = b1(h(x)), h(0) = 0, computed by matching itineraries: pull the
    identity back through n levels of inverse branches of the top map, using
    the bottom map's digits."""
    cuts = _branch_cuts(cyl)
    d = cyl.base_degree

    def evaluate(x, depth=n):
        x = mod1(np.asarray(x, dtype=float))
        digits = np.empty((depth, x.size), dtype=int)
        cur = x.ravel().copy()
        for i in range(depth):
            scaled = d * cur
            digits[i] = np.minimum(np.floor(scaled).astype(int), d - 1)
            cur = scaled - digits[i]
        y = cur
        for i in range(depth - 1, -1, -1):
            y = _inverse_branch(cyl, cuts, y, digits[i])
        return y.reshape(x.shape)

    grid = np.arange(B) / B
    samples = evaluate(grid)
    prev = evaluate(grid, depth=n - 1)
    gap = float(np.max(circle_dist(samples, prev)))
    return HolonomyMap(source=(0.0, 0.0), target=(0.0, 1.0), grid=grid,
                       samples=samples, n_used=n, cauchy_gap=gap,
                       gaps=np.array([gap]), evaluator=evaluate)


def cylinder_conjugacy_residual(cyl: CylinderSystem, h: HolonomyMap):
    """sup |h(b0(x)) - b1(h(x))| over the sample grid."""
    b0 = cyl.boundary_map(0.0)
    b1 = cyl.boundary_map(1.0)
    lhs = h.evaluate(b0(h.grid))
    rhs = b1(h.evaluate(h.grid))
    return float(np.max(circle_dist(lhs, rhs)))


def cylinder_jacobian_drift(cyl: CylinderSystem, h: HolonomyMap, k_max=30,
                            k_min=5):
    """Empirical log-Jacobian of h at the fixed point 0 across depths:
    r_k = log(h(d^{-k}) / d^{-k}).  A finite positive derivative at 0 would
    make r_k converge; a multiplier mismatch between the two boundary maps
    makes it drift linearly with slope log(d / (d + 2 pi eps t))."""
    d = cyl.base_degree
    ks = np.arange(1, k_max + 1)
    pts = d ** (-ks.astype(float))
    vals = h.evaluate(pts) if h.evaluator is None else np.array(
        [float(h.evaluator(np.array([p]), depth=int(k) + 15)[0])
         for p, k in zip(pts, ks)])
    r = np.log(vals / pts)
    sel = ks >= k_min
    slope = float(np.polyfit(ks[sel], r[sel], 1)[0])
    return slope, ks, r


# ---------------------------------------------------------------------------
# atomicity (fiber contraction) test


@dataclass
class AtomicityResult:
    cluster_count: int
    max_cluster_diameter: float
    decay_rate: float            # exponential fit of the fiber extent, nats/step
    diameter_drift: float        # sup |extent_t - extent_0|
    extents: np.ndarray          # fiber extent (1 - largest circular gap) per step


def _circular_extent(thetas):
    s = np.sort(mod1(thetas))
    gaps = np.diff(np.concatenate((s, [s[0] + 1.0])))
    return 1.0 - float(np.max(gaps))


def _circular_clusters(thetas, radius):
    s = np.sort(mod1(thetas))
    gaps = np.diff(np.concatenate((s, [s[0] + 1.0])))
    breaks = int(np.count_nonzero(gaps > radius))
    count = max(breaks, 1)
    if breaks == 0:
        return 1, _circular_extent(thetas)
    # diameters of the arcs between break gaps
    idx = np.nonzero(gaps > radius)[0]
    diam = 0.0
    m = len(s)
    for a, b in zip(idx, np.roll(idx, -1)):
        seg = (b - a) % m
        if seg > 1:
            width = mod1(s[(a + seg) % m] - s[(a + 1) % m])
            diam = max(diam, width)
    return count, diam


def atomicity_test(sys, x: BasePoint, n: int, m_samples=256,
                   cluster_radius=1e-6) -> AtomicityResult:
    """Iterate a full fiber of uniform points over x and watch it contract:
    a negative center exponent collapses the fiber onto finitely many points
    (atomic disintegration), a fiber isometry keeps its extent constant."""
    if n < 1:
        raise ValueError("need n >= 1")
    thetas = (np.arange(m_samples) + 0.5) / m_samples
    u = np.full(m_samples, float(x.u))
    v = np.full(m_samples, float(x.v))
    t = thetas.copy()
    extents = np.empty(n + 1)
    extents[0] = _circular_extent(t)
    for j in range(n):
        u, v, t = sys.apply_array(u, v, t)
        extents[j + 1] = _circular_extent(t)
    count, diam = _circular_clusters(t, cluster_radius)
    window = (extents > 1e-13) & (extents < 1e-2)
    if np.count_nonzero(window) >= 5:
        steps = np.nonzero(window)[0]
        rate = float(np.polyfit(steps, np.log(extents[window]), 1)[0])
    else:
        rate = 0.0
    drift = float(np.max(np.abs(extents - extents[0])))
    return AtomicityResult(cluster_count=count, max_cluster_diameter=diam,
                           decay_rate=rate, diameter_drift=drift,
                           extents=extents)


# ---------------------------------------------------------------------------
# transversality consistency check


@dataclass
class TransversalityReport:
    passed: bool
    plane_angle: float           # dihedral angle between cs and cu tangent planes
    angle_floor: float
    unique_intersection: bool
    max_center_mismatch: float   # deviation of the intersection fiber from W^c


def transverse_intersection_check(sys, x: BasePoint = None, chart=0.2,
                                  probe=1e-3, grid_size=64) -> TransversalityReport:
    """Verify that the local cs-leaf (stable base line x fiber) and cu-leaf
    (unstable base line carried by u-holonomy) meet in exactly one fiber per
    chart, and that their tangent planes stay transverse."""
    _require_skew(sys)
    if chart >= 0.45:
        raise ValidationError("chart exceeds the torus injectivity scale")
    if x is None:
        x = BasePoint(0.37, 0.61)
    e_u, e_s = sys.base.e_u, sys.base.e_s
    # base lines through x in the two eigendirections meet only at x in chart
    det = float(e_u[0] * e_s[1] - e_u[1] * e_s[0])
    unique = abs(det) > 1e-9
    # cu-leaf near x: fiber carried by the unstable holonomy over a short leg
    y = BasePoint(*mod1(np.array([x.u, x.v]) + probe * e_u))
    h = unstable_holonomy(sys, x, y)
    grid = np.arange(grid_size) / grid_size
    tilt = wrap_half(h.evaluate(grid) - grid) / probe
    cu_dir = np.array([e_u[0], e_u[1], float(np.mean(tilt))])
    cu_plane = np.column_stack((cu_dir / np.linalg.norm(cu_dir),
                                np.array([0.0, 0.0, 1.0])))
    cs_plane = np.column_stack((np.array([e_s[0], e_s[1], 0.0]),
                                np.array([0.0, 0.0, 1.0])))
    angles = subspace_angles(cu_plane, cs_plane)
    plane_angle = float(np.max(angles))
    floor = float(np.arccos(np.clip(abs(e_u @ e_s), -1, 1))) - 0.05
    # at probe -> 0 the carried fiber must return to the center leaf itself
    mismatch = float(np.max(circle_dist(h.evaluate(grid), grid)))
    passed = unique and plane_angle >= floor and mismatch < 10 * probe
    return TransversalityReport(passed=passed, plane_angle=plane_angle,
                                angle_floor=floor, unique_intersection=unique,
                                max_center_mismatch=mismatch)

"""Approximate Gibbs u-states and the physical-measure census.

Gibbs u-states are approximated by Cesaro averages of Lebesgue measure on an
unstable disk pushed forward and binned on a phase-space grid; physical
measures are found by clustering per-orbit Birkhoff signatures and measuring
basin fractions on an initial-condition grid.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import linkage, fcluster
from scipy.spatial.distance import pdist

from .circle import mod1
from .phase_maps import PhasePoint, ValidationError
from .ergodic_stats import ExponentEstimate, ensemble_stats, default_observables
from .parallel import run_chunked


# ---------------------------------------------------------------------------
# unstable disks


@dataclass(frozen=True)
class UDisk:
    """A curve segment tangent to the unstable cone: base anchor + t*direction
    with a sampled theta graph over the arclength parameter t in [0, length].
    """
    anchor: PhasePoint
    direction: np.ndarray     # unit 2-vector in the base
    length: float
    n_samples: int = 10_000
    theta_profile: Optional[np.ndarray] = None  # theta at the sample nodes

    def params(self):
        """Equally spaced arclength parameters (sample midpoints)."""
        return (np.arange(self.n_samples) + 0.5) * (self.length / self.n_samples)

    def sample_points(self, n=None, rng=None):
        """Sample points on the disk: equally spaced, or uniform iid with rng."""
        if rng is not None and n is not None:
            t = np.sort(rng.random(n)) * self.length
        else:
            n = n or self.n_samples
            t = (np.arange(n) + 0.5) * (self.length / n)
        u = mod1(self.anchor.base.u + t * self.direction[0])
        v = mod1(self.anchor.base.v + t * self.direction[1])
        if self.theta_profile is None:
            theta = np.full_like(t, self.anchor.theta)
        else:
            tp = np.asarray(self.theta_profile, dtype=float)
            nodes = np.linspace(0.0, self.length, len(tp))
            theta = mod1(np.interp(t, nodes, tp))
        return u, v, theta


def make_udisk(sys, anchor: PhasePoint, length: float, direction=None,
               n_samples=10_000, theta_profile=None, cone_angle=0.2) -> UDisk:
    """Validate that the disk's tangent lies inside the unstable cone."""
    e_u = sys.base.e_u
    if direction is None:
        direction = e_u.copy()
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    if length <= 0:
        raise ValidationError("disk length must be positive")
    ang = np.arccos(np.clip(abs(float(direction @ e_u)), -1.0, 1.0))
    if ang > cone_angle:
        raise ValidationError(
            f"disk direction at angle {ang:.3g} rad from e_u exceeds the "
            f"unstable cone ({cone_angle} rad)")
    if theta_profile is not None:
        theta_profile = np.asarray(theta_profile, dtype=float)
    return UDisk(anchor=anchor, direction=direction, length=float(length),
                 n_samples=int(n_samples), theta_profile=theta_profile)


def iterate_udisk(sys, disk: UDisk, n: int):
    """The n-th pushforward of the disk's equally weighted sample cloud."""
    if n < 0:
        raise ValueError("n must be >= 0")
    u, v, t = disk.sample_points()
    for _ in range(n):
        u, v, t = sys.apply_array(u, v, t)
    return u, v, t


# ---------------------------------------------------------------------------
# empirical measures


@dataclass
class EmpiricalMeasure:
    dims: tuple                # (n_u, n_v, n_theta)
    weights: np.ndarray        # nonnegative, sums to 1

    def theta_marginal(self):
        return self.weights.sum(axis=(0, 1))

    def base_marginal(self):
        return self.weights.sum(axis=2)

    @classmethod
    def from_counts(cls, counts, dims):
        total = counts.sum()
        if total <= 0:
            raise ValueError("empty histogram")
        return cls(dims=tuple(dims), weights=counts / total)


def _bin_indices(u, v, t, dims):
    nu, nv, nt = dims
    iu = np.minimum((mod1(u) * nu).astype(np.int64), nu - 1)
    iv = np.minimum((mod1(v) * nv).astype(np.int64), nv - 1)
    it = np.minimum((mod1(t) * nt).astype(np.int64), nt - 1)
    return (iu * nv + iv) * nt + it


def histogram_orbit_counts(sys, u, v, t, n_steps, dims, burn_in=0):
    """Accumulate grid counts of an ensemble over n_steps iterates."""
    u, v, t = u.copy(), v.copy(), t.copy()
    counts = np.zeros(int(np.prod(dims)), dtype=np.int64)
    for _ in range(burn_in):
        u, v, t = sys.apply_array(u, v, t)
    for _ in range(n_steps):
        counts += np.bincount(_bin_indices(u, v, t, dims),
                              minlength=counts.size)
        u, v, t = sys.apply_array(u, v, t)
    return counts.reshape(dims)


def cesaro_ustate(sys, disk: UDisk, n: int, dims, seed=0, workers=1) -> EmpiricalMeasure:
    """Histogram of (1/n) sum_{j<n} f^j_* (Lebesgue on the disk)."""
    if n < 1:
        raise ValueError("need n >= 1")
    u0, v0, t0 = disk.sample_points()

    def chunk(sl):
        counts = histogram_orbit_counts(sys, u0[sl], v0[sl], t0[sl], n, dims)
        return {"counts": counts.reshape(1, *dims)}

    res = run_chunked(chunk, len(u0), workers)
    counts = res["counts"].sum(axis=0)
    return EmpiricalMeasure.from_counts(counts, dims)


def unstable_density_ratio(sys, disk: UDisk, n: int, window=None):
    """Max/min ratio of the empirical linear density of the n-th disk image
    along its own arclength, restricted to a base window ((ulo,uhi),(vlo,vhi)).

    A proxy for the conditional-density bounds of Gibbs u-states: bounded
    distortion keeps this ratio bounded as the image is refined.
    """
    u, v, t = iterate_udisk(sys, disk, n)
    # consecutive gaps along the image curve (samples stay ordered on it)
    du = np.abs(np.diff(u))
    dv = np.abs(np.diff(v))
    dt = np.abs(np.diff(t))
    du, dv, dt = (np.minimum(d, 1.0 - d) for d in (du, dv, dt))
    gaps = np.sqrt(du * du + dv * dv + dt * dt)
    if np.any(gaps > 0.25):
        raise ValueError("image undersampled: consecutive gaps exceed 1/4")
    mid_u = mod1(u[:-1] + np.where(np.abs(np.diff(u)) < 0.5, np.diff(u) / 2, 0.0))
    mid_v = mod1(v[:-1] + np.where(np.abs(np.diff(v)) < 0.5, np.diff(v) / 2, 0.0))
    if window is not None:
        (ulo, uhi), (vlo, vhi) = window
        mask = (_in_circle_interval(mid_u, ulo, uhi)
                & _in_circle_interval(mid_v, vlo, vhi))
    else:
        mask = np.ones_like(gaps, dtype=bool)
    sel = gaps[mask]
    if sel.size < 10:
        raise ValueError("insufficient samples in window")
    # density ~ 1/gap, so the density ratio is max gap / min gap
    return float(np.max(sel) / np.min(sel))


# ---------------------------------------------------------------------------
# census


@dataclass
class BirkhoffSignature:
    values: np.ndarray
    point_id: int


@dataclass
class ClusterInfo:
    centroid: np.ndarray
    count: int
    basin_fraction: float
    exponent: ExponentEstimate
    measure: Optional[EmpiricalMeasure]


@dataclass
class MeasureCensus:
    clusters: list
    unassigned_fraction: float
    assignments: np.ndarray      # per-orbit cluster index, -1 if unassigned
    signatures: np.ndarray       # (N, K) per-orbit observable averages
    observable_names: list
    initial_points: np.ndarray   # (N, 3)

    @property
    def cluster_count(self):
        return len(self.clusters)


def grid_initial_points(dims):
    """One interior point per cell of an (n_u, n_v, n_theta) grid.

    The in-cell offsets are irrational, so no base coordinate is rational:
    rational points are periodic under an integer matrix and their Birkhoff
    averages would not equidistribute.
    """
    nu, nv, nt = dims
    cu = (np.arange(nu) + (np.sqrt(2.0) - 1.0)) / nu
    cv = (np.arange(nv) + (np.sqrt(3.0) - 1.0)) / nv
    ct = (np.arange(nt) + (np.sqrt(5.0) - 1.0) / 2.0) / nt
    U, V, T = np.meshgrid(cu, cv, ct, indexing="ij")
    return U.ravel(), V.ravel(), T.ravel()


def _complete_linkage_clusters(signatures, merge_tol):
    """Complete-linkage agglomerative clustering, max-norm threshold."""
    n = signatures.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)
    if n == 1:
        return np.zeros(1, dtype=int)
    z = linkage(pdist(signatures, metric="chebyshev"), method="complete")
    return fcluster(z, t=merge_tol, criterion="distance") - 1


def physical_measure_census(sys, dims, obs=None, n=100_000, burn_in=1000,
                            merge_tol=0.05, seed=0, workers=1,
                            rep_orbits=64, rep_steps=None) -> MeasureCensus:
    """Cluster per-orbit Birkhoff signatures over a grid of initial conditions.

    Orbits whose first-half and second-half window averages differ by more
    than merge_tol (max-norm) are still drifting and reported unassigned.
    Each cluster carries its basin fraction, exponent estimate, and a
    representative empirical measure accumulated from up to `rep_orbits` of
    its members.
    """
    if merge_tol <= 0:
        raise ValueError("merge_tol must be positive")
    if obs is None:
        obs = default_observables()
    u0, v0, t0 = grid_initial_points(dims)
    n_orbits = len(u0)
    res = ensemble_stats(sys, u0, v0, t0, n, burn_in=burn_in, obs=obs,
                         workers=workers)
    sig = res["means"]
    drift = np.max(np.abs(res["half1"] - res["half2"]), axis=1)
    assigned = drift <= merge_tol
    labels = np.full(n_orbits, -1, dtype=int)
    if assigned.any():
        raw = _complete_linkage_clusters(sig[assigned], merge_tol)
        labels[assigned] = raw
    # deterministic cluster order: by descending size, then centroid lex order
    ids = [c for c in np.unique(labels) if c >= 0]
    info = []
    for c in ids:
        members = np.nonzero(labels == c)[0]
        centroid = sig[members].mean(axis=0)
        info.append((len(members), tuple(np.round(centroid, 12)), c, members, centroid))
    info.sort(key=lambda r: (-r[0], r[1]))
    relabel = np.full(n_orbits, -1, dtype=int)
    clusters = []
    rep_steps = rep_steps or min(n, 20_000)
    for new_id, (count, _key, _old, members, centroid) in enumerate(info):
        relabel[members] = new_id
        lyap = res["lyap"][members]
        se = float(lyap.std(ddof=1) / np.sqrt(len(lyap))) if len(lyap) > 1 else 0.0
        est = ExponentEstimate(mean=float(lyap.mean()), std_error=se,
                               n_orbits=len(lyap), n_steps=n)
        reps = members[:rep_orbits]
        counts = histogram_orbit_counts(sys, u0[reps], v0[reps], t0[reps],
                                        rep_steps, dims, burn_in=burn_in)
        clusters.append(ClusterInfo(
            centroid=centroid, count=count,
            basin_fraction=count / n_orbits, exponent=est,
            measure=EmpiricalMeasure.from_counts(counts, dims)))
    return MeasureCensus(
        clusters=clusters,
        unassigned_fraction=float(np.mean(labels < 0)),
        assignments=relabel,
        signatures=sig,
        observable_names=obs.names,
        initial_points=np.column_stack([u0, v0, t0]))


# ---------------------------------------------------------------------------
# regime classification (zero-exponent rigidity vs mostly contracting)


@dataclass(frozen=True)
class Regime:
    kind: str          # "RotationLike" | "MostlyContracting" | "Mixed"
    k: int             # number of physical-measure candidates


def classify_regime(census: MeasureCensus, zero_tol=1e-3) -> Regime:
    """RotationLike: every exponent within zero_tol of zero (invariant fiber
    metric, possibly a continuum of invariant measures); MostlyContracting(k):
    all k exponents negative; Mixed flags under-converged statistics or an
    out-of-hypothesis system."""
    if not census.clusters:
        raise ValueError("census has no clusters")
    exps = [c.exponent.mean for c in census.clusters]
    if all(abs(e) <= zero_tol for e in exps):
        return Regime("RotationLike", len(exps))
    if all(e < -zero_tol for e in exps):
        return Regime("MostlyContracting", len(exps))
    return Regime("Mixed", len(exps))


# ---------------------------------------------------------------------------
# statistical stability sweep


@dataclass
class SweepRow:
    a: float
    cluster_count: int
    centroids: np.ndarray    # (count, K)


@dataclass
class SweepResult:
    rows: list
    max_adjacent_displacement: float
    spacing: float


def _centroid_set_distance(c1, c2):
    """Symmetric Hausdorff distance between centroid sets in max-norm."""
    d = np.max(np.abs(c1[:, None, :] - c2[None, :, :]), axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def stability_sweep(family, a0, a1, steps, dims=(10, 10, 10), n=20_000,
                    burn_in=1000, merge_tol=0.05, seed=0, workers=1) -> SweepResult:
    """Census along a one-parameter family; `family(a)` builds the system."""
    params = np.linspace(a0, a1, steps)
    rows = []
    for a in params:
        census = physical_measure_census(family(float(a)), dims, n=n,
                                         burn_in=burn_in, merge_tol=merge_tol,
                                         seed=seed, workers=workers,
                                         rep_orbits=1, rep_steps=1)
        rows.append(SweepRow(a=float(a), cluster_count=census.cluster_count,
                             centroids=np.array([c.centroid for c in census.clusters])))
    disp = 0.0
    for r1, r2 in zip(rows[:-1], rows[1:]):
        disp = max(disp, _centroid_set_distance(r1.centroids, r2.centroids))
    spacing = float(params[1] - params[0]) if steps > 1 else 0.0
    return SweepResult(rows=rows, max_adjacent_displacement=disp, spacing=spacing)


# ---------------------------------------------------------------------------
# cs-blocks and recurrence


def _in_circle_interval(x, lo, hi):
    width = mod1(hi - lo)
    return mod1(np.asarray(x, dtype=float) - lo) < width


@dataclass(frozen=True)
class CsBlock:
    """A product region: base rectangle times a fiber interval, realized
    around an (attracting) periodic fiber point."""
    u_interval: tuple
    v_interval: tuple
    theta_interval: tuple
    label: str = ""

    def __post_init__(self):
        for lo, hi in (self.u_interval, self.v_interval, self.theta_interval):
            if mod1(hi - lo) <= 0:
                raise ValidationError("block intervals must have positive width")
        if mod1(self.theta_interval[1] - self.theta_interval[0]) >= 1.0:
            raise ValidationError("theta interval must be shorter than the circle")

    def contains(self, u, v, t):
        return (_in_circle_interval(u, *self.u_interval)
                & _in_circle_interval(v, *self.v_interval)
                & _in_circle_interval(t, *self.theta_interval))


@dataclass
class RecurrenceResult:
    times: np.ndarray
    fractions: np.ndarray
    hit_threshold: float
    hit_count: int            # times with fraction >= hit_threshold


def block_recurrence(sys, disk: UDisk, block: CsBlock, horizon: int,
                     seed=0, hit_threshold=0.01, workers=1) -> RecurrenceResult:
    """Fraction of the disk's Lebesgue mass inside the block at each time."""
    u, v, t = disk.sample_points()
    n_pts = len(u)

    def chunk(sl):
        cu, cv, ct = u[sl].copy(), v[sl].copy(), t[sl].copy()
        hits = np.zeros((1, horizon + 1), dtype=np.int64)
        for j in range(horizon + 1):
            hits[0, j] = int(np.count_nonzero(block.contains(cu, cv, ct)))
            if j < horizon:
                cu, cv, ct = sys.apply_array(cu, cv, ct)
        return {"hits": hits}

    res = run_chunked(chunk, n_pts, workers)
    fractions = res["hits"].sum(axis=0) / n_pts
    times = np.arange(horizon + 1)
    return RecurrenceResult(times=times, fractions=fractions,
                            hit_threshold=hit_threshold,
                            hit_count=int(np.count_nonzero(fractions >= hit_threshold)))

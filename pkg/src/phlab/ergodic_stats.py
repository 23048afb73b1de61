"""Orbit statistics: Birkhoff averages, center Lyapunov exponents, the
mostly-contracting test, and contraction-time (Pliss) analysis.

The per-step quantity used throughout is the logarithm of the center
derivative of the fiber map; natural logarithms (nats per iterate)
everywhere.  Ensembles advance all orbits simultaneously as numpy arrays and
are partitioned per orbit index, so results are independent of the worker
count.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .parallel import run_chunked, derive_rng

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class Observable:
    name: str
    fn: Callable  # fn(U, V, T) -> array of values, bounded by 1


class ObservableSet:
    """A finite family of bounded test functions of a phase point."""

    def __init__(self, observables):
        self.observables = list(observables)

    def __len__(self):
        return len(self.observables)

    @property
    def names(self):
        return [o.name for o in self.observables]

    def evaluate(self, u, v, t):
        """Stack observable values; shape (K,) for scalars, (K, N) for arrays."""
        return np.stack([o.fn(u, v, t) for o in self.observables])


def fourier_theta_observable(k, phase):
    if phase == "cos":
        return Observable(f"cos_{k}theta", lambda u, v, t, k=k: np.cos(TWO_PI * k * t))
    return Observable(f"sin_{k}theta", lambda u, v, t, k=k: np.sin(TWO_PI * k * t))


def base_cell_observable(coord, cut=0.5):
    if coord == "u":
        return Observable("u_lt_half", lambda u, v, t: (np.asarray(u) < cut) * 1.0)
    return Observable("v_lt_half", lambda u, v, t: (np.asarray(v) < cut) * 1.0)


def default_observables(k_max=3):
    """The census signature set: Fourier modes in theta plus base-cell flags."""
    obs = []
    for k in range(1, k_max + 1):
        obs.append(fourier_theta_observable(k, "cos"))
        obs.append(fourier_theta_observable(k, "sin"))
    obs.append(base_cell_observable("u"))
    obs.append(base_cell_observable("v"))
    return ObservableSet(obs)


def constant_observable():
    return Observable("one", lambda u, v, t: np.ones_like(np.asarray(t, dtype=float)))


# ---------------------------------------------------------------------------
# single-orbit machinery


def orbit_arrays(sys, p0, n):
    """The orbit f^j(p0), j = 0..n-1, as coordinate arrays (U, V, T)."""
    U = np.empty(n)
    V = np.empty(n)
    T = np.empty(n)
    u, v, t = np.float64(p0.base.u), np.float64(p0.base.v), np.float64(p0.theta)
    for j in range(n):
        U[j], V[j], T[j] = u, v, t
        u, v, t = sys.apply_array(u, v, t)
    return U, V, T


def birkhoff_average(sys, p0, obs: ObservableSet, n, burn_in=0):
    """Time averages (1/n) sum_{j=burn_in}^{burn_in+n-1} obs(f^j p0)."""
    if n < 1 or burn_in < 0:
        raise ValueError("need n >= 1 and burn_in >= 0")
    U, V, T = orbit_arrays(sys, p0, burn_in + n)
    vals = obs.evaluate(U[burn_in:], V[burn_in:], T[burn_in:])
    return vals.mean(axis=1)


def center_log_derivatives(sys, p0, n):
    """log of the center derivative along the first n orbit steps."""
    U, V, T = orbit_arrays(sys, p0, n)
    return np.log(sys.center_derivative_array(U, T))


def center_lyapunov_orbit(sys, p0, n):
    """(1/n) sum log |Df restricted to the center| along the orbit of p0."""
    if n < 1:
        raise ValueError("need n >= 1")
    if sys.fiber.is_isometric:
        return 0.0
    return float(center_log_derivatives(sys, p0, n).mean())


# ---------------------------------------------------------------------------
# ensemble engine


def ensemble_stats(sys, u0, v0, t0, n_steps, burn_in=0, obs=None, workers=1,
                   record_logs=False):
    """Advance an ensemble of orbits, accumulating per-orbit statistics.

    Returns a dict with `lyap` (per-orbit mean log center derivative over the
    post-burn-in window) and, when `obs` is given, per-orbit observable means
    `means` plus first-half/second-half means `half1`, `half2` used for the
    convergence (drift) diagnostic.  With record_logs=True the full per-step
    log-derivative history is kept (shape (N, n_steps)).
    """
    u0 = np.asarray(u0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    n_orbits = u0.shape[0]
    k = len(obs) if obs is not None else 0
    nh = n_steps // 2
    isometric = sys.fiber.is_isometric

    def chunk(sl):
        u = u0[sl].copy()
        v = v0[sl].copy()
        t = t0[sl].copy()
        m = u.shape[0]
        for _ in range(burn_in):
            u, v, t = sys.apply_array(u, v, t)
        lyap = np.zeros(m)
        sums = np.zeros((k, m)) if k else None
        h1 = np.zeros((k, m)) if k else None
        logs = np.empty((m, n_steps)) if record_logs else None
        for j in range(n_steps):
            if not isometric or record_logs:
                ld = np.log(sys.center_derivative_array(u, t))
                lyap += ld
                if record_logs:
                    logs[:, j] = ld
            if k:
                vals = obs.evaluate(u, v, t)
                sums += vals
                if j < nh:
                    h1 += vals
            u, v, t = sys.apply_array(u, v, t)
        out = {"lyap": lyap / n_steps,
               "u_end": u, "v_end": v, "t_end": t}
        if k:
            out["means"] = (sums / n_steps).T
            out["half1"] = (h1 / nh).T
            out["half2"] = ((sums - h1) / (n_steps - nh)).T
        if record_logs:
            out["logs"] = logs
        return out

    return run_chunked(chunk, n_orbits, workers)


@dataclass(frozen=True)
class ExponentEstimate:
    mean: float
    std_error: float
    n_orbits: int
    n_steps: int


def uniform_sampler(rng, n):
    pts = rng.random((n, 3))
    return pts[:, 0], pts[:, 1], pts[:, 2]


def center_lyapunov_measure(sys, sampler="uniform", n_orbits=100, n_steps=10_000,
                            seed=0, burn_in=0, workers=1) -> ExponentEstimate:
    """Mean and standard error of the orbit exponent over seeded initial data."""
    if n_orbits < 2:
        raise ValueError("need n_orbits >= 2")
    rng = derive_rng(seed, "lyapunov")
    if sampler == "uniform":
        u0, v0, t0 = uniform_sampler(rng, n_orbits)
    else:
        u0, v0, t0 = sampler(rng, n_orbits)
    res = ensemble_stats(sys, u0, v0, t0, n_steps, burn_in=burn_in, workers=workers)
    lyap = res["lyap"]
    return ExponentEstimate(mean=float(lyap.mean()),
                            std_error=float(lyap.std(ddof=1) / np.sqrt(n_orbits)),
                            n_orbits=n_orbits, n_steps=n_steps)


# ---------------------------------------------------------------------------
# mostly contracting test


@dataclass(frozen=True)
class MostlyContractingResult:
    fraction_negative: float
    threshold: float
    exponents: np.ndarray


def mostly_contracting_test(sys, disk, n_samples, n_steps, seed=0,
                            workers=1) -> MostlyContractingResult:
    """Fraction of unstable-disk samples with negative finite-time exponent.

    "Negative" means below -max(3 * std_error, 1e-3) nats/iterate; the
    asymptotic condition needs a finite-time threshold at desk scale.
    """
    if n_samples < 10:
        raise ValueError("need n_samples >= 10")
    rng = derive_rng(seed, "contracting")
    u0, v0, t0 = disk.sample_points(n_samples, rng=rng)
    res = ensemble_stats(sys, u0, v0, t0, n_steps, workers=workers)
    lyap = res["lyap"]
    se = float(lyap.std(ddof=1) / np.sqrt(n_samples))
    thr = max(3.0 * se, 1e-3)
    frac = float(np.mean(lyap < -thr))
    return MostlyContractingResult(fraction_negative=frac, threshold=thr,
                                   exponents=lyap)


# ---------------------------------------------------------------------------
# contraction (hyperbolic) times


@dataclass
class HyperbolicTimesRecord:
    p0: tuple            # seed phase point (u, v, theta)
    c2: float
    l: int
    times: np.ndarray    # block indices m with the suffix-window property
    n: int               # orbit horizon in raw steps
    density: float


def _block_contraction_values(sys, p0, c2, l, n):
    """Per-block values a_i = -log(center derivative of f^l over block i)."""
    logs = center_log_derivatives(sys, p0, n)
    n_blocks = n // l
    a = -logs[: n_blocks * l].reshape(n_blocks, l).sum(axis=1)
    return a


def contraction_times_from_values(a, c2):
    """Block indices m (1-based) where every suffix window of a averages >= c2.

    Via prefix sums: m qualifies iff T_m >= max_{0 <= j < m} T_j with
    T_m = sum_{i<=m} (a_i - c2).
    """
    t = np.cumsum(a - c2)
    prev_max = np.maximum.accumulate(np.concatenate(([0.0], t)))[:-1]
    return np.nonzero(t >= prev_max)[0] + 1


def hyperbolic_times(sys, p0, c2, l, n) -> HyperbolicTimesRecord:
    """Times m <= n/l at which the center has been cumulatively contracted at
    rate >= c2 over every suffix window (the Pliss / hyperbolic-time set,
    stated for the forward-contracting center of the mostly contracting case).
    """
    if c2 <= 0 or l < 1 or n < l:
        raise ValueError("need c2 > 0, l >= 1, n >= l")
    a = _block_contraction_values(sys, p0, c2, l, n)
    times = contraction_times_from_values(a, c2)
    return HyperbolicTimesRecord(p0=p0.as_tuple(), c2=c2, l=l, times=times,
                                 n=n, density=len(times) * l / n)


@dataclass(frozen=True)
class ContractionCheckReport:
    ok: bool
    violations: list     # (m, k) pairs violating the bound
    recorded: int
    missing: int         # qualifying times absent from the record


def verify_contraction_at_hyperbolic_times(record, sys) -> ContractionCheckReport:
    """Re-check, from a fresh orbit, that each recorded time m satisfies
    prod of center derivatives over every suffix window <= e^{-c2 k} (up to a
    factor e^{1e-9}), and that no qualifying time is missing."""
    from .phase_maps import PhasePoint
    p0 = PhasePoint.of(*record.p0)
    a = _block_contraction_values(sys, p0, record.c2, record.l, record.n)
    t = np.cumsum(a - record.c2)
    tfull = np.concatenate(([0.0], t))
    violations = []
    for m in np.asarray(record.times, dtype=int):
        slack = t[m - 1] - np.max(tfull[:m])
        if slack < -1e-9:
            k = int(m - np.argmax(tfull[:m]))
            violations.append((int(m), k))
    true_times = set(contraction_times_from_values(a, record.c2).tolist())
    missing = len(true_times - set(int(m) for m in record.times))
    return ContractionCheckReport(ok=not violations and missing == 0,
                                  violations=violations,
                                  recorded=len(record.times), missing=missing)


def contraction_time_densities(sys, u0, v0, t0, c2, l, n, workers=1):
    """Per-orbit hyperbolic-time densities for an ensemble (vectorized)."""
    res = ensemble_stats(sys, u0, v0, t0, n, workers=workers, record_logs=True)
    logs = res["logs"]
    n_blocks = n // l
    a = -logs[:, : n_blocks * l].reshape(logs.shape[0], n_blocks, l).sum(axis=2)
    t = np.cumsum(a - c2, axis=1)
    prev_max = np.maximum.accumulate(
        np.concatenate((np.zeros((t.shape[0], 1)), t), axis=1), axis=1)[:, :-1]
    counts = (t >= prev_max).sum(axis=1)
    return counts * l / n

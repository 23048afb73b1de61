"""Circle and torus arithmetic helpers.

All coordinates live in [0, 1); distances are shortest mod-1 arcs.
"""

import numpy as np


def mod1(x):
    """Reduce coordinates into [0, 1)."""
    return np.asarray(x, dtype=float) - np.floor(x)


def circle_dist(a, b):
    """Shortest arc distance on R/Z."""
    d = np.abs(mod1(a) - mod1(b))
    return np.minimum(d, 1.0 - d)


def wrap_half(x):
    """Representative of x mod 1 in [-1/2, 1/2)."""
    x = np.asarray(x, dtype=float)
    return x - np.floor(x + 0.5)


def torus_dist(p, q):
    """Euclidean distance on T^2 = (R/Z)^2 (shortest representative)."""
    d = wrap_half(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    return float(np.sqrt(np.sum(d * d, axis=-1)))


def invert_monotone_shift(shift, dshift, target, bound, tol=1e-13, max_iter=200):
    """Invert theta -> theta + shift(theta) on the circle, vectorized.

    `shift` and `dshift` take a real array (a lift of the angle) and return
    the displacement and its derivative; the map must be an increasing
    degree-1 circle map, i.e. 1 + dshift > 0.  `bound` is an upper bound for
    |shift|, which brackets the root on the lift.  Returns values in [0, 1).

    Bisection safeguarded by Newton steps.  Raises RuntimeError on
    non-convergence, which signals a defective (non-diffeomorphism) fiber.
    """
    t = mod1(target)
    bound = float(bound) + 1e-9
    lo = t - bound
    hi = t + bound
    x = t.copy() if isinstance(t, np.ndarray) else np.asarray(t, dtype=float)
    f = x + shift(x) - t
    for _ in range(max_iter):
        if np.max(np.abs(f)) < tol:
            return mod1(x)
        hi = np.where(f > 0, np.minimum(hi, x), hi)
        lo = np.where(f <= 0, np.maximum(lo, x), lo)
        step = f / (1.0 + dshift(x))
        x_new = x - step
        # fall back to bisection when Newton leaves the bracket
        bad = (x_new <= lo) | (x_new >= hi)
        x = np.where(bad, 0.5 * (lo + hi), x_new)
        f = x + shift(x) - t
    raise RuntimeError("monotone circle-map inversion did not converge")

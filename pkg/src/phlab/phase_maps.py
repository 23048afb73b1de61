"""Concrete dynamical systems: Anosov torus bases, circle-fiber skew products,
and the boundary-perturbed expanding cylinder map.

Coordinates are (u, v, theta) with u, v on the torus and theta on the circle
fiber; everything is stored in [0, 1).  System objects are immutable and all
operations are pure functions, so they are safe for unrestricted concurrent
use.
"""

from dataclasses import dataclass

import numpy as np

from .circle import mod1, circle_dist, invert_monotone_shift

TWO_PI = 2.0 * np.pi


class ValidationError(ValueError):
    """Raised when a constructed object violates a structural constraint."""


class NonConvergenceError(RuntimeError):
    """Raised when an iterative numerical procedure fails to converge."""


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class BasePoint:
    u: float
    v: float

    def __post_init__(self):
        object.__setattr__(self, "u", float(mod1(self.u)))
        object.__setattr__(self, "v", float(mod1(self.v)))

    def as_array(self):
        return np.array([self.u, self.v])


@dataclass(frozen=True)
class PhasePoint:
    base: BasePoint
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(mod1(self.theta)))

    @classmethod
    def of(cls, u, v, theta):
        return cls(BasePoint(u, v), theta)

    def as_tuple(self):
        return (self.base.u, self.base.v, self.theta)


# ---------------------------------------------------------------------------
# Anosov base


@dataclass(frozen=True)
class AnosovBase:
    matrix: np.ndarray          # 2x2 integer matrix
    inverse: np.ndarray         # exact integer inverse (|det| = 1)
    lambda_u: float             # modulus of the expanding eigenvalue, > 1
    lambda_s: float             # modulus of the contracting eigenvalue, in (0,1)
    sig_u: float                # signed expanding eigenvalue
    sig_s: float                # signed contracting eigenvalue
    e_u: np.ndarray             # unit expanding eigenvector
    e_s: np.ndarray             # unit contracting eigenvector

    @property
    def det(self):
        return int(round(float(np.linalg.det(self.matrix))))

    @property
    def trace(self):
        return int(self.matrix[0, 0] + self.matrix[1, 1])

    def apply_array(self, u, v):
        m = self.matrix
        return (mod1(m[0, 0] * u + m[0, 1] * v),
                mod1(m[1, 0] * u + m[1, 1] * v))

    def apply_inverse_array(self, u, v):
        m = self.inverse
        return (mod1(m[0, 0] * u + m[0, 1] * v),
                mod1(m[1, 0] * u + m[1, 1] * v))


def make_anosov_base(matrix) -> AnosovBase:
    """Validate a hyperbolic unimodular integer matrix and fill in eigendata."""
    m = np.asarray(matrix, dtype=np.int64)
    if m.shape != (2, 2):
        raise ValidationError("base matrix must be 2x2")
    det = int(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    tr = int(m[0, 0] + m[1, 1])
    if abs(det) != 1:
        raise ValidationError(f"|det| must be 1, got {det}")
    if abs(tr) <= 2:
        raise ValidationError(f"|trace| must exceed 2 for hyperbolicity, got {tr}")
    eigvals, eigvecs = np.linalg.eig(m.astype(float))
    order = np.argsort(np.abs(eigvals))
    sig_s, sig_u = float(eigvals[order[0]]), float(eigvals[order[1]])
    e_s = eigvecs[:, order[0]].real
    e_u = eigvecs[:, order[1]].real
    # fix sign conventions so eigenvectors are reproducible
    for e in (e_u, e_s):
        e /= np.linalg.norm(e)
        if e[0] < 0 or (e[0] == 0 and e[1] < 0):
            e *= -1.0
    adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=np.int64)
    inverse = adj * det  # inverse = adj/det and det = +-1
    return AnosovBase(matrix=m, inverse=inverse,
                      lambda_u=abs(sig_u), lambda_s=abs(sig_s),
                      sig_u=sig_u, sig_s=sig_s, e_u=e_u, e_s=e_s)


def make_cat_base() -> AnosovBase:
    """The default transitive Anosov base, M = [[2,1],[1,1]]."""
    return make_anosov_base([[2, 1], [1, 1]])


# ---------------------------------------------------------------------------
# fiber families

_FIBER_KINDS = ("identity", "rotation", "morse_smale", "coupled")


@dataclass(frozen=True)
class FiberFamily:
    """Orientation-preserving degree-1 circle diffeomorphisms h(x, .).

    Kinds:
      identity     theta -> theta
      rotation     theta -> theta + omega
      morse_smale  theta -> theta + (a / (pi s)) sin(pi s theta)
                   (s/2 attracting and s/2 repelling fiber fixed points,
                   multipliers 1 -+ a)
      coupled      theta -> theta + (a/2pi) sin(2pi theta) + (b/2pi) sin(2pi u)
    """
    kind: str
    omega: float = 0.0
    a: float = 0.0
    s: int = 2
    b: float = 0.0

    def __post_init__(self):
        if self.kind not in _FIBER_KINDS:
            raise ValidationError(f"unknown fiber kind {self.kind!r}")
        if self.kind == "morse_smale" and (self.s < 2 or self.s % 2):
            raise ValidationError("morse_smale needs an even point count s >= 2")

    @property
    def is_isometric(self):
        return self.kind in ("identity", "rotation")

    @property
    def depends_on_base(self):
        return self.kind == "coupled" and self.b != 0.0

    def shift(self, u, theta):
        """Displacement h(x, theta) - theta (well defined on the lift)."""
        if self.kind == "identity":
            return np.zeros_like(np.asarray(theta, dtype=float))
        if self.kind == "rotation":
            return np.full_like(np.asarray(theta, dtype=float), self.omega)
        if self.kind == "morse_smale":
            k = np.pi * self.s
            return (self.a / k) * np.sin(k * np.asarray(theta, dtype=float))
        # coupled
        return ((self.a / TWO_PI) * np.sin(TWO_PI * np.asarray(theta, dtype=float))
                + (self.b / TWO_PI) * np.sin(TWO_PI * np.asarray(u, dtype=float)))

    def dtheta(self, u, theta):
        """The center derivative d/dtheta h(x, theta)."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "identity" or self.kind == "rotation":
            return np.ones_like(theta)
        if self.kind == "morse_smale":
            return 1.0 + self.a * np.cos(np.pi * self.s * theta)
        return 1.0 + self.a * np.cos(TWO_PI * theta)

    def du(self, u, theta):
        """Derivative of the fiber map with respect to the base u coordinate."""
        if self.kind == "coupled":
            return self.b * np.cos(TWO_PI * np.asarray(u, dtype=float))
        return np.zeros_like(np.asarray(u, dtype=float))

    def value(self, u, theta):
        return mod1(np.asarray(theta, dtype=float) + self.shift(u, theta))

    @property
    def shift_bound(self):
        """Upper bound for |h(x, theta) - theta| on the lift."""
        if self.kind == "identity":
            return 0.0
        if self.kind == "rotation":
            return abs(self.omega)
        if self.kind == "morse_smale":
            return abs(self.a) / (np.pi * self.s)
        return (abs(self.a) + abs(self.b)) / TWO_PI

    def invert(self, u, theta_image):
        """theta with h(x, theta) = theta_image, by monotone root finding."""
        try:
            return invert_monotone_shift(
                lambda t: self.shift(u, t),
                lambda t: self.dtheta(u, t) - 1.0,
                theta_image, self.shift_bound)
        except RuntimeError as exc:
            raise NonConvergenceError(str(exc)) from exc


def identity_fiber() -> FiberFamily:
    return FiberFamily("identity")


def rotation_fiber(omega) -> FiberFamily:
    return FiberFamily("rotation", omega=float(omega))


def morse_smale_fiber(a, s=2) -> FiberFamily:
    return FiberFamily("morse_smale", a=float(a), s=int(s))


def coupled_fiber(a, b) -> FiberFamily:
    return FiberFamily("coupled", a=float(a), b=float(b))


def _validate_fiber(fiber, grid_n=512):
    """Check d/dtheta h > 0 on a dense grid of fiber and base points."""
    thetas = np.arange(grid_n) / grid_n
    us = np.arange(32) / 32.0
    for u in us:
        d = fiber.dtheta(u, thetas)
        if np.any(d <= 0.0):
            raise ValidationError(
                "fiber family is not a circle diffeomorphism: "
                f"d/dtheta h <= 0 (min {float(np.min(d)):.6g})")


# ---------------------------------------------------------------------------
# skew products


@dataclass(frozen=True)
class SystemSpec:
    """A skew product (x, theta) -> (g(x) + coupling(theta), h(x, theta)).

    `base_coupling` perturbs the first base coordinate by
    (c/2pi) sin(2pi theta); zero keeps the strict skew-product property
    (base image independent of theta).
    """
    base: AnosovBase
    fiber: FiberFamily
    base_coupling: float = 0.0
    label: str = ""

    @property
    def is_skew(self):
        return self.base_coupling == 0.0

    # -- vectorized maps ----------------------------------------------------

    def apply_array(self, u, v, theta):
        u2, v2 = self.base.apply_array(u, v)
        if self.base_coupling != 0.0:
            u2 = mod1(u2 + (self.base_coupling / TWO_PI) * np.sin(TWO_PI * theta))
        t2 = self.fiber.value(u, theta)
        return u2, v2, t2

    def apply_inverse_array(self, u, v, theta):
        if self.is_skew:
            u1, v1 = self.base.apply_inverse_array(u, v)
            t1 = self.fiber.invert(u1, theta)
            return u1, v1, t1
        # coupled base: solve the pair (x', theta') by fixed-point iteration
        t1 = np.asarray(theta, dtype=float).copy()
        u1 = v1 = None
        for _ in range(200):
            uc = mod1(u - (self.base_coupling / TWO_PI) * np.sin(TWO_PI * t1))
            u1, v1 = self.base.apply_inverse_array(uc, v)
            t_new = self.fiber.invert(u1, theta)
            if np.max(circle_dist(t_new, t1)) < 1e-13:
                return u1, v1, t_new
            t1 = t_new
        raise NonConvergenceError("inverse of coupled-base system did not converge")

    def center_derivative_array(self, u, theta):
        return self.fiber.dtheta(u, theta)

    # -- scalar API ---------------------------------------------------------

    def apply(self, p: PhasePoint) -> PhasePoint:
        u, v, t = self.apply_array(p.base.u, p.base.v, p.theta)
        return PhasePoint.of(float(u), float(v), float(t))

    def apply_inverse(self, p: PhasePoint) -> PhasePoint:
        u, v, t = self.apply_inverse_array(
            np.float64(p.base.u), np.float64(p.base.v), np.float64(p.theta))
        return PhasePoint.of(float(u), float(v), float(t))

    def center_derivative(self, p: PhasePoint) -> float:
        return float(self.fiber.dtheta(p.base.u, p.theta))

    def jacobian(self, p: PhasePoint) -> np.ndarray:
        """Exact 3x3 derivative of the forward map at p, rows (u, v, theta)."""
        j = np.zeros((3, 3))
        j[:2, :2] = self.base.matrix
        u, t = p.base.u, p.theta
        j[2, 0] = float(self.fiber.du(u, t))
        j[2, 2] = float(self.fiber.dtheta(u, t))
        if self.base_coupling != 0.0:
            j[0, 2] = self.base_coupling * np.cos(TWO_PI * t)
        return j


def make_system(base: AnosovBase, fiber: FiberFamily,
                base_coupling: float = 0.0, label: str = "") -> SystemSpec:
    """Construct a skew product after validating the fiber family."""
    _validate_fiber(fiber)
    if not label:
        label = f"{fiber.kind}"
    return SystemSpec(base=base, fiber=fiber,
                      base_coupling=float(base_coupling), label=label)


# -- apply/apply_inverse as free functions (thin wrappers) ------------------

def apply(sys: SystemSpec, p: PhasePoint) -> PhasePoint:
    return sys.apply(p)


def apply_inverse(sys: SystemSpec, p: PhasePoint) -> PhasePoint:
    return sys.apply_inverse(p)


def center_derivative(sys: SystemSpec, p: PhasePoint) -> float:
    return sys.center_derivative(p)


def jacobian(sys: SystemSpec, p: PhasePoint) -> np.ndarray:
    return sys.jacobian(p)


# ---------------------------------------------------------------------------
# partial hyperbolicity validation


@dataclass(frozen=True)
class HyperbolicityReport:
    passed: bool
    unstable_cone_invariant: bool
    stable_cone_invariant: bool
    expansion_rate: float       # min geometric-mean growth in the unstable cone
    contraction_rate: float     # max geometric-mean growth in the stable cone
    center_min: float
    center_max: float
    domination_ratio: float     # max(center_max/expansion, contraction/center_min)


def validate_partial_hyperbolicity(sys: SystemSpec, cone_angle: float,
                                   samples: int = 50, n_iter: int = 50,
                                   seed: int = 0) -> HyperbolicityReport:
    """Probe cone invariance and expansion/contraction/domination rates.

    Pushes tangent vectors started on the boundary of 3D cones around
    (e_u, 0) and (e_s, 0) through `n_iter` steps of the exact Jacobian
    (backward for the stable cone) at `samples` random points.
    """
    if not (0.0 < cone_angle < np.pi / 4):
        raise ValidationError("cone_angle must lie in (0, pi/4)")
    rng = np.random.default_rng(seed)
    pts = rng.random((samples, 3))
    axis_u = np.array([sys.base.e_u[0], sys.base.e_u[1], 0.0])
    axis_s = np.array([sys.base.e_s[0], sys.base.e_s[1], 0.0])
    vertical = np.array([0.0, 0.0, 1.0])

    def cone_angle_to(vec, axis):
        c = abs(np.dot(vec, axis)) / np.linalg.norm(vec)
        return np.arccos(np.clip(c, -1.0, 1.0))

    u_ok = s_ok = True
    exp_rates, ctr_rates = [], []
    for u0, v0, t0 in pts:
        for sgn in (1.0, -1.0):
            # unstable cone, forward
            p = PhasePoint.of(u0, v0, t0)
            vec = np.cos(cone_angle) * axis_u + sgn * np.sin(cone_angle) * vertical
            norm0 = np.linalg.norm(vec)
            for _ in range(n_iter):
                vec = sys.jacobian(p) @ vec
                p = sys.apply(p)
                if cone_angle_to(vec, axis_u) > cone_angle + 1e-9:
                    u_ok = False
            exp_rates.append((np.linalg.norm(vec) / norm0) ** (1.0 / n_iter))
            # stable cone: transport backward (cone vectors converge to E^s
            # under f^{-1}); the forward contraction rate is the reciprocal
            # of the backward growth rate
            q = PhasePoint.of(u0, v0, t0)
            wec = np.cos(cone_angle) * axis_s + sgn * np.sin(cone_angle) * vertical
            wnorm0 = np.linalg.norm(wec)
            back = q
            bvec = wec.copy()
            for _ in range(n_iter):
                back_pre = sys.apply_inverse(back)
                bvec = np.linalg.solve(sys.jacobian(back_pre), bvec)
                back = back_pre
                if cone_angle_to(bvec, axis_s) > cone_angle + 1e-9:
                    s_ok = False
            ctr_rates.append((np.linalg.norm(bvec) / wnorm0) ** (-1.0 / n_iter))

    grid = np.arange(512) / 512.0
    cgrid = np.array([sys.fiber.dtheta(u, grid) for u in np.arange(32) / 32.0])
    center_min, center_max = float(np.min(cgrid)), float(np.max(cgrid))
    expansion = float(np.min(exp_rates))
    contraction = float(np.max(ctr_rates))
    domination = max(center_max / expansion, contraction / center_min)
    passed = u_ok and s_ok and expansion > 1.0 and contraction < 1.0 and domination < 1.0
    return HyperbolicityReport(passed, u_ok, s_ok, expansion, contraction,
                               center_min, center_max, domination)


# ---------------------------------------------------------------------------
# cylinder example


@dataclass(frozen=True)
class CylinderSystem:
    """Boundary-perturbed expanding cylinder map on S^1 x [0,1]:

        (x, t) -> (d x + eps sin(2pi x) t,  t - c t (1 - t))

    Both boundary circles and the vertical line {0} x [0,1] are invariant.
    The horizontal derivative at (0,0) is d and at (0,1) is d + 2 pi eps.
    """
    base_degree: int
    c: float
    eps: float

    def g(self, t):
        t = np.asarray(t, dtype=float)
        return t - self.c * t * (1.0 - t)

    def g_prime(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 - self.c + 2.0 * self.c * t

    def apply_array(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        x2 = mod1(self.base_degree * x + self.eps * np.sin(TWO_PI * x) * t)
        return x2, np.clip(self.g(t), 0.0, 1.0)

    def boundary_map(self, t_level):
        """The degree-d expanding circle map induced on the boundary t = t_level."""
        d, eps = self.base_degree, self.eps * float(t_level)

        def bmap(x):
            x = np.asarray(x, dtype=float)
            return mod1(d * x + eps * np.sin(TWO_PI * x))
        return bmap

    def boundary_lift(self, t_level):
        d, eps = self.base_degree, self.eps * float(t_level)

        def lift(x):
            x = np.asarray(x, dtype=float)
            return d * x + eps * np.sin(TWO_PI * x)

        def dlift(x):
            x = np.asarray(x, dtype=float)
            return d + TWO_PI * eps * np.cos(TWO_PI * x)
        return lift, dlift


def make_cylinder(c: float, eps: float, base_degree: int = 2) -> CylinderSystem:
    if not (0.0 < c < 1.0):
        raise ValidationError("c must lie in (0, 1) so that 0 < g' < 2")
    if eps < 0.0:
        raise ValidationError("eps must be nonnegative")
    if base_degree < 2:
        raise ValidationError("base_degree must be >= 2")
    if TWO_PI * eps >= base_degree - 1.0:
        raise ValidationError("eps too large: boundary map stops being expanding")
    cyl = CylinderSystem(base_degree=int(base_degree), c=float(c), eps=float(eps))
    tgrid = np.linspace(0.0, 1.0, 512)
    gp = cyl.g_prime(tgrid)
    if np.any(gp <= 0.0) or np.any(gp >= 2.0):
        raise ValidationError("g' must stay in (0, 2) on [0, 1]")
    g = cyl.g(tgrid[1:-1])
    if np.any(g >= tgrid[1:-1]):
        raise ValidationError("g(t) < t must hold on (0, 1)")
    return cyl

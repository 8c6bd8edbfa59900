"""Physical parameters, diffusion matrices, drift matrix and Gaussian states.

Units: hbar = 1 and temperature is carried as theta = kT in energy units.
Covariance matrices live in the (x, p_x, y, p_y) basis in physical units;
:func:`scale_quadratures` maps them to the dimensionless quadratures
(sqrt(m omega) x, p / sqrt(m omega)) in which the vacuum is I/2.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .linalg import as_mat4, blocks, det2, symplectic_eigenvalues

PHYSICALITY_TOL = 1e-9
SYMMETRY_TOL = 1e-12

LABELS = ("x", "p_x", "y", "p_y")


class UnphysicalStateError(ValueError):
    """Covariance matrix violates the uncertainty principle or is not positive."""


class InvalidDiffusionError(ValueError):
    """Diffusion coefficients violate the positivity conditions."""


def coth_factor(omega, theta):
    """C_T = coth(omega / 2 theta), evaluated as 1 + 2 / (e^{omega/theta} - 1).

    theta = 0 gives exactly 1; large omega/theta clamps to 1 without overflow.
    """
    if theta < 0:
        raise ValueError(f"temperature must be non-negative, got {theta}")
    if theta == 0:
        return 1.0
    x = omega / theta
    if x > 700.0:
        return 1.0
    return 1.0 + 2.0 / math.expm1(x)


def theta_from_coth(omega, c_t):
    """Inverse of :func:`coth_factor`: theta with coth(omega / 2 theta) = c_t."""
    if not c_t >= 1.0:
        raise ValueError(f"C_T must be >= 1, got {c_t}")
    if c_t == 1.0:
        return 0.0
    # omega / theta = 2 arcoth(c_t) = ln((c_t + 1) / (c_t - 1))
    return omega / math.log1p(2.0 / (c_t - 1.0))


@dataclass(frozen=True)
class PhysParams:
    """Oscillator mass and frequency, dissipation constant and bath temperature."""

    m: float = 1.0
    omega: float = 1.0
    lam: float = 0.1
    theta: float = 0.0

    def __post_init__(self):
        for name in ("m", "omega", "lam", "theta"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.m <= 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")
        if self.theta < 0:
            raise ValueError(f"theta must be non-negative, got {self.theta}")

    @classmethod
    def from_c_t(cls, m, omega, lam, c_t):
        return cls(m=m, omega=omega, lam=lam, theta=theta_from_coth(omega, c_t))

    @property
    def c_t(self):
        return coth_factor(self.omega, self.theta)

    @property
    def big_lambda(self):
        """sqrt(omega^2 + lambda^2)."""
        return math.hypot(self.omega, self.lam)


def drift_matrix(params):
    """Drift matrix Y: two copies of [[-lambda, 1/m], [-m omega^2, -lambda]]."""
    block = np.array([[-params.lam, 1.0 / params.m],
                      [-params.m * params.omega**2, -params.lam]])
    Y = np.zeros((4, 4))
    Y[:2, :2] = block
    Y[2:, 2:] = block
    return Y


# ---------------------------------------------------------------------------
# diffusion

_D_INDEX = {
    "D_xx": (0, 0), "D_xp_x": (0, 1), "D_xy": (0, 2), "D_xp_y": (0, 3),
    "D_p_xp_x": (1, 1), "D_yp_x": (1, 2), "D_p_xp_y": (1, 3),
    "D_yy": (2, 2), "D_yp_y": (2, 3), "D_p_yp_y": (3, 3),
}


@dataclass(frozen=True, eq=False)
class DiffusionMatrix:
    """Symmetric 4x4 diffusion matrix in the (x, p_x, y, p_y) basis."""

    d: np.ndarray

    def __post_init__(self):
        d = as_mat4(self.d, "diffusion matrix")
        if np.abs(d - d.T).max() > SYMMETRY_TOL * max(1.0, np.abs(d).max()):
            raise ValueError("diffusion matrix must be symmetric")
        d = 0.5 * (d + d.T)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @classmethod
    def from_coefficients(cls, **coeffs):
        """Build from named coefficients, e.g. ``D_xx=..., D_xp_y=...``; missing ones are zero."""
        d = np.zeros((4, 4))
        for name, value in coeffs.items():
            try:
                i, j = _D_INDEX[name]
            except KeyError:
                raise ValueError(f"unknown diffusion coefficient {name!r}") from None
            d[i, j] = d[j, i] = value
        return cls(d)

    def coefficient(self, name):
        i, j = _D_INDEX[name]
        return float(self.d[i, j])

    def __getattr__(self, name):
        if name in _D_INDEX:
            return self.coefficient(name)
        raise AttributeError(name)

    def validate(self, lam):
        return validate_diffusion(self, lam)


def cp_matrix(D, lam):
    """Hermitian coefficient matrix whose positivity makes the dynamics completely positive.

    Off-diagonal position/momentum couplings enter with a minus sign and the
    dissipation constant as -/+ i lambda/2 on the (x, p_x) and (y, p_y) pairs.
    """
    d = D.d if isinstance(D, DiffusionMatrix) else as_mat4(D)
    signs = np.array([1.0, -1.0, 1.0, -1.0])
    return np.outer(signs, signs) * d - 0.5j * lam * linalg.OMEGA


_PAIR_CONDITIONS = (
    # name, (i, j): D_ii D_jj - D_ij^2 >= bound * lambda^2 / 4
    ("x-y", (0, 2), 0.0),
    ("x-p_x", (0, 1), 1.0),
    ("x-p_y", (0, 3), 0.0),
    ("p_x-p_y", (1, 3), 0.0),
    ("y-p_y", (2, 3), 1.0),
    ("y-p_x", (2, 1), 0.0),
)


@dataclass(frozen=True)
class DiffusionReport:
    """Outcome of :func:`validate_diffusion`.

    ``ok`` refers to the six pairwise conditions D_ii D_jj - D_ij^2 >= bound.
    ``completely_positive`` is the stronger requirement that the full
    Hermitian coefficient matrix is positive semidefinite (all principal
    minors non-negative); only then is every physical initial state
    guaranteed to stay physical.
    """

    ok: bool
    violations: tuple = ()
    completely_positive: bool = True
    cp_violations: tuple = ()
    slack: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def validate_diffusion(D, lam, tol=1e-12):
    d = D.d if isinstance(D, DiffusionMatrix) else as_mat4(D)
    scale = max(1.0, float(np.abs(d).max()) ** 2, lam * lam / 4.0)
    violations = []
    slack = {}
    for name, (i, j), bound in _PAIR_CONDITIONS:
        s = d[i, i] * d[j, j] - d[i, j] ** 2 - bound * lam * lam / 4.0
        slack[name] = float(s)
        if s < -tol * scale:
            violations.append(name)

    H = cp_matrix(d, lam)
    cp_violations = []
    # one eigenvalue test decides positivity; minors are only enumerated to
    # name the failure
    if np.linalg.eigvalsh(H)[0] < -tol * math.sqrt(scale):
        worst = (math.inf, None)
        for size in range(1, 5):
            for idx in itertools.combinations(range(4), size):
                # exactly singular minors are legitimate (zero temperature saturates x-p_x)
                with np.errstate(divide="ignore"):
                    minor = float(np.linalg.det(H[np.ix_(idx, idx)]).real)
                name = "minor(" + ",".join(LABELS[k] for k in idx) + ")"
                if minor < -tol * scale ** (size / 2):
                    cp_violations.append(name)
                worst = min(worst, (minor / scale ** (size / 2), name), key=lambda w: w[0])
        if not cp_violations:
            cp_violations.append(worst[1])
    return DiffusionReport(
        ok=not violations,
        violations=tuple(violations),
        completely_positive=not cp_violations,
        cp_violations=tuple(cp_violations),
        slack=slack,
    )


def thermal_diffusion(params, d_xy=0.0, d_xpy=0.0, strict=False):
    """Diffusion matrix whose one-mode marginals relax to the Gibbs state.

    m omega D_xx = D_p_xp_x / (m omega) = (lambda/2) C_T, D_xp_x = 0,
    D_p_xp_y = m^2 omega^2 D_xy, with both modes treated identically and
    D_yp_x = D_xp_y.

    Raises InvalidDiffusionError when a pairwise condition fails, or, with
    ``strict=True``, when full complete positivity fails.
    """
    m, w, lam = params.m, params.omega, params.lam
    half = 0.5 * lam * params.c_t
    D = DiffusionMatrix.from_coefficients(
        D_xx=half / (m * w), D_yy=half / (m * w),
        D_p_xp_x=half * m * w, D_p_yp_y=half * m * w,
        D_xy=d_xy, D_p_xp_y=m * m * w * w * d_xy,
        D_xp_y=d_xpy, D_yp_x=d_xpy,
    )
    report = validate_diffusion(D, lam)
    if not report.ok:
        raise InvalidDiffusionError("diffusion violates " + ", ".join(report.violations))
    if strict and not report.completely_positive:
        raise InvalidDiffusionError("diffusion not completely positive: " + ", ".join(report.cp_violations))
    return D


def max_cp_cross_diffusion(params):
    """Largest D_xp_y keeping the thermal diffusion (D_xy = 0) completely positive.

    The Hermitian coefficient matrix then has eigenvalues
    (lambda C_T -/+ sqrt(lambda^2 + 4 d^2)) / 2, giving d <= (lambda/2) sqrt(C_T^2 - 1).
    """
    c_t = params.c_t
    return 0.5 * params.lam * math.sqrt(max(c_t * c_t - 1.0, 0.0))


def random_diffusion(params, rng, margin=0.05, scale=1.0):
    """Random completely positive diffusion matrix for the given dissipation.

    A random symmetric matrix is shifted along the identity until the
    Hermitian coefficient matrix has smallest eigenvalue ``margin``.
    """
    G = rng.normal(scale=scale, size=(4, 4))
    d = 0.5 * (G + G.T)
    shift = margin - np.linalg.eigvalsh(cp_matrix(d, params.lam)).min()
    return DiffusionMatrix(d + shift * np.eye(4))


# ---------------------------------------------------------------------------
# covariance matrices

@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetric 4x4 second-moment matrix of a two-mode Gaussian state.

    With ``check=True`` (default) the matrix must be symmetric, positive
    definite, have positive determinant and smallest symplectic eigenvalue
    >= 1/2 - 1e-9.
    """

    sigma: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        s = as_mat4(self.sigma, "covariance matrix")
        if np.abs(s - s.T).max() > SYMMETRY_TOL * max(1.0, np.abs(s).max()):
            raise UnphysicalStateError("covariance matrix must be symmetric")
        s = 0.5 * (s + s.T)
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)
        if self.check:
            nu = self.nu_minus()
            if not (self.det() > 0 and nu >= 0.5 - PHYSICALITY_TOL):
                raise UnphysicalStateError(
                    f"unphysical covariance matrix: det={self.det():.6g}, nu_minus={nu:.12g}")

    @property
    def block_A(self):
        return self.sigma[:2, :2]

    @property
    def block_B(self):
        return self.sigma[2:, 2:]

    @property
    def block_C(self):
        return self.sigma[:2, 2:]

    def det(self):
        return linalg.det4(self.sigma)

    def delta(self):
        A, B, C = blocks(self.sigma)
        return float(det2(A) + det2(B) + 2.0 * det2(C))

    def nu_minus(self):
        """Smallest symplectic eigenvalue; NaN unless sigma is positive definite."""
        return symplectic_eigenvalues(self.sigma)[0]

    def upper_triangle(self):
        return self.sigma[np.triu_indices(4)]

    def is_physical(self, tol=PHYSICALITY_TOL):
        return bool(self.det() > 0 and self.nu_minus() >= 0.5 - tol)


UPPER_TRIANGLE_NAMES = (
    "sigma_xx", "sigma_xpx", "sigma_xy", "sigma_xpy", "sigma_pxpx",
    "sigma_ypx", "sigma_pxpy", "sigma_yy", "sigma_ypy", "sigma_pypy",
)


def from_upper_triangle(values, check=True):
    values = np.asarray(values, dtype=float)
    if values.shape != (10,):
        raise ValueError("expected 10 upper-triangle entries")
    s = np.zeros((4, 4))
    s[np.triu_indices(4)] = values
    s = s + np.triu(s, 1).T
    return CovarianceMatrix(s, check=check)


def _scaling(m, omega):
    r = math.sqrt(m * omega)
    return np.array([r, 1.0 / r, r, 1.0 / r])


def scale_quadratures(sigma, m, omega):
    """Physical -> dimensionless quadratures (sqrt(m omega) x, p / sqrt(m omega))."""
    s = sigma.sigma if isinstance(sigma, CovarianceMatrix) else np.asarray(sigma, dtype=float)
    t = _scaling(m, omega)
    return np.outer(t, t) * s


def unscale_quadratures(sigma, m, omega):
    """Dimensionless -> physical quadratures; inverse of :func:`scale_quadratures`."""
    s = sigma.sigma if isinstance(sigma, CovarianceMatrix) else np.asarray(sigma, dtype=float)
    t = 1.0 / _scaling(m, omega)
    return np.outer(t, t) * s


def vacuum():
    return CovarianceMatrix(0.5 * np.eye(4))


def two_mode_squeezed_vacuum(r):
    """A = B = cosh(2r)/2 I, C = sinh(2r)/2 diag(1, -1) (dimensionless quadratures)."""
    if not (np.isfinite(r) and r >= 0):
        raise ValueError(f"squeezing must be finite and non-negative, got {r}")
    ch, sh = 0.5 * math.cosh(2 * r), 0.5 * math.sinh(2 * r)
    s = np.diag([ch, ch, ch, ch])
    s[0, 2] = s[2, 0] = sh
    s[1, 3] = s[3, 1] = -sh
    return CovarianceMatrix(s)


def thermal_product_state(c_t):
    """Uncorrelated thermal modes, A = B = (c_t / 2) I, C = 0 (dimensionless)."""
    if not c_t >= 1.0:
        raise UnphysicalStateError(f"thermal factor must be >= 1, got {c_t}")
    return CovarianceMatrix(0.5 * c_t * np.eye(4))


# ---------------------------------------------------------------------------
# symplectic building blocks for random physical states

def rotation(phi):
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, s], [-s, c]])


def local_symplectic(phi1, r, phi2):
    """Single-mode rotation . squeeze . rotation."""
    return rotation(phi1) @ np.diag([math.exp(-r), math.exp(r)]) @ rotation(phi2)


def two_mode_squeezer(r):
    ch, sh = math.cosh(r), math.sinh(r)
    Z = np.diag([1.0, -1.0])
    return np.block([[ch * np.eye(2), sh * Z], [sh * Z, ch * np.eye(2)]])


def beam_splitter(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.block([[c * np.eye(2), s * np.eye(2)], [-s * np.eye(2), c * np.eye(2)]])


def _direct_sum(a, b):
    out = np.zeros((4, 4))
    out[:2, :2] = a
    out[2:, 2:] = b
    return out


def random_symplectic(rng, max_squeeze=1.0):
    def one_mode():
        phi1, phi2 = rng.uniform(0, 2 * np.pi, 2)
        return local_symplectic(phi1, rng.uniform(0, max_squeeze), phi2)

    def local():
        return _direct_sum(one_mode(), one_mode())
    return (local() @ two_mode_squeezer(rng.uniform(0, max_squeeze))
            @ beam_splitter(rng.uniform(0, np.pi)) @ local())


def random_physical_state(rng, max_squeeze=1.0, max_thermal=2.0):
    """sigma = S diag(nu1, nu1, nu2, nu2) S^T with random symplectic S and nu_i >= 1/2."""
    nu1, nu2 = 0.5 + rng.uniform(0, max_thermal, 2)
    S = random_symplectic(rng, max_squeeze)
    return CovarianceMatrix(S @ np.diag([nu1, nu1, nu2, nu2]) @ S.T)

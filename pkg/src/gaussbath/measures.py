"""Entanglement and mixedness of two-mode Gaussian states.

All measures depend on sigma only through the local symplectic invariants
det A, det B, det C, det sigma and the Simon trace term, so they are
unchanged by the local quadrature scaling of :func:`model.scale_quadratures`.

Units: logarithmic negativity in bits (log base 2); entropies and mutual
information in nats.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .linalg import as_mat4, det4, symplectic_eigenvalues
from .model import (
    PHYSICALITY_TOL,
    CovarianceMatrix,
    InvalidDiffusionError,
    UnphysicalStateError,
)

SEPARABILITY_TOL = 1e-12
SQRT_CLAMP_TOL = 1e-12

SEPARABLE = "Separable"
GMEMS = "GMEMS"
INVALID = "InvalidCoefficients"


def _array(sigma):
    if isinstance(sigma, CovarianceMatrix):
        return sigma.sigma
    return as_mat4(sigma, "covariance matrix")


class Invariants(NamedTuple):
    det_a: float
    det_b: float
    det_c: float
    det_sigma: float
    trace_term: float

    @property
    def delta(self):
        return self.det_a + self.det_b + 2.0 * self.det_c

    @property
    def delta_tilde(self):
        return self.det_a + self.det_b - 2.0 * self.det_c


def invariants(sigma):
    return Invariants(*map(float, kernels.invariants(_array(sigma)[None])[0]))


def _simon(det_a, det_b, det_c, trace_term):
    return (det_a * det_b + (0.25 - np.abs(det_c)) ** 2 - trace_term
            - 0.25 * (det_a + det_b))


def simon_function(sigma):
    """det A det B + (1/4 - |det C|)^2 - Tr[AJCJBJC^T J] - (det A + det B)/4.

    Non-negative exactly for separable states.
    """
    inv = invariants(sigma)
    return float(_simon(inv.det_a, inv.det_b, inv.det_c, inv.trace_term))


@dataclass(frozen=True)
class SymplecticSpectrum:
    nu_minus: float
    nu_plus: float
    partial_transposed: bool = False


def symplectic_spectrum(sigma, partial_transpose=False):
    """Symplectic eigenvalues of sigma, or of its partial transpose.

    They satisfy nu_-^2 nu_+^2 = det sigma and nu_-^2 + nu_+^2 = Delta, where
    the partial transpose replaces Delta by Delta - 4 det C. The values are
    computed by the backward-stable route of
    :func:`gaussbath.linalg.symplectic_eigenvalues`.
    """
    s = _array(sigma)
    det = det4(s)
    if not det > 0:
        raise UnphysicalStateError(f"det sigma must be positive, got {det}")
    nu_m, nu_p = symplectic_eigenvalues(s, partial_transpose)
    if not (np.isfinite(nu_m) and np.isfinite(nu_p)):
        raise UnphysicalStateError("covariance matrix is not positive definite")
    return SymplecticSpectrum(nu_m, nu_p, bool(partial_transpose))


def _log_neg(nu_tilde_minus):
    return np.maximum(0.0, -np.log2(2.0 * nu_tilde_minus))


def log_negativity(sigma):
    """max(0, -log2(2 nu~_-)) in bits."""
    return float(_log_neg(symplectic_spectrum(sigma, partial_transpose=True).nu_minus))


# ---------------------------------------------------------------------------
# entropies

def entropy_f(x):
    """(x + 1/2) ln(x + 1/2) - (x - 1/2) ln(x - 1/2), with f(1/2) = 0.

    Values in [1/2 - 1e-9, 1/2) are clamped to 1/2; smaller ones raise.
    Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.5 - PHYSICALITY_TOL) or np.any(np.isnan(x)):
        raise UnphysicalStateError("symplectic eigenvalue below 1/2")
    x = np.maximum(x, 0.5)
    lo = x - 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(lo > 0, lo * np.log(np.where(lo > 0, lo, 1.0)), 0.0)
    out = (x + 0.5) * np.log(x + 0.5) - tail
    return float(out) if out.ndim == 0 else out


def von_neumann_entropy(sigma):
    """f(nu_-) + f(nu_+) in nats."""
    spec = symplectic_spectrum(sigma)
    return entropy_f(spec.nu_minus) + entropy_f(spec.nu_plus)


def mutual_information(sigma):
    """f(sqrt(det A)) + f(sqrt(det B)) - S_V in nats."""
    inv = invariants(sigma)
    a, b = math.sqrt(inv.det_a), math.sqrt(inv.det_b)
    return entropy_f(a) + entropy_f(b) - von_neumann_entropy(sigma)


def purities(sigma):
    """(mu, mu_1, mu_2) = (1/(4 sqrt(det sigma)), 1/(2 sqrt(det A)), 1/(2 sqrt(det B)))."""
    inv = invariants(sigma)
    if inv.det_sigma <= 0 or inv.det_a <= 0 or inv.det_b <= 0:
        raise UnphysicalStateError("non-positive determinant")
    return (0.25 / math.sqrt(inv.det_sigma),
            0.5 / math.sqrt(inv.det_a),
            0.5 / math.sqrt(inv.det_b))


def seralian_bounds(mu, mu1, mu2):
    """Lower and upper bounds on Delta at fixed global and marginal purities."""
    for name, v in (("mu", mu), ("mu1", mu1), ("mu2", mu2)):
        if not 0 < v <= 1:
            raise ValueError(f"{name} must lie in (0, 1], got {v}")
    if mu < mu1 * mu2 * (1 - 1e-12):
        raise ValueError("purities violate mu >= mu1 mu2")
    p = 4.0 * mu1**2 * mu2**2
    lower = 1.0 / (2.0 * mu) + (mu1 - mu2) ** 2 / p
    upper = min((mu1 + mu2) ** 2 / p - 1.0 / (2.0 * mu), 0.25 * (1.0 + 1.0 / mu**2))
    return lower, upper


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class EntanglementReport:
    simon_s: float
    delta: float
    delta_tilde: float
    nu_tilde_minus: float
    log_negativity: float  # bits
    separable: bool


@dataclass(frozen=True)
class MixednessReport:
    purity: float
    marginal_purity_1: float
    marginal_purity_2: float
    linear_entropy: float
    von_neumann_entropy: float  # nats
    mutual_information: float  # nats
    det_sigma: float
    delta: float


def _agree(simon_s, nu_tilde_minus, scale):
    by_nu = nu_tilde_minus >= 0.5 - SEPARABILITY_TOL
    by_s = simon_s >= -SEPARABILITY_TOL * scale
    near = (abs(nu_tilde_minus - 0.5) <= SEPARABILITY_TOL
            or abs(simon_s) <= SEPARABILITY_TOL * scale)
    return by_nu == by_s or near


def full_report(sigma):
    """Entanglement and mixedness diagnostics of one physical state."""
    s = _array(sigma)
    if not isinstance(sigma, CovarianceMatrix) or not sigma.check:
        CovarianceMatrix(s)  # physicality check
    inv = invariants(s)
    nu_m, nu_p = symplectic_eigenvalues(s)
    nut_m, _ = symplectic_eigenvalues(s, partial_transpose=True)
    if not np.isfinite(nut_m):
        raise UnphysicalStateError("partial transpose has no real symplectic spectrum")
    simon_s = float(_simon(inv.det_a, inv.det_b, inv.det_c, inv.trace_term))
    scale = max(1.0, inv.det_a * inv.det_b)
    if not _agree(simon_s, nut_m, scale):
        raise ArithmeticError(
            f"separability tests disagree: S={simon_s!r}, nu~_-={float(nut_m)!r}")
    ent = EntanglementReport(
        simon_s=simon_s,
        delta=inv.delta,
        delta_tilde=inv.delta_tilde,
        nu_tilde_minus=float(nut_m),
        log_negativity=float(_log_neg(nut_m)),
        separable=bool(nut_m >= 0.5 - SEPARABILITY_TOL),
    )
    mu = 0.25 / math.sqrt(inv.det_sigma)
    s_v = entropy_f(nu_m) + entropy_f(nu_p)
    mix = MixednessReport(
        purity=mu,
        marginal_purity_1=0.5 / math.sqrt(inv.det_a),
        marginal_purity_2=0.5 / math.sqrt(inv.det_b),
        linear_entropy=1.0 - mu,
        von_neumann_entropy=s_v,
        mutual_information=entropy_f(math.sqrt(inv.det_a)) + entropy_f(math.sqrt(inv.det_b)) - s_v,
        det_sigma=inv.det_sigma,
        delta=inv.delta,
    )
    return ent, mix


def batch_measures(sigmas):
    """Vectorized measures for a stack of states of shape (n, 4, 4).

    Returns a dict of arrays. Entries that are undefined for an unphysical
    state come back as NaN instead of raising.
    """
    S = np.ascontiguousarray(sigmas, dtype=float)
    inv = kernels.invariants(S)
    det_a, det_b, det_c, det, tr = inv.T
    delta = det_a + det_b + 2.0 * det_c
    delta_t = det_a + det_b - 2.0 * det_c
    nu_m, nu_p = symplectic_eigenvalues(S)
    nut_m, _ = symplectic_eigenvalues(S, partial_transpose=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = 0.25 / np.sqrt(det)
        a, b = np.sqrt(det_a), np.sqrt(det_b)
        log_neg = _log_neg(nut_m)
    physical = np.isfinite(nu_m) & (nu_m >= 0.5 - PHYSICALITY_TOL) & (det > 0)
    f = np.full((4, S.shape[0]), np.nan)
    if physical.any():
        f[:, physical] = entropy_f(np.vstack([nu_m, nu_p, a, b])[:, physical])
    s_v = f[0] + f[1]
    return {
        "det_a": det_a, "det_b": det_b, "det_c": det_c, "det_sigma": det,
        "simon": _simon(det_a, det_b, det_c, tr),
        "delta": delta, "delta_tilde": delta_t,
        "nu_minus": nu_m, "nu_plus": nu_p, "nu_tilde_minus": nut_m,
        "log_negativity": log_neg,
        "purity": mu, "marginal_purity_1": 0.5 / a, "marginal_purity_2": 0.5 / b,
        "von_neumann_entropy": s_v,
        "mutual_information": f[2] + f[3] - s_v,
        "physical": physical,
    }


# ---------------------------------------------------------------------------
# asymptotic closed forms (symmetric thermal bath, D_xy = 0)

def asymptotic_ratio(params, d):
    """2 d / Lambda with Lambda = sqrt(omega^2 + lambda^2)."""
    return 2.0 * abs(d) / params.big_lambda


def asymptotic_log_negativity(params, d):
    """E_N(inf) = max(0, -log2(C_T - 2d/Lambda)) in bits.

    On the separability boundary 2d/Lambda = C_T - 1 (to 1e-12) the result is
    exactly 0, matching :func:`classify_asymptotic`.
    """
    c_t = params.c_t
    ratio = asymptotic_ratio(params, d)
    arg = c_t - ratio
    if ratio <= c_t - 1.0 + 1e-12 * max(1.0, c_t):
        return 0.0
    if not arg > 0:
        raise UnphysicalStateError(f"C_T - 2d/Lambda must be positive, got {arg}")
    return max(0.0, -math.log2(arg))


def asymptotic_nu(params, d):
    """Degenerate symplectic eigenvalue sqrt(C_T^2/4 - d^2/Lambda^2) of the asymptotic state."""
    v = params.c_t**2 / 4.0 - (d / params.big_lambda) ** 2
    if v < -SQRT_CLAMP_TOL * params.c_t**2:
        raise UnphysicalStateError("asymptotic state has no real symplectic spectrum")
    return math.sqrt(max(v, 0.0))


def asymptotic_purity(params, d):
    """mu(inf) from 1/mu = C_T^2 - 4 d^2 / Lambda^2."""
    return 1.0 / (params.c_t**2 - 4.0 * (d / params.big_lambda) ** 2)


def asymptotic_entropy(params, d):
    """(2 nu + 1) ln(nu + 1/2) - (2 nu - 1) ln(nu - 1/2) at nu = asymptotic_nu."""
    nu = asymptotic_nu(params, d)
    if nu < 0.5 - PHYSICALITY_TOL:
        raise UnphysicalStateError(f"asymptotic symplectic eigenvalue {nu} below 1/2")
    nu = max(nu, 0.5)
    tail = (2 * nu - 1) * math.log(nu - 0.5) if nu > 0.5 else 0.0
    return (2 * nu + 1) * math.log(nu + 0.5) - tail


def asymptotic_mutual_information(params, d):
    """Mutual information of the asymptotic state with a = C_T / 2."""
    a = params.c_t / 2.0
    tail_a = (2 * a - 1) * math.log(a - 0.5) if a > 0.5 else 0.0
    return (2 * a + 1) * math.log(a + 0.5) - tail_a - asymptotic_entropy(params, d)


def squeezing_parameter(params, d):
    """r with tanh 2r = d / (Lambda C_T).

    At the pure point d / Lambda = sqrt(C_T^2 - 1) / 2 this reduces to
    tanh 2r = sqrt(C_T^2 - 1) / (2 C_T). Note that the two-mode squeezing
    actually carried by the asymptotic state, see
    :func:`state_squeezing_parameter`, satisfies tanh 2r = 2d / (Lambda C_T).
    """
    arg = abs(d) / (params.big_lambda * params.c_t)
    if not arg < 1.0:
        raise ValueError(f"tanh 2r = {arg} must be below 1")
    return 0.5 * math.atanh(arg)


def state_squeezing_parameter(sigma):
    """Two-mode squeezing r of a symmetric standard-form state.

    For sigma = nu S(r) S(r)^T with S(r) a two-mode squeezer (up to local
    rotations), tanh 2r = sqrt(-det C) / sqrt(det A).
    """
    inv = invariants(sigma)
    if inv.det_c >= 0:
        return 0.0
    return 0.5 * math.atanh(math.sqrt(-inv.det_c) / math.sqrt(math.sqrt(inv.det_a * inv.det_b)))


@dataclass(frozen=True)
class AsymptoticClass:
    classification: str
    c_t: float
    d: float
    lambda_cap: float  # lambda C_T / 2
    ratio: float  # 2 d / Lambda
    completely_positive: bool
    reason: str = ""


def classify_asymptotic(params, d):
    """Separable / GMEMS / InvalidCoefficients for the asymptotic state.

    Separable when 2d/Lambda <= C_T - 1 (boundary included), GMEMS above it,
    InvalidCoefficients when d > lambda C_T / 2 or when the resulting
    asymptotic state would violate the uncertainty principle.
    """
    c_t = params.c_t
    ratio = asymptotic_ratio(params, d)
    cap = 0.5 * params.lam * c_t
    d_abs = abs(d)
    cp = d_abs <= 0.5 * params.lam * math.sqrt(max(c_t * c_t - 1.0, 0.0)) * (1 + 1e-12)
    tol = 1e-12 * max(1.0, c_t)
    if d_abs > cap + tol:
        return AsymptoticClass(INVALID, c_t, d, cap, ratio, cp, "d exceeds lambda C_T / 2")
    if ratio * ratio > c_t * c_t - 1.0 + tol:
        return AsymptoticClass(INVALID, c_t, d, cap, ratio, cp, "asymptotic state unphysical")
    if ratio <= c_t - 1.0 + tol:
        return AsymptoticClass(SEPARABLE, c_t, d, cap, ratio, cp)
    return AsymptoticClass(GMEMS, c_t, d, cap, ratio, cp)


def check_coefficients(params, d):
    """Raise InvalidDiffusionError when :func:`classify_asymptotic` says InvalidCoefficients."""
    cls = classify_asymptotic(params, d)
    if cls.classification == INVALID:
        raise InvalidDiffusionError(cls.reason)
    return cls

"""Covariance-matrix evolution dS/dt = Y S + S Y^T + 2 D and its steady state."""
import warnings
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .linalg import NotHurwitzError, as_mat4, expm_drift_closed
from .model import CovarianceMatrix, DiffusionMatrix, InvalidDiffusionError, drift_matrix
from .measures import batch_measures


class AccuracyWarning(UserWarning):
    """RK4 step is coarse compared with the dynamical time scales."""


@dataclass(frozen=True, eq=False)
class EvolutionSpec:
    params: object
    diffusion: DiffusionMatrix
    initial: CovarianceMatrix
    t_grid: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float).ravel()
        if t.size == 0:
            raise ValueError("t_grid is empty")
        if not np.all(np.isfinite(t)) or t[0] < 0:
            raise ValueError("t_grid must be finite and non-negative")
        if np.any(np.diff(t) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        object.__setattr__(self, "t_grid", t)
        report = self.diffusion.validate(self.params.lam)
        if not report.ok:
            raise InvalidDiffusionError("diffusion violates " + ", ".join(report.violations))


def steady_state(params, D, check=True):
    """sigma(inf) solving Y sigma + sigma Y^T = -2 D."""
    # every eigenvalue of the drift matrix is -lambda +- i omega
    if not params.lam > 0:
        raise NotHurwitzError("drift matrix is not Hurwitz; no steady state exists")
    d = D.d if isinstance(D, DiffusionMatrix) else as_mat4(D, "D")
    return CovarianceMatrix(kernels.lyap4(drift_matrix(params), d), check=check)


def propagate_array(spec, sigma_inf=None):
    """sigma(t) for every t in the grid as an (n, 4, 4) array.

    sigma(t) = M(t) [sigma(0) - sigma(inf)] M(t)^T + sigma(inf) with the exact
    propagator M(t) = exp(Y t).
    """
    if sigma_inf is None:
        sigma_inf = steady_state(spec.params, spec.diffusion, check=False).sigma
    s0 = spec.initial.sigma
    M = expm_drift_closed(spec.params, spec.t_grid)
    out = kernels.sandwich(M, s0 - sigma_inf, sigma_inf)
    out[spec.t_grid == 0.0] = s0
    return out


def propagate(spec, check=True):
    """List of (t, CovarianceMatrix) along the grid; sigma(0) is returned unchanged."""
    out = propagate_array(spec)
    return [(float(t), CovarianceMatrix(s, check=check)) for t, s in zip(spec.t_grid, out)]


def integrate_ode_array(spec, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    p = spec.params
    if dt * (p.lam + p.omega) > 0.1:
        warnings.warn(
            f"dt*(lambda+omega) = {dt * (p.lam + p.omega):.3g} exceeds 0.1; RK4 may be inaccurate",
            AccuracyWarning, stacklevel=3)
    return kernels.rk4_grid(drift_matrix(p), spec.diffusion.d, spec.initial.sigma, spec.t_grid, dt)


def integrate_ode(spec, dt, check=False):
    """Fixed-step classical RK4 on the covariance ODE, sampled on the EvolutionSpec time grid.

    Verification oracle for :func:`propagate`; production paths use the
    closed-form propagator.
    """
    out = integrate_ode_array(spec, dt)
    return [(float(t), CovarianceMatrix(s, check=check)) for t, s in zip(spec.t_grid, out)]


def simon_at(spec, t, sigma_inf):
    sub = EvolutionSpec(spec.params, spec.diffusion, spec.initial, np.atleast_1d(t))
    return float(batch_measures(propagate_array(sub, sigma_inf))["simon"][0])


def separability_transitions(spec, simon_values=None, tol=1e-8):
    """Times where the Simon function changes sign along the grid.

    A bracket between consecutive samples of opposite sign is refined by
    bisection until its width is below ``tol``; the endpoint with the smaller
    |S| is reported. A sample where S is exactly zero counts only when the
    nonzero samples around it have opposite signs. Touching zero without
    crossing (the vacuum, say) is not a transition.
    """
    sigma_inf = steady_state(spec.params, spec.diffusion, check=False).sigma
    if simon_values is None:
        simon_values = batch_measures(propagate_array(spec, sigma_inf))["simon"]
    t = spec.t_grid
    sign = np.sign(simon_values)
    nonzero = np.flatnonzero(sign)
    found = []
    for a, b in zip(nonzero[:-1], nonzero[1:]):
        if sign[a] == sign[b]:
            continue
        if b > a + 1:
            found.append(float(t[a + 1]))
            continue
        lo, hi = float(t[a]), float(t[b])
        s_lo, s_hi = float(simon_values[a]), float(simon_values[b])
        while hi - lo > tol * 1e-2:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            s_mid = simon_at(spec, mid, sigma_inf)
            if s_mid == 0.0:
                lo = hi = mid
                s_lo = s_hi = 0.0
                break
            if np.sign(s_mid) == np.sign(s_lo):
                lo, s_lo = mid, s_mid
            else:
                hi, s_hi = mid, s_mid
        found.append(lo if abs(s_lo) <= abs(s_hi) else hi)
    return found

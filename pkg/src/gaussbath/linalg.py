"""Dense linear algebra for fixed 4x4 matrices in the (x, p_x, y, p_y) basis.

Heavy lifting is delegated to the selected kernel backend (see
:mod:`gaussbath._backend`); this module validates inputs and shapes.
"""
import math

import numpy as np

from ._backend import kernels

Mat4 = np.ndarray
Mat2 = np.ndarray

# 2x2 symplectic form
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
# block-diagonal symplectic form on two modes
OMEGA = np.block([[J2, np.zeros((2, 2))], [np.zeros((2, 2)), J2]])


class NotHurwitzError(np.linalg.LinAlgError):
    """Drift matrix has an eigenvalue with non-negative real part."""


def as_mat4(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.shape != (4, 4):
        raise ValueError(f"{name} must be 4x4, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def det2(M):
    M = np.asarray(M, dtype=float)
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def det4(M):
    return kernels.det4(as_mat4(M))


def blocks(sigma):
    """Return the (A, B, C) 2x2 blocks of a two-mode matrix."""
    sigma = np.asarray(sigma, dtype=float)
    return sigma[..., :2, :2], sigma[..., 2:, 2:], sigma[..., :2, 2:]


def expm(M, t=1.0):
    """Matrix exponential exp(M t) by scaling and squaring.

    M is first balanced by a power-of-two diagonal similarity (exact in
    floating point), which keeps round-off in the squaring phase at the
    level of a well-scaled matrix. The kernel then shifts out the trace,
    halves the argument until its 1-norm is at most 0.5 and squares a
    13-term Taylor series back up.
    """
    M = as_mat4(M)
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if t == 0.0:
        return np.eye(4)
    s = balance_scaling(M)
    E = kernels.expm4(M * s[None, :] / s[:, None], t)
    return E * s[:, None] / s[None, :]


def balance_scaling(M, sweeps=8):
    """Powers of two s with diag(s)^-1 M diag(s) having balanced row/column norms."""
    A = np.array(M, dtype=float)
    n = A.shape[0]
    s = np.ones(n)
    for _ in range(sweeps):
        done = True
        for i in range(n):
            c = np.abs(A[:, i]).sum() - abs(A[i, i])
            r = np.abs(A[i, :]).sum() - abs(A[i, i])
            if c == 0.0 or r == 0.0:
                continue
            f = 2.0 ** np.round(0.5 * np.log2(r / c))
            if f != 1.0:
                done = False
                s[i] *= f
                A[:, i] *= f
                A[i, :] /= f
        if done:
            break
    return s


def expm_drift_closed(params, t):
    """Exact exp(Y t) for the two-oscillator drift matrix.

    Each 2x2 block of Y has eigenvalues -lambda +/- i omega, so
    exp(Y_b t) = e^{-lambda t} [cos(omega t) I + sin(omega t)/omega (Y_b + lambda I)].

    ``t`` may be a scalar (returns 4x4) or a 1-D array (returns (n, 4, 4)).
    """
    lam, omega, m = params.lam, params.omega, params.m
    if not lam > 0:
        raise NotHurwitzError(f"dissipation must be positive for a decaying propagator, got {lam}")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    t_arr = np.asarray(t, dtype=float)
    ts = np.atleast_1d(t_arr)
    decay = np.exp(-lam * ts)
    c = decay * np.cos(omega * ts)
    s = decay * np.sin(omega * ts) / omega
    out = np.zeros((ts.size, 4, 4))
    for k in (0, 2):
        out[:, k, k] = c
        out[:, k + 1, k + 1] = c
        out[:, k, k + 1] = s / m
        out[:, k + 1, k] = -s * m * omega**2
    if t_arr.ndim == 0:
        return out[0]
    return out


def is_hurwitz(Y):
    return bool(np.all(np.linalg.eigvals(as_mat4(Y, "Y")).real < 0.0))


def lyapunov_operator(Y):
    """The 16x16 Kronecker sum acting on row-major vec(sigma)."""
    return kernels.lyapunov_operator(as_mat4(Y, "Y"))


def solve_lyapunov(Y, D):
    """Unique symmetric sigma with Y sigma + sigma Y^T = -2 D.

    Raises NotHurwitzError unless every eigenvalue of Y has negative real
    part, and LinAlgError if elimination meets a vanishing pivot.
    """
    Y = as_mat4(Y, "Y")
    D = as_mat4(D, "D")
    if not is_hurwitz(Y):
        raise NotHurwitzError("drift matrix is not Hurwitz; no steady state exists")
    return kernels.lyap4(Y, D)


def lyapunov_residual(Y, sigma, D):
    """Max-norm of Y sigma + sigma Y^T + 2 D."""
    return float(np.abs(Y @ sigma + sigma @ Y.T + 2.0 * D).max())


def spectrum_from_invariants(delta, det, tol=1e-12):
    """Symplectic eigenvalues from the invariants (Delta, det).

    Returns ``(nu_minus, nu_plus)`` from 2 nu^2 = Delta -/+ sqrt(Delta^2 - 4 det).
    The smaller root uses the cancellation-free form 2 det / (Delta + sqrt(...)).
    A discriminant within ``-tol`` (relative) is treated as zero; anything more
    negative yields NaN. Works elementwise on arrays.
    """
    delta = np.asarray(delta, dtype=float)
    det = np.asarray(det, dtype=float)
    disc = delta * delta - 4.0 * det
    floor = -tol * np.maximum(1.0, delta * delta)
    bad = disc < floor
    root = np.sqrt(np.where(bad, np.nan, np.clip(disc, 0.0, None)))
    big = 0.5 * (delta + root)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big > 0, det / big, np.nan)
    nu_minus = np.sqrt(np.where(small >= 0, small, np.nan))
    nu_plus = np.sqrt(big)
    return nu_minus, nu_plus


_PT = np.outer([1.0, 1.0, 1.0, -1.0], [1.0, 1.0, 1.0, -1.0])


def _sv_pairs(sv):
    return np.sqrt(sv[..., 2] * sv[..., 3]), np.sqrt(sv[..., 0] * sv[..., 1])


def symplectic_eigenvalues(sigma, partial_transpose=False):
    """Symplectic eigenvalues (nu_minus, nu_plus) of one matrix or a stack.

    For positive definite sigma = L L^T these are the singular values of the
    real antisymmetric matrix L^T Omega L, each appearing twice. That route is
    backward stable, so near-degenerate spectra (pure and symmetric states)
    keep full precision, unlike the closed form in
    :func:`spectrum_from_invariants`, whose square root of a cancelling
    discriminant loses about half the digits. Matrices that are not positive
    definite (never a quantum state) give NaN.
    """
    S = np.asarray(sigma, dtype=float)
    if partial_transpose:
        S = S * _PT
    if S.ndim == 2:
        try:
            L = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            return math.nan, math.nan
        nu_m, nu_p = _sv_pairs(np.linalg.svd(L.T @ OMEGA @ L, compute_uv=False))
        return float(nu_m), float(nu_p)
    S = S.reshape(-1, 4, 4)
    try:
        L = np.linalg.cholesky(S)
        return _sv_pairs(np.linalg.svd(L.transpose(0, 2, 1) @ OMEGA @ L, compute_uv=False))
    except np.linalg.LinAlgError:
        pass
    # some matrix is not positive definite: factor via eigh and mask
    w, U = np.linalg.eigh(S)
    pd = w[:, 0] > 0
    nu_m = np.full(S.shape[0], np.nan)
    nu_p = np.full(S.shape[0], np.nan)
    if pd.any():
        R = U[pd] * np.sqrt(w[pd])[:, None, :]
        sv = np.linalg.svd(R.transpose(0, 2, 1) @ OMEGA @ R, compute_uv=False)
        nu_m[pd], nu_p[pd] = _sv_pairs(sv)
    return nu_m, nu_p

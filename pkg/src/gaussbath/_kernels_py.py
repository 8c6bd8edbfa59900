"""NumPy implementations of the numerical kernels.

Same call signatures as the compiled ``_kernels`` extension. Used when the
extension is not built, or when ``GAUSSBATH_PURE_PYTHON=1`` is set.
"""
import numpy as np

TAYLOR_TERMS = 13
SCALING_THRESHOLD = 0.5
PIVOT_RTOL = 1e-14

_EYE4 = np.eye(4)


def expm4(M, t):
    """exp(M t) for a 4x4 real matrix by trace shift, scaling and squaring."""
    A = np.asarray(M, dtype=float) * float(t)
    shift = np.trace(A) / 4.0
    A = A - shift * _EYE4
    norm = np.abs(A).sum(axis=0).max()
    k = 0
    while norm > SCALING_THRESHOLD:
        norm *= 0.5
        k += 1
    A = A / 2.0**k
    # Horner form of sum_{j<13} A^j / j!
    E = _EYE4.copy()
    for j in range(TAYLOR_TERMS - 1, 0, -1):
        E = _EYE4 + (A @ E) / j
    for _ in range(k):
        E = E @ E
    return np.exp(shift) * E


def lyapunov_operator(Y):
    """16x16 matrix of S -> Y S + S Y^T acting on row-major vec(S)."""
    Y = np.asarray(Y, dtype=float)
    K = (Y[:, None, :, None] * _EYE4[None, :, None, :]
         + _EYE4[:, None, :, None] * Y[None, :, None, :])
    return K.reshape(16, 16)


def lyap4(Y, D):
    """Solve Y S + S Y^T = -2 D through LU of the Kronecker system.

    The operator's eigenvalues are the pairwise sums mu_i + mu_j of the
    eigenvalues of Y, which gives a cheap singularity test.
    """
    Y = np.asarray(Y, dtype=float)
    K = lyapunov_operator(Y)
    mu = np.linalg.eigvals(Y)
    if np.abs(mu[:, None] + mu[None, :]).min() <= PIVOT_RTOL * np.abs(K).max():
        raise np.linalg.LinAlgError("Lyapunov operator is singular")
    s = np.linalg.solve(K, -2.0 * np.asarray(D, dtype=float).reshape(16))
    S = s.reshape(4, 4)
    return 0.5 * (S + S.T)


def solve_dense(K, b):
    """Gaussian elimination with partial pivoting and back substitution."""
    U = np.array(K, dtype=float)
    x = np.array(b, dtype=float)
    n = U.shape[0]
    tol = PIVOT_RTOL * np.abs(U).max()
    for c in range(n):
        p = c + int(np.argmax(np.abs(U[c:, c])))
        if abs(U[p, c]) <= tol:
            raise np.linalg.LinAlgError("Lyapunov operator is singular")
        if p != c:
            U[[c, p]] = U[[p, c]]
            x[[c, p]] = x[[p, c]]
        f = U[c + 1:, c] / U[c, c]
        U[c + 1:, c:] -= np.outer(f, U[c, c:])
        x[c + 1:] -= f * x[c]
    for r in range(n - 1, -1, -1):
        x[r] = (x[r] - U[r, r + 1:] @ x[r + 1:]) / U[r, r]
    return x


def _drift_rhs(Y, D2, S):
    P = Y @ S
    return P + P.T + D2


def rk4_grid(Y, D, sigma0, t_grid, dt):
    """Classical RK4 on dS/dt = Y S + S Y^T + 2D, sampled at ``t_grid``.

    Each interval between consecutive grid times is split into the smallest
    number of equal steps not exceeding ``dt``.
    """
    Y = np.asarray(Y, dtype=float)
    D2 = 2.0 * np.asarray(D, dtype=float)
    S = np.array(sigma0, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    out = np.empty((t_grid.size, 4, 4))
    t_prev = 0.0
    for idx, t_next in enumerate(t_grid):
        span = t_next - t_prev
        if span > 0.0:
            n = max(1, int(np.ceil(span / dt - 1e-9)))
            h = span / n
            for _ in range(n):
                k1 = _drift_rhs(Y, D2, S)
                k2 = _drift_rhs(Y, D2, S + 0.5 * h * k1)
                k3 = _drift_rhs(Y, D2, S + 0.5 * h * k2)
                k4 = _drift_rhs(Y, D2, S + h * k3)
                S = S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[idx] = S
        t_prev = t_next
    return out


def sandwich(M, delta, sigma_inf):
    """M_k delta M_k^T + sigma_inf for a stack of propagators, symmetrized."""
    M = np.asarray(M, dtype=float)
    out = np.einsum("kij,jl,kml->kim", M, delta, M) + sigma_inf
    return 0.5 * (out + np.swapaxes(out, 1, 2))


def det4(M):
    return float(_det4(np.asarray(M, dtype=float).tolist()))


def _det4_stack(a):
    return _det4(np.moveaxis(a, 0, -1))


def _det4(a):
    # cofactor expansion along the top two rows; a[i][j] may be a float or an array
    s0 = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    s1 = a[0][0] * a[1][2] - a[0][2] * a[1][0]
    s2 = a[0][0] * a[1][3] - a[0][3] * a[1][0]
    s3 = a[0][1] * a[1][2] - a[0][2] * a[1][1]
    s4 = a[0][1] * a[1][3] - a[0][3] * a[1][1]
    s5 = a[0][2] * a[1][3] - a[0][3] * a[1][2]
    c5 = a[2][0] * a[3][1] - a[2][1] * a[3][0]
    c4 = a[2][0] * a[3][2] - a[2][2] * a[3][0]
    c3 = a[2][0] * a[3][3] - a[2][3] * a[3][0]
    c2 = a[2][1] * a[3][2] - a[2][2] * a[3][1]
    c1 = a[2][1] * a[3][3] - a[2][3] * a[3][1]
    c0 = a[2][2] * a[3][3] - a[2][3] * a[3][2]
    return s0 * c0 - s1 * c1 + s2 * c2 + s3 * c3 - s4 * c4 + s5 * c5


def invariants(S):
    """Per-state (det A, det B, det C, det sigma, Tr[AJCJBJC^T J]).

    ``S`` has shape (n, 4, 4); returns shape (n, 5).
    """
    S = np.asarray(S, dtype=float)
    A = S[:, :2, :2]
    B = S[:, 2:, 2:]
    C = S[:, :2, 2:]
    out = np.empty((S.shape[0], 5))
    out[:, 0] = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0]
    out[:, 1] = B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0]
    out[:, 2] = C[:, 0, 0] * C[:, 1, 1] - C[:, 0, 1] * C[:, 1, 0]
    out[:, 3] = _det4_stack(S)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    CT = np.swapaxes(C, 1, 2)
    prod = A @ J @ C @ J @ B @ J @ CT @ J
    out[:, 4] = prod[:, 0, 0] + prod[:, 1, 1]
    return out

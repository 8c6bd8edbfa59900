# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled 4x4 kernels. Mirrors ``gaussbath._kernels_py`` call for call."""
import numpy as np

from libc.math cimport exp, fabs, ceil

cdef int TAYLOR_TERMS = 13
cdef double SCALING_THRESHOLD = 0.5
cdef double PIVOT_RTOL = 1e-14


cdef inline void _mm4(const double* a, const double* b, double* out) noexcept nogil:
    cdef int i, j, k
    cdef double s
    for i in range(4):
        for j in range(4):
            s = 0.0
            for k in range(4):
                s += a[i * 4 + k] * b[k * 4 + j]
            out[i * 4 + j] = s


cdef inline double _det4(const double* a) noexcept nogil:
    cdef double s0 = a[0] * a[5] - a[1] * a[4]
    cdef double s1 = a[0] * a[6] - a[2] * a[4]
    cdef double s2 = a[0] * a[7] - a[3] * a[4]
    cdef double s3 = a[1] * a[6] - a[2] * a[5]
    cdef double s4 = a[1] * a[7] - a[3] * a[5]
    cdef double s5 = a[2] * a[7] - a[3] * a[6]
    cdef double c5 = a[8] * a[13] - a[9] * a[12]
    cdef double c4 = a[8] * a[14] - a[10] * a[12]
    cdef double c3 = a[8] * a[15] - a[11] * a[12]
    cdef double c2 = a[9] * a[14] - a[10] * a[13]
    cdef double c1 = a[9] * a[15] - a[11] * a[13]
    cdef double c0 = a[10] * a[15] - a[11] * a[14]
    return s0 * c0 - s1 * c1 + s2 * c2 + s3 * c3 - s4 * c4 + s5 * c5


cdef void _expm4(const double* m, double t, double* out) noexcept nogil:
    cdef double a[16]
    cdef double e[16]
    cdef double tmp[16]
    cdef double shift = 0.0, norm = 0.0, col, scale
    cdef int i, j, k = 0
    for i in range(16):
        a[i] = m[i] * t
    for i in range(4):
        shift += a[i * 5]
    shift /= 4.0
    for i in range(4):
        a[i * 5] -= shift
    for j in range(4):
        col = 0.0
        for i in range(4):
            col += fabs(a[i * 4 + j])
        if col > norm:
            norm = col
    while norm > SCALING_THRESHOLD:
        norm *= 0.5
        k += 1
    scale = 1.0
    for i in range(k):
        scale *= 0.5
    for i in range(16):
        a[i] *= scale
    for i in range(16):
        e[i] = 0.0
    for i in range(4):
        e[i * 5] = 1.0
    for j in range(TAYLOR_TERMS - 1, 0, -1):
        _mm4(a, e, tmp)
        for i in range(16):
            e[i] = tmp[i] / j
        for i in range(4):
            e[i * 5] += 1.0
    for j in range(k):
        _mm4(e, e, tmp)
        for i in range(16):
            e[i] = tmp[i]
    scale = exp(shift)
    for i in range(16):
        out[i] = scale * e[i]


def expm4(M, double t):
    """exp(M t) for a 4x4 real matrix by trace shift, scaling and squaring."""
    cdef const double[:, ::1] mv = np.ascontiguousarray(M, dtype=np.float64)
    out = np.empty((4, 4))
    cdef double[:, ::1] ov = out
    _expm4(&mv[0, 0], t, &ov[0, 0])
    return out


def lyapunov_operator(Y):
    """16x16 matrix of S -> Y S + S Y^T acting on row-major vec(S)."""
    cdef const double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    K = np.zeros((16, 16))
    cdef double[:, ::1] kv = K
    cdef int i, j, k
    for i in range(4):
        for j in range(4):
            for k in range(4):
                kv[i * 4 + j, k * 4 + j] += y[i, k]
                kv[i * 4 + j, i * 4 + k] += y[j, k]
    return K


cdef int _solve16(double* u, double* x) noexcept nogil:
    # in-place partial-pivot elimination on a 16x16 row-major system
    cdef int n = 16, c, r, p, j
    cdef double big = 0.0, piv, f, tmp, tol
    for r in range(n * n):
        if fabs(u[r]) > big:
            big = fabs(u[r])
    tol = PIVOT_RTOL * big
    for c in range(n):
        p = c
        for r in range(c + 1, n):
            if fabs(u[r * n + c]) > fabs(u[p * n + c]):
                p = r
        if fabs(u[p * n + c]) <= tol:
            return -1
        if p != c:
            for j in range(n):
                tmp = u[c * n + j]
                u[c * n + j] = u[p * n + j]
                u[p * n + j] = tmp
            tmp = x[c]
            x[c] = x[p]
            x[p] = tmp
        piv = u[c * n + c]
        for r in range(c + 1, n):
            f = u[r * n + c] / piv
            if f != 0.0:
                for j in range(c, n):
                    u[r * n + j] -= f * u[c * n + j]
                x[r] -= f * x[c]
    for r in range(n - 1, -1, -1):
        tmp = x[r]
        for j in range(r + 1, n):
            tmp -= u[r * n + j] * x[j]
        x[r] = tmp / u[r * n + r]
    return 0


def solve_dense(K, b):
    """Gaussian elimination with partial pivoting and back substitution (16x16)."""
    U = np.array(K, dtype=np.float64, order="C")
    x = np.array(b, dtype=np.float64)
    if U.shape != (16, 16):
        raise ValueError("compiled solver handles 16x16 systems only")
    cdef double[:, ::1] uv = U
    cdef double[::1] xv = x
    if _solve16(&uv[0, 0], &xv[0]) != 0:
        raise np.linalg.LinAlgError("Lyapunov operator is singular")
    return x


def lyap4(Y, D):
    """Solve Y S + S Y^T = -2 D by dense elimination on the Kronecker system."""
    U = lyapunov_operator(Y)
    cdef const double[:, ::1] dv = np.ascontiguousarray(D, dtype=np.float64)
    x = np.empty(16)
    cdef double[::1] xv = x
    cdef double[:, ::1] uv = U
    cdef int i, j
    for i in range(4):
        for j in range(4):
            xv[i * 4 + j] = -2.0 * dv[i, j]
    if _solve16(&uv[0, 0], &xv[0]) != 0:
        raise np.linalg.LinAlgError("Lyapunov operator is singular")
    S = x.reshape(4, 4)
    return 0.5 * (S + S.T)


cdef inline void _rhs(const double* y, const double* d2, const double* s, double* out) noexcept nogil:
    cdef double p[16]
    cdef int i, j
    _mm4(y, s, p)
    for i in range(4):
        for j in range(4):
            out[i * 4 + j] = p[i * 4 + j] + p[j * 4 + i] + d2[i * 4 + j]


def rk4_grid(Y, D, sigma0, t_grid, double dt):
    """Classical RK4 on dS/dt = Y S + S Y^T + 2D, sampled at ``t_grid``.

    Each interval between consecutive grid times is split into the smallest
    number of equal steps not exceeding ``dt``.
    """
    cdef const double[:, ::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[:, ::1] dv = np.ascontiguousarray(D, dtype=np.float64)
    cdef const double[:, ::1] s0 = np.ascontiguousarray(sigma0, dtype=np.float64)
    cdef const double[::1] tg = np.ascontiguousarray(t_grid, dtype=np.float64)
    cdef Py_ssize_t nt = tg.shape[0]
    out = np.empty((nt, 4, 4))
    cdef double[:, :, ::1] ov = out
    cdef double s[16]
    cdef double d2[16]
    cdef double k1[16]
    cdef double k2[16]
    cdef double k3[16]
    cdef double k4[16]
    cdef double tmp[16]
    cdef double t_prev = 0.0, span, h
    cdef long n, step
    cdef Py_ssize_t idx
    cdef int i
    for i in range(16):
        s[i] = s0[i // 4, i % 4]
        d2[i] = 2.0 * dv[i // 4, i % 4]
    with nogil:
        for idx in range(nt):
            span = tg[idx] - t_prev
            if span > 0.0:
                n = <long>ceil(span / dt - 1e-9)
                if n < 1:
                    n = 1
                h = span / n
                for step in range(n):
                    _rhs(&yv[0, 0], d2, s, k1)
                    for i in range(16):
                        tmp[i] = s[i] + 0.5 * h * k1[i]
                    _rhs(&yv[0, 0], d2, tmp, k2)
                    for i in range(16):
                        tmp[i] = s[i] + 0.5 * h * k2[i]
                    _rhs(&yv[0, 0], d2, tmp, k3)
                    for i in range(16):
                        tmp[i] = s[i] + h * k3[i]
                    _rhs(&yv[0, 0], d2, tmp, k4)
                    for i in range(16):
                        s[i] = s[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(16):
                ov[idx, i // 4, i % 4] = s[i]
            t_prev = tg[idx]
    return out


def sandwich(M, delta, sigma_inf):
    """M_k delta M_k^T + sigma_inf for a stack of propagators, symmetrized."""
    cdef const double[:, :, ::1] mv = np.ascontiguousarray(M, dtype=np.float64)
    cdef const double[:, ::1] dl = np.ascontiguousarray(delta, dtype=np.float64)
    cdef const double[:, ::1] si = np.ascontiguousarray(sigma_inf, dtype=np.float64)
    cdef Py_ssize_t n = mv.shape[0], k
    out = np.empty((n, 4, 4))
    cdef double[:, :, ::1] ov = out
    cdef double tmp[16]
    cdef double r[16]
    cdef int i, j, l
    cdef double s
    with nogil:
        for k in range(n):
            for i in range(4):
                for j in range(4):
                    s = 0.0
                    for l in range(4):
                        s += mv[k, i, l] * dl[l, j]
                    tmp[i * 4 + j] = s
            for i in range(4):
                for j in range(4):
                    s = 0.0
                    for l in range(4):
                        s += tmp[i * 4 + l] * mv[k, j, l]
                    r[i * 4 + j] = s
            for i in range(4):
                for j in range(4):
                    ov[k, i, j] = 0.5 * (r[i * 4 + j] + r[j * 4 + i]) + 0.5 * (si[i, j] + si[j, i])
    return out


def det4(M):
    cdef const double[:, ::1] mv = np.ascontiguousarray(M, dtype=np.float64)
    return _det4(&mv[0, 0])


def invariants(S):
    """Per-state (det A, det B, det C, det sigma, Tr[AJCJBJC^T J]).

    ``S`` has shape (n, 4, 4); returns shape (n, 5).
    """
    cdef const double[:, :, ::1] sv = np.ascontiguousarray(S, dtype=np.float64)
    cdef Py_ssize_t n = sv.shape[0], k
    out = np.empty((n, 5))
    cdef double[:, ::1] ov = out
    cdef double a0, a1, a2, a3, b0, b1, b2, b3, c0, c1, c2, c3
    cdef double p0, p1, p2, p3, q0, q1, q2, q3
    with nogil:
        for k in range(n):
            a0 = sv[k, 0, 0]; a1 = sv[k, 0, 1]; a2 = sv[k, 1, 0]; a3 = sv[k, 1, 1]
            b0 = sv[k, 2, 2]; b1 = sv[k, 2, 3]; b2 = sv[k, 3, 2]; b3 = sv[k, 3, 3]
            c0 = sv[k, 0, 2]; c1 = sv[k, 0, 3]; c2 = sv[k, 1, 2]; c3 = sv[k, 1, 3]
            ov[k, 0] = a0 * a3 - a1 * a2
            ov[k, 1] = b0 * b3 - b1 * b2
            ov[k, 2] = c0 * c3 - c1 * c2
            ov[k, 3] = _det4(&sv[k, 0, 0])
            # X J = [[-x1, x0], [-x3, x2]] for X = [[x0, x1], [x2, x3]]
            # P = (A J)(C J), Q = (B J)(C^T J); trace(P Q)
            p0 = (-a1) * (-c1) + a0 * (-c3)
            p1 = (-a1) * c0 + a0 * c2
            p2 = (-a3) * (-c1) + a2 * (-c3)
            p3 = (-a3) * c0 + a2 * c2
            q0 = (-b1) * (-c2) + b0 * (-c3)
            q1 = (-b1) * c0 + b0 * c1
            q2 = (-b3) * (-c2) + b2 * (-c3)
            q3 = (-b3) * c0 + b2 * c1
            ov[k, 4] = p0 * q0 + p1 * q2 + p2 * q1 + p3 * q3
    return out

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: annual forward simulation and the VAR(1) filter
log-likelihood. Signatures mirror emproj.kernels._fallback."""

from libc.math cimport exp, log, pow, isfinite, sqrt, M_PI, NAN

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _logistic(double x) nogil:
    return 1.0 / (1.0 + exp(-x))


def simulate_core(double[::1] p, int start_year, int end_year,
                  double[::1] pop, double[::1] tfp, double[::1] capital,
                  double[::1] labor, double[::1] gwp, double[::1] emissions):
    """Annual forward recursion. Fills the six output arrays in place.

    Returns 0 on success, 1 if any state became non-finite.
    """
    cdef double psi1 = p[0], psi2 = p[1], psi3 = p[2], p0 = p[3]
    cdef double lam = p[4], s = p[5], delta = p[6], alpha = p[7]
    cdef double a_s = p[8], pi = p[9], a0 = p[10]
    cdef double rho2 = p[11], rho3 = p[12]
    cdef double tau2 = p[13], tau3 = p[14], tau4 = p[15], kappa = p[16]

    cdef int n = end_year - start_year + 1
    cdef int t
    cdef double year
    cdef double P = p0
    cdef double A = a0
    cdef double L = pi * P
    cdef double K = pow(s * a0 / delta, 1.0 / lam) * L
    cdef double Q = A * pow(L, lam) * pow(K, 1.0 - lam)
    cdef double A_new, K_new, P_new, y_prev
    cdef double l2, l3, l4, g1, g2, g3, g4, tot, phi, C

    for t in range(n):
        year = start_year + t
        if t > 0:
            A_new = A + alpha * A * (1.0 - A / a_s)
            K_new = (1.0 - delta) * K + s * Q
            y_prev = Q / P
            P_new = P * (1.0 + psi1 * (y_prev / (psi2 + y_prev)) * ((psi3 - P) / psi3))
            A = A_new
            K = K_new
            P = P_new
            L = pi * P
            Q = A * pow(L, lam) * pow(K, 1.0 - lam)
        l2 = _logistic(kappa * (year - tau2))
        l3 = _logistic(kappa * (year - tau3))
        l4 = _logistic(kappa * (year - tau4))
        g1 = 1.0 - l2
        g2 = l2 - l3
        g3 = l3 - l4
        g4 = l4
        if g2 < 0.0 or g3 < 0.0:
            if g2 < 0.0:
                g2 = 0.0
            if g3 < 0.0:
                g3 = 0.0
            tot = g1 + g2 + g3 + g4
            g1 = g1 / tot
            g2 = g2 / tot
            g3 = g3 / tot
            g4 = g4 / tot
        phi = g2 * rho2 + g3 * rho3
        C = Q * phi
        if not (isfinite(P) and isfinite(Q) and isfinite(C)
                and isfinite(A) and isfinite(K)):
            return 1
        pop[t] = P
        tfp[t] = A
        capital[t] = K
        labor[t] = L
        gwp[t] = Q
        emissions[t] = C
    return 0


cdef int _solve_sym(double* S, double* b, double* x, int k, double* logdet) nogil:
    """Cholesky solve of S x = b for k <= 3; writes log det(S). Returns 0 ok."""
    cdef double L[9]
    cdef double y[3]
    cdef int i, j, r
    cdef double acc
    # Cholesky factorization S = L L'
    for i in range(k):
        for j in range(i + 1):
            acc = S[i * k + j]
            for r in range(j):
                acc -= L[i * 3 + r] * L[j * 3 + r]
            if i == j:
                if acc <= 0.0:
                    return 1
                L[i * 3 + j] = sqrt(acc)
            else:
                L[i * 3 + j] = acc / L[j * 3 + j]
    logdet[0] = 0.0
    for i in range(k):
        logdet[0] += 2.0 * log(L[i * 3 + i])
    # forward substitution L y = b
    for i in range(k):
        acc = b[i]
        for r in range(i):
            acc -= L[i * 3 + r] * y[r]
        y[i] = acc / L[i * 3 + i]
    # back substitution L' x = y
    for i in range(k - 1, -1, -1):
        acc = y[i]
        for r in range(i + 1, k):
            acc -= L[r * 3 + i] * x[r]
        x[i] = acc / L[i * 3 + i]
    return 0


def filter_loglik(double[:, ::1] A, double[::1] w_diag, double[::1] d_diag,
                  double[:, ::1] sigma_x, double[:, ::1] resid,
                  cnp.uint8_t[:, ::1] mask):
    """Sequential Gaussian filter log-likelihood of VAR(1)-plus-noise residuals.

    See emproj.kernels._fallback.filter_loglik for the contract.
    """
    cdef int T = resid.shape[0]
    cdef int m = resid.shape[1]
    cdef double mean[3]
    cdef double P[9]
    cdef double Pn[9]
    cdef double tmp[9]
    cdef double S[9]
    cdef double innov[3]
    cdef double sol[3]
    cdef double gain[9]
    cdef double mn[3]
    cdef int obs_idx[3]
    cdef int i, j, r, t, k
    cdef double acc, ll, logdet
    cdef double LOG2PI = log(2.0 * M_PI)

    for i in range(m):
        mean[i] = 0.0
        for j in range(m):
            P[i * 3 + j] = sigma_x[i, j]

    ll = 0.0
    for t in range(T):
        if t > 0:
            # mean <- A mean ; P <- A P A' + W
            for i in range(m):
                acc = 0.0
                for j in range(m):
                    acc += A[i, j] * mean[j]
                mn[i] = acc
            for i in range(m):
                mean[i] = mn[i]
            for i in range(m):
                for j in range(m):
                    acc = 0.0
                    for r in range(m):
                        acc += A[i, r] * P[r * 3 + j]
                    tmp[i * 3 + j] = acc
            for i in range(m):
                for j in range(m):
                    acc = 0.0
                    for r in range(m):
                        acc += tmp[i * 3 + r] * A[j, r]
                    Pn[i * 3 + j] = acc
            for i in range(m):
                for j in range(m):
                    P[i * 3 + j] = Pn[i * 3 + j]
                P[i * 3 + i] += w_diag[i]

        k = 0
        for i in range(m):
            if mask[t, i]:
                obs_idx[k] = i
                k += 1
        if k == 0:
            continue
        for i in range(k):
            innov[i] = resid[t, obs_idx[i]] - mean[obs_idx[i]]
            for j in range(k):
                S[i * k + j] = P[obs_idx[i] * 3 + obs_idx[j]]
            S[i * k + i] += d_diag[obs_idx[i]]
        if _solve_sym(S, innov, sol, k, &logdet):
            return NAN
        acc = 0.0
        for i in range(k):
            acc += innov[i] * sol[i]
        ll += -0.5 * (k * LOG2PI + logdet + acc)

        # gain = P[:, obs] S^{-1}; computed column-wise via solves of S
        for j in range(m):
            for i in range(k):
                mn[i] = P[j * 3 + obs_idx[i]]
            if _solve_sym(S, mn, sol, k, &logdet):
                return NAN
            for i in range(k):
                gain[j * 3 + i] = sol[i]
        # mean update
        for j in range(m):
            acc = 0.0
            for i in range(k):
                acc += gain[j * 3 + i] * innov[i]
            mean[j] += acc
        # covariance update P <- P - gain P[obs, :]
        for i in range(m):
            for j in range(m):
                acc = 0.0
                for r in range(k):
                    acc += gain[i * 3 + r] * P[obs_idx[r] * 3 + j]
                Pn[i * 3 + j] = P[i * 3 + j] - acc
        for i in range(m):
            for j in range(i, m):
                acc = 0.5 * (Pn[i * 3 + j] + Pn[j * 3 + i])
                P[i * 3 + j] = acc
                P[j * 3 + i] = acc
    return ll

"""Pure-Python (numpy) implementations of the hot kernels.

Mirrors the signatures of the compiled extension ``_core``; selected at
import time by :mod:`emproj.kernels` when the extension is unavailable or
explicitly disabled.

Parameter vector layout for ``simulate_core`` (17 entries):
    psi1, psi2, psi3, P0, lam, s, delta, alpha, As, pi, A0,
    rho2, rho3, tau2, tau3, tau4, kappa
"""

import math

import numpy as np


def _shares(kappa, tau2, tau3, tau4, year):
    """Four technology shares at one year: logistic differences,
    negative intervals clamped to zero and renormalized."""
    l2 = 1.0 / (1.0 + math.exp(-kappa * (year - tau2)))
    l3 = 1.0 / (1.0 + math.exp(-kappa * (year - tau3)))
    l4 = 1.0 / (1.0 + math.exp(-kappa * (year - tau4)))
    g1 = 1.0 - l2
    g2 = l2 - l3
    g3 = l3 - l4
    g4 = l4
    if g2 < 0.0 or g3 < 0.0:
        g2 = max(g2, 0.0)
        g3 = max(g3, 0.0)
        tot = g1 + g2 + g3 + g4
        g1, g2, g3, g4 = g1 / tot, g2 / tot, g3 / tot, g4 / tot
    return g1, g2, g3, g4


def simulate_core(p, start_year, end_year, pop, tfp, capital, labor, gwp, emissions):
    """Annual forward recursion. Fills the six output arrays in place.

    Returns 0 on success, 1 if any state became non-finite.
    """
    (psi1, psi2, psi3, p0, lam, s, delta, alpha, a_s, pi, a0,
     rho2, rho3, tau2, tau3, tau4, kappa) = (float(v) for v in p)

    n = end_year - start_year + 1
    P = p0
    A = a0
    L = pi * P
    K = (s * a0 / delta) ** (1.0 / lam) * L
    Q = A * L**lam * K ** (1.0 - lam)
    for t in range(n):
        year = start_year + t
        if t > 0:
            A_new = A + alpha * A * (1.0 - A / a_s)
            K_new = (1.0 - delta) * K + s * Q
            y_prev = Q / P
            P_new = P * (1.0 + psi1 * (y_prev / (psi2 + y_prev)) * ((psi3 - P) / psi3))
            A, K, P = A_new, K_new, P_new
            L = pi * P
            Q = A * L**lam * K ** (1.0 - lam)
        _, g2, g3, _ = _shares(kappa, tau2, tau3, tau4, year)
        phi = g2 * rho2 + g3 * rho3
        C = Q * phi
        if not (math.isfinite(P) and math.isfinite(Q) and math.isfinite(C)
                and math.isfinite(A) and math.isfinite(K)):
            return 1
        pop[t] = P
        tfp[t] = A
        capital[t] = K
        labor[t] = L
        gwp[t] = Q
        emissions[t] = C
    return 0


def filter_loglik(A, w_diag, d_diag, sigma_x, resid, mask):
    """Sequential Gaussian filter log-likelihood of VAR(1)-plus-noise residuals.

    resid is (T, m) on a contiguous annual grid; mask marks which entries are
    observed. The latent state at the first grid year is distributed with the
    stationary covariance sigma_x. Returns the joint log-density of the
    observed residual entries; NaN on numerical failure.
    """
    A = np.asarray(A, dtype=float)
    W = np.diag(np.asarray(w_diag, dtype=float))
    d_diag = np.asarray(d_diag, dtype=float)
    resid = np.asarray(resid, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    T, m = resid.shape

    mean = np.zeros(m)
    P = np.array(sigma_x, dtype=float)
    ll = 0.0
    log2pi = math.log(2.0 * math.pi)
    for t in range(T):
        if t > 0:
            mean = A @ mean
            P = A @ P @ A.T + W
        obs = mask[t]
        k = int(obs.sum())
        if k == 0:
            continue
        innov = resid[t, obs] - mean[obs]
        S = P[np.ix_(obs, obs)] + np.diag(d_diag[obs])
        try:
            chol = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            return math.nan
        alpha = np.linalg.solve(chol, innov)
        logdet = 2.0 * np.log(np.diag(chol)).sum()
        ll += -0.5 * (k * log2pi + logdet + alpha @ alpha)
        gain = np.linalg.solve(S, P[obs, :]).T
        mean = mean + gain @ innov
        P = P - gain @ P[obs, :]
        P = 0.5 * (P + P.T)
    return ll

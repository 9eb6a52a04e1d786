"""Maximum-likelihood parameters for a fixed sparse GVAR structure.

Lag coefficients and the precision matrix are updated alternately: restricted
GLS for the lag matrices given the precision, then the zero-constrained
Gaussian MLE of the precision given the residuals. Each step maximizes the
joint likelihood in its block, so the monitored log-likelihood never drops.
Sample covariances use the 1/n (ML) normalization.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DegenerateResidualsError, SingularDesignError
from .model import GvarModel, GvarStructure, as_array
from .scoring import LaggedDataMatrix, build_lagged_matrix

log = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class FitDiagnostics:
    iterations: int = 0
    loglik_trajectory: list[float] = field(default_factory=list)
    converged: bool = False
    final_difference: float = float("nan")


def _free_coefficients(structure: GvarStructure, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Row (equation) and lagged-column indices of the free coefficients, ordered by equation."""
    edges = sorted(structure.temporal_edges, key=lambda e: (e[2], e[0], e[1]))
    rows = np.array([dst for _, _, dst in edges], dtype=int)
    cols = np.array([(lag - 1) * d + src for lag, src, _ in edges], dtype=int)
    return rows, cols


def estimate_lag_matrices_given_omega(
    Z: LaggedDataMatrix, structure: GvarStructure, omega
) -> list[np.ndarray]:
    """Restricted GLS estimate of the lag matrices with precision weight ``omega``.

    Only coefficients present in ``structure`` are estimated; all others are
    exactly zero. With ``B = [A_1 .. A_k]`` and ``vec(B) = R beta``, solves
    ``R' (X'X kron omega) R beta = R' vec(omega Y' X)``.
    """
    d = Z.d
    k = structure.k
    if k > Z.k:
        raise ValueError(f"structure lag {k} exceeds lagged matrix lag {Z.k}")
    omega = np.asarray(omega, dtype=float)
    mats = [np.zeros((d, d)) for _ in range(k)]
    if not structure.temporal_edges:
        return mats
    Y = Z.current
    X = Z.lagged[:, : k * d]
    rows, cols = _free_coefficients(structure, d)
    XtX = X.T @ X
    gram = XtX[np.ix_(cols, cols)] * omega[np.ix_(rows, rows)]
    rhs = (omega @ Y.T @ X)[rows, cols]
    beta = _solve_spd(gram, rhs)
    B = np.zeros((d, k * d))
    B[rows, cols] = beta
    return [B[:, m * d : (m + 1) * d].copy() for m in range(k)]


def _solve_spd(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = cho_factor(gram)
    except LinAlgError:
        raise SingularDesignError("restricted GLS normal equations are singular") from None
    piv = np.abs(np.diag(factor[0])) ** 2
    if piv.min() <= piv.max() * 1e-12:
        raise SingularDesignError("restricted GLS normal equations are numerically singular")
    return cho_solve(factor, rhs)


def _pattern_mask(d: int, edges) -> np.ndarray:
    mask = np.eye(d, dtype=bool)
    for a, b in edges:
        mask[a, b] = mask[b, a] = True
    return mask


def constrained_precision(W, mask, tol: float = 1e-8, max_iter: int = 1000) -> np.ndarray:
    """Gaussian MLE of the precision matrix with zeros wherever ``mask`` is False.

    Cycles over columns, regressing each variable on its allowed neighbours
    under the current covariance iterate, until the implied precision changes
    by less than ``tol`` in every entry.
    """
    S = np.asarray(W, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    p = S.shape[0]
    try:
        np.linalg.cholesky(S)
    except LinAlgError:
        raise DegenerateResidualsError("residual covariance is not positive definite") from None
    if p == 1 or not np.any(mask & ~np.eye(p, dtype=bool)):
        return np.diag(1.0 / np.diag(S))

    Wk = S.copy()
    theta = np.zeros_like(S)
    for it in range(max_iter):
        new_theta = np.zeros_like(S)
        for j in range(p):
            others = np.array([i for i in range(p) if i != j])
            nz = others[mask[j, others]]
            beta = np.zeros(p)
            if nz.size:
                beta[nz] = np.linalg.solve(Wk[np.ix_(nz, nz)], S[nz, j])
            w12 = Wk[np.ix_(others, others)] @ beta[others]
            Wk[others, j] = w12
            Wk[j, others] = w12
            t22 = 1.0 / (S[j, j] - w12 @ beta[others])
            new_theta[j, j] = t22
            new_theta[others, j] = -beta[others] * t22
        new_theta = 0.5 * (new_theta + new_theta.T)
        delta = np.max(np.abs(new_theta - theta))
        theta = new_theta
        if delta < tol:
            break
    else:
        log.warning("constrained precision did not reach tol=%g in %d sweeps", tol, max_iter)
    theta[~mask] = 0.0
    return theta


def estimate_omega_given_pattern(resid, edges, tol: float = 1e-8, max_iter: int = 1000) -> np.ndarray:
    """Zero-constrained precision MLE from residuals (covariance normalized by 1/n)."""
    r = as_array(resid)
    n, d = r.shape
    W = r.T @ r / n
    return constrained_precision(W, _pattern_mask(d, edges), tol, max_iter)


def gaussian_loglik(omega, W, n: int) -> float:
    """Zero-mean Gaussian log-likelihood of ``n`` rows with sample covariance ``W``."""
    omega = np.asarray(omega)
    d = omega.shape[0]
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        return float("-inf")
    return 0.5 * n * (logdet - float(np.sum(W * omega)) - d * LOG_2PI)


def _lag_residuals(Z: LaggedDataMatrix, mats) -> np.ndarray:
    B = np.hstack(mats)
    return Z.current - Z.lagged[:, : B.shape[1]] @ B.T


def fit_parameters(
    series,
    structure: GvarStructure,
    delta: float = 1e-6,
    max_iter: int = 100,
    omega_tol: float = 1e-8,
) -> tuple[GvarModel, FitDiagnostics]:
    """Iterative constrained ML fit of lag matrices and precision.

    Starts from an identity precision and stops once the log-likelihood
    changes by less than ``delta`` between iterations. If ``max_iter`` is hit
    the last (highest-likelihood) model is returned with ``converged=False``.
    """
    y = as_array(series)
    N, d = y.shape
    if structure.d != d:
        raise ValueError(f"structure has d={structure.d} but series has {d} columns")
    k = structure.k
    if N - k < d + 1:
        raise ValueError(f"need N - k >= d + 1, got N={N}, k={k}, d={d}")
    Z = build_lagged_matrix(y, k)
    n = Z.rows_effective
    edges = structure.contemporaneous_edges

    omega = np.eye(d)
    diag = FitDiagnostics()
    mats = None
    for it in range(1, max_iter + 1):
        mats = estimate_lag_matrices_given_omega(Z, structure, omega)
        resid = _lag_residuals(Z, mats)
        W = resid.T @ resid / n
        omega = constrained_precision(W, _pattern_mask(d, edges), omega_tol)
        ll = gaussian_loglik(omega, W, n)
        diag.loglik_trajectory.append(ll)
        diag.iterations = it
        if it > 1:
            diag.final_difference = abs(ll - diag.loglik_trajectory[-2])
            if diag.final_difference < delta:
                diag.converged = True
                break
    if not diag.converged:
        log.warning("parameter fit stopped after %d iterations without converging", max_iter)
    return GvarModel(tuple(mats), omega), diag


def unrestricted_ls(series, k: int) -> list[np.ndarray]:
    """Dense multivariate least-squares lag matrices (no intercept)."""
    Z = build_lagged_matrix(as_array(series), k)
    coef, *_ = np.linalg.lstsq(Z.lagged, Z.current, rcond=None)
    B = coef.T
    d = Z.d
    return [B[:, m * d : (m + 1) * d].copy() for m in range(k)]

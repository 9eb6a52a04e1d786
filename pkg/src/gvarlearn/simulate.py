"""Random sparse GVAR models and Gaussian time-series sampling.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), so a
given seed reproduces the same model and series across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import SimulationError
from .model import GvarModel, GvarStructure, TimeSeries, is_stable, spectral_radius


def sparse_var2_example() -> GvarModel:
    """Four-variable sparse VAR(2) with a chain-shaped precision matrix."""
    A1 = np.array(
        [
            [0.3, 0.0, 0.0, 0.0],
            [-0.2, 0.2, 0.0, 0.0],
            [0.0, 0.0, -0.3, 0.0],
            [0.0, 0.0, 0.2, -0.2],
        ]
    )
    A2 = np.array(
        [
            [0.0, 0.1, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -0.1],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )
    omega = np.array(
        [
            [1.0, 0.0, 0.2, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.2, 0.0, 1.0, 0.2],
            [0.0, 0.0, 0.2, 1.0],
        ]
    )
    return GvarModel((A1, A2), omega)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of the random GVAR generator.

    Each of the ``k*d*d`` possible temporal edges is drawn with probability
    ``q / (k*d)`` (expected indegree q); each of the ``d*(d-1)/2`` variable
    pairs gets a precision entry with probability ``q / (2*(d-1))``
    (expected q/2 neighbours).
    """

    d: int
    k: int
    q: float
    coef_low: float = 0.1
    coef_high: float = 0.9
    omega_offdiag: float = 0.2
    margin: float = 0.05
    burn_in: int = 500
    seed: int = 0
    max_attempts: int = 1000

    def __post_init__(self):
        if self.d < 1 or self.k < 1:
            raise ValueError("d and k must be >= 1")
        if self.q < 0:
            raise ValueError("q must be non-negative")
        if not 0 < self.coef_low <= self.coef_high:
            raise ValueError("coefficient range must satisfy 0 < low <= high")
        if self.q > self.k * self.d:
            raise ValueError("edge probability q/(k*d) exceeds 1")
        if self.d > 1 and self.q > 2 * (self.d - 1):
            raise ValueError("contemporaneous edge probability q/(2(d-1)) exceeds 1")
        if not 0 <= self.margin < 1:
            raise ValueError("margin must lie in [0, 1)")

    @property
    def temporal_edge_prob(self) -> float:
        return self.q / (self.k * self.d)

    @property
    def contemporaneous_edge_prob(self) -> float:
        return 0.0 if self.d < 2 else self.q / (2 * (self.d - 1))


def _random_precision(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    d = cfg.d
    omega = np.zeros((d, d))
    iu = np.triu_indices(d, 1)
    include = rng.random(len(iu[0])) < cfg.contemporaneous_edge_prob
    signs = rng.choice([-1.0, 1.0], size=len(iu[0]))
    vals = np.where(include, signs * cfg.omega_offdiag, 0.0)
    omega[iu] = vals
    omega += omega.T
    np.fill_diagonal(omega, 1.0 + np.abs(omega).sum(axis=1))
    return omega


def random_gvar(config: SimConfig) -> tuple[GvarModel, GvarStructure]:
    """Draw a random stable sparse GVAR model and its ground-truth structure.

    Unstable draws are shrunk by ``target / rho`` (``target = 0.95 * (1 - margin)``)
    until stable; a draw whose nonzero coefficients would collapse is
    resampled. Gives up after ``max_attempts`` draws plus rescalings.

    Raises:
        SimulationError: no stable model within ``max_attempts``.
    """
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    d, k = cfg.d, cfg.k
    omega = _random_precision(cfg, rng)
    target = 0.95 * (1.0 - cfg.margin)

    attempts = 0
    while attempts < cfg.max_attempts:
        mask = rng.random((k, d, d)) < cfg.temporal_edge_prob
        mags = rng.uniform(cfg.coef_low, cfg.coef_high, size=(k, d, d))
        signs = rng.choice([-1.0, 1.0], size=(k, d, d))
        A = np.where(mask, mags * signs, 0.0)
        while attempts < cfg.max_attempts:
            attempts += 1
            model = GvarModel(tuple(A), omega)
            if is_stable(model, cfg.margin):
                return model, model.structure()
            A = A * (target / spectral_radius(model))
            if np.min(np.abs(A[mask])) < 1e-3:
                break
    raise SimulationError(f"no stable model found in {cfg.max_attempts} attempts (seed={cfg.seed})")


def draw_series(model: GvarModel, n: int, burn_in: int = 500, seed: int = 0) -> TimeSeries:
    """Sample ``n`` observations of the VAR recursion after ``burn_in`` warm-up steps.

    The ``k`` presample values are zero; innovations are ``N(0, inv(precision))``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not is_stable(model):
        raise ValueError("cannot simulate an unstable model")
    rng = np.random.default_rng(seed)
    d, k = model.d, model.k
    total = burn_in + n
    z = rng.standard_normal((total, d))
    upper = np.linalg.cholesky(model.precision).T
    eps = solve_triangular(upper, z.T, lower=False).T

    coef = np.hstack(model.lag_matrices)  # (d, k*d), block m multiplies y_{t-m}
    y = np.zeros((k + total, d))
    for t in range(k, k + total):
        past = y[t - k : t][::-1].ravel()
        y[t] = coef @ past + eps[t - k]
    return TimeSeries(y[k + burn_in :])

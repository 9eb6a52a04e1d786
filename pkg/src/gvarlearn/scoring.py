"""Lagged data matrices and log-domain fractional marginal pseudo-likelihood scores."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import gammaln

from .errors import SingularScatterError
from .model import as_array

LOG_PI = float(np.log(np.pi))


@dataclass(frozen=True)
class LaggedDataMatrix:
    """Rows ``[y_t, y_{t-1}, ..., y_{t-k}]``; variable m at lag l is column ``l*d + m``."""

    values: np.ndarray
    d: int
    k: int

    @property
    def rows_effective(self) -> int:
        return self.values.shape[0]

    def column(self, lag: int, var: int) -> int:
        return lag * self.d + var

    def lag_of(self, col: int) -> tuple[int, int]:
        """Inverse of :meth:`column`: ``(lag, var)`` for a column index."""
        return divmod(int(col), self.d)

    @property
    def current(self) -> np.ndarray:
        """The lag-0 block (responses)."""
        return self.values[:, : self.d]

    @property
    def lagged(self) -> np.ndarray:
        """The lag-1..k blocks (regressors)."""
        return self.values[:, self.d :]


@dataclass(frozen=True)
class ScatterMatrix:
    S: np.ndarray
    n: int


@dataclass(frozen=True)
class MarkovBlanket:
    node: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(int(j) for j in self.members))
        if self.node in members:
            raise ValueError(f"node {self.node} cannot be in its own Markov blanket")
        if len(set(members)) != len(members):
            raise ValueError("Markov blanket members must be distinct")
        object.__setattr__(self, "members", members)

    @property
    def p(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def build_lagged_matrix(series, k: int, align_to: int | None = None) -> LaggedDataMatrix:
    """Build the lagged data matrix for lag length ``k``.

    Rows cover times ``t = K+1..N`` where ``K = align_to`` (default ``k``), so
    every ``k <= K`` yields the same ``N - K`` rows and comparable scores.
    """
    y = as_array(series)
    n, d = y.shape
    K = k if align_to is None else align_to
    if k < 1 or K < k:
        raise ValueError(f"need 1 <= k <= K, got k={k}, K={K}")
    if K >= n:
        raise ValueError(f"maximum lag {K} must be smaller than the series length {n}")
    blocks = [y[K - lag : n - lag] for lag in range(k + 1)]
    return LaggedDataMatrix(np.hstack(blocks), d, k)


def scatter(Z) -> ScatterMatrix:
    """Unscaled cross-product ``Z^T Z``."""
    z = Z.values if isinstance(Z, LaggedDataMatrix) else np.asarray(Z, dtype=float)
    S = z.T @ z
    S = (S + S.T) / 2.0
    return ScatterMatrix(S, z.shape[0])


def _logdet_spd(M: np.ndarray) -> float:
    L = np.linalg.cholesky(M)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def fmpl_constant(n: int, p: int) -> float:
    """The data-independent part of the local score (everything but the determinants)."""
    return (
        -0.5 * (n - 1) * LOG_PI
        + gammaln(0.5 * (n + p))
        - gammaln(0.5 * (p + 1))
        - 0.5 * (2 * p + 1) * np.log(n)
    )


def log_local_fmpl(S, i: int, mb: Iterable[int], n: int | None = None, jitter: float = 0.0) -> float:
    """Log local FMPL of node ``i`` given blanket ``mb``.

    Args:
        S: scatter matrix (ndarray or :class:`ScatterMatrix`).
        i: column index of the scored node.
        mb: column indices of the blanket.
        n: effective sample count; taken from ``S`` when it is a ScatterMatrix.
        jitter: added to the diagonal of the restricted submatrices.

    Raises:
        SingularScatterError: ``S`` restricted to ``mb + [i]`` is not positive definite.
    """
    if isinstance(S, ScatterMatrix):
        n = S.n if n is None else n
        S = S.S
    if n is None:
        raise ValueError("effective sample count n is required")
    members = list(mb.members if isinstance(mb, MarkovBlanket) else mb)
    p = len(members)
    if i in members:
        raise ValueError(f"node {i} cannot be in its own Markov blanket")
    if p > n - 1:
        raise ValueError(f"blanket size {p} exceeds n - 1 = {n - 1}")
    fam = members + [i]
    S_fa = S[np.ix_(fam, fam)]
    if jitter:
        S_fa = S_fa + jitter * np.eye(p + 1)
    try:
        logdet_fa = _logdet_spd(S_fa)
        logdet_mb = _logdet_spd(S_fa[:p, :p]) if p else 0.0
    except np.linalg.LinAlgError:
        raise SingularScatterError(i, members) from None
    if not np.isfinite(logdet_fa):
        raise SingularScatterError(i, members)
    return float(fmpl_constant(n, p) - 0.5 * (n - 1) * (logdet_fa - logdet_mb))


def log_prior_temporal(p: int, d: int, k: int, gamma: float = 0.5) -> float:
    """Log of ``(kd)^(-gamma p)``."""
    if k * d < 2:
        raise ValueError("temporal prior needs k*d >= 2")
    if p < 0 or gamma < 0:
        raise ValueError("p and gamma must be non-negative")
    return -gamma * p * float(np.log(k * d))


def log_prior_contemporaneous(p: int, d: int, gamma: float = 0.5) -> float:
    """Log of ``(d-1)^(-gamma p)``; identically zero when d = 2."""
    if d < 2:
        raise ValueError("contemporaneous prior needs d >= 2")
    if p < 0 or gamma < 0:
        raise ValueError("p and gamma must be non-negative")
    return -gamma * p * float(np.log(d - 1))

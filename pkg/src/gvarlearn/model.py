"""Domain types for Gaussian VAR models and their sparse structures.

Variables are indexed from 0 throughout the Python API; lags start at 1.
A temporal edge ``(lag, source, target)`` means ``A_lag[target, source] != 0``,
i.e. ``y[t - lag, source]`` enters the equation for ``y[t, target]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SYMMETRY_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """An ``N x d`` block of observations, rows ordered in time."""

    values: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim == 1:
            v = _frozen(v[:, None])
        if v.ndim != 2:
            raise ValueError("time series values must be a 2-D array (N, d)")
        n, d = v.shape
        if n < 2 or d < 1:
            raise ValueError(f"time series needs N >= 2 and d >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = sorted(set(np.nonzero(~np.isfinite(v))[1].tolist()))
            raise ValueError(f"time series has non-finite entries in columns {bad}")
        object.__setattr__(self, "values", v)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != d:
                raise ValueError(f"expected {d} column names, got {len(names)}")
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.n


def as_array(series) -> np.ndarray:
    """Return the ``(N, d)`` float array behind a TimeSeries or array-like."""
    if isinstance(series, TimeSeries):
        return series.values
    arr = np.asarray(series, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array of shape (N, d)")
    return arr


@dataclass(frozen=True)
class GvarModel:
    """Gaussian VAR(k): ``y_t = sum_m A_m y_{t-m} + e_t`` with ``e_t ~ N(0, inv(precision))``."""

    lag_matrices: tuple[np.ndarray, ...]
    precision: np.ndarray

    def __post_init__(self):
        mats = tuple(_frozen(a) for a in self.lag_matrices)
        if len(mats) < 1:
            raise ValueError("a GVAR model needs at least one lag matrix")
        omega = np.asarray(self.precision, dtype=float)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise ValueError("precision must be a square matrix")
        d = omega.shape[0]
        for m, a in enumerate(mats, start=1):
            if a.shape != (d, d):
                raise ValueError(f"lag matrix {m} has shape {a.shape}, expected {(d, d)}")
        omega = (omega + omega.T) / 2.0
        try:
            np.linalg.cholesky(omega)
        except np.linalg.LinAlgError:
            raise ValueError("precision matrix is not positive definite") from None
        object.__setattr__(self, "lag_matrices", mats)
        object.__setattr__(self, "precision", _frozen(omega))

    @property
    def d(self) -> int:
        return self.precision.shape[0]

    @property
    def k(self) -> int:
        return len(self.lag_matrices)

    @property
    def covariance(self) -> np.ndarray:
        return np.linalg.inv(self.precision)

    def structure(self) -> "GvarStructure":
        """Nonzero pattern of the lag matrices and precision off-diagonals."""
        return GvarStructure.from_matrices(self.lag_matrices, self.precision)


def _undirected(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class GvarStructure:
    """Temporal (directed, lagged) and contemporaneous (undirected) edge sets."""

    d: int
    k: int
    temporal_edges: frozenset = field(default_factory=frozenset)
    contemporaneous_edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.d < 1 or self.k < 1:
            raise ValueError("structure needs d >= 1 and k >= 1")
        temporal = set()
        for edge in self.temporal_edges:
            lag, src, dst = (int(x) for x in edge)
            if not (1 <= lag <= self.k and 0 <= src < self.d and 0 <= dst < self.d):
                raise ValueError(f"temporal edge {edge} out of range for d={self.d}, k={self.k}")
            temporal.add((lag, src, dst))
        contemp = set()
        for edge in self.contemporaneous_edges:
            a, b = (int(x) for x in edge)
            if a == b:
                raise ValueError(f"contemporaneous self-edge {edge}")
            if not (0 <= a < self.d and 0 <= b < self.d):
                raise ValueError(f"contemporaneous edge {edge} out of range for d={self.d}")
            contemp.add(_undirected(a, b))
        object.__setattr__(self, "temporal_edges", frozenset(temporal))
        object.__setattr__(self, "contemporaneous_edges", frozenset(contemp))

    @classmethod
    def from_matrices(cls, lag_matrices: Sequence[np.ndarray], precision=None) -> "GvarStructure":
        mats = [np.asarray(a) for a in lag_matrices]
        d = mats[0].shape[0]
        temporal = {
            (m, int(src), int(dst))
            for m, a in enumerate(mats, start=1)
            for dst, src in zip(*np.nonzero(a))
        }
        contemp = set()
        if precision is not None:
            omega = np.asarray(precision)
            contemp = {(int(a), int(b)) for a, b in zip(*np.nonzero(omega)) if a < b}
        return cls(d, len(mats), frozenset(temporal), frozenset(contemp))

    @classmethod
    def from_parents(
        cls,
        d: int,
        k: int,
        parents: Sequence[Iterable[tuple[int, int]]],
        contemporaneous_edges: Iterable = (),
    ) -> "GvarStructure":
        """Build from per-target parent lists of ``(lag, source)`` pairs."""
        temporal = {(lag, src, dst) for dst, ps in enumerate(parents) for lag, src in ps}
        return cls(d, k, frozenset(temporal), frozenset(contemporaneous_edges))

    def parents(self, target: int) -> list[tuple[int, int]]:
        """Sorted ``(lag, source)`` pairs pointing into ``target``."""
        return sorted((lag, src) for lag, src, dst in self.temporal_edges if dst == target)

    def temporal_mask(self) -> np.ndarray:
        """Boolean ``(k, d, d)`` array, ``mask[m-1, dst, src]`` for each temporal edge."""
        mask = np.zeros((self.k, self.d, self.d), dtype=bool)
        for lag, src, dst in self.temporal_edges:
            mask[lag - 1, dst, src] = True
        return mask

    def contemporaneous_mask(self) -> np.ndarray:
        """Symmetric boolean adjacency with ``True`` on the diagonal."""
        mask = np.eye(self.d, dtype=bool)
        for a, b in self.contemporaneous_edges:
            mask[a, b] = mask[b, a] = True
        return mask

    @property
    def n_temporal(self) -> int:
        return len(self.temporal_edges)

    @property
    def n_contemporaneous(self) -> int:
        return len(self.contemporaneous_edges)


def companion_matrix(model: GvarModel) -> np.ndarray:
    """Stack a VAR(k) into its ``kd x kd`` VAR(1) companion matrix."""
    d, k = model.d, model.k
    out = np.zeros((k * d, k * d))
    out[:d, :] = np.hstack(model.lag_matrices)
    if k > 1:
        out[d:, : (k - 1) * d] = np.eye((k - 1) * d)
    return out


def spectral_radius(model: GvarModel) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(model)))))


def is_stable(model: GvarModel, margin: float = 0.0) -> bool:
    """True iff the companion spectral radius is below ``1 - margin``."""
    if not 0.0 <= margin < 1.0:
        raise ValueError(f"margin must lie in [0, 1), got {margin}")
    return spectral_radius(model) < 1.0 - margin


def detrend(series) -> tuple[TimeSeries, np.ndarray, np.ndarray]:
    """Remove a per-column least-squares line fitted against t = 1..N.

    Returns:
        The residual series, the slopes and the intercepts (each length d).
    """
    names = series.names if isinstance(series, TimeSeries) else None
    y = as_array(series)
    n = y.shape[0]
    if n < 2:
        raise ValueError("detrending needs at least two observations")
    t = np.arange(1, n + 1, dtype=float)
    design = np.column_stack([t, np.ones(n)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = coef[0], coef[1]
    resid = y - np.outer(t, slope) - intercept
    return TimeSeries(resid, names), slope, intercept


def center(series) -> tuple[TimeSeries, np.ndarray]:
    """Subtract column means; returns the centered series and the means."""
    names = series.names if isinstance(series, TimeSeries) else None
    y = as_array(series)
    mean = y.mean(axis=0)
    return TimeSeries(y - mean, names), mean

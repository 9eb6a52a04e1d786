"""Greedy Markov blanket search and the two-step structure learner.

The temporal step learns each node's lagged parents for every k = 1..K on a
common row alignment and keeps the best-scoring lag length. The
contemporaneous step runs the same search on OLS residuals and joins the
per-node blankets with the OR rule.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .errors import SingularDesignError
from .model import GvarModel, GvarStructure, TimeSeries, as_array
from .scoring import (
    LaggedDataMatrix,
    MarkovBlanket,
    build_lagged_matrix,
    log_local_fmpl,
    log_prior_contemporaneous,
    log_prior_temporal,
    scatter,
)

Blanket = tuple[int, ...]


def greedy_markov_blanket(
    node: int,
    score: Callable[[Blanket], float],
    candidates: Iterable[int],
    n: int,
    trace: list | None = None,
) -> MarkovBlanket:
    """Interleaved greedy forward/backward search for one node's blanket.

    Each outer pass adds the single best improving candidate, then removes
    members one at a time while that improves the objective. The search stops
    once a pass changes nothing or the blanket reaches ``n - 1`` members.
    Candidates are scanned in ascending order and only strict improvements are
    accepted, so ties resolve to the lowest index.

    Args:
        node: index of the node whose blanket is searched (excluded from candidates).
        score: objective of a sorted member tuple; called with ``()`` for the empty blanket.
        candidates: admissible member indices.
        n: effective sample count; caps the blanket size at ``n - 1``.
        trace: if given, the objective after every accepted step is appended.
    """
    pool = sorted(set(int(c) for c in candidates) - {node})
    cache: dict[Blanket, float] = {}

    def f(members: Blanket) -> float:
        if members not in cache:
            cache[members] = score(members)
        return cache[members]

    best: Blanket = ()
    best_score = f(best)
    if trace is not None:
        trace.append(best_score)

    changed = True
    while changed and len(best) < n - 1:
        current = best
        current_set = set(current)
        for j in pool:
            if j in current_set:
                continue
            trial = tuple(sorted(current + (j,)))
            s = f(trial)
            if s > best_score:
                best, best_score = trial, s
        changed = best != current
        if changed and trace is not None:
            trace.append(best_score)

        removed = changed
        while removed:
            current = best
            for j in current:
                trial = tuple(m for m in current if m != j)
                s = f(trial)
                if s > best_score:
                    best, best_score = trial, s
            removed = best != current
            if removed and trace is not None:
                trace.append(best_score)

    return MarkovBlanket(node, best)


def _map_nodes(fn: Callable[[int], object], d: int, threads: int) -> list:
    if threads <= 1 or d <= 1:
        return [fn(i) for i in range(d)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(d)))


@dataclass(frozen=True)
class TemporalResult:
    """Outcome of temporal structure learning with lag selection.

    ``parents[i]`` lists ``(lag, source)`` pairs for node i at the selected
    lag; ``node_scores[i]`` is that node's local score plus prior.
    """

    k: int
    parents: tuple[tuple[tuple[int, int], ...], ...]
    node_scores: tuple[float, ...]
    objective_per_k: dict[int, float]
    parents_per_k: dict[int, tuple[tuple[tuple[int, int], ...], ...]] = field(repr=False, default_factory=dict)

    @property
    def d(self) -> int:
        return len(self.parents)

    def structure(self) -> GvarStructure:
        return GvarStructure.from_parents(self.d, self.k, self.parents)


def learn_temporal(
    series,
    max_lag: int,
    gamma: float = 0.5,
    threads: int = 1,
    jitter: float = 0.0,
) -> TemporalResult:
    """Learn lagged parent sets for every node and select the lag length.

    Every candidate ``k <= max_lag`` is scored on the rows ``t = K+1..N``, so
    the per-k objectives are directly comparable. Ties go to the smaller k.
    """
    y = as_array(series)
    N, d = y.shape
    K = int(max_lag)
    if K < 1:
        raise ValueError("max_lag must be >= 1")
    if N - K < 2:
        raise ValueError(f"series of length {N} is too short for max_lag={K}")

    # the k-aligned matrix is the leading (k+1)d columns of the K-aligned one
    Z = build_lagged_matrix(y, K, K)
    S = scatter(Z).S
    n = Z.rows_effective

    objective_per_k: dict[int, float] = {}
    parents_per_k = {}
    scores_per_k = {}
    for k in range(1, K + 1):
        candidates = range(d, (k + 1) * d)

        def solve(i, k=k, candidates=candidates):
            def objective(mb):
                return log_local_fmpl(S, i, mb, n, jitter) + log_prior_temporal(len(mb), d, k, gamma)

            mb = greedy_markov_blanket(i, objective, candidates, n)
            return mb, objective(mb.members)

        results = _map_nodes(solve, d, threads)
        parents_per_k[k] = tuple(tuple(Z.lag_of(c) for c in mb.members) for mb, _ in results)
        scores_per_k[k] = tuple(float(s) for _, s in results)
        objective_per_k[k] = float(sum(scores_per_k[k]))

    k_hat = 1
    for k in range(2, K + 1):
        if objective_per_k[k] > objective_per_k[k_hat]:
            k_hat = k
    return TemporalResult(k_hat, parents_per_k[k_hat], scores_per_k[k_hat], objective_per_k, parents_per_k)


def ols_node(Z: LaggedDataMatrix, i: int, parents: Sequence[tuple[int, int]]) -> np.ndarray:
    """Least-squares coefficients of node ``i`` on its ``(lag, source)`` parents."""
    parents = list(parents)
    if not parents:
        return np.zeros(0)
    if len(parents) > Z.rows_effective - 1:
        raise ValueError(f"{len(parents)} parents exceed rows_effective - 1 = {Z.rows_effective - 1}")
    cols = [Z.column(lag, var) for lag, var in parents]
    X = Z.values[:, cols]
    coef, _, rank, _ = np.linalg.lstsq(X, Z.values[:, i], rcond=None)
    if rank < len(cols):
        raise SingularDesignError(f"design for node {i} with parents {parents} is rank deficient")
    return coef


def ols_lag_matrices(Z: LaggedDataMatrix, parents: Sequence[Sequence[tuple[int, int]]]) -> list[np.ndarray]:
    """Sparse lag matrices filled node by node with :func:`ols_node`."""
    d, k = Z.d, Z.k
    mats = [np.zeros((d, d)) for _ in range(k)]
    for i, ps in enumerate(parents):
        for (lag, src), c in zip(ps, ols_node(Z, i, ps)):
            mats[lag - 1][i, src] = c
    return mats


def residuals(series, lag_matrices: Sequence[np.ndarray]) -> TimeSeries:
    """One-step residuals ``y_t - sum_m A_m y_{t-m}`` for ``t = k+1..N``."""
    y = as_array(series)
    N = y.shape[0]
    k = len(lag_matrices)
    if k >= N:
        raise ValueError(f"lag length {k} must be smaller than the series length {N}")
    resid = y[k:].copy()
    for m, a in enumerate(lag_matrices, start=1):
        resid -= y[k - m : N - m] @ np.asarray(a).T
    return TimeSeries(resid)


class ContemporaneousResult(NamedTuple):
    edges: frozenset
    blankets: tuple[tuple[int, ...], ...]
    node_scores: tuple[float, ...]


def or_closure(blankets: Sequence[Iterable[int]]) -> frozenset:
    """Undirected edges ``{i, j}`` with ``j in mb(i)`` or ``i in mb(j)``."""
    return frozenset((min(i, j), max(i, j)) for i, mb in enumerate(blankets) for j in mb)


def learn_contemporaneous(resid, gamma: float = 0.5, threads: int = 1, jitter: float = 0.0) -> ContemporaneousResult:
    """Per-node blanket search on residuals, symmetrized with the OR rule."""
    r = as_array(resid)
    n, d = r.shape
    if n < d + 1:
        raise ValueError(f"need at least d + 1 = {d + 1} residual rows, got {n}")
    if d == 1:
        log_local_fmpl(r.T @ r, 0, (), n, jitter)
        return ContemporaneousResult(frozenset(), ((),), (0.0,))
    S = scatter(r).S

    def solve(i):
        def objective(mb):
            return log_local_fmpl(S, i, mb, n, jitter) + log_prior_contemporaneous(len(mb), d, gamma)

        mb = greedy_markov_blanket(i, objective, range(d), n)
        return mb.members, objective(mb.members)

    results = _map_nodes(solve, d, threads)
    blankets = tuple(mb for mb, _ in results)
    return ContemporaneousResult(or_closure(blankets), blankets, tuple(float(s) for _, s in results))


@dataclass
class LearnResult:
    structure: GvarStructure
    temporal: TemporalResult
    contemporaneous_blankets: tuple[tuple[int, ...], ...]
    ols_lag_matrices: list[np.ndarray]
    model: GvarModel | None = None
    diagnostics: object = None
    timings_ms: dict[str, float] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.structure.k


def learn_structure(
    series,
    max_lag: int,
    gamma: float = 0.5,
    threads: int = 1,
    jitter: float = 0.0,
) -> LearnResult:
    """Learn the temporal graph and lag length, then the contemporaneous graph.

    After the lag is selected, OLS coefficients and residuals use all
    ``N - k_hat`` available rows rather than the ``N - K`` used for selection.
    """
    y = as_array(series)
    t0 = time.perf_counter()
    temporal = learn_temporal(y, max_lag, gamma, threads, jitter)
    t1 = time.perf_counter()
    Z = build_lagged_matrix(y, temporal.k)
    mats = ols_lag_matrices(Z, temporal.parents)
    resid = residuals(y, mats)
    contemp = learn_contemporaneous(resid, gamma, threads, jitter)
    t2 = time.perf_counter()
    structure = GvarStructure.from_parents(y.shape[1], temporal.k, temporal.parents, contemp.edges)
    timings = {"temporal": 1e3 * (t1 - t0), "contemporaneous": 1e3 * (t2 - t1), "total": 1e3 * (t2 - t0)}
    return LearnResult(structure, temporal, contemp.blankets, mats, timings_ms=timings)

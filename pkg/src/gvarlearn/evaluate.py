"""Structure-recovery metrics, lag histograms and one-step prediction error."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, NamedTuple

import numpy as np

from .model import GvarModel, GvarStructure, as_array


class RecoveryScores(NamedTuple):
    temporal_precision: float
    temporal_recall: float
    contemporaneous_precision: float
    contemporaneous_recall: float


def _pr(estimated: frozenset, truth: frozenset) -> tuple[float, float]:
    hits = len(estimated & truth)
    # empty estimate emits no false positives; empty truth leaves nothing to miss
    precision = hits / len(estimated) if estimated else 1.0
    recall = hits / len(truth) if truth else 1.0
    return precision, recall


def precision_recall(estimated: GvarStructure, truth: GvarStructure) -> RecoveryScores:
    """Edge precision and recall for the temporal and contemporaneous parts.

    Temporal edges match only on the full ``(lag, source, target)`` triple, so
    an edge found at the wrong lag is both a false positive and a miss.
    """
    if estimated.d != truth.d:
        raise ValueError(f"dimension mismatch: estimated d={estimated.d}, truth d={truth.d}")
    tp, tr = _pr(estimated.temporal_edges, truth.temporal_edges)
    cp, cr = _pr(estimated.contemporaneous_edges, truth.contemporaneous_edges)
    return RecoveryScores(tp, tr, cp, cr)


def one_step_mse(model, test) -> float:
    """Mean squared one-step-ahead prediction error over ``t = k+1..N``.

    ``model`` may be a GvarModel or a plain sequence of lag matrices; only the
    lag matrices enter the prediction.
    """
    mats = model.lag_matrices if isinstance(model, GvarModel) else [np.asarray(a) for a in model]
    y = as_array(test)
    N = y.shape[0]
    k = len(mats)
    if N <= k:
        raise ValueError(f"test series of length {N} is too short for lag {k}")
    pred = np.zeros((N - k, y.shape[1]))
    for m, a in enumerate(mats, start=1):
        pred += y[k - m : N - m] @ a.T
    return float(np.mean((y[k:] - pred) ** 2))


def lag_histogram(runs: Iterable) -> dict[int, int]:
    """Count how often each lag length was selected.

    Accepts TemporalResult/LearnResult objects (anything with ``.k``) or ints.
    """
    ks = [int(getattr(r, "k", r)) for r in runs]
    if not ks:
        raise ValueError("lag_histogram needs at least one run")
    return dict(sorted(Counter(ks).items()))

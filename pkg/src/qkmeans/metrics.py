"""Clustering quality metrics: SSE, silhouette, V-measure, pairwise
confusion against a reference clustering, and the elbow sweep."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .clustering import ClusteringParams, ClusteringRun, derive_seed, run
from .encoding import standardize


def sse(data: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    """Sum of squared distances of each record to its assigned centroid."""
    data = np.asarray(data, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if labels.min() < 0 or labels.max() >= centroids.shape[0]:
        raise ValueError("label out of range")
    diff = data - centroids[labels]
    return float(np.sum(diff * diff))


def silhouette(data: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette score (b - a) / max(a, b).

    ``a`` is the mean distance to the other members of the point's own
    cluster, ``b`` the smallest mean distance to any other cluster.
    Singleton clusters contribute 0 for their lone point.
    """
    data = np.asarray(data, dtype=float)
    labels = np.asarray(labels, dtype=int)
    unique = np.unique(labels)
    if len(unique) < 2:
        raise ValueError("silhouette needs at least 2 distinct clusters")
    diff = data[:, None, :] - data[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    members = {int(c): np.nonzero(labels == c)[0] for c in unique}
    scores = np.zeros(data.shape[0])
    for i in range(data.shape[0]):
        own = members[int(labels[i])]
        if len(own) == 1:
            continue
        a = dist[i, own].sum() / (len(own) - 1)
        b = min(dist[i, members[int(c)]].mean()
                for c in unique if c != labels[i])
        denom = max(a, b)
        scores[i] = (b - a) / denom if denom > 0 else 0.0
    return float(scores.mean())


def _contingency(labels_a: np.ndarray, labels_b: np.ndarray) -> np.ndarray:
    _, a_idx = np.unique(labels_a, return_inverse=True)
    _, b_idx = np.unique(labels_b, return_inverse=True)
    table = np.zeros((a_idx.max() + 1, b_idx.max() + 1))
    np.add.at(table, (a_idx, b_idx), 1.0)
    return table


def _entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0]
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def v_measure(labels_true, labels_pred) -> float:
    """Harmonic mean of homogeneity and completeness (beta = 1), computed
    from conditional entropies of the contingency table."""
    labels_true = np.asarray(labels_true)
    labels_pred = np.asarray(labels_pred)
    if labels_true.shape != labels_pred.shape:
        raise ValueError("label arrays must have the same length")
    table = _contingency(labels_true, labels_pred)
    n = table.sum()
    h_true = _entropy(table.sum(axis=1))
    h_pred = _entropy(table.sum(axis=0))
    nz = table > 0
    # H(true | pred): uncertainty about the true class within each predicted one
    col = table.sum(axis=0, keepdims=True)
    h_true_pred = float(-np.sum(table[nz] / n
                                * np.log((table / col)[nz])))
    row = table.sum(axis=1, keepdims=True)
    h_pred_true = float(-np.sum(table[nz] / n
                                * np.log((table / row)[nz])))
    homogeneity = 1.0 if h_true == 0.0 else 1.0 - h_true_pred / h_true
    completeness = 1.0 if h_pred == 0.0 else 1.0 - h_pred_true / h_pred
    if homogeneity + completeness == 0.0:
        return 0.0
    return 2.0 * homogeneity * completeness / (homogeneity + completeness)


@dataclass(frozen=True)
class PairConfusion:
    """Percentages of the C(M, 2) record pairs, comparing a clustering
    against a reference one (true/false means agreeing with the reference,
    positive means clustered together by the reference)."""

    tp: float
    fp: float
    fn: float
    tn: float


def pair_confusion(labels_ref, labels_other) -> PairConfusion:
    """Pairwise co-clustering confusion with ``labels_ref`` as reference."""
    labels_ref = np.asarray(labels_ref)
    labels_other = np.asarray(labels_other)
    if labels_ref.shape != labels_other.shape:
        raise ValueError("label arrays must have the same length")
    m = labels_ref.shape[0]
    if m < 2:
        raise ValueError("need at least 2 records")

    def pairs(counts):
        return float(np.sum(counts * (counts - 1) / 2.0))

    table = _contingency(labels_ref, labels_other)
    total = m * (m - 1) / 2.0
    tp = pairs(table)
    fp = pairs(table.sum(axis=1)) - tp
    fn = pairs(table.sum(axis=0)) - tp
    tn = total - tp - fp - fn
    scale = 100.0 / total
    return PairConfusion(tp * scale, fp * scale, fn * scale, tn * scale)


@dataclass
class MetricsReport:
    """Per-run summary in the shape the result tables use."""

    n_ite: int
    avg_similarity: float
    sse: float
    silhouette: float | None
    v_measure: float | None


def summarize_run(data: np.ndarray, result: ClusteringRun,
                  ground_truth=None) -> MetricsReport:
    """Metrics of a finished run, computed in standardized feature space."""
    std, _, _ = standardize(data)
    effective = len(np.unique(result.labels))
    return MetricsReport(
        n_ite=result.n_ite,
        avg_similarity=result.avg_similarity,
        sse=sse(std, result.labels, result.centroids),
        silhouette=silhouette(std, result.labels) if effective >= 2 else None,
        v_measure=(v_measure(ground_truth, result.labels)
                   if ground_truth is not None else None),
    )


def elbow(data: np.ndarray, k_range, params: ClusteringParams,
          n_seeds: int = 5) -> list[tuple[int, float]]:
    """SSE-vs-k curve, taking the best of ``n_seeds`` seeded runs per k."""
    std, _, _ = standardize(data)
    curve = []
    for k in k_range:
        best = None
        for s in range(n_seeds):
            p = dataclasses.replace(params, k=k,
                                    seed=derive_seed(params.seed, k, s))
            result = run(data, p)
            value = sse(std, result.labels, result.centroids)
            if best is None or value < best:
                best = value
        curve.append((int(k), float(best)))
    return curve

"""Convex fusion of the cluster, boost, and curve weights, and the grid
search that picks the two mixing parameters.

The mixture is (1 - alpha - beta) * cluster + alpha * boost + beta * curve
with both parameters in [0, 1] and their sum at most 1, so the result of
mixing [0, 1] inputs stays in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

DEFAULT_GRID_STEP = 0.05
_EPS = 1e-9


@dataclass(frozen=True)
class CoherenceParams:
    """Mixing parameters for the three module weights."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ValidationError("alpha and beta must lie in [0, 1]")
        if self.alpha + self.beta > 1.0 + _EPS:
            raise ValidationError("alpha + beta must not exceed 1")

    @property
    def cluster_coefficient(self) -> float:
        return max(0.0, 1.0 - self.alpha - self.beta)


def coherence_weight(wc, wb, wv, params: CoherenceParams):
    """Fused weight for (cluster, boost, curve) inputs; accepts scalars or
    arrays and returns the convex combination."""
    return (params.cluster_coefficient * np.asarray(wc)
            + params.alpha * np.asarray(wb)
            + params.beta * np.asarray(wv))


def fuse_matrices(w_cluster: np.ndarray, w_boost: np.ndarray, w_curve: np.ndarray,
                  params: CoherenceParams) -> np.ndarray:
    """Fused per-(author, occupation) weight matrix."""
    return coherence_weight(w_cluster, w_boost, w_curve, params)


def predict_classes(fused: np.ndarray) -> np.ndarray:
    """Row argmax with ties going to the lower class index."""
    return np.argmax(fused, axis=1)


def f1_score(predicted: np.ndarray, actual: np.ndarray) -> float:
    """Micro F1 of hard assignments (precision == recall when every author
    receives a prediction)."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    labeled = len(actual)
    if labeled == 0:
        raise ValidationError("cannot score an empty fold")
    correct = int(np.sum(predicted == actual))
    precision = correct / len(predicted)
    recall = correct / labeled
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def grid_points(step: float = DEFAULT_GRID_STEP):
    """All feasible (alpha, beta) pairs on the step grid, in scan order."""
    if step <= 0 or step > 1:
        raise ValidationError("grid step must lie in (0, 1]")
    n = int(round(1.0 / step))
    points = []
    for i in range(n + 1):
        for j in range(n + 1):
            alpha = i * step
            beta = j * step
            if alpha + beta <= 1.0 + _EPS:
                points.append((min(alpha, 1.0), min(beta, 1.0)))
    return points


def tune(w_cluster: np.ndarray, w_boost: np.ndarray, w_curve: np.ndarray,
         labels: np.ndarray, step: float = DEFAULT_GRID_STEP):
    """Exhaustive grid search for the F1-maximizing mixing parameters.

    Takes the validation fold's three per-(author, occupation) weight
    matrices and integer class labels.  Ties prefer the smaller
    alpha + beta, then the smaller alpha.  Returns the winning params and
    the full (alpha, beta, f1) surface for plotting.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValidationError("validation fold is empty")

    surface = []
    best = None
    best_key = None
    for alpha, beta in grid_points(step):
        params = CoherenceParams(alpha=alpha, beta=beta)
        fused = fuse_matrices(w_cluster, w_boost, w_curve, params)
        score = f1_score(predict_classes(fused), labels)
        surface.append((alpha, beta, score))
        key = (-score, alpha + beta, alpha)
        if best_key is None or key < best_key:
            best_key = key
            best = params
    return best, surface

"""Weighted isotonic curve fitting by pool-adjacent-violators.

One monotone step curve is fitted per (trait, occupation) pair; traits
that correlate negatively with an occupation are fitted on the mirrored
axis so the non-decreasing assumption holds.  Curve reliability follows
the inverse residual-variance rule with a small variance floor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError, ValidationError
from .lessn import TRAITS
from .util import minmax_rescale

VARIANCE_FLOOR = 1e-6


@dataclass(frozen=True)
class WeightedPoint:
    """One observation: position x, response y, positive weight w."""

    x: float
    y: float
    w: float = 1.0


@dataclass
class IsotonicFit:
    """A fitted non-decreasing step function with its residual noise stats."""

    breakpoints: np.ndarray
    values: np.ndarray
    residual_variance: float = 0.0
    noise_mean: float = 0.0

    def __post_init__(self):
        self.breakpoints = np.asarray(self.breakpoints, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.breakpoints.shape != self.values.shape:
            raise ValidationError("breakpoints and values must align")
        if np.any(np.diff(self.values) < -1e-12):
            raise ValidationError("fitted values must be non-decreasing")


def pava_fit(points: list[WeightedPoint]) -> IsotonicFit:
    """Exact minimizer of the weighted monotone least-squares problem.

    Points are sorted by x and ties are merged to their weighted mean
    before pooling; adjacent decreasing blocks merge until the fitted
    sequence is non-decreasing.
    """
    if not points:
        raise ValidationError("cannot fit an empty point set")
    if any(p.w <= 0 for p in points):
        raise ValidationError("weights must be positive")
    if any(not np.isfinite(p.x) for p in points):
        raise ValidationError("x values must be finite")

    ordered = sorted(points, key=lambda p: p.x)
    xs: list[float] = []
    ys: list[float] = []
    ws: list[float] = []
    for p in ordered:
        if xs and p.x == xs[-1]:
            total = ws[-1] + p.w
            ys[-1] = (ys[-1] * ws[-1] + p.y * p.w) / total
            ws[-1] = total
        else:
            xs.append(p.x)
            ys.append(p.y)
            ws.append(p.w)

    # Pool adjacent violators: each block tracks (value, weight, span).
    values: list[float] = []
    weights: list[float] = []
    spans: list[int] = []
    for y, w in zip(ys, ws):
        values.append(y)
        weights.append(w)
        spans.append(1)
        while len(values) > 1 and values[-2] > values[-1]:
            v = (values[-2] * weights[-2] + values[-1] * weights[-1]) / (weights[-2] + weights[-1])
            weights[-2] += weights[-1]
            spans[-2] += spans[-1]
            values[-2] = v
            values.pop()
            weights.pop()
            spans.pop()

    fitted = np.repeat(values, spans)
    fit = IsotonicFit(breakpoints=np.asarray(xs), values=fitted)

    residuals = np.array([p.y - predict(fit, p.x) for p in ordered])
    pw = np.array([p.w for p in ordered])
    mean = float(np.average(residuals, weights=pw))
    fit.noise_mean = mean
    fit.residual_variance = float(np.average((residuals - mean) ** 2, weights=pw))
    return fit


def predict(fit: IsotonicFit, x: float) -> float:
    """Step interpolation: value of the breakpoint at or left of x, clamped."""
    idx = int(np.searchsorted(fit.breakpoints, x, side="right")) - 1
    if idx < 0:
        return float(fit.values[0])
    return float(fit.values[idx])


def isotonic_objective(points: list[WeightedPoint], fitted) -> float:
    """The weighted squared-error objective for a candidate monotone fit."""
    fitted = np.asarray(fitted, dtype=float)
    return float(sum(p.w * (v - p.y) ** 2 for p, v in zip(points, fitted)))


def curve_weight(fit: IsotonicFit, responses) -> float:
    """Inverse scatter of the occupation responses, floored to stay finite.

    Returns the raw reliability; callers rescale across occupations with
    minmax_rescale to land in [0, 1].
    """
    responses = np.asarray(responses, dtype=float)
    if responses.size < 2:
        raise ValidationError("curve weight needs at least 2 responses")
    scatter = float(np.sum((responses - responses.mean()) ** 2))
    return 1.0 / max(scatter, VARIANCE_FLOOR)


@dataclass
class CurveModule:
    """Per-(trait, occupation) isotonic fits used as one of the three
    occupation scorers.

    Each occupation's score for an author is the mean of its five
    per-trait curve predictions; per-author scores are min-max rescaled
    across occupations.
    """

    classes: list[str] = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    signs: dict = field(default_factory=dict)
    reliability: dict = field(default_factory=dict)

    def fit(self, cognitive: np.ndarray, labels: list[str]) -> "CurveModule":
        cognitive = np.asarray(cognitive, dtype=float)
        if cognitive.shape[0] != len(labels):
            raise TrainingError("cognitive rows must match labels")
        self.classes = sorted(set(labels))
        if len(self.classes) < 2:
            raise TrainingError("need at least 2 occupation classes")
        y_all = {c: np.array([1.0 if l == c else 0.0 for l in labels]) for c in self.classes}

        raw_reliability = {}
        for c in self.classes:
            responses = []
            for q in range(len(TRAITS)):
                x = cognitive[:, q]
                y = y_all[c]
                # Mirror the axis when the trait runs against the occupation,
                # so the monotone fit points the right way.
                sx = x - x.mean()
                sy = y - y.mean()
                corr = float(sx @ sy)
                sign = -1.0 if corr < 0 else 1.0
                pts = [WeightedPoint(x=sign * xv, y=yv) for xv, yv in zip(x, y)]
                f = pava_fit(pts)
                self.fits[(q, c)] = f
                self.signs[(q, c)] = sign
                responses.append([predict(f, sign * xv) for xv in x])
            per_author = np.mean(np.asarray(responses), axis=0)
            raw_reliability[c] = curve_weight(self.fits[(0, c)], per_author)
        rescaled = minmax_rescale(np.array([raw_reliability[c] for c in self.classes]))
        self.reliability = dict(zip(self.classes, (float(v) for v in rescaled)))
        return self

    def score(self, cognitive: np.ndarray) -> np.ndarray:
        """Raw per-author, per-class mean curve predictions."""
        cognitive = np.atleast_2d(np.asarray(cognitive, dtype=float))
        out = np.zeros((cognitive.shape[0], len(self.classes)))
        for j, c in enumerate(self.classes):
            acc = np.zeros(cognitive.shape[0])
            for q in range(len(TRAITS)):
                f = self.fits[(q, c)]
                sign = self.signs[(q, c)]
                acc += np.array([predict(f, sign * xv) for xv in cognitive[:, q]])
            out[:, j] = acc / len(TRAITS)
        return out

    def weights(self, cognitive: np.ndarray) -> np.ndarray:
        """Per-author scores rescaled to [0, 1] across occupations."""
        raw = self.score(cognitive)
        return np.vstack([minmax_rescale(row) for row in raw])

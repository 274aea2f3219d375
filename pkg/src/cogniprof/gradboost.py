"""Per-trait gradient-boosted regression trees with a fixed sign split at
the root, majority-vote occupation prediction, and the boost weight.

Every (trait, occupation) pair gets its own small ensemble regressing the
one-versus-rest indicator under squared loss; the root of each tree always
separates non-negative from negative trait values, deeper splits are
learned by variance reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError, ValidationError
from .lessn import TRAITS

DEFAULT_ROUNDS = 50
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_MAX_DEPTH = 3
DEFAULT_MIN_LEAF = 5


@dataclass
class BBTNode:
    """A tree node: either a split on the trait value or a constant leaf.

    Splits send values >= threshold to the left child and the rest right;
    the root threshold is pinned at zero so the first cut separates
    positive from negative correlation.
    """

    threshold: float | None = None
    left: "BBTNode | None" = None
    right: "BBTNode | None" = None
    value: float = 0.0
    region_id: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.threshold is None

    def predict_one(self, x: float) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x >= node.threshold else node.right
        return node.value

    def leaves(self) -> list["BBTNode"]:
        if self.is_leaf:
            return [self]
        return self.left.leaves() + self.right.leaves()


def init_constant(targets) -> float:
    """Squared-loss minimizing constant: the target mean."""
    targets = np.asarray(targets, dtype=float)
    if targets.size == 0:
        raise ValidationError("cannot initialize from empty targets")
    return float(targets.mean())


def _best_split(x: np.ndarray, r: np.ndarray, min_leaf: int) -> float | None:
    """Variance-reducing threshold, or None when no valid split helps."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    rs = r[order]
    n = len(xs)
    if n < 2 * min_leaf:
        return None
    total = rs.sum()
    prefix = np.cumsum(rs)
    best_gain = 1e-12
    best_thr = None
    base = float(rs @ rs) - total * total / n
    for k in range(min_leaf, n - min_leaf + 1):
        if xs[k - 1] == xs[k]:
            continue
        # low block xs[:k] goes right, high block xs[k:] goes left under
        # the ">= goes left" convention
        sum_low = prefix[k - 1]
        sum_high = total - sum_low
        gain = base - (float(rs[:k] @ rs[:k]) - sum_low * sum_low / k) \
            - (float(rs[k:] @ rs[k:]) - sum_high * sum_high / (n - k))
        if gain > best_gain:
            best_gain = gain
            best_thr = 0.5 * (xs[k - 1] + xs[k])
    return best_thr


def _grow(x: np.ndarray, r: np.ndarray, depth: int, max_depth: int,
          min_leaf: int, forced_threshold: float | None) -> BBTNode:
    if depth >= max_depth or len(x) == 0:
        return BBTNode(value=float(r.mean()) if len(r) else 0.0)

    if forced_threshold is not None:
        # The pinned root cut; an empty side becomes a zero leaf.
        thr = forced_threshold
        mask = x >= thr
        left = _grow(x[mask], r[mask], depth + 1, max_depth, min_leaf, None)
        right = _grow(x[~mask], r[~mask], depth + 1, max_depth, min_leaf, None)
        return BBTNode(threshold=thr, left=left, right=right)

    if len(x) < 2 * min_leaf or np.all(x == x[0]):
        return BBTNode(value=float(r.mean()) if len(r) else 0.0)
    thr = _best_split(x, r, min_leaf)
    if thr is None:
        return BBTNode(value=float(r.mean()))
    mask = x >= thr
    left = _grow(x[mask], r[mask], depth + 1, max_depth, min_leaf, None)
    right = _grow(x[~mask], r[~mask], depth + 1, max_depth, min_leaf, None)
    return BBTNode(threshold=thr, left=left, right=right)


def fit_round(current: np.ndarray, features: np.ndarray, targets: np.ndarray,
              max_depth: int = DEFAULT_MAX_DEPTH, min_leaf: int = DEFAULT_MIN_LEAF,
              fixed_root: bool = True) -> BBTNode:
    """Fit one regression tree to the residuals of the current prediction."""
    current = np.asarray(current, dtype=float)
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    residuals = targets - current
    forced = 0.0 if (fixed_root and max_depth >= 1) else None
    tree = _grow(features, residuals, 0, max_depth, min_leaf, forced)
    for rid, leaf in enumerate(tree.leaves()):
        leaf.region_id = rid
    return tree


@dataclass
class BoostEnsemble:
    """Additive tree model for one (trait, occupation) regression."""

    init: float
    trees: list[BBTNode] = field(default_factory=list)
    learning_rate: float = DEFAULT_LEARNING_RATE

    def predict_one(self, x: float) -> float:
        val = self.init
        for tree in self.trees:
            val += self.learning_rate * tree.predict_one(x)
        return val

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.predict_one(float(v)) for v in np.asarray(x, dtype=float)])

    def last_leaf_gradient(self) -> float:
        """Mean absolute leaf value of the final round's tree."""
        if not self.trees:
            return 0.0
        leaves = self.trees[-1].leaves()
        return float(np.mean([abs(l.value) for l in leaves]))


def fit_ensemble(x: np.ndarray, y: np.ndarray, rounds: int = DEFAULT_ROUNDS,
                 learning_rate: float = DEFAULT_LEARNING_RATE,
                 max_depth: int = DEFAULT_MAX_DEPTH,
                 min_leaf: int = DEFAULT_MIN_LEAF) -> BoostEnsemble:
    """Boost `rounds` trees against the squared loss on (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ens = BoostEnsemble(init=init_constant(y), learning_rate=learning_rate)
    current = np.full_like(y, ens.init)
    for _ in range(rounds):
        tree = fit_round(current, x, y, max_depth=max_depth, min_leaf=min_leaf)
        ens.trees.append(tree)
        current = current + learning_rate * np.array([tree.predict_one(v) for v in x])
    return ens


@dataclass
class BoostModule:
    """The full voting model: five trait ensembles per occupation."""

    rounds: int = DEFAULT_ROUNDS
    learning_rate: float = DEFAULT_LEARNING_RATE
    max_depth: int = DEFAULT_MAX_DEPTH
    min_leaf: int = DEFAULT_MIN_LEAF
    classes: list[str] = field(default_factory=list)
    ensembles: dict = field(default_factory=dict)

    def fit(self, cognitive: np.ndarray, labels: list[str],
            author_ids: list[str] | None = None) -> "BoostModule":
        cognitive = np.asarray(cognitive, dtype=float)
        if author_ids is not None:
            # Canonical row order makes training invariant to input shuffles.
            order = np.argsort(np.asarray(author_ids))
            cognitive = cognitive[order]
            labels = [labels[i] for i in order]
        self.classes = sorted(set(labels))
        if len(self.classes) < 2:
            raise TrainingError("need at least 2 occupation classes")
        for c in self.classes:
            y = np.array([1.0 if l == c else 0.0 for l in labels])
            for q in range(len(TRAITS)):
                self.ensembles[(q, c)] = fit_ensemble(
                    cognitive[:, q], y, rounds=self.rounds,
                    learning_rate=self.learning_rate,
                    max_depth=self.max_depth, min_leaf=self.min_leaf)
        return self

    def _require_trained(self):
        if not self.ensembles:
            raise TrainingError("boost module is not trained")

    def score_matrix(self, cognitive: np.ndarray) -> np.ndarray:
        """Scores[author, trait, class] from each trait's ensembles."""
        self._require_trained()
        cognitive = np.atleast_2d(np.asarray(cognitive, dtype=float))
        n = cognitive.shape[0]
        scores = np.zeros((n, len(TRAITS), len(self.classes)))
        for q in range(len(TRAITS)):
            for j, c in enumerate(self.classes):
                scores[:, q, j] = self.ensembles[(q, c)].predict(cognitive[:, q])
        return scores

    def predict_occupation(self, cognitive: np.ndarray):
        """Majority vote of the five trait ensembles.

        Ties break on summed scores, then on the lower class index.
        """
        scores = self.score_matrix(cognitive)
        n = scores.shape[0]
        out = []
        for i in range(n):
            votes = np.zeros(len(self.classes), dtype=int)
            for q in range(len(TRAITS)):
                votes[int(np.argmax(scores[i, q]))] += 1
            top = votes.max()
            tied = np.flatnonzero(votes == top)
            if len(tied) == 1:
                out.append(int(tied[0]))
                continue
            summed = scores[i].sum(axis=0)
            best = tied[np.argmax(summed[tied])]
            out.append(int(best))
        labels = [self.classes[i] for i in out]
        return labels, scores.sum(axis=1)

    def weights(self, cognitive: np.ndarray) -> np.ndarray:
        """Per-(author, occupation) boost weight in [0, 1].

        Each trait contributes |score| * (2 - |gradient|) with both factors
        clamped to [0, 1]; the trait mean lands in [0, 2] and is halved.
        """
        self._require_trained()
        scores = self.score_matrix(cognitive)
        n = scores.shape[0]
        out = np.zeros((n, len(self.classes)))
        for j, c in enumerate(self.classes):
            h = np.array([min(1.0, max(0.0, self.ensembles[(q, c)].last_leaf_gradient()))
                          for q in range(len(TRAITS))])
            o = np.clip(scores[:, :, j], 0.0, 1.0)
            w_q = o * (2.0 - h)[None, :]
            out[:, j] = w_q.mean(axis=1) / 2.0
        return out

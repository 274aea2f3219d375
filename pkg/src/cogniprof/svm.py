"""Kernel SVM over joint trait + hashed-TFIDF author vectors, plus
support-vector clustering on the minimum enclosing kernel sphere.

The dual problems are solved by pairwise coordinate ascent with
maximal-violation working-set selection, so no external QP solver is
needed.  Per-(author, occupation) cluster weights come from the dual
expansion evaluated at the author, shifted by the solution's self-energy
and min-max rescaled across occupations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError, ValidationError
from .util import minmax_rescale, stable_bucket

DEFAULT_TFIDF_DIM = 512
DEFAULT_LINE_SAMPLES = 10
SMO_TOL = 1e-3
SMO_MAX_ITER = 10_000
SUPPORT_EPS = 1e-8


@dataclass
class AuthorRepresentation:
    """Joint representation: 5 trait correlations next to a unit TF-IDF block."""

    author_id: str
    cognitive: np.ndarray
    tfidf: np.ndarray
    label: str | None = None

    def __post_init__(self):
        self.cognitive = np.asarray(self.cognitive, dtype=float)
        self.tfidf = np.asarray(self.tfidf, dtype=float)

    @property
    def joint(self) -> np.ndarray:
        return np.concatenate([self.cognitive, self.tfidf])


@dataclass
class KernelParams:
    """Gaussian kernel settings: bandwidth eta, diagonal scaling F, box C."""

    eta: float | None = None
    F: np.ndarray | None = None
    C: float = 1.0

    def __post_init__(self):
        if self.eta is not None and self.eta <= 0:
            raise ValidationError("eta must be positive")
        if self.C <= 0:
            raise ValidationError("C must be positive")
        if self.F is not None:
            self.F = np.asarray(self.F, dtype=float)
            if np.any(self.F < 0):
                raise ValidationError("F diagonal entries must be non-negative")

    def resolved_eta(self, dim: int) -> float:
        return self.eta if self.eta is not None else 1.0 / dim


@dataclass
class DualSolution:
    """Box-constrained dual optimum for one binary problem."""

    alphas: np.ndarray
    bias: float
    support_indices: np.ndarray
    objective: float
    labels: np.ndarray


@dataclass
class SphereSolution:
    """Minimum enclosing kernel sphere: radius, center expansion, slacks."""

    radius: float
    center_alphas: np.ndarray
    slacks: np.ndarray
    radius_sq: float
    center_energy: float = 0.0


def smoothed_idf(n_docs: int, doc_freq: int) -> float:
    """Inverse document frequency with add-one smoothing."""
    return float(np.log((1 + n_docs) / (1 + doc_freq)) + 1.0)


@dataclass
class HashedTfidf:
    """Hashed TF-IDF vectorizer with the smoothed IDF, fit on merged docs."""

    vocab_size: int = DEFAULT_TFIDF_DIM
    doc_freq: dict = field(default_factory=dict)
    n_docs: int = 0

    def fit(self, docs) -> "HashedTfidf":
        self.n_docs = len(docs)
        self.doc_freq = {}
        for _, tokens in docs:
            for term in set(tokens):
                self.doc_freq[term] = self.doc_freq.get(term, 0) + 1
        return self

    def transform_tokens(self, tokens) -> np.ndarray:
        vec = np.zeros(self.vocab_size)
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        for term, tf in counts.items():
            idf = smoothed_idf(self.n_docs, self.doc_freq.get(term, 0))
            vec[stable_bucket(term, self.vocab_size)] += tf * idf
        norm = float(np.linalg.norm(vec))
        if norm > 0:
            vec /= norm
        return vec


def build_representations(docs, cognitive, labels=None,
                          vocab_size: int = DEFAULT_TFIDF_DIM,
                          vectorizer: HashedTfidf | None = None) -> list[AuthorRepresentation]:
    """Build joint author vectors from merged token docs and trait vectors.

    `docs` is a list of (author_id, tokens); term TF-IDF weights use the
    smoothed IDF and are accumulated into `vocab_size` hash buckets, then
    L2-normalized (authors with no tokens keep a zero block).  Pass a
    pre-fit vectorizer to reuse training-corpus document frequencies.
    """
    if vectorizer is None:
        vectorizer = HashedTfidf(vocab_size=vocab_size).fit(docs)
    reps = []
    for author_id, tokens in docs:
        vec = vectorizer.transform_tokens(tokens)
        cog = np.asarray(cognitive[author_id], dtype=float)
        label = labels.get(author_id) if labels else None
        reps.append(AuthorRepresentation(author_id=author_id, cognitive=cog,
                                         tfidf=vec, label=label))
    return reps


def kernel(a, b, params: KernelParams) -> float:
    """Gaussian kernel on (optionally F-scaled) vectors; always in (0, 1]."""
    u = a.joint if isinstance(a, AuthorRepresentation) else np.asarray(a, dtype=float)
    v = b.joint if isinstance(b, AuthorRepresentation) else np.asarray(b, dtype=float)
    if u.shape != v.shape:
        raise ValidationError(f"kernel dimension mismatch: {u.shape} vs {v.shape}")
    diff = u - v
    if params.F is not None:
        diff = diff * params.F
    eta = params.resolved_eta(u.size)
    return float(np.exp(-eta * float(diff @ diff)))


def gram_matrix(X: np.ndarray, params: KernelParams, Y: np.ndarray | None = None) -> np.ndarray:
    """Pairwise Gaussian kernel matrix (vectorized)."""
    X = np.asarray(X, dtype=float)
    Y = X if Y is None else np.asarray(Y, dtype=float)
    if params.F is not None:
        X = X * params.F
        Y = Y * params.F
    eta = params.resolved_eta(X.shape[1])
    sq = (np.sum(X * X, axis=1)[:, None] + np.sum(Y * Y, axis=1)[None, :]
          - 2.0 * X @ Y.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-eta * sq)


def dual_objective(alphas: np.ndarray, o: np.ndarray, K: np.ndarray) -> float:
    """Value of the maximization dual at `alphas`."""
    qa = (o * alphas) @ K @ (o * alphas)
    return float(alphas.sum() - 0.5 * qa)


def solve_dual(X: np.ndarray, o: np.ndarray, params: KernelParams,
               tol: float = SMO_TOL, max_iter: int = SMO_MAX_ITER) -> DualSolution:
    """Pairwise coordinate ascent on the box dual with the balance constraint.

    Working pairs are picked by maximal violation; iteration stops when the
    violation gap closes below `tol`.
    """
    X = np.asarray(X, dtype=float)
    o = np.asarray(o, dtype=float)
    n = len(o)
    if n < 2:
        raise TrainingError("need at least 2 training points")
    if len(set(o.tolist())) < 2:
        raise TrainingError("need both classes present")
    if not np.all(np.isin(o, (-1.0, 1.0))):
        raise ValidationError("labels must be -1/+1")

    C = params.C
    K = gram_matrix(X, params)
    Q = (o[:, None] * o[None, :]) * K
    alphas = np.zeros(n)
    g = -np.ones(n)  # gradient of 1/2 aQa - sum(a) at a = 0

    m_val = M_val = 0.0
    for _ in range(max_iter):
        up = ((o > 0) & (alphas < C - SUPPORT_EPS)) | ((o < 0) & (alphas > SUPPORT_EPS))
        dn = ((o < 0) & (alphas < C - SUPPORT_EPS)) | ((o > 0) & (alphas > SUPPORT_EPS))
        if not up.any() or not dn.any():
            break
        crit = -o * g
        m_idx = np.flatnonzero(up)[np.argmax(crit[up])]
        M_idx = np.flatnonzero(dn)[np.argmin(crit[dn])]
        m_val, M_val = crit[m_idx], crit[M_idx]
        if m_val - M_val <= tol:
            break
        i, j = m_idx, M_idx
        curv = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        t = (m_val - M_val) / curv
        # Clip the step so both multipliers stay inside the box.
        t_cap_i = (C - alphas[i]) if o[i] > 0 else alphas[i]
        t_cap_j = (C - alphas[j]) if o[j] < 0 else alphas[j]
        t = min(t, t_cap_i, t_cap_j)
        if t <= 0:
            break
        alphas[i] += o[i] * t
        alphas[j] -= o[j] * t
        g += Q[:, i] * (o[i] * t) + Q[:, j] * (-o[j] * t)

    free = (alphas > SUPPORT_EPS) & (alphas < C - SUPPORT_EPS)
    if free.any():
        bias = float(np.mean((-o * g)[free]))
    else:
        bias = float((m_val + M_val) / 2.0)

    return DualSolution(
        alphas=alphas,
        bias=bias,
        support_indices=np.flatnonzero(alphas > SUPPORT_EPS),
        objective=dual_objective(alphas, o, K),
        labels=o,
    )


def decision_values(sol: DualSolution, X_train: np.ndarray, X_query: np.ndarray,
                    params: KernelParams, include_bias: bool = True) -> np.ndarray:
    """Kernel expansion of the decision function at the query points."""
    Kq = gram_matrix(np.asarray(X_query, dtype=float), params, np.asarray(X_train, dtype=float))
    vals = Kq @ (sol.alphas * sol.labels)
    return vals + sol.bias if include_bias else vals


def cluster_weight(sol: DualSolution, X_train: np.ndarray, X_query: np.ndarray,
                   params: KernelParams) -> np.ndarray:
    """Raw cluster weight of each query against one binary problem.

    The dual expansion at the query minus the solution's self-energy; it
    vanishes when all multipliers are zero, and for a single unit-weight
    support vector queried at itself.
    """
    signed = sol.alphas * sol.labels
    K_train = gram_matrix(np.asarray(X_train, dtype=float), params)
    self_energy = float(signed @ K_train @ signed)
    expansion = decision_values(sol, X_train, X_query, params, include_bias=False)
    return expansion - self_energy


def solve_sphere(X: np.ndarray, params: KernelParams,
                 tol: float = SMO_TOL, max_iter: int = SMO_MAX_ITER) -> SphereSolution:
    """Minimum enclosing sphere of the kernel images, with box slack."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 1:
        raise TrainingError("need at least 1 point")
    C = params.C
    if C < 1.0 / n - 1e-12:
        raise TrainingError(f"box constraint C={C} below 1/n; sphere dual infeasible")

    K = gram_matrix(X, params)
    diag = np.diag(K).copy()
    beta = np.full(n, 1.0 / n)
    beta = np.minimum(beta, C)
    beta /= beta.sum()
    g = 2.0 * (K @ beta) - diag

    for _ in range(max_iter):
        movable_up = beta < C - SUPPORT_EPS
        movable_dn = beta > SUPPORT_EPS
        if not movable_up.any() or not movable_dn.any():
            break
        i = np.flatnonzero(movable_up)[np.argmin(g[movable_up])]
        j = np.flatnonzero(movable_dn)[np.argmax(g[movable_dn])]
        if g[j] - g[i] <= tol:
            break
        curv = max(2.0 * (K[i, i] + K[j, j] - 2.0 * K[i, j]), 1e-12)
        t = (g[j] - g[i]) / curv
        t = min(t, C - beta[i], beta[j])
        if t <= 0:
            break
        beta[i] += t
        beta[j] -= t
        g += 2.0 * t * (K[:, i] - K[:, j])

    center_energy = float(beta @ K @ beta)
    dist_sq = diag - 2.0 * (K @ beta) + center_energy
    free = (beta > SUPPORT_EPS) & (beta < C - SUPPORT_EPS)
    if free.any():
        radius_sq = float(np.mean(dist_sq[free]))
    else:
        radius_sq = float(dist_sq[beta > SUPPORT_EPS].max(initial=0.0))
    radius_sq = max(radius_sq, 0.0)
    slacks = np.maximum(dist_sq - radius_sq, 0.0)
    return SphereSolution(radius=float(np.sqrt(radius_sq)), center_alphas=beta,
                          slacks=slacks, radius_sq=radius_sq,
                          center_energy=center_energy)


def _sphere_distance_sq(points: np.ndarray, X: np.ndarray, sphere: SphereSolution,
                        params: KernelParams) -> np.ndarray:
    # Gaussian kernel: K(z, z) = 1 for every point.
    Kq = gram_matrix(points, params, X)
    return 1.0 - 2.0 * (Kq @ sphere.center_alphas) + sphere.center_energy


def svc_spheres(X: np.ndarray, params: KernelParams,
                num_line_samples: int = DEFAULT_LINE_SAMPLES):
    """Support-vector clustering: points are in the same cluster when the
    whole segment between them stays inside the sphere.

    Returns (assignments, SphereSolution); assignments are component ids
    in first-seen order.
    """
    if num_line_samples < 2:
        raise ValidationError("need at least 2 segment samples")
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    sphere = solve_sphere(X, params)
    threshold = sphere.radius_sq + 1e-7

    adj = [[] for _ in range(n)]
    ts = np.linspace(0.0, 1.0, num_line_samples)
    for i in range(n):
        for j in range(i + 1, n):
            segment = X[i][None, :] * (1 - ts[:, None]) + X[j][None, :] * ts[:, None]
            d2 = _sphere_distance_sq(segment, X, sphere, params)
            if np.all(d2 <= threshold):
                adj[i].append(j)
                adj[j].append(i)

    assignments = [-1] * n
    next_id = 0
    for start in range(n):
        if assignments[start] != -1:
            continue
        stack = [start]
        assignments[start] = next_id
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if assignments[v] == -1:
                    assignments[v] = next_id
                    stack.append(v)
        next_id += 1
    return assignments, sphere


@dataclass
class ClusterModule:
    """One-versus-rest kernel SVMs producing the per-author cluster weights."""

    params: KernelParams = field(default_factory=KernelParams)
    classes: list[str] = field(default_factory=list)
    solutions: dict = field(default_factory=dict)
    X_train: np.ndarray | None = None

    def fit(self, reps: list[AuthorRepresentation]) -> "ClusterModule":
        labels = [r.label for r in reps]
        if any(l is None for l in labels):
            raise TrainingError("all training representations need labels")
        self.classes = sorted(set(labels))
        if len(self.classes) < 2:
            raise TrainingError("need at least 2 occupation classes")
        self.X_train = np.vstack([r.joint for r in reps])
        for c in self.classes:
            o = np.array([1.0 if l == c else -1.0 for l in labels])
            self.solutions[c] = solve_dual(self.X_train, o, self.params)
        return self

    def raw_weights(self, reps: list[AuthorRepresentation]) -> np.ndarray:
        Xq = np.vstack([r.joint for r in reps])
        cols = [cluster_weight(self.solutions[c], self.X_train, Xq, self.params)
                for c in self.classes]
        return np.column_stack(cols)

    def weights(self, reps: list[AuthorRepresentation]) -> np.ndarray:
        """Per-author cluster weights rescaled to [0, 1] across occupations."""
        raw = self.raw_weights(reps)
        return np.vstack([minmax_rescale(row) for row in raw])

    def decision_matrix(self, reps: list[AuthorRepresentation]) -> np.ndarray:
        Xq = np.vstack([r.joint for r in reps])
        cols = [decision_values(self.solutions[c], self.X_train, Xq, self.params)
                for c in self.classes]
        return np.column_stack(cols)

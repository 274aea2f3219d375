"""Term-graph construction and sticky multi-word segment extraction.

Terms become graph nodes weighted by the L1 mass of their linguistic
feature profile; edges carry a semantic coherence score for pairs that
co-occur inside at least one post.  Candidate 2..5-grams are ranked by a
modified symmetric-conditional-probability score that blends the n-gram
statistics with the graph's edge scores.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .corpus import CleanPost
from .errors import ValidationError

NEG_INF = float("-inf")

MAX_PHRASE_LEN = 5
DEFAULT_EPSILON = 1e-6
DEFAULT_TOP_K = 10_000
DEFAULT_POPULARITY_CAP = 0.5


@dataclass(frozen=True)
class Phrase:
    """An ordered 2..5-term segment with its corpus probability and score."""

    terms: tuple[str, ...]
    probability: float
    scp: float

    def __post_init__(self):
        if not 2 <= len(self.terms) <= MAX_PHRASE_LEN:
            raise ValidationError(f"phrase must have 2..{MAX_PHRASE_LEN} terms")


class NgramStats:
    """Relative-frequency model over all window positions in a corpus."""

    def __init__(self, corpus: list[CleanPost], max_n: int = MAX_PHRASE_LEN):
        self.max_n = max_n
        self.counts: list[Counter] = [Counter() for _ in range(max_n + 1)]
        self.totals = [0] * (max_n + 1)
        self.gram_authors: dict[tuple[str, ...], set[str]] = defaultdict(set)
        self.authors: set[str] = set()
        for post in corpus:
            self.authors.add(post.author_id)
            toks = post.tokens
            for n in range(1, max_n + 1):
                if len(toks) < n:
                    continue
                self.totals[n] += len(toks) - n + 1
                for i in range(len(toks) - n + 1):
                    gram = tuple(toks[i:i + n])
                    self.counts[n][gram] += 1
                    if n >= 2:
                        self.gram_authors[gram].add(post.author_id)

    def probability(self, gram: tuple[str, ...]) -> float:
        n = len(gram)
        if n > self.max_n or self.totals[n] == 0:
            return 0.0
        return self.counts[n][gram] / self.totals[n]

    def author_fraction(self, gram: tuple[str, ...]) -> float:
        if not self.authors:
            return 0.0
        return len(self.gram_authors.get(gram, ())) / len(self.authors)


@dataclass
class TermGraph:
    """Nodes are vocabulary terms; edges hold coherence for co-occurring pairs."""

    node_weights: dict[str, float]
    edges: dict[tuple[str, str], float]
    term_frequency: dict[str, int]
    epsilon: float = DEFAULT_EPSILON
    stats: NgramStats | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")

    def coherence(self, x: str, y: str) -> float:
        if x == y:
            key = (x, y)
        else:
            key = (x, y) if x < y else (y, x)
        return self.edges.get(key, 0.0)

    def weight(self, term: str) -> float:
        if term not in self.node_weights:
            raise KeyError(f"unknown term {term!r}")
        return self.node_weights[term]


def _cosine_coherence(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity clamped to [0, 1]; identical profiles score 1."""
    if np.array_equal(u, v):
        return 1.0
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, float(np.dot(u, v)) / (nu * nv))))


def build_term_graph(corpus: list[CleanPost],
                     features: dict[str, np.ndarray],
                     epsilon: float = DEFAULT_EPSILON,
                     max_n: int = MAX_PHRASE_LEN) -> TermGraph:
    """Build the coherence graph over the corpus vocabulary.

    Node weights are the L1 norms of each term's linguistic profile,
    rescaled into [0, 1] by the vocabulary maximum.  Edges exist only for
    term pairs co-occurring inside at least one post and carry the cosine
    coherence of the two profiles.
    """
    if not corpus:
        raise ValidationError("cannot build a term graph from an empty corpus")

    term_frequency: Counter = Counter()
    cooccurring: set[tuple[str, str]] = set()
    for post in corpus:
        unique = sorted(set(post.tokens))
        term_frequency.update(unique)
        for i, x in enumerate(unique):
            for y in unique[i + 1:]:
                cooccurring.add((x, y))

    vocab = sorted(term_frequency)
    dim = 0
    for term in vocab:
        vec = features.get(term)
        if vec is not None:
            dim = max(dim, len(vec))
    zero = np.zeros(dim if dim else 1)
    profiles = {t: np.asarray(features.get(t, zero), dtype=float) for t in vocab}

    l1 = {t: float(np.abs(profiles[t]).sum()) for t in vocab}
    top = max(l1.values()) if l1 else 0.0
    node_weights = {t: (l1[t] / top if top > 0 else 0.0) for t in vocab}

    edges = {}
    for x, y in cooccurring:
        edges[(x, y)] = _cosine_coherence(profiles[x], profiles[y])
    for t in vocab:
        edges[(t, t)] = 1.0

    return TermGraph(
        node_weights=node_weights,
        edges=edges,
        term_frequency=dict(term_frequency),
        epsilon=epsilon,
        stats=NgramStats(corpus, max_n=max_n),
    )


def edge_score(x: str, y: str, graph: TermGraph) -> float:
    """Floor-protected edge score: the mean node weight times the coherence."""
    wx = graph.weight(x)
    wy = graph.weight(y)
    return max(graph.epsilon, 0.5 * (wx + wy) * graph.coherence(x, y))


def _segment_edge_score(terms: tuple[str, ...], graph: TermGraph) -> float:
    # Multi-term segments take the maximum score over adjacent constituent
    # pairs; the floor keeps the value positive either way.
    return max(edge_score(a, b, graph) for a, b in zip(terms, terms[1:]))


def scp_score(phrase: Phrase | tuple[str, ...], graph: TermGraph,
              stats: NgramStats | None = None) -> float:
    """Stickiness of a segment: log of the edge-scored joint probability
    squared over the mean split-point probability product.

    A zero probability anywhere yields the -inf sentinel, which callers
    treat as "discard the phrase".
    """
    terms = phrase.terms if isinstance(phrase, Phrase) else tuple(phrase)
    if stats is None:
        stats = graph.stats
    if stats is None:
        raise ValidationError("scp_score needs n-gram statistics")
    n = len(terms)
    if n < 2:
        raise ValidationError("SCP is defined for phrases of 2+ terms")

    joint = stats.probability(terms)
    if joint <= 0.0:
        return NEG_INF

    denom = 0.0
    for split in range(1, n):
        left = stats.probability(terms[:split])
        right = stats.probability(terms[split:])
        if left <= 0.0 or right <= 0.0:
            return NEG_INF
        denom += left * right
    denom /= n - 1

    s = _segment_edge_score(terms, graph)
    return math.log(s * joint * joint / denom)


def extract_segments(corpus: list[CleanPost], graph: TermGraph,
                     top_k: int = DEFAULT_TOP_K,
                     popularity_cap: float = DEFAULT_POPULARITY_CAP,
                     max_n: int = MAX_PHRASE_LEN) -> list[Phrase]:
    """Rank post-internal 2..max_n grams by SCP, dropping over-popular ones.

    Phrases used by more than `popularity_cap` of all authors are removed
    before ranking; at most `top_k` phrases come back, best first.
    """
    if top_k <= 0:
        return []
    stats = graph.stats if graph.stats is not None else NgramStats(corpus, max_n)

    scored = []
    for n in range(2, max_n + 1):
        for gram in stats.counts[n]:
            if stats.author_fraction(gram) > popularity_cap:
                continue
            score = scp_score(gram, graph, stats)
            if score == NEG_INF:
                continue
            scored.append(Phrase(terms=gram, probability=stats.probability(gram), scp=score))

    scored.sort(key=lambda p: (-p.scp, len(p.terms), p.terms))
    return scored[:top_k]

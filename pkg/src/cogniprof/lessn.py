"""Linguistic feature extraction from five pluggable knowledge bases and
the Pearson mapping onto the five personality traits.

Lexicons are open TSV files (category, matcher, kind) standing in for the
proprietary word-count dictionaries; the sentiment lexicon uses integer
score categories on the -5..-1 / 1..5 scale.  Per-author feature weights
normalize the author's category rate by the corpus rate and squash the
ratio into [0, 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CleanPost
from .errors import LexiconError, TrainingError, UndefinedCorrelationError, ValidationError

logger = logging.getLogger(__name__)

TRAITS = ("openness", "conscientiousness", "extroversion", "agreeableness", "neuroticism")

LEXICON_NAMES = ("liwc", "emoji", "splice", "senti", "nrc")
SENTI_SCALE = tuple(range(-5, 0)) + tuple(range(1, 6))
MATCHER_KINDS = ("word", "prefix", "emoji")

_DATA_DIR = Path(__file__).parent / "data"


@dataclass
class Category:
    """One lexicon category with its literal, prefix, and emoji matchers."""

    name: str
    words: set[str] = field(default_factory=set)
    prefixes: tuple[str, ...] = ()
    emojis: set[str] = field(default_factory=set)

    def matches_token(self, token: str) -> bool:
        if token in self.words:
            return True
        return any(token.startswith(p) for p in self.prefixes)

    def matches_emoji(self, emoji: str) -> bool:
        return emoji in self.emojis


@dataclass
class Lexicon:
    """A named knowledge base mapping categories to matcher sets."""

    name: str
    categories: dict[str, Category]
    polarity_scale: tuple[int, ...] | None = None

    @property
    def is_senti(self) -> bool:
        return self.name == "senti"

    def feature_names(self) -> list[str]:
        if self.is_senti:
            return [f"{self.name}:positive", f"{self.name}:negative"]
        return [f"{self.name}:{c}" for c in sorted(self.categories)]


def load_lexicon(path, name: str | None = None) -> Lexicon:
    """Parse one lexicon TSV: rows of (category, matcher, kind).

    The lexicon name defaults to the file stem and must be one of the five
    known knowledge bases; sentiment categories must be integer scores in
    the -5..-1 / 1..5 bands.
    """
    path = Path(path)
    if name is None:
        name = path.stem.lower()
    if name not in LEXICON_NAMES:
        raise LexiconError(f"unknown lexicon name {name!r} (expected one of {LEXICON_NAMES})")

    categories: dict[str, Category] = {}
    prefix_acc: dict[str, list[str]] = {}
    seen: set[tuple[str, str]] = set()
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 3:
            raise LexiconError(f"{path.name}:{line_no}: expected 3 tab-separated columns")
        cat_name, matcher, kind = (p.strip() for p in parts)
        if kind not in MATCHER_KINDS:
            raise LexiconError(f"{path.name}:{line_no}: unsupported matcher kind {kind!r}")
        if (cat_name, matcher) in seen:
            raise LexiconError(f"{path.name}:{line_no}: duplicate matcher {matcher!r} "
                               f"in category {cat_name!r}")
        seen.add((cat_name, matcher))
        cat = categories.setdefault(cat_name, Category(name=cat_name))
        if kind == "word":
            cat.words.add(matcher.lower())
        elif kind == "prefix":
            prefix_acc.setdefault(cat_name, []).append(matcher.lower())
        else:
            cat.emojis.add(matcher)

    for cat_name, prefixes in prefix_acc.items():
        categories[cat_name].prefixes = tuple(sorted(prefixes))

    polarity_scale = None
    if name == "senti":
        for cat_name in categories:
            try:
                score = int(cat_name)
            except ValueError:
                raise LexiconError(f"sentiment category {cat_name!r} is not an integer score")
            if score not in SENTI_SCALE:
                raise LexiconError(f"sentiment score {score} outside the -5..-1 / 1..5 scale")
        polarity_scale = SENTI_SCALE

    return Lexicon(name=name, categories=categories, polarity_scale=polarity_scale)


def load_bundled_lexicons(directory=None) -> list[Lexicon]:
    """Load the five lexicons shipped with the package (or from a directory)."""
    directory = Path(directory) if directory is not None else _DATA_DIR / "lexicons"
    lexicons = []
    for name in LEXICON_NAMES:
        path = directory / f"{name}.tsv"
        if path.exists():
            lexicons.append(load_lexicon(path, name=name))
    if not lexicons:
        raise LexiconError(f"no lexicon files found in {directory}")
    return lexicons


@dataclass
class LinguisticFeatureVector:
    """Named non-negative feature weights extracted for one author."""

    entries: dict[str, float]
    source: str = "lessn"

    def weight(self, feature: str) -> float:
        return self.entries.get(feature, 0.0)

    def nonzero(self) -> dict[str, float]:
        return {k: v for k, v in self.entries.items() if v > 0.0}


@dataclass
class CognitiveFeatureVector:
    """Correlation scores for the five traits, each within [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(TRAITS),):
            raise ValidationError(f"expected {len(TRAITS)} trait values")
        if np.any(np.abs(self.values) > 1.0 + 1e-12):
            raise ValidationError("trait correlations must lie in [-1, 1]")

    def as_pairs(self) -> dict[str, float]:
        return dict(zip(TRAITS, (float(v) for v in self.values)))


@dataclass
class CorpusStats:
    """Corpus-wide category rates used to normalize author rates.

    Rates are floored at one pseudo-occurrence over the corpus so the
    author/corpus ratio is always defined.
    """

    rates: dict[str, float]
    token_total: int
    emoji_total: int

    @classmethod
    def from_posts(cls, posts: list[CleanPost], lexicons: list[Lexicon]) -> "CorpusStats":
        token_total = sum(len(p.tokens) for p in posts)
        emoji_total = sum(len(p.emojis) for p in posts)
        counts, _ = _count_categories(posts, lexicons)
        rates = {}
        for lex in lexicons:
            if lex.is_senti:
                continue
            for cat_name, cat in lex.categories.items():
                feature = f"{lex.name}:{cat_name}"
                total = emoji_total if cat.emojis and not cat.words and not cat.prefixes \
                    else token_total
                floor = 1.0 / (total + 1)
                raw = counts.get(feature, 0) / total if total else 0.0
                rates[feature] = max(raw, floor)
        return cls(rates=rates, token_total=token_total, emoji_total=emoji_total)


def _count_categories(posts: list[CleanPost], lexicons: list[Lexicon]):
    """Count category matches over `posts`; sentiment matches keep scores."""
    counts: dict[str, int] = {}
    senti_scores: list[int] = []
    for post in posts:
        for token in post.tokens:
            for lex in lexicons:
                if lex.is_senti:
                    for cat_name, cat in lex.categories.items():
                        if cat.matches_token(token):
                            senti_scores.append(int(cat_name))
                    continue
                for cat_name, cat in lex.categories.items():
                    if cat.matches_token(token):
                        feature = f"{lex.name}:{cat_name}"
                        counts[feature] = counts.get(feature, 0) + 1
        for emoji in post.emojis:
            for lex in lexicons:
                if lex.is_senti:
                    continue
                for cat_name, cat in lex.categories.items():
                    if cat.matches_emoji(emoji):
                        feature = f"{lex.name}:{cat_name}"
                        counts[feature] = counts.get(feature, 0) + 1
    return counts, senti_scores


def extract_linguistic(author_posts: list[CleanPost], lexicons: list[Lexicon],
                       corpus_stats: CorpusStats) -> LinguisticFeatureVector:
    """Extract one author's weighted linguistic features.

    Category weights are the author-rate over corpus-rate ratio squashed by
    x/(1+x); the sentiment lexicon instead contributes exactly two features
    whose weights are the strongest matched |score| mapped onto [0, 1].
    """
    if not lexicons:
        raise ValidationError("at least one lexicon is required")
    token_total = sum(len(p.tokens) for p in author_posts)
    emoji_total = sum(len(p.emojis) for p in author_posts)
    counts, senti_scores = _count_categories(author_posts, lexicons)

    entries: dict[str, float] = {}
    for lex in lexicons:
        if lex.is_senti:
            pos = max((s for s in senti_scores if s > 0), default=0)
            neg = min((s for s in senti_scores if s < 0), default=0)
            entries[f"{lex.name}:positive"] = pos / 5.0
            entries[f"{lex.name}:negative"] = abs(neg) / 5.0
            continue
        for cat_name, cat in lex.categories.items():
            feature = f"{lex.name}:{cat_name}"
            denom = emoji_total if cat.emojis and not cat.words and not cat.prefixes \
                else token_total
            author_rate = counts.get(feature, 0) / denom if denom else 0.0
            corpus_rate = corpus_stats.rates.get(feature, 0.0)
            ratio = author_rate / corpus_rate if corpus_rate > 0 else 0.0
            entries[feature] = ratio / (1.0 + ratio)

    source = "+".join(sorted({lex.name for lex in lexicons}))
    return LinguisticFeatureVector(entries=entries, source=source)


def term_profiles(vocab, lexicons: list[Lexicon]) -> dict[str, np.ndarray]:
    """Binary per-term category-membership profiles over all lexicons.

    Used as the linguistic signal behind the term graph's node weights and
    edge coherence.
    """
    axes: list[tuple[str, Category]] = []
    for lex in lexicons:
        for cat_name in sorted(lex.categories):
            axes.append((lex.name, lex.categories[cat_name]))
    profiles = {}
    for term in vocab:
        vec = np.zeros(len(axes))
        for i, (_, cat) in enumerate(axes):
            if cat.matches_token(term):
                vec[i] = 1.0
        profiles[term] = vec
    return profiles


def pearson(x, y) -> float:
    """Pearson correlation coefficient of two equal-length samples.

    Raises UndefinedCorrelationError on constant input; callers that want a
    total function substitute 0 and log.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("pearson needs two equal-length vectors")
    if x.size < 2:
        raise ValidationError("pearson needs at least 2 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError("correlation undefined for constant input")
    r = float(dx @ dy) / (sx * sy)
    return max(-1.0, min(1.0, r))


@dataclass
class CorrelationMatrix:
    """Pearson correlations between linguistic features and the five traits."""

    features: list[str]
    matrix: np.ndarray
    provenance: str = "trained"

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.shape != (len(self.features), len(TRAITS)):
            raise ValidationError("matrix shape must be (features, traits)")
        self._index = {f: i for i, f in enumerate(self.features)}
        self._warned: set[str] = set()

    def row(self, feature: str) -> np.ndarray:
        i = self._index.get(feature)
        if i is None:
            if feature not in self._warned:
                logger.warning("feature %r missing from correlation matrix; using zeros", feature)
                self._warned.add(feature)
            return np.zeros(len(TRAITS))
        return self.matrix[i]

    def to_csv(self, path) -> None:
        lines = ["feature," + ",".join(TRAITS)]
        for f, row in zip(self.features, self.matrix):
            lines.append(f + "," + ",".join(f"{v:.6f}" for v in row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_csv(cls, path, provenance: str = "trained-from-file") -> "CorrelationMatrix":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = [h.strip() for h in lines[0].split(",")]
        if tuple(header[1:]) != TRAITS:
            raise ValidationError(f"correlation CSV must have trait columns {TRAITS}")
        features, rows = [], []
        for line in lines[1:]:
            if not line.strip():
                continue
            parts = line.split(",")
            features.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
        return cls(features=features, matrix=np.asarray(rows), provenance=provenance)


def load_bundled_matrix() -> CorrelationMatrix:
    """The demo correlation matrix shipped with the package (synthetic values)."""
    return CorrelationMatrix.from_csv(_DATA_DIR / "correlations.csv", provenance="bundled")


def train_correlation(training) -> CorrelationMatrix:
    """Fit the feature-to-trait matrix from (feature vector, trait scores) rows.

    Each cell is the Pearson correlation between one feature's weights and
    one trait's scores across the training rows; degenerate (constant)
    columns become zero with a logged warning.
    """
    if len(training) < 10:
        raise TrainingError(f"need at least 10 training rows, got {len(training)}")

    features = sorted({f for lv, _ in training for f in lv.entries})
    weight_cols = {f: np.array([lv.weight(f) for lv, _ in training]) for f in features}
    trait_cols = np.zeros((len(training), len(TRAITS)))
    for r, (_, scores) in enumerate(training):
        if isinstance(scores, dict):
            trait_cols[r] = [scores[t] for t in TRAITS]
        else:
            trait_cols[r] = np.asarray(scores, dtype=float)

    matrix = np.zeros((len(features), len(TRAITS)))
    for i, f in enumerate(features):
        for q in range(len(TRAITS)):
            try:
                matrix[i, q] = pearson(weight_cols[f], trait_cols[:, q])
            except UndefinedCorrelationError:
                logger.warning("constant column for feature %r / trait %r; storing 0",
                               f, TRAITS[q])
                matrix[i, q] = 0.0
    return CorrelationMatrix(features=features, matrix=matrix, provenance="trained")


def map_to_cognitive(lv: LinguisticFeatureVector,
                     m: CorrelationMatrix) -> CognitiveFeatureVector:
    """Weight-average the matrix rows of the author's features into the
    five trait correlations, clamped to [-1, 1].

    An all-zero feature vector maps to the all-zero cognitive vector.
    """
    total = sum(lv.entries.values())
    if total <= 0.0:
        return CognitiveFeatureVector(np.zeros(len(TRAITS)))
    acc = np.zeros(len(TRAITS))
    for feature, w in lv.entries.items():
        if w > 0.0:
            acc += w * m.row(feature)
    return CognitiveFeatureVector(np.clip(acc / total, -1.0, 1.0))

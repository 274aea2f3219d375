"""End-to-end training pipeline and the persisted model bundle.

Training cleans the corpus, extracts per-author features, fits the three
weighting modules on a stratified train fold, tunes the fusion parameters
on a validation fold, and builds the boundary index from the train-fold
orientation points.  The bundle serializes to a single checksummed,
versioned file.
"""

from __future__ import annotations

import hashlib
import pickle
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coherence import CoherenceParams, fuse_matrices, tune
from .corpus import RawPost, SlangTable, clean_corpus
from .errors import BoundaryRejectedError, BundleChecksumError, BundleVersionError, \
    TrainingError, ValidationError
from .gradboost import BoostModule
from .icf import CurveModule
from .lessn import TRAITS, CorpusStats, CorrelationMatrix, extract_linguistic, \
    load_bundled_lexicons, load_bundled_matrix, map_to_cognitive, train_correlation
from .rw_tree import OccupationNode, OrientPoint, RwTree
from .svm import ClusterModule, HashedTfidf, KernelParams, build_representations
from .synthetic import AuthorTruth

import logging

logger = logging.getLogger(__name__)

BUNDLE_MAGIC = b"CGPF"
BUNDLE_VERSION = 1

_DATA_DIR = Path(__file__).parent / "data"


@dataclass
class PipelineConfig:
    """Knobs for one training run."""

    seed: int = 42
    vocab_size: int = 512
    svm_C: float = 1.0
    svm_eta: float | None = None
    boost_rounds: int = 30
    boost_learning_rate: float = 0.1
    boost_max_depth: int = 3
    boost_min_leaf: int = 5
    grid_step: float = 0.05
    delta: int = 3
    top_k: int | None = None
    train_fraction: float = 0.6
    val_fraction: float = 0.2
    recall_mode: str = "correct"
    matrix_source: str = "auto"  # auto | bundled


@dataclass
class AuthorFeatures:
    """Everything the modules need to score one author."""

    author_id: str
    tokens: list[str]
    emojis: list[str]
    cognitive: np.ndarray
    label: str | None = None


@dataclass
class Folds:
    train: list[str]
    val: list[str]
    test: list[str]


def stratified_split(labels: dict[str, str], seed: int,
                     train_fraction: float, val_fraction: float) -> Folds:
    """Seeded per-class split into train/val/test author-id folds."""
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[str]] = {}
    for author_id in sorted(labels):
        by_class.setdefault(labels[author_id], []).append(author_id)
    train, val, test = [], [], []
    for c in sorted(by_class):
        ids = by_class[c]
        rng.shuffle(ids)
        n = len(ids)
        n_train = min(max(1, int(round(train_fraction * n))), n)
        if n_train == n and n > 1:
            n_train = n - 1
        rest = n - n_train
        n_val = min(int(round(val_fraction * n)), max(0, rest - 1))
        train.extend(ids[:n_train])
        val.extend(ids[n_train:n_train + n_val])
        test.extend(ids[n_train + n_val:])
    if not train or not val or not test:
        raise TrainingError("not enough labeled authors to form train/val/test folds")
    return Folds(train=sorted(train), val=sorted(val), test=sorted(test))


def assemble_authors(posts: list[RawPost], lexicons, corpus_stats: CorpusStats,
                     matrix: CorrelationMatrix, slang: SlangTable | None = None,
                     labels: dict[str, str] | None = None,
                     clean=None) -> dict[str, AuthorFeatures]:
    """Clean, merge, and featurize posts into per-author records."""
    clean = clean_corpus(posts, slang) if clean is None else clean
    grouped: dict[str, list] = {}
    for post in clean:
        grouped.setdefault(post.author_id, []).append(post)

    authors = {}
    for author_id in sorted(grouped):
        author_posts = grouped[author_id]
        lfv = extract_linguistic(author_posts, lexicons, corpus_stats)
        cog = map_to_cognitive(lfv, matrix)
        tokens = [t for p in author_posts for t in p.tokens]
        emojis = [e for p in author_posts for e in p.emojis]
        label = labels.get(author_id) if labels else None
        authors[author_id] = AuthorFeatures(author_id=author_id, tokens=tokens,
                                            emojis=emojis, cognitive=cog.values,
                                            label=label)
    return authors


@dataclass
class ModelBundle:
    """All trained components from one run, persistable as a single file."""

    run_id: str
    lexicon_hash: str
    lexicons: list
    corpus_stats: CorpusStats
    matrix: CorrelationMatrix
    vectorizer: HashedTfidf
    cluster: ClusterModule
    boost: BoostModule
    curve: CurveModule
    coherence_params: CoherenceParams
    tree: RwTree
    classes: list[str]
    config: PipelineConfig
    folds: Folds
    format_version: int = BUNDLE_VERSION

    def module_weights(self, authors: list[AuthorFeatures]):
        """(cluster, boost, curve) weight matrices for the given authors."""
        cog = np.vstack([a.cognitive for a in authors])
        docs = [(a.author_id, a.tokens) for a in authors]
        cognitive = {a.author_id: a.cognitive for a in authors}
        reps = build_representations(docs, cognitive, vectorizer=self.vectorizer)
        wc = self.cluster.weights(reps)
        wb = self.boost.weights(cog)
        wv = self.curve.weights(cog)
        return wc, wb, wv

    def fused_weights(self, authors: list[AuthorFeatures]) -> np.ndarray:
        wc, wb, wv = self.module_weights(authors)
        return fuse_matrices(wc, wb, wv, self.coherence_params)

    def predict(self, authors: list[AuthorFeatures]) -> list[str]:
        """Assign each author the best occupation among the boundary
        candidates retrieved for their orientation point."""
        fused = self.fused_weights(authors)
        k = self.config.top_k or len(self.classes)
        out = []
        for i, author in enumerate(authors):
            candidates = self.tree.top_k(author.cognitive, k)
            if not candidates:
                candidates = list(self.classes)
            idx = {c: j for j, c in enumerate(self.classes)}
            best = max(candidates,
                       key=lambda c: (fused[i, idx[c]], -idx[c]) if c in idx else (-1.0, 0))
            out.append(best)
        return out


@dataclass
class TrainResult:
    bundle: ModelBundle
    authors: dict[str, AuthorFeatures]
    tuning_surface: list


def _lexicon_hash(lexicons) -> str:
    h = hashlib.sha256()
    for lex in lexicons:
        h.update(lex.name.encode())
        for cat_name in sorted(lex.categories):
            cat = lex.categories[cat_name]
            h.update(cat_name.encode())
            for w in sorted(cat.words):
                h.update(w.encode())
            for p in cat.prefixes:
                h.update(p.encode())
            for e in sorted(cat.emojis):
                h.update(e.encode())
    return h.hexdigest()


def train_pipeline(posts: list[RawPost], truth: dict[str, AuthorTruth],
                   config: PipelineConfig | None = None,
                   lexicons=None) -> TrainResult:
    """Train every component from a labeled corpus and return the bundle."""
    config = config or PipelineConfig()
    lexicons = lexicons or load_bundled_lexicons()
    slang = SlangTable.from_tsv(_DATA_DIR / "slang.tsv")

    labels = {aid: t.occupation for aid, t in truth.items()}
    folds = stratified_split(labels, config.seed, config.train_fraction,
                             config.val_fraction)

    clean = clean_corpus(posts, slang)
    corpus_stats = CorpusStats.from_posts(clean, lexicons)

    # The trait correlation matrix is trained on the train fold's planted
    # trait scores when available, otherwise the bundled demo matrix is used.
    matrix = None
    if config.matrix_source == "auto":
        train_set = set(folds.train)
        grouped: dict[str, list] = {}
        for post in clean:
            if post.author_id in train_set:
                grouped.setdefault(post.author_id, []).append(post)
        rows = []
        for author_id in sorted(grouped):
            t = truth.get(author_id)
            if t is None or not any(t.traits):
                continue
            lfv = extract_linguistic(grouped[author_id], lexicons, corpus_stats)
            rows.append((lfv, dict(zip(TRAITS, t.traits))))
        if len(rows) >= 10:
            matrix = train_correlation(rows)
    if matrix is None:
        matrix = load_bundled_matrix()

    authors = assemble_authors(posts, lexicons, corpus_stats, matrix,
                               slang=slang, labels=labels, clean=clean)

    def fold_authors(ids):
        return [authors[a] for a in ids if a in authors]

    train_authors = fold_authors(folds.train)
    val_authors = fold_authors(folds.val)
    classes = sorted({a.label for a in train_authors})

    vectorizer = HashedTfidf(vocab_size=config.vocab_size).fit(
        [(a.author_id, a.tokens) for a in train_authors])

    train_cog = np.vstack([a.cognitive for a in train_authors])
    train_labels = [a.label for a in train_authors]
    train_reps = build_representations(
        [(a.author_id, a.tokens) for a in train_authors],
        {a.author_id: a.cognitive for a in train_authors},
        labels={a.author_id: a.label for a in train_authors},
        vectorizer=vectorizer)

    cluster = ClusterModule(params=KernelParams(eta=config.svm_eta, C=config.svm_C)).fit(train_reps)
    boost = BoostModule(rounds=config.boost_rounds,
                        learning_rate=config.boost_learning_rate,
                        max_depth=config.boost_max_depth,
                        min_leaf=config.boost_min_leaf).fit(
        train_cog, train_labels, [a.author_id for a in train_authors])
    curve = CurveModule().fit(train_cog, train_labels)

    # Tune the fusion on the validation fold.
    val_cog = np.vstack([a.cognitive for a in val_authors])
    val_reps = build_representations(
        [(a.author_id, a.tokens) for a in val_authors],
        {a.author_id: a.cognitive for a in val_authors},
        vectorizer=vectorizer)
    wc_val = cluster.weights(val_reps)
    wb_val = boost.weights(val_cog)
    wv_val = curve.weights(val_cog)
    class_index = {c: j for j, c in enumerate(classes)}
    y_val = np.array([class_index[a.label] for a in val_authors])
    params, surface = tune(wc_val, wb_val, wv_val, y_val, step=config.grid_step)

    # Boundary index from train-fold orientation points; each occupation's
    # weight is its mean fused score over its own authors.
    wc_tr = cluster.weights(train_reps)
    wb_tr = boost.weights(train_cog)
    wv_tr = curve.weights(train_cog)
    fused_tr = fuse_matrices(wc_tr, wb_tr, wv_tr, params)
    tree = RwTree(delta=config.delta)
    for c in classes:
        member_idx = [i for i, a in enumerate(train_authors) if a.label == c]
        orients = [OrientPoint.of(train_authors[i].cognitive, train_authors[i].author_id)
                   for i in member_idx]
        weight = float(np.mean(fused_tr[member_idx, class_index[c]]))
        try:
            tree.insert(OccupationNode(name=c, weight=weight, orients=orients))
        except BoundaryRejectedError:
            logger.warning("occupation %r has fewer than %d train points; no boundary",
                           c, config.delta)
    tree.overhaul()

    lex_hash = _lexicon_hash(lexicons)
    run_id = hashlib.sha256(
        f"{config.seed}|{lex_hash}|{','.join(folds.train)}".encode()).hexdigest()[:16]

    bundle = ModelBundle(
        run_id=run_id, lexicon_hash=lex_hash, lexicons=lexicons,
        corpus_stats=corpus_stats, matrix=matrix, vectorizer=vectorizer,
        cluster=cluster, boost=boost, curve=curve, coherence_params=params,
        tree=tree, classes=classes, config=config, folds=folds)
    return TrainResult(bundle=bundle, authors=authors, tuning_surface=surface)


def save_model(bundle: ModelBundle, path) -> None:
    """Write the bundle: magic, format version, payload checksum, payload."""
    payload = pickle.dumps(bundle, protocol=4)
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(BUNDLE_MAGIC)
        fh.write(struct.pack(">H", BUNDLE_VERSION))
        fh.write(digest)
        fh.write(payload)


def load_model(path) -> ModelBundle:
    """Read a bundle, failing loudly on version or checksum mismatch."""
    blob = Path(path).read_bytes()
    if len(blob) < 4 + 2 + 32 or blob[:4] != BUNDLE_MAGIC:
        raise BundleChecksumError("not a model bundle (bad magic or truncated header)")
    (version,) = struct.unpack(">H", blob[4:6])
    if version != BUNDLE_VERSION:
        raise BundleVersionError(
            f"bundle format v{version} is not supported by this build (expected v{BUNDLE_VERSION})")
    digest = blob[6:38]
    payload = blob[38:]
    if hashlib.sha256(payload).digest() != digest:
        raise BundleChecksumError("bundle payload checksum mismatch (corrupt or truncated file)")
    bundle = pickle.loads(payload)
    if not isinstance(bundle, ModelBundle):
        raise BundleChecksumError("bundle payload is not a model")
    return bundle

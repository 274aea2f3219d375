"""Benchmark metrics, the four framework variants, the history ablation,
and the index latency benchmark.

Precision divides correct assignments by all assignments; recall defaults
to the correctness reading (correct over labeled) with the coverage
reading available behind a flag.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coherence import fuse_matrices, predict_classes
from .errors import ValidationError
from .pipeline import ModelBundle, PipelineConfig, TrainResult, train_pipeline
from .rw_tree import OccupationNode, OccupationRectangle, OrientPoint, RTree, RwTree, \
    build_rectangle

VARIANTS = ("cluster", "boost", "curve", "conjunct")
ABLATION_BASE_FRACTIONS = (0.2, 0.3, 0.5)


@dataclass
class EvalReport:
    """Benchmark outcome: the three headline metrics plus bookkeeping."""

    precision: float
    recall: float
    f1: float
    confusion: dict = field(default_factory=dict)
    n_labeled: int = 0
    n_assigned: int = 0
    n_correct: int = 0
    latency_ms_mean: float = 0.0
    latency_ms_p50: float = 0.0

    def __post_init__(self):
        expected = 0.0
        if self.precision + self.recall > 0:
            expected = 2 * self.precision * self.recall / (self.precision + self.recall)
        if abs(self.f1 - expected) > 1e-9:
            raise ValidationError("f1 must equal 2PR/(P+R)")


def compute_report(predicted, actual, recall_mode: str = "correct",
                   latencies_ms=None) -> EvalReport:
    """Score hard assignments; `predicted` entries may be None (abstained)."""
    if len(actual) == 0:
        raise ValidationError("cannot evaluate an empty test fold")
    if len(predicted) != len(actual):
        raise ValidationError("prediction/label length mismatch")
    if recall_mode not in ("correct", "coverage"):
        raise ValidationError(f"unknown recall mode {recall_mode!r}")

    assigned = [(p, a) for p, a in zip(predicted, actual) if p is not None]
    n_correct = sum(1 for p, a in assigned if p == a)
    precision = n_correct / len(assigned) if assigned else 0.0
    if recall_mode == "correct":
        recall = n_correct / len(actual)
    else:
        recall = len(assigned) / len(actual)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    confusion: dict = {}
    for p, a in zip(predicted, actual):
        key = (a, p if p is not None else "<none>")
        confusion[key] = confusion.get(key, 0) + 1

    lat = np.asarray(latencies_ms if latencies_ms else [0.0])
    return EvalReport(precision=precision, recall=recall, f1=f1, confusion=confusion,
                      n_labeled=len(actual), n_assigned=len(assigned), n_correct=n_correct,
                      latency_ms_mean=float(lat.mean()),
                      latency_ms_p50=float(np.percentile(lat, 50)))


def evaluate(bundle: ModelBundle, authors, recall_mode: str | None = None) -> EvalReport:
    """Score a bundle on labeled authors, refusing train-fold leakage."""
    authors = list(authors)
    if not authors:
        raise ValidationError("cannot evaluate an empty test fold")
    train_ids = set(bundle.folds.train)
    overlap = [a.author_id for a in authors if a.author_id in train_ids]
    if overlap:
        raise ValidationError(f"test fold overlaps the training fold: {overlap[:3]}...")

    start = time.perf_counter()
    predicted = bundle.predict(authors)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    per_author = [elapsed_ms / len(authors)] * len(authors)
    actual = [a.label for a in authors]
    mode = recall_mode or bundle.config.recall_mode
    return compute_report(predicted, actual, recall_mode=mode, latencies_ms=per_author)


def run_variant(variant: str, result: TrainResult, fold: str = "test",
                recall_mode: str | None = None) -> EvalReport:
    """Evaluate one framework variant on a held-out fold.

    Single-module variants rank occupations by that module's weight alone;
    the conjunct variant fuses all three and routes through the boundary
    index.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"unknown variant {variant!r} (expected one of {VARIANTS})")
    bundle = result.bundle
    fold_ids = getattr(bundle.folds, fold)
    authors = [result.authors[a] for a in fold_ids if a in result.authors]
    if not authors:
        raise ValidationError(f"fold {fold!r} is empty")
    actual = [a.label for a in authors]
    mode = recall_mode or bundle.config.recall_mode

    start = time.perf_counter()
    if variant == "conjunct":
        predicted = bundle.predict(authors)
    else:
        wc, wb, wv = bundle.module_weights(authors)
        matrix = {"cluster": wc, "boost": wb, "curve": wv}[variant]
        predicted = [bundle.classes[j] for j in predict_classes(matrix)]
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    per_author = [elapsed_ms / len(authors)] * len(authors)
    return compute_report(predicted, actual, recall_mode=mode, latencies_ms=per_author)


def history_ablation(posts, truth, fractions=None,
                     config: PipelineConfig | None = None) -> list[tuple[float, EvalReport]]:
    """Drop the oldest fraction of each author's posts, retrain, re-evaluate.

    The standard removal ratios are always measured; extra ones can be
    added.  Posts need timestamps for the chronological sort.
    """
    config = config or PipelineConfig()
    requested = set(ABLATION_BASE_FRACTIONS) | set(fractions or ())
    for f in requested:
        if not 0 <= f < 1:
            raise ValidationError(f"removal fraction {f} outside [0, 1)")

    by_author: dict[str, list] = {}
    for p in posts:
        if p.timestamp is None:
            raise ValidationError("history ablation needs timestamped posts")
        by_author.setdefault(p.author_id, []).append(p)
    for plist in by_author.values():
        plist.sort(key=lambda p: (p.timestamp, p.post_id))

    out = []
    for f in sorted(requested):
        kept = []
        for author_id in sorted(by_author):
            plist = by_author[author_id]
            drop = int(np.floor(f * len(plist)))
            kept.extend(plist[drop:])
        result = train_pipeline(kept, truth, config)
        test_authors = [result.authors[a] for a in result.bundle.folds.test
                        if a in result.authors]
        report = evaluate(result.bundle, test_authors)
        out.append((f, report))
    return out


# -- index benchmark ----------------------------------------------------------


def synthetic_boundaries(count: int, rng: np.random.Generator, dim: int = 5,
                         points_per_boundary: int = 4) -> list[OccupationRectangle]:
    """Random occupation boundaries with seeded centers, widths, weights."""
    rects = []
    for i in range(count):
        center = rng.uniform(-0.8, 0.8, dim)
        half = rng.uniform(0.1, 0.4, dim)
        pts = [OrientPoint.of(np.clip(center + rng.uniform(-1, 1, dim) * half, -1, 1))
               for _ in range(points_per_boundary)]
        rects.append(build_rectangle(f"b{i:04d}", float(rng.uniform(0, 1)), pts,
                                     delta=points_per_boundary))
    return rects


def build_benchmark_trees(rects: list[OccupationRectangle]):
    rw = RwTree(delta=1)
    for r in rects:
        rw.insert(OccupationNode(name=r.name, weight=r.weight, orients=list(r.points)))
    rw.overhaul()
    rt = RTree()
    for r in rects:
        rt.insert(r)
    return rw, rt


def benchmark_queries(rects, count: int, rng: np.random.Generator, dim: int = 5):
    """70% of query points land inside a random boundary, the rest roam."""
    queries = []
    for _ in range(count):
        if rects and rng.random() < 0.7:
            r = rects[int(rng.integers(0, len(rects)))]
            q = rng.uniform(r.mbr.lo, r.mbr.hi)
        else:
            q = rng.uniform(-1, 1, dim)
        queries.append(q)
    return queries


def _time_queries(func, queries) -> np.ndarray:
    out = np.empty(len(queries))
    for i, q in enumerate(queries):
        t0 = time.perf_counter()
        func([q])
        out[i] = time.perf_counter() - t0
    return out * 1000.0


def bench_index(sizes, queries: int = 1000, seed: int = 7, repeats: int = 3) -> list[dict]:
    """Median/p95 quest latency for both trees at each boundary count.

    Result-set equality on every query is asserted before any timing.
    Repeated measurements keep the medians stable.
    """
    rows = []
    for size in sizes:
        rng = np.random.default_rng(seed + size)
        rects = synthetic_boundaries(size, rng)
        rw, rt = build_benchmark_trees(rects)
        qs = benchmark_queries(rects, queries, rng)

        for q in qs:
            if set(rw.quest([q])) != set(rt.query([q])):
                raise ValidationError(f"tree results diverge at size {size}")

        rw_medians, rt_medians, rw_p95s, rt_p95s = [], [], [], []
        for _ in range(repeats):
            rw_lat = _time_queries(rw.quest, qs)
            rt_lat = _time_queries(rt.query, qs)
            rw_medians.append(float(np.median(rw_lat)))
            rt_medians.append(float(np.median(rt_lat)))
            rw_p95s.append(float(np.percentile(rw_lat, 95)))
            rt_p95s.append(float(np.percentile(rt_lat, 95)))
        rw_med = float(np.median(rw_medians))
        rt_med = float(np.median(rt_medians))
        rows.append({
            "boundaries": size,
            "rw_median_ms": rw_med,
            "rt_median_ms": rt_med,
            "rw_p95_ms": float(np.median(rw_p95s)),
            "rt_p95_ms": float(np.median(rt_p95s)),
            "ratio": rw_med / rt_med if rt_med > 0 else float("nan"),
        })
    return rows

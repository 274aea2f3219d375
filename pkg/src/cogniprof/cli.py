"""Command-line front end: ingest, segment, extract, train, tune, infer,
evaluate, ablate, bench-index, and synth."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .corpus import SlangTable, clean_corpus, ingest_corpus
from .errors import CogniprofError
from .evaluation import bench_index, history_ablation, run_variant
from .lessn import CorpusStats, CorrelationMatrix, extract_linguistic, \
    load_bundled_lexicons, load_bundled_matrix, map_to_cognitive, term_profiles
from .pipeline import PipelineConfig, load_model, save_model, train_pipeline
from .segmentation import build_term_graph, extract_segments
from .synthetic import SyntheticSpec, generate_synthetic, load_truth

logger = logging.getLogger(__name__)

_DATA_DIR = Path(__file__).parent / "data"


def _write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


def _load_slang(path):
    return SlangTable.from_tsv(path if path else _DATA_DIR / "slang.tsv")


def cmd_ingest(args, file_cfg):
    posts = ingest_corpus(args.input)
    slang = _load_slang(args.slang)
    clean = clean_corpus(posts, slang)
    _write_jsonl(({"post_id": p.post_id, "author_id": p.author_id,
                   "tokens": list(p.tokens), "emojis": list(p.emojis)}
                  for p in clean), args.out)
    print(f"ingested {len(posts)} posts -> {args.out}")
    return 0


def cmd_segment(args, file_cfg):
    posts = ingest_corpus(args.corpus)
    slang = _load_slang(args.slang)
    clean = clean_corpus(posts, slang)
    lexicons = load_bundled_lexicons(args.lexicons)
    vocab = {t for p in clean for t in p.tokens}
    graph = build_term_graph(clean, term_profiles(vocab, lexicons),
                             epsilon=args.epsilon, max_n=args.max_n)
    phrases = extract_segments(clean, graph, top_k=args.top_k,
                               popularity_cap=args.popularity_cap, max_n=args.max_n)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["phrase", "n", "probability", "scp"])
        for ph in phrases:
            writer.writerow([" ".join(ph.terms), len(ph.terms),
                             f"{ph.probability:.8f}", f"{ph.scp:.6f}"])
    print(f"wrote {len(phrases)} segments -> {args.out}")
    return 0


def cmd_extract(args, file_cfg):
    posts = ingest_corpus(args.corpus)
    slang = _load_slang(args.slang)
    clean = clean_corpus(posts, slang)
    lexicons = load_bundled_lexicons(args.lexicons)
    matrix = CorrelationMatrix.from_csv(args.matrix) if args.matrix else load_bundled_matrix()
    stats = CorpusStats.from_posts(clean, lexicons)

    grouped = {}
    for p in clean:
        grouped.setdefault(p.author_id, []).append(p)
    records = []
    for author_id in sorted(grouped):
        lfv = extract_linguistic(grouped[author_id], lexicons, stats)
        cog = map_to_cognitive(lfv, matrix)
        records.append({"author_id": author_id,
                        "linguistic": lfv.nonzero(),
                        "cognitive": cog.as_pairs()})
    _write_jsonl(records, args.out)
    print(f"extracted features for {len(records)} authors -> {args.out}")
    return 0


def _pipeline_config(args, file_cfg) -> PipelineConfig:
    get = lambda key, default, cast: cfgmod.resolve(
        key, getattr(args, key, None), file_cfg, default, cast)
    return PipelineConfig(
        seed=get("seed", 42, int),
        vocab_size=get("vocab_size", 512, int),
        svm_C=get("svm_c", 1.0, float),
        boost_rounds=get("boost_rounds", 30, int),
        grid_step=get("grid_step", 0.05, float),
        delta=get("delta", 3, int),
    )


def _train(args, file_cfg):
    posts = ingest_corpus(args.corpus)
    truth = load_truth(args.authors)
    return train_pipeline(posts, truth, _pipeline_config(args, file_cfg))


def cmd_train(args, file_cfg):
    result = _train(args, file_cfg)
    save_model(result.bundle, args.out_model)
    params = result.bundle.coherence_params
    print(f"trained {len(result.bundle.classes)} occupations; "
          f"alpha={params.alpha:.2f} beta={params.beta:.2f} -> {args.out_model}")
    if args.module != "all":
        report = run_variant(args.module, result)
        print(f"{args.module} test F1={report.f1:.3f}")
    return 0


def cmd_tune(args, file_cfg):
    result = _train(args, file_cfg)
    with open(args.out_surface, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "beta", "f1"])
        for alpha, beta, f1 in result.tuning_surface:
            writer.writerow([f"{alpha:.4f}", f"{beta:.4f}", f"{f1:.6f}"])
    params = result.bundle.coherence_params
    print(f"tuned alpha={params.alpha:.2f} beta={params.beta:.2f}; "
          f"surface -> {args.out_surface}")
    return 0


def cmd_infer(args, file_cfg):
    bundle = load_model(args.model)
    posts = ingest_corpus(args.corpus)
    from .pipeline import assemble_authors
    authors = assemble_authors(posts, bundle.lexicons, bundle.corpus_stats,
                               bundle.matrix, slang=_load_slang(None))
    targets = [authors[args.author]] if args.author else list(authors.values())
    for author in targets:
        ranked = bundle.tree.top_k(author.cognitive, args.k)
        print(json.dumps({"author_id": author.author_id, "top_k": ranked},
                         ensure_ascii=False))
    return 0


def cmd_evaluate(args, file_cfg):
    result = _train(args, file_cfg)
    report = run_variant(args.variant, result)
    record = {"variant": args.variant, "precision": report.precision,
              "recall": report.recall, "f1": report.f1,
              "n_labeled": report.n_labeled, "n_correct": report.n_correct}
    if args.out:
        _write_jsonl([record], args.out)
    print(json.dumps(record))
    return 0


def cmd_ablate(args, file_cfg):
    posts = ingest_corpus(args.corpus)
    truth = load_truth(args.authors)
    fractions = [float(f) for f in args.fractions.split(",")] if args.fractions else []
    curve = history_ablation(posts, truth, fractions, _pipeline_config(args, file_cfg))
    for f, report in curve:
        print(f"drop_oldest={f:.2f} precision={report.precision:.3f} "
              f"recall={report.recall:.3f} f1={report.f1:.3f}")
    return 0


def cmd_bench_index(args, file_cfg):
    lo, hi = (int(v) for v in args.boundaries.split(".."))
    sizes = sorted({lo, (lo + hi) // 2, hi})
    rows = bench_index(sizes, queries=args.queries, seed=args.seed)
    writer = csv.DictWriter(sys.stdout if args.out == "-" else open(args.out, "w", newline=""),
                            fieldnames=list(rows[0].keys()))
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return 0


def cmd_synth(args, file_cfg):
    spec = SyntheticSpec(seed=args.seed, num_authors=args.authors,
                         posts_per_author=args.posts,
                         num_occupations=args.occupations, noise=args.noise,
                         planted_collocations=args.collocations)
    corpus = generate_synthetic(spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus.write_posts(out_dir / "posts.jsonl")
    corpus.write_truth(out_dir / "authors.jsonl")
    print(f"generated {len(corpus.posts)} posts for {len(corpus.truth)} authors "
          f"-> {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cogniprof",
                                     description="Occupation inference from short text")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read, clean, and tokenize a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--slang", help="2-column slang TSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="extract sticky multi-word segments")
    p.add_argument("--corpus", required=True)
    p.add_argument("--slang")
    p.add_argument("--lexicons")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-n", dest="max_n", type=int, default=5)
    p.add_argument("--top-k", dest="top_k", type=int, default=10000)
    p.add_argument("--popularity-cap", dest="popularity_cap", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("extract", help="per-author linguistic and trait features")
    p.add_argument("--corpus", required=True)
    p.add_argument("--slang")
    p.add_argument("--lexicons")
    p.add_argument("--matrix", help="correlation matrix CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    for name, func in (("train", cmd_train), ("tune", cmd_tune), ("evaluate", cmd_evaluate)):
        p = sub.add_parser(name)
        p.add_argument("--corpus", required=True)
        p.add_argument("--authors", required=True, help="ground-truth JSONL")
        p.add_argument("--seed", type=int)
        p.add_argument("--vocab-size", dest="vocab_size", type=int)
        p.add_argument("--svm-c", dest="svm_c", type=float)
        p.add_argument("--boost-rounds", dest="boost_rounds", type=int)
        p.add_argument("--grid-step", dest="grid_step", type=float)
        p.add_argument("--delta", type=int)
        if name == "train":
            p.add_argument("--module", choices=("all", "cluster", "boost", "curve", "conjunct"),
                           default="all")
            p.add_argument("--out-model", dest="out_model", required=True)
        elif name == "tune":
            p.add_argument("--step", dest="grid_step", type=float)
            p.add_argument("--metric", choices=("f1",), default="f1")
            p.add_argument("--out-surface", dest="out_surface", required=True)
        else:
            p.add_argument("--variant", choices=("cluster", "boost", "curve", "conjunct"),
                           default="conjunct")
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("infer", help="top-k occupations per author")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--author")
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("ablate", help="history-removal curve")
    p.add_argument("--corpus", required=True)
    p.add_argument("--authors", required=True)
    p.add_argument("--fractions", help="comma-separated extra removal fractions")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("bench-index", help="layered tree vs classic R-tree latency")
    p.add_argument("--boundaries", default="10..100", help="range lo..hi")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench_index)

    p = sub.add_parser("synth", help="generate a planted synthetic corpus")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--authors", type=int, default=100)
    p.add_argument("--posts", type=int, default=12)
    p.add_argument("--occupations", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--collocations", type=int, default=0)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_cfg = cfgmod.load_config(args.config)
        return args.func(args, file_cfg)
    except CogniprofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Corpus ingestion, lexical noise reduction, and tokenization.

Posts arrive as JSON-lines records (``post_id``, ``author_id``, ``text``,
optional ``occupation`` and ``timestamp``).  Cleaning strips URLs and
user mentions, pulls emoji out into a separate channel, repairs elongated
character runs against a vocabulary, and substitutes slang abbreviations
from a two-column table.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusParseError, ValidationError

# Tokens are runs of letters/digits with optional internal apostrophes;
# everything else (dashes, commas, emoji, ...) acts as a separator.
_TOKEN_RE = re.compile(r"[0-9a-zA-Z_]+(?:'[0-9a-zA-Z_]+)*")
_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
# Common emoji blocks plus the legacy misc-symbols range.
_EMOJI_RE = re.compile(
    "["
    "\U0001f300-\U0001f5ff"
    "\U0001f600-\U0001f64f"
    "\U0001f680-\U0001f6ff"
    "\U0001f900-\U0001f9ff"
    "☀-➿"
    "️"
    "]+"
)
_RUN_RE = re.compile(r"(.)\1{2,}")


@dataclass(frozen=True)
class RawPost:
    """One ingested short-text record, optionally carrying a ground-truth tag."""

    post_id: str
    author_id: str
    text: str
    occupation_tag: str | None = None
    timestamp: float | None = None


@dataclass(frozen=True)
class CleanPost:
    """A noise-reduced post: ordered tokens plus separately retained emoji."""

    post_id: str
    author_id: str
    tokens: tuple[str, ...]
    emojis: tuple[str, ...] = ()


@dataclass
class SlangTable:
    """Maps lowercase slang keys to their expansions (``b4`` -> ``before``)."""

    entries: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for key, value in self.entries.items():
            if key != key.lower():
                raise ValidationError(f"slang key {key!r} must be lowercase")
            if key == value.lower().strip():
                raise ValidationError(f"slang key {key!r} maps to itself")

    @classmethod
    def from_tsv(cls, path) -> "SlangTable":
        entries = {}
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusParseError("expected 2 tab-separated columns", line_no)
            entries[parts[0].strip().lower()] = parts[1].strip()
        return cls(entries)


def ingest_corpus(path, fmt: str = "jsonl") -> list[RawPost]:
    """Read a corpus file into RawPosts, rejecting duplicate post ids.

    Each line must be a JSON object with ``post_id``, ``author_id`` and a
    non-empty ``text``.  Malformed lines raise CorpusParseError with the
    line number; duplicate ids raise ValidationError naming the id.
    """
    if fmt != "jsonl":
        raise ValidationError(f"unsupported corpus format: {fmt!r}")
    posts = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON ({exc.msg})", line_no) from exc
            try:
                post_id = str(record["post_id"])
                author_id = str(record["author_id"])
                text = record["text"]
            except (KeyError, TypeError) as exc:
                raise CorpusParseError(f"missing field {exc}", line_no) from exc
            if not isinstance(text, str) or not text.strip():
                raise CorpusParseError("text must be a non-empty string", line_no)
            if post_id in seen:
                raise ValidationError(f"duplicate post_id {post_id!r}")
            seen.add(post_id)
            posts.append(
                RawPost(
                    post_id=post_id,
                    author_id=author_id,
                    text=text,
                    occupation_tag=record.get("occupation"),
                    timestamp=record.get("timestamp"),
                )
            )
    return posts


def tokenize(text: str) -> list[str]:
    """Split on whitespace/punctuation, keeping intra-word apostrophes."""
    return _TOKEN_RE.findall(text)


def extract_emojis(text: str) -> tuple[str, list[str]]:
    """Pull emoji sequences out of `text`; returns (stripped text, emojis)."""
    emojis: list[str] = []

    def _grab(match):
        # One entry per emoji character; variation selectors are presentation
        # hints, not emoji of their own.
        emojis.extend(ch for ch in match.group(0) if ch != "️")
        return " "

    return _EMOJI_RE.sub(_grab, text), emojis


def compress_runs(token: str, vocab: set[str] | None = None) -> str:
    """Repair elongated character runs ("woooow").

    Runs longer than two are first squashed to exactly two; if the result
    is not a known vocabulary word, the squashed runs collapse to a single
    character ("woooow" -> "woow" -> "wow").  Tokens without over-long
    runs are returned untouched, so natural doubles ("happy") survive.
    """
    if not _RUN_RE.search(token):
        return token
    doubled = _RUN_RE.sub(lambda m: m.group(1) * 2, token)
    if vocab is not None and doubled in vocab:
        return doubled
    return _RUN_RE.sub(lambda m: m.group(1), token)


def reduce_noise(post: RawPost, slang: SlangTable | None = None,
                 vocab: set[str] | None = None) -> CleanPost:
    """Clean one post: strip URLs/mentions, keep emoji aside, fold case,
    repair character runs, and substitute slang.

    Never fails; the worst case is a CleanPost with zero tokens.
    """
    text = _URL_RE.sub(" ", post.text)
    text = _MENTION_RE.sub(" ", text)
    text, emojis = extract_emojis(text)
    tokens = [compress_runs(tok, vocab) for tok in tokenize(text.lower())]
    if slang is not None and slang.entries:
        tokens = _apply_slang(tokens, slang)
    return CleanPost(
        post_id=post.post_id,
        author_id=post.author_id,
        tokens=tuple(tokens),
        emojis=tuple(emojis),
    )


def _apply_slang(tokens: list[str], slang: SlangTable, max_passes: int = 5) -> list[str]:
    # Expansions may themselves contain table keys; iterate to a fixpoint
    # (capped to stay safe against pathological cycles).
    for _ in range(max_passes):
        replaced = False
        out: list[str] = []
        for tok in tokens:
            expansion = slang.entries.get(tok)
            if expansion is None:
                out.append(tok)
            else:
                out.extend(tokenize(expansion.lower()))
                replaced = True
        tokens = out
        if not replaced:
            break
    return tokens


def corpus_vocabulary(posts: list[RawPost]) -> set[str]:
    """Vocabulary of raw lowercase tokens, used to guide run repair."""
    vocab: set[str] = set()
    for post in posts:
        vocab.update(tokenize(post.text.lower()))
    return vocab


def clean_corpus(posts: list[RawPost], slang: SlangTable | None = None) -> list[CleanPost]:
    """Noise-reduce a whole corpus, building the repair vocabulary first."""
    vocab = corpus_vocabulary(posts)
    return [reduce_noise(p, slang, vocab) for p in posts]


def load_stopwords(path=None) -> set[str]:
    """Stop-word list: one word per line; defaults to the bundled English list."""
    if path is None:
        path = Path(__file__).parent / "data" / "stopwords.txt"
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.add(word)
    return words

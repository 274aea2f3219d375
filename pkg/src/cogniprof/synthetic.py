"""Deterministic synthetic corpus generator with planted ground truth.

Each occupation gets a driving trait; authors inherit the occupation's
trait profile plus seeded jitter, and their posts emit lexicon words at
rates tied to the trait values.  Sticky word pairs, occupation-specific
jargon, emoji, slang, and character elongations can all be planted so the
cleaning, segmentation, and weighting stages have known signal to find.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import RawPost
from .errors import ValidationError
from .lessn import TRAITS

OCCUPATION_NAMES = (
    "visual-artist",      # openness
    "project-manager",    # conscientiousness
    "event-host",         # extroversion
    "counselor",          # agreeableness
    "crisis-reporter",    # neuroticism
    "archivist",
    "tour-guide",
    "mediator",
)

TRAIT_WORDS = (
    ("think", "know", "consider", "realize", "wonder", "idea", "curious",
     "analysis", "theory", "abstract"),
    ("work", "job", "project", "plan", "schedule", "task", "goal",
     "achieve", "improve", "report"),
    ("friend", "party", "people", "talk", "buddy", "chat", "happy",
     "celebrate", "laugh", "visit"),
    ("trust", "honest", "reliable", "loyal", "faith", "sincere",
     "together", "family", "team", "good"),
    ("fear", "worry", "panic", "sad", "angry", "hate", "awful",
     "terrible", "lonely", "cry"),
)

JOY_EMOJI = ("😀", "😄", "😊", "🎉")
SAD_EMOJI = ("😢", "😞", "😭")
SLANG_FORMS = ("b4", "gr8", "ppl", "luv")


@dataclass(frozen=True)
class SyntheticSpec:
    """Everything the generator needs; the seed fully determines the output."""

    seed: int = 42
    num_authors: int = 100
    posts_per_author: int = 12
    num_occupations: int = 5
    noise: float = 0.1
    tokens_per_post: int = 8
    planted_collocations: int = 0
    collocation_rate: float = 0.25
    stale_fraction: float = 0.0
    signal_rate: float = 0.5
    occupation_word_rate: float = 0.08
    emoji_rate: float = 0.05
    mangle_rate: float = 0.01
    filler_vocab: int = 160

    def __post_init__(self):
        if self.num_authors < 1 or self.posts_per_author < 1:
            raise ValidationError("need at least one author and one post")
        if not 0 <= self.stale_fraction < 1:
            raise ValidationError("stale_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class AuthorTruth:
    """Planted ground truth for one author."""

    author_id: str
    occupation: str
    traits: tuple


@dataclass
class SyntheticCorpus:
    posts: list[RawPost]
    truth: dict[str, AuthorTruth]
    occupations: list[str]
    collocations: list[tuple[str, str]] = field(default_factory=list)

    def write_posts(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for p in self.posts:
                record = {"post_id": p.post_id, "author_id": p.author_id, "text": p.text}
                if p.occupation_tag is not None:
                    record["occupation"] = p.occupation_tag
                if p.timestamp is not None:
                    record["timestamp"] = p.timestamp
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def write_truth(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for author_id in sorted(self.truth):
                t = self.truth[author_id]
                fh.write(json.dumps({
                    "author_id": t.author_id,
                    "occupation": t.occupation,
                    "traits": dict(zip(TRAITS, t.traits)),
                }, ensure_ascii=False) + "\n")


def occupation_profiles(num_occupations: int) -> dict[str, np.ndarray]:
    """One planted Big-Five profile per occupation, each driven by one trait."""
    profiles = {}
    for j in range(num_occupations):
        name = OCCUPATION_NAMES[j] if j < len(OCCUPATION_NAMES) else f"occupation-{j}"
        vec = np.full(len(TRAITS), -0.15)
        vec[j % len(TRAITS)] = 0.85
        profiles[name] = vec
    return profiles


def load_truth(path) -> dict[str, AuthorTruth]:
    """Read an authors ground-truth JSONL file."""
    truth = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        traits = rec.get("traits", {})
        truth[rec["author_id"]] = AuthorTruth(
            author_id=rec["author_id"],
            occupation=rec["occupation"],
            traits=tuple(traits[t] for t in TRAITS) if traits else (0.0,) * len(TRAITS),
        )
    return truth


def _mangle(word: str, pick: float) -> str:
    """Elongate one character run beyond two (noise the cleaner can repair)."""
    i = int(pick * len(word))
    return word[:i] + word[i] * 3 + word[i + 1:]


def generate_synthetic(spec: SyntheticSpec) -> SyntheticCorpus:
    """Produce the planted corpus described by `spec` (pure function of it)."""
    rng = np.random.default_rng(spec.seed)
    profiles = occupation_profiles(spec.num_occupations)
    occupations = list(profiles)

    # Object dtype: occupation words are longer than the filler strings and
    # fixed-width numpy strings would silently truncate them.
    filler = np.array([f"filler{i:03d}" for i in range(spec.filler_vocab)], dtype=object)
    occ_words = {name: np.array([f"{name.replace('-', '')}tool{t}" for t in range(4)],
                                dtype=object)
                 for name in occupations}
    trait_matrix = np.array([list(words) for words in TRAIT_WORDS], dtype=object)
    collocations = [(f"glimmer{i:02d}", f"forge{i:02d}")
                    for i in range(spec.planted_collocations)]

    posts: list[RawPost] = []
    truth: dict[str, AuthorTruth] = {}
    coll_cursor = 0

    for a in range(spec.num_authors):
        author_id = f"author{a:05d}"
        occupation = occupations[a % len(occupations)]
        profile = profiles[occupation]
        traits = profile if spec.noise == 0 else np.clip(
            profile + rng.normal(0.0, spec.noise, len(TRAITS)), -1.0, 1.0)
        truth[author_id] = AuthorTruth(author_id=author_id, occupation=occupation,
                                       traits=tuple(float(v) for v in traits))

        low = max(1, spec.posts_per_author // 2)
        n_posts = int(rng.integers(low, spec.posts_per_author + 1))
        total = n_posts * spec.tokens_per_post
        stale_posts = int(np.floor(spec.stale_fraction * n_posts))
        emit_prob = (1.0 + traits) / 2.0

        kind_roll = rng.random(total)
        trait_pick = rng.integers(0, len(TRAITS), total)
        accept_roll = rng.random(total)
        word_pick = rng.integers(0, trait_matrix.shape[1], total)
        filler_pick = rng.integers(0, len(filler), total)
        occ_pick = rng.integers(0, len(occ_words[occupation]), total)

        stale_mask = (np.arange(total) // spec.tokens_per_post) < stale_posts
        accept_prob = emit_prob[trait_pick]
        # Old posts emit against the profile, planting the history effect.
        accept_prob = np.where(stale_mask, 1.0 - accept_prob, accept_prob)

        words = filler[filler_pick].copy()
        signal_mask = (kind_roll < spec.signal_rate) & (accept_roll < accept_prob)
        words[signal_mask] = trait_matrix[trait_pick[signal_mask], word_pick[signal_mask]]
        occ_mask = kind_roll >= 1.0 - spec.occupation_word_rate
        words[occ_mask] = occ_words[occupation][occ_pick[occ_mask]]

        mangle_positions = np.flatnonzero(rng.random(total) < spec.mangle_rate)
        for pos in mangle_positions:
            roll = rng.random()
            if roll < 0.5:
                words[pos] = SLANG_FORMS[int(rng.integers(0, len(SLANG_FORMS)))]
            else:
                words[pos] = _mangle(str(words[pos]), rng.random())

        emoji_roll = rng.random(n_posts)
        joy_roll = rng.random(n_posts)
        coll_roll = rng.random(n_posts)

        for pi in range(n_posts):
            row = words[pi * spec.tokens_per_post:(pi + 1) * spec.tokens_per_post]
            text = " ".join(str(w) for w in row)
            if collocations and coll_roll[pi] < spec.collocation_rate:
                pair = collocations[coll_cursor % len(collocations)]
                coll_cursor += 1
                text += f" {pair[0]} {pair[1]}"
            if emoji_roll[pi] < spec.emoji_rate:
                pool = JOY_EMOJI if joy_roll[pi] < emit_prob[2] else SAD_EMOJI
                text += " " + pool[int(rng.integers(0, len(pool)))]
            posts.append(RawPost(
                post_id=f"{author_id}-p{pi:04d}",
                author_id=author_id,
                text=text,
                occupation_tag=occupation,
                timestamp=float(a * 100_000 + pi),
            ))

    return SyntheticCorpus(posts=posts, truth=truth, occupations=occupations,
                           collocations=collocations)

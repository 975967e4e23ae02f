"""Group tagged sentences into label-pure chunks of about N tokens."""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .corpus import ENGLISH, LanguagePair
from .errors import ConfigError, DataError
from .seeding import derive_rng
from .text import TaggedSentence

POOLED = "pooled"


class DirectionLabel(enum.IntEnum):
    ORIGINAL = 0
    TRANSLATED = 1

    @property
    def letter(self):
        return "O" if self is DirectionLabel.ORIGINAL else "T"

    @classmethod
    def from_letter(cls, letter):
        try:
            return {"O": cls.ORIGINAL, "T": cls.TRANSLATED}[letter]
        except KeyError:
            raise DataError(f"unknown chunk label {letter!r}") from None


@lru_cache(maxsize=None)
def _foreign(pair):
    return LanguagePair.parse(pair).foreign


def label_of(sentence):
    if sentence.origin == ENGLISH:
        return DirectionLabel.ORIGINAL
    if sentence.origin == _foreign(sentence.pair):
        return DirectionLabel.TRANSLATED
    raise DataError(f"origin {sentence.origin!r} does not belong to pair {sentence.pair}")


class ChunkMode(enum.Enum):
    HOMOGENEOUS = "homogeneous"
    POOLED = "pooled"


@dataclass(frozen=True)
class ChunkingConfig:
    size_tokens: int = 2000
    mode: ChunkMode = ChunkMode.HOMOGENEOUS
    seed: int = 0
    drop_partial_final: bool = True
    dedupe_pooled_originals: bool = False

    def __post_init__(self):
        if self.size_tokens < 1:
            raise ConfigError("chunk size must be at least one token")


@dataclass(eq=False)
class Chunk:
    sentences: tuple[TaggedSentence, ...]
    label: DirectionLabel
    provenance: str

    @cached_property
    def n(self):
        return sum(len(s.tokens) for s in self.sentences)

    @cached_property
    def word_counts(self):
        """Lowercased token frequencies."""
        return Counter(t.lower() for s in self.sentences for t in s.tokens)

    def ngram_counts(self, n):
        """Tag n-gram frequencies; n-grams never cross sentence boundaries."""
        cache = self.__dict__.setdefault("_ngram_cache", {})
        if n not in cache:
            counts = Counter()
            for s in self.sentences:
                tags = s.tags
                counts.update(tuple(tags[i:i + n]) for i in range(len(tags) - n + 1))
            cache[n] = counts
        return cache[n]

    def doubled(self):
        return Chunk(self.sentences + self.sentences, self.label, self.provenance)

    def to_json(self):
        return json.dumps({
            "label": self.label.letter,
            "pair": self.provenance,
            "n": self.n,
            "sentences": [{"tokens": list(s.tokens), "tags": list(s.tags),
                           "origin": s.origin, "pair": s.pair} for s in self.sentences],
        }, ensure_ascii=False)


def _greedy(sentences, label, provenance, config):
    chunks, current, count = [], [], 0
    for s in sentences:
        current.append(s)
        count += len(s.tokens)
        if count >= config.size_tokens:
            chunks.append(Chunk(tuple(current), label, provenance))
            current, count = [], 0
    if current and not config.drop_partial_final:
        chunks.append(Chunk(tuple(current), label, provenance))
    return chunks


def shuffle_pool(corpora, label, seed):
    """Concatenate per-pair sentence lists of one class and permute them."""
    pool = [s for corpus in corpora for s in corpus]
    order = derive_rng(seed, "pool", label.name).permutation(len(pool))
    return [pool[i] for i in order]


def build_chunks(sentences, config):
    """Fill chunks greedily with whole sentences until ``size_tokens`` is reached.

    HOMOGENEOUS partitions by (pair, label) and keeps input order; POOLED
    partitions by label only and shuffles each pool before chunking.
    """
    partitions = {}
    for s in sentences:
        key = (s.pair if config.mode is ChunkMode.HOMOGENEOUS else POOLED, label_of(s))
        partitions.setdefault(key, []).append(s)
    chunks = []
    for (provenance, label) in sorted(partitions, key=lambda k: (k[0], int(k[1]))):
        part = partitions[(provenance, label)]
        if config.mode is ChunkMode.POOLED:
            by_pair = {}
            for s in part:
                by_pair.setdefault(s.pair, []).append(s)
            corpora = [by_pair[p] for p in sorted(by_pair)]
            if config.dedupe_pooled_originals and label is DirectionLabel.ORIGINAL:
                corpora = [_dedupe([s for c in corpora for s in c])]
            part = shuffle_pool(corpora, label, config.seed)
        chunks.extend(_greedy(part, label, provenance, config))
    return chunks


def _dedupe(sentences):
    seen, out = set(), []
    for s in sentences:
        if s.tokens not in seen:
            seen.add(s.tokens)
            out.append(s)
    return out


def balance(chunks, seed):
    """Keep the whole minority class plus an equal-sized random draw of the majority."""
    by_label = {lab: [c for c in chunks if c.label is lab] for lab in DirectionLabel}
    if not by_label[DirectionLabel.ORIGINAL] or not by_label[DirectionLabel.TRANSLATED]:
        raise ConfigError("cannot balance: one class has no chunks")
    rng = derive_rng(seed, "balance")
    size = min(len(v) for v in by_label.values())
    kept = []
    for lab in DirectionLabel:
        group = by_label[lab]
        if len(group) > size:
            picks = sorted(rng.choice(len(group), size=size, replace=False))
            group = [group[i] for i in picks]
        kept.extend(group)
    return [kept[i] for i in rng.permutation(len(kept))]


def write_chunks(chunks, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for c in chunks:
            f.write(c.to_json() + "\n")


def read_chunks(path):
    chunks = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                label = DirectionLabel.from_letter(rec["label"])
                provenance = rec["pair"]
                sentences = []
                for s in rec["sentences"]:
                    pair = s.get("pair", provenance)
                    origin = s.get("origin") or (ENGLISH if label is DirectionLabel.ORIGINAL
                                                 else LanguagePair.parse(pair).foreign)
                    sentences.append(TaggedSentence(tuple(s["tokens"]), tuple(s["tags"]),
                                                    origin, pair))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON ({exc.msg})", line=lineno) from None
            except (KeyError, TypeError, DataError, ConfigError) as exc:
                raise DataError(f"{path}: bad chunk record ({exc})", line=lineno) from None
            chunk = Chunk(tuple(sentences), label, provenance)
            if "n" in rec and rec["n"] != chunk.n:
                raise DataError(f"{path}: declared n={rec['n']} but sentences hold {chunk.n}",
                                line=lineno)
            chunks.append(chunk)
    return chunks

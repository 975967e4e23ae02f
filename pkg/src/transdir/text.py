"""Tokenization and part-of-speech tagging of the English side."""

from __future__ import annotations

import json
import random
import re
import unicodedata
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DataError

_URL_RE = re.compile(r"^(?:[a-z][a-z0-9+.-]*://|www\.)\S+$", re.IGNORECASE)
# longest first so "n't" wins over "'t"-like prefixes
_CONTRACTIONS = ("n't", "'ll", "'re", "'ve", "'s", "'d", "'m")
_APOSTROPHES = str.maketrans({"’": "'"})


def _is_punct(ch):
    return unicodedata.category(ch)[0] in "PS"


def _split_contraction(word):
    low = word.lower().translate(_APOSTROPHES)
    for suffix in _CONTRACTIONS:
        if low.endswith(suffix) and len(low) > len(suffix):
            cut = len(word) - len(suffix)
            head = word[:cut]
            if not head or _is_punct(head[-1]):
                continue
            return _split_contraction(head) + [word[cut:]]
    return [word]


def tokenize(text):
    """Split English text into tokens.

    Whitespace first; then leading and trailing punctuation runs become
    tokens of their own and English contractions are split Penn-style
    (``don't`` -> ``do`` + ``n't``). URLs, numbers such as ``1,000.50`` and
    hyphenated words survive as single tokens.
    """
    tokens = []
    for piece in text.split():
        if _URL_RE.match(piece) or piece.lower().translate(_APOSTROPHES) in _CONTRACTIONS:
            tokens.append(piece)
            continue
        if all(_is_punct(c) for c in piece):
            tokens.append(piece)
            continue
        start, end = 0, len(piece)
        while start < end and _is_punct(piece[start]):
            start += 1
        while end > start and _is_punct(piece[end - 1]):
            end -= 1
        core = piece[start:end]
        trail = piece[end:]
        if start:
            tokens.append(piece[:start])
        if _URL_RE.match(core):
            tokens.append(core)
        else:
            tokens.extend(_split_contraction(core))
        if trail:
            tokens.append(trail)
    return tokens


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    origin: str
    pair: str

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise DataError(f"{len(self.tokens)} tokens but {len(self.tags)} tags")
        if not self.tokens:
            raise DataError("a tagged sentence needs at least one token")

    def __len__(self):
        return len(self.tokens)

    def to_json(self):
        return json.dumps({"tokens": list(self.tokens), "tags": list(self.tags),
                           "origin": self.origin, "pair": self.pair}, ensure_ascii=False)


def load_pretagged(path):
    """Read the JSON-lines intermediate format; errors name the offending line."""
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(TaggedSentence(tuple(rec["tokens"]), tuple(rec["tags"]),
                                          rec["origin"], rec["pair"]))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON ({exc.msg})", line=lineno) from None
            except KeyError as exc:
                raise DataError(f"{path}: missing field {exc.args[0]!r}", line=lineno) from None
            except (TypeError, DataError) as exc:
                raise DataError(f"{path}: {exc}", line=lineno) from None
    return out


def write_pretagged(sentences, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in sentences:
            f.write(s.to_json() + "\n")


def read_tsv_corpus(path):
    """Two-column ``token<TAB>tag`` file, sentences separated by blank lines."""
    corpus, tokens, tags = [], [], []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                if tokens:
                    corpus.append((tokens, tags))
                    tokens, tags = [], []
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}: expected 'token<TAB>tag'", line=lineno)
            tokens.append(parts[0])
            tags.append(parts[1])
    if tokens:
        corpus.append((tokens, tags))
    return corpus


def write_tsv_corpus(corpus, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for tokens, tags in corpus:
            for tok, tag in zip(tokens, tags):
                f.write(f"{tok}\t{tag}\n")
            f.write("\n")


_START = ("-START-", "-START2-")
_END = ("-END-", "-END2-")


def _shape(word):
    shape = []
    for ch in word:
        c = "X" if ch.isupper() else "x" if ch.isalpha() else "d" if ch.isdigit() else ch
        if not shape or shape[-1] != c:
            shape.append(c)
    return "".join(shape)[:6]


def _features(i, words, prev, prev2):
    """Feature strings for position ``i`` of the padded word list ``words``."""
    w = words[i]
    low = w.lower()
    return (
        "bias",
        "w=" + low,
        "s1=" + low[-1:],
        "s2=" + low[-2:],
        "s3=" + low[-3:],
        "c1=" + w[0],
        "shape=" + _shape(w),
        "t-1=" + prev,
        "t-2=" + prev2 + "|" + prev,
        "t-1w=" + prev + "|" + low,
        "w-1=" + words[i - 1].lower(),
        "w+1=" + words[i + 1].lower(),
    )


class PerceptronTagger:
    """Greedy left-to-right averaged-perceptron POS tagger."""

    FORMAT_VERSION = 1

    def __init__(self, weights=None, tags=(), metadata=None):
        self.weights = weights if weights is not None else {}
        self.tags = tuple(sorted(tags))
        self.metadata = dict(metadata or {})

    def _predict(self, feats):
        scores = defaultdict(float)
        for f in feats:
            for tag, w in self.weights.get(f, {}).items():
                scores[tag] += w
        # self.tags is sorted, so ties go to the alphabetically first tag
        best, best_score = self.tags[0], float("-inf")
        for tag in self.tags:
            score = scores.get(tag, 0.0)
            if score > best_score:
                best, best_score = tag, score
        return best

    def tag(self, tokens):
        if not self.tags:
            raise ConfigError("tagger has no tag inventory; train or load a model first")
        words = [_START[1], _START[0], *tokens, _END[0], _END[1]]
        prev, prev2 = _START
        out = []
        for i in range(2, len(words) - 2):
            tag = self._predict(_features(i, words, prev, prev2))
            out.append(tag)
            prev2, prev = prev, tag
        return out

    @classmethod
    def train(cls, corpus, epochs=5, seed=0, dev=None, corpus_id=""):
        """Train on ``[(tokens, tags), ...]`` with seeded per-epoch shuffling."""
        corpus = [(list(t), list(g)) for t, g in corpus]
        if not corpus:
            raise ConfigError("cannot train a tagger on an empty corpus")
        if epochs < 1:
            raise ConfigError("epochs must be >= 1")
        for n, (tokens, tags) in enumerate(corpus, 1):
            if len(tokens) != len(tags):
                raise DataError(f"sentence {n}: {len(tokens)} tokens but {len(tags)} tags")
        inventory = sorted({t for _, tags in corpus for t in tags})
        model = cls(tags=inventory)
        weights = model.weights
        totals = defaultdict(float)
        stamps = defaultdict(int)
        step = 0

        def update(truth, guess, feats):
            for f in feats:
                row = weights.setdefault(f, {})
                for tag, delta in ((truth, 1.0), (guess, -1.0)):
                    key = (f, tag)
                    w = row.get(tag, 0.0)
                    totals[key] += (step - stamps[key]) * w
                    stamps[key] = step
                    row[tag] = w + delta

        rng = random.Random(seed)
        order = list(range(len(corpus)))
        for _ in range(epochs):
            rng.shuffle(order)
            for idx in order:
                tokens, gold = corpus[idx]
                words = [_START[1], _START[0], *tokens, _END[0], _END[1]]
                prev, prev2 = _START
                for i, truth in enumerate(gold):
                    feats = _features(i + 2, words, prev, prev2)
                    guess = model._predict(feats)
                    step += 1
                    if guess != truth:
                        update(truth, guess, feats)
                    prev2, prev = prev, guess
        for f, row in weights.items():
            for tag in list(row):
                key = (f, tag)
                total = totals[key] + (step - stamps[key]) * row[tag]
                avg = round(total / step, 6)
                if avg:
                    row[tag] = avg
                else:
                    del row[tag]
        model.weights = {f: row for f, row in weights.items() if row}
        model.metadata = {"corpus": corpus_id, "epochs": epochs, "seed": seed,
                          "sentences": len(corpus)}
        if dev:
            model.metadata["dev_accuracy"] = model.evaluate(dev)
        return model

    def evaluate(self, corpus):
        correct = total = 0
        for tokens, gold in corpus:
            pred = self.tag(tokens)
            correct += sum(p == g for p, g in zip(pred, gold))
            total += len(gold)
        return correct / total if total else 0.0

    def to_dict(self):
        return {
            "format": "transdir-perceptron-tagger",
            "version": self.FORMAT_VERSION,
            "tags": list(self.tags),
            "metadata": self.metadata,
            "weights": {f: dict(sorted(row.items())) for f, row in sorted(self.weights.items())},
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False),
                              encoding="utf-8")

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "transdir-perceptron-tagger":
            raise DataError("not a tagger model file")
        if d.get("version") != cls.FORMAT_VERSION:
            raise DataError(f"unsupported tagger model version {d.get('version')}")
        if not d.get("tags"):
            raise DataError("tagger model has an empty tag inventory")
        return cls(weights=d["weights"], tags=d["tags"], metadata=d.get("metadata"))

    @classmethod
    def load(cls, path):
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed tagger model ({exc.msg})") from None
        return cls.from_dict(d)


def tag_aligned(sentences, pair, tagger):
    """Tokenize and tag derived English sentences, skipping empty ones."""
    out = []
    for s in sentences:
        tokens = tokenize(s.english_text)
        if not tokens:
            continue
        out.append(TaggedSentence(tuple(tokens), tuple(tagger.tag(tokens)),
                                  s.original_language, str(pair)))
    return out

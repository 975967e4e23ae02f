"""Sparse feature vectors for chunks: function words and POS n-grams."""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .chunking import DirectionLabel
from .errors import ConfigError, DataError

DEFAULT_BASIS = 2000


class FeatureKind(enum.Enum):
    FW = "FW"
    POS2 = "POS2"
    POS3 = "POS3"
    FW_POS2 = "FW_POS2"
    FW_POS3 = "FW_POS3"

    @property
    def uses_fw(self):
        return self.value.startswith("FW")

    @property
    def ngram_order(self):
        """2 or 3 for kinds with a POS component, else None."""
        return int(self.value[-1]) if self.value[-1].isdigit() else None


@dataclass(frozen=True)
class FunctionWordList:
    words: tuple[str, ...]
    source: str = ""

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise ConfigError(f"function word list {self.source} has duplicate entries")

    def __len__(self):
        return len(self.words)

    @cached_property
    def index(self):
        return {w: i for i, w in enumerate(self.words)}

    @property
    def digest(self):
        return hashlib.sha256("\n".join(self.words).encode("utf-8")).hexdigest()[:16]

    @classmethod
    def load(cls, path):
        words = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            w = line.strip().lower()
            if w and not w.startswith("#") and w not in words:
                words.append(w)
        return cls(tuple(words), str(path))

    @classmethod
    def default(cls):
        text = resources.files("transdir").joinpath("data/function_words_en.txt").read_text("utf-8")
        return cls(tuple(w for w in text.split("\n") if w), "builtin:function_words_en.txt")


@dataclass(frozen=True)
class NgramVocab:
    n: int
    entries: tuple[tuple[str, ...], ...]
    k: int

    def __len__(self):
        return len(self.entries)

    @cached_property
    def index(self):
        return {g: i for i, g in enumerate(self.entries)}


@dataclass(frozen=True)
class FeatureVector:
    dimension: int
    indices: tuple[int, ...]
    values: tuple[float, ...]
    label: DirectionLabel | None = None

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise DataError("indices and values differ in length")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise DataError("sparse indices must be strictly increasing")
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= self.dimension):
            raise DataError("sparse index out of bounds")
        if not all(math.isfinite(v) for v in self.values):
            raise DataError("feature values must be finite")

    def as_dict(self):
        return dict(zip(self.indices, self.values))

    def dense(self):
        x = np.zeros(self.dimension)
        x[list(self.indices)] = self.values
        return x

    @classmethod
    def from_dict(cls, dimension, entries, label=None):
        items = sorted((i, float(v)) for i, v in entries.items() if v != 0)
        return cls(dimension, tuple(i for i, _ in items), tuple(v for _, v in items), label)


@dataclass(frozen=True)
class FeatureSpec:
    kind: FeatureKind
    fw_list: FunctionWordList | None = None
    vocab: NgramVocab | None = None
    basis: int = DEFAULT_BASIS
    normalize_pos: bool = False

    def __post_init__(self):
        if self.kind.uses_fw and self.fw_list is None:
            raise ConfigError(f"{self.kind.value} needs a function word list")
        if self.kind.ngram_order:
            if self.vocab is None:
                raise ConfigError(f"{self.kind.value} needs an n-gram vocabulary")
            if self.vocab.n != self.kind.ngram_order:
                raise ConfigError(f"{self.kind.value} needs {self.kind.ngram_order}-grams, "
                                  f"got {self.vocab.n}-grams")

    @property
    def dimension(self):
        d = len(self.fw_list) if self.kind.uses_fw else 0
        return d + (len(self.vocab) if self.kind.ngram_order else 0)

    def manifest(self):
        return {
            "kind": self.kind.value,
            "basis": self.basis,
            "normalize_pos": self.normalize_pos,
            "dimension": self.dimension,
            "k": self.vocab.k if self.vocab else None,
            "fw_list": self.fw_list.source if self.fw_list else None,
            "fw_list_hash": self.fw_list.digest if self.fw_list else None,
            "fw_count": len(self.fw_list) if self.fw_list else 0,
            "vocab": [list(e) for e in self.vocab.entries] if self.vocab else [],
        }

    @property
    def digest(self):
        blob = json.dumps(self.manifest(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    def vectorize(self, chunk):
        if self.kind is FeatureKind.FW:
            return fw_vector(chunk, self.fw_list, self.basis)
        pos = pos_ngram_vector(chunk, self.vocab, self)
        if not self.kind.uses_fw:
            return pos
        return combine(fw_vector(chunk, self.fw_list, self.basis), pos)


def fw_vector(chunk, fw_list, basis=DEFAULT_BASIS):
    """Function-word counts scaled to a ``basis``-token chunk (count * basis / n)."""
    if chunk.n < 1:
        raise DataError("cannot vectorize an empty chunk")
    counts = chunk.word_counts
    scale = basis / chunk.n
    index = fw_list.index
    entries = {index[w]: c * scale for w, c in counts.items() if w in index}
    return FeatureVector.from_dict(len(fw_list), entries, chunk.label)


def top_k_ngrams(chunks, n, k):
    """The k most frequent tag n-grams over ``chunks``; ties sorted lexicographically."""
    if k <= 0:
        raise ConfigError("k must be positive")
    if n not in (2, 3):
        raise ConfigError("only POS bigrams and trigrams are supported")
    if not chunks:
        raise ConfigError("cannot build a vocabulary from zero chunks")
    total = {}
    for chunk in chunks:
        for gram, c in chunk.ngram_counts(n).items():
            total[gram] = total.get(gram, 0) + c
    ranked = sorted(total.items(), key=lambda kv: (-kv[1], kv[0]))
    return NgramVocab(n, tuple(g for g, _ in ranked[:k]), k)


def pos_ngram_vector(chunk, vocab, spec=None):
    """Raw occurrence counts of each vocabulary n-gram in the chunk.

    With ``spec.normalize_pos`` the counts get the same basis/n scaling as
    function words.
    """
    counts = chunk.ngram_counts(vocab.n)
    scale = 1.0
    if spec is not None and spec.normalize_pos:
        scale = spec.basis / chunk.n
    index = vocab.index
    entries = {index[g]: c * scale for g, c in counts.items() if g in index}
    return FeatureVector.from_dict(len(vocab), entries, chunk.label)


def combine(fw_vec, pos_vec):
    """Concatenate a function-word vector and a POS vector of the same chunk."""
    if fw_vec.label != pos_vec.label:
        raise DataError("cannot combine vectors with different labels")
    off = fw_vec.dimension
    return FeatureVector(
        fw_vec.dimension + pos_vec.dimension,
        fw_vec.indices + tuple(i + off for i in pos_vec.indices),
        fw_vec.values + pos_vec.values,
        fw_vec.label,
    )


class Featurizer:
    """Fit-then-transform wrapper, so cross-validation can refit vocabularies per fold."""

    def __init__(self, kind, fw_list=None, k=400, basis=DEFAULT_BASIS, normalize_pos=False):
        self.kind = FeatureKind(kind)
        if self.kind.uses_fw and fw_list is None:
            fw_list = FunctionWordList.default()
        self.fw_list = fw_list
        self.k = k
        self.basis = basis
        self.normalize_pos = normalize_pos
        self.spec = None

    def fit(self, chunks):
        vocab = None
        if self.kind.ngram_order:
            vocab = top_k_ngrams(chunks, self.kind.ngram_order, self.k)
        self.spec = FeatureSpec(self.kind, self.fw_list if self.kind.uses_fw else None,
                                vocab, self.basis, self.normalize_pos)
        return self

    def transform(self, chunks):
        if self.spec is None:
            raise ConfigError("featurizer used before fit")
        return [self.spec.vectorize(c) for c in chunks]

    def fit_transform(self, chunks):
        return self.fit(chunks).transform(chunks)

    def matrix(self, chunks):
        """Dense ``(X, y)`` for ``chunks``; same values as ``to_matrix(transform(chunks))``."""
        if self.spec is None:
            raise ConfigError("featurizer used before fit")
        spec = self.spec
        X = np.zeros((len(chunks), spec.dimension))
        y = np.fromiter((int(c.label) for c in chunks), dtype=int, count=len(chunks))
        off = 0
        if spec.kind.uses_fw:
            index = spec.fw_list.index
            for row, c in enumerate(chunks):
                if c.n < 1:
                    raise DataError("cannot vectorize an empty chunk")
                scale = spec.basis / c.n
                for w, n in c.word_counts.items():
                    if w in index:
                        X[row, index[w]] = n * scale
            off = len(spec.fw_list)
        if spec.kind.ngram_order:
            index = spec.vocab.index
            for row, c in enumerate(chunks):
                scale = spec.basis / c.n if spec.normalize_pos else 1.0
                for g, n in c.ngram_counts(spec.vocab.n).items():
                    if g in index:
                        X[row, off + index[g]] = n * scale
        return X, y


def to_matrix(vectors):
    """Dense (X, y) arrays from a list of labelled vectors of one dimension."""
    if not vectors:
        raise DataError("empty dataset")
    d = vectors[0].dimension
    X = np.zeros((len(vectors), d))
    y = np.zeros(len(vectors), dtype=int)
    for row, v in enumerate(vectors):
        if v.dimension != d:
            raise DataError(f"vector {row} has dimension {v.dimension}, expected {d}")
        if v.label is None:
            raise DataError(f"vector {row} is unlabelled")
        if v.indices:
            X[row, list(v.indices)] = v.values
        y[row] = int(v.label)
    return X, y


def manifest_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def write_dataset(vectors, path, spec=None):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for v in vectors:
            rec = {"label": int(v.label), "dim": v.dimension,
                   "x": [[i, val] for i, val in zip(v.indices, v.values)]}
            f.write(json.dumps(rec) + "\n")
    if spec is not None:
        manifest_path(path).write_text(json.dumps(spec.manifest(), indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return path


def read_dataset(path):
    vectors = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                label = DirectionLabel(int(rec["label"]))
                entries = rec["x"]
                vectors.append(FeatureVector(int(rec["dim"]), tuple(int(i) for i, _ in entries),
                                             tuple(float(v) for _, v in entries), label))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: malformed JSON ({exc.msg})", line=lineno) from None
            except (KeyError, TypeError, ValueError, DataError) as exc:
                raise DataError(f"{path}: bad dataset record ({exc})", line=lineno) from None
    return vectors

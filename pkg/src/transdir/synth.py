"""Synthetic UN-layout corpora with a known translationese signal.

English sentences are sampled from an HMM over POS tags. Original text uses
the base transition matrix T0; translated text uses (1 - d) * T0 + d * T1
for divergence d. Closed-class tags emit function words, and their emission
distributions are shifted by the same divergence, so function-word,
bigram and trigram features all carry signal.

Two optional nuisances make the data less clean: ``doc_variation`` mixes a
random per-document transition matrix into every document (author style)
and ``pair_variation`` gives each language pair its own flavour of T1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .corpus import ENGLISH, LanguagePair
from .errors import ConfigError
from .features import FunctionWordList
from .seeding import derive_rng
from .text import TaggedSentence, write_pretagged, write_tsv_corpus

PERIOD = "."

CLOSED_CLASS = {
    "DT": ("the", "a", "an", "this", "that", "these", "those", "every"),
    "IN": ("of", "in", "to", "for", "on", "with", "by", "at", "from", "into", "under", "about"),
    "CC": ("and", "or", "but", "nor"),
    "PRP": ("it", "they", "we", "he", "she", "you"),
    "MD": ("will", "would", "can", "should", "may", "must", "might", "could"),
}

OPEN_CLASS = {
    "NN": ("tion", "ment", "ity", "ness"),
    "NNS": ("tions", "ments", "ities"),
    "JJ": ("ous", "al", "ive", "ic"),
    "VB": ("ize", "ate", "ify"),
    "VBZ": ("izes", "ates", "ifies"),
    "VBN": ("ized", "ated", "ified"),
    "RB": ("ously", "ally", "ively"),
    "CD": (),
}

DEFAULT_TAGS = ("CC", "CD", "DT", "IN", "JJ", "MD", "NN", "NNS", "PRP", "RB", "VB", "VBN", "VBZ")
_SYLLABLES = ("ba", "ko", "ri", "mu", "ten", "sa", "lo", "vi", "der", "pa", "ne", "gu", "mor", "fi",
              "ta", "len", "do", "ca", "ser", "pi")


def _stochastic(rng, rows, cols, alpha):
    m = rng.dirichlet(np.full(cols, alpha), size=rows)
    return m / m.sum(axis=1, keepdims=True)


def _open_vocab(tag, size, rng, taken):
    words = []
    suffixes = OPEN_CLASS[tag]
    while len(words) < size:
        if tag == "CD":
            w = str(int(rng.integers(2, 100000)))
            if rng.random() < 0.3 and len(w) > 3:
                w = f"{w[:-3]},{w[-3:]}"
        else:
            stem = "".join(rng.choice(_SYLLABLES, size=int(rng.integers(1, 3))))
            w = stem + suffixes[int(rng.integers(len(suffixes)))]
        if w not in taken:
            taken.add(w)
            words.append(w)
    return tuple(words)


@dataclass
class SynthConfig:
    divergence: float = 0.4
    docs_per_class: int = 10
    sentences_per_doc: int = 20
    mean_sentence_length: int = 25
    pairs: tuple[str, ...] = ("fr-en",)
    seed: int = 0
    tags: tuple[str, ...] = DEFAULT_TAGS
    # (len(tags) + 1) x len(tags); the last row is the sentence-start state
    base_transitions: np.ndarray | None = None
    perturbation: np.ndarray | None = None
    # tag -> (words, original-class probabilities, perturbation probabilities)
    emissions: dict = field(default_factory=dict)
    doc_variation: float = 0.0
    pair_variation: float = 0.0
    structure_seed: int = 20170918
    open_vocab_size: int = 150

    def __post_init__(self):
        if not 0.0 <= self.divergence <= 1.0:
            raise ConfigError("divergence must lie in [0, 1]")
        for name in ("doc_variation", "pair_variation"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.docs_per_class < 0 or self.sentences_per_doc < 0:
            raise ConfigError("document and sentence counts must be >= 0")
        if self.mean_sentence_length < 2:
            raise ConfigError("mean sentence length must be >= 2 (one word plus the period)")
        self.pairs = tuple(str(LanguagePair.parse(p)) for p in self.pairs)
        self.tags = tuple(self.tags)
        rng = np.random.default_rng(self.structure_seed)
        s = len(self.tags)
        if self.base_transitions is None:
            self.base_transitions = _stochastic(rng, s + 1, s, 1.0)
        if self.perturbation is None:
            self.perturbation = _stochastic(rng, s + 1, s, 1.0)
        self.base_transitions = np.asarray(self.base_transitions, dtype=float)
        self.perturbation = np.asarray(self.perturbation, dtype=float)
        if not self.emissions:
            self.emissions = self._default_emissions(rng)
        self._validate()

    def _default_emissions(self, rng):
        fw = set(FunctionWordList.default().words)
        taken = set(fw)
        out = {}
        for tag in self.tags:
            if tag in CLOSED_CLASS:
                words = CLOSED_CLASS[tag]
                base = rng.dirichlet(np.full(len(words), 2.0))
                pert = rng.dirichlet(np.full(len(words), 0.5))
                out[tag] = (words, base, pert)
            elif tag in OPEN_CLASS:
                words = _open_vocab(tag, self.open_vocab_size, rng, taken)
                zipf = 1.0 / np.arange(1, len(words) + 1)
                p = zipf / zipf.sum()
                out[tag] = (words, p, p)
            else:
                raise ConfigError(f"no default emissions for tag {tag!r}")
        return out

    def _validate(self):
        s = len(self.tags)
        for name in ("base_transitions", "perturbation"):
            m = getattr(self, name)
            if m.shape != (s + 1, s):
                raise ConfigError(f"{name} must have shape {(s + 1, s)}, got {m.shape}")
            if np.any(m < 0) or not np.allclose(m.sum(axis=1), 1.0, atol=1e-9, rtol=0):
                raise ConfigError(f"{name} rows must be probability distributions")
        for tag in self.tags:
            if tag not in self.emissions:
                raise ConfigError(f"missing emissions for tag {tag!r}")
            words, p0, p1 = self.emissions[tag]
            for p in (p0, p1):
                p = np.asarray(p, dtype=float)
                if len(p) != len(words) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
                    raise ConfigError(f"bad emission distribution for tag {tag!r}")

    def translated_transitions(self, pair=None):
        t1 = self.perturbation
        if pair is not None and self.pair_variation > 0:
            s = len(self.tags)
            own = _stochastic(derive_rng(self.structure_seed, "pair", pair), s + 1, s, 1.0)
            t1 = (1 - self.pair_variation) * t1 + self.pair_variation * own
        return (1 - self.divergence) * self.base_transitions + self.divergence * t1

    def emission_probs(self, tag, translated):
        words, p0, p1 = self.emissions[tag]
        p0 = np.asarray(p0, dtype=float)
        if not translated:
            return p0
        return (1 - self.divergence) * p0 + self.divergence * np.asarray(p1, dtype=float)

    def to_dict(self):
        return {
            "divergence": self.divergence,
            "docs_per_class": self.docs_per_class,
            "sentences_per_doc": self.sentences_per_doc,
            "mean_sentence_length": self.mean_sentence_length,
            "pairs": list(self.pairs),
            "seed": self.seed,
            "tags": list(self.tags),
            "base_transitions": self.base_transitions.tolist(),
            "perturbation": self.perturbation.tolist(),
            "emissions": {t: [list(w), list(map(float, p0)), list(map(float, p1))]
                          for t, (w, p0, p1) in sorted(self.emissions.items())},
            "doc_variation": self.doc_variation,
            "pair_variation": self.pair_variation,
            "structure_seed": self.structure_seed,
            "open_vocab_size": self.open_vocab_size,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown synth config keys: {sorted(unknown)}")
        if "emissions" in d:
            d["emissions"] = {t: (tuple(w), np.asarray(p0, float), np.asarray(p1, float))
                              for t, (w, p0, p1) in d["emissions"].items()}
        for key in ("pairs", "tags"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _sample_lengths(rng, cfg, n):
    # content tokens; the closing period is added on top
    return 1 + rng.poisson(cfg.mean_sentence_length - 2, size=n)


def _sample_tag_paths(rng, trans, lengths):
    """Tag index paths for a batch of sentences, each starting from the start state."""
    n = len(lengths)
    s = trans.shape[1]
    cum = np.cumsum(trans, axis=1)
    cum[:, -1] = 1.0
    width = int(lengths.max()) if n else 0
    paths = np.zeros((n, width), dtype=int)
    prev = np.full(n, s)
    for t in range(width):
        u = rng.random(n)
        cur = np.minimum((cum[prev] < u[:, None]).sum(axis=1), s - 1)
        paths[:, t] = cur
        prev = cur
    return paths


@dataclass
class SynthDocument:
    pair: str
    origin: str
    relative_path: str
    sentences: list[tuple[tuple[str, ...], tuple[str, ...]]]

    @property
    def translated(self):
        return self.origin != ENGLISH


def _document(cfg, pair, translated, j):
    foreign = LanguagePair.parse(pair).foreign
    rng = derive_rng(cfg.seed, "doc", pair, int(translated), j)
    trans = cfg.translated_transitions(pair) if translated else cfg.base_transitions
    if cfg.doc_variation > 0:
        s = len(cfg.tags)
        style = _stochastic(derive_rng(cfg.seed, "style", pair, int(translated), j), s + 1, s, 1.0)
        trans = (1 - cfg.doc_variation) * trans + cfg.doc_variation * style
    lengths = _sample_lengths(rng, cfg, cfg.sentences_per_doc)
    paths = _sample_tag_paths(rng, trans, lengths)
    emit = {}
    for tag in cfg.tags:
        p = cfg.emission_probs(tag, translated)
        emit[tag] = (cfg.emissions[tag][0], np.cumsum(p))
    sentences = []
    for row, length in zip(paths, lengths):
        tags = [cfg.tags[i] for i in row[:length]]
        words = []
        for tag, u in zip(tags, rng.random(len(tags))):
            vocab, cum = emit[tag]
            words.append(vocab[min(int(np.searchsorted(cum, u, side="right")), len(vocab) - 1)])
        words[0] = words[0][0].upper() + words[0][1:]
        sentences.append((tuple(words) + (PERIOD,), tuple(tags) + (PERIOD,)))
    kind = "t" if translated else "o"
    rel = f"synth/{foreign}/{kind}/{j:04d}.xml"
    return SynthDocument(pair, foreign if translated else ENGLISH, rel, sentences)


def sample_documents(cfg):
    """All documents of the corpus, ordered as derivation will emit them."""
    docs = []
    for pair in cfg.pairs:
        for translated in (False, True):
            for j in range(cfg.docs_per_class):
                docs.append(_document(cfg, pair, translated, j))
    docs.sort(key=lambda d: (d.pair, d.relative_path))
    return docs


def sample_tagged(cfg):
    """Gold tagged sentences per pair, without touching the filesystem."""
    out = {p: [] for p in cfg.pairs}
    for doc in sample_documents(cfg):
        out[doc.pair].extend(TaggedSentence(toks, tags, doc.origin, doc.pair)
                             for toks, tags in doc.sentences)
    return out


@dataclass
class GroundTruth:
    # foreign-side relative path ("fr/synth/...") -> original language
    documents: dict[str, str]
    sentences: dict[str, int]

    def to_dict(self):
        return {"documents": dict(sorted(self.documents.items())),
                "sentences": dict(sorted(self.sentences.items()))}


def _foreign_text(foreign, tokens):
    return " ".join(t[::-1] if t != PERIOD else t for t in tokens)


def _doc_xml(lang, source, sentences):
    lines = [f"<doc lang={quoteattr(lang)} source_language={quoteattr(source)}>"]
    for i, text in enumerate(sentences, 1):
        lines.append(f'  <s id="{i}" lang={quoteattr(lang)}>{escape(text)}</s>')
    lines.append("</doc>")
    return "\n".join(lines) + "\n"


def generate_corpus(cfg, out_root, train_sentences=200):
    """Write a UN-layout tree plus gold annotations under ``out_root``.

    Besides ``{lang}/`` and ``{xx}_en/`` the root receives
    ``ground_truth.json``, ``gold/{pair}.tagged.jsonl`` (gold tags in
    derivation order) and ``gold/train.tsv`` for tagger training.
    """
    out_root = Path(out_root)
    docs = sample_documents(cfg)
    truth = GroundTruth({}, {})
    gold = {p: [] for p in cfg.pairs}
    train = []
    for doc in docs:
        pair = LanguagePair.parse(doc.pair)
        texts = [" ".join(toks[:-1]) + PERIOD for toks, _ in doc.sentences]
        foreign_texts = [_foreign_text(pair.foreign, toks) for toks, _ in doc.sentences]
        for lang, body in ((pair.foreign, _doc_xml(pair.foreign, doc.origin, foreign_texts)),
                           (ENGLISH, _doc_xml(ENGLISH, doc.origin, texts))):
            path = out_root / lang / doc.relative_path
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(body, encoding="utf-8")
        link = out_root / pair.link_dir / Path(doc.relative_path).with_suffix(".lnk")
        link.parent.mkdir(parents=True, exist_ok=True)
        rows = [f'<linkGrp src="{pair.foreign}/{doc.relative_path}" trg="en/{doc.relative_path}">']
        rows += [f'  <link src="{i}" trg="{i}"/>' for i in range(1, len(doc.sentences) + 1)]
        rows.append("</linkGrp>")
        link.write_text("\n".join(rows) + "\n", encoding="utf-8")
        truth.documents[f"{pair.foreign}/{doc.relative_path}"] = doc.origin
        truth.sentences[str(pair)] = truth.sentences.get(str(pair), 0) + len(doc.sentences)
        gold[doc.pair].extend(TaggedSentence(t, g, doc.origin, doc.pair) for t, g in doc.sentences)
    for p in cfg.pairs:
        train.extend((s.tokens, s.tags) for s in gold[p][:train_sentences])
    (out_root / "gold").mkdir(parents=True, exist_ok=True)
    for p, sentences in gold.items():
        write_pretagged(sentences, out_root / "gold" / f"{p}.tagged.jsonl")
    write_tsv_corpus(train, out_root / "gold" / "train.tsv")
    (out_root / "ground_truth.json").write_text(
        json.dumps(truth.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (out_root / "synth_config.json").write_text(
        json.dumps(cfg.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
    return truth


def _chunk_layout(rng, cfg, n_chunks, size):
    """Restart/valid masks for chunks assembled from whole sentences."""
    starts, valid = [], []
    per = int(math.ceil(size / (cfg.mean_sentence_length - 1))) * 2 + 10
    for _ in range(n_chunks):
        lengths = _sample_lengths(rng, cfg, per)
        while (lengths + 1).sum() < size:
            lengths = np.concatenate([lengths, _sample_lengths(rng, cfg, per)])
        total = np.cumsum(lengths + 1)
        used = lengths[: int(np.searchsorted(total, size)) + 1]
        starts.append(np.concatenate([[0], np.cumsum(used)[:-1]]))
        valid.append(int(used.sum()))
    width = max(valid)
    restart = np.zeros((n_chunks, width), dtype=bool)
    mask = np.zeros((n_chunks, width), dtype=bool)
    for i, (st, v) in enumerate(zip(starts, valid)):
        restart[i, st] = True
        mask[i, :v] = True
    return restart, mask


def oracle_accuracy_bound(cfg, n_chunks=1000, chunk_size=2000, seed=None):
    """Monte-Carlo accuracy of the Bayes-optimal chunk classifier.

    Chunks of both classes are sampled from the base model (nuisance terms
    are ignored) and classified by the sign of the exact log-likelihood
    ratio, ties going to ORIGINAL. No learned classifier can beat this in
    expectation.
    """
    seed = cfg.seed if seed is None else seed
    s = len(cfg.tags)
    t_orig, t_trans = cfg.base_transitions, cfg.translated_transitions()
    with np.errstate(divide="ignore", invalid="ignore"):
        trans_llr = np.log(t_trans) - np.log(t_orig)
    vmax = max(len(cfg.emissions[t][0]) for t in cfg.tags)
    emit_cum = {}
    emit_llr = np.zeros((s, vmax))
    for label in (False, True):
        cum = np.ones((s, vmax))
        for i, tag in enumerate(cfg.tags):
            p = cfg.emission_probs(tag, label)
            c = np.cumsum(p)
            c[-1] = 1.0
            cum[i, : len(p)] = c
        emit_cum[label] = cum
    for i, tag in enumerate(cfg.tags):
        p0, p1 = cfg.emission_probs(tag, False), cfg.emission_probs(tag, True)
        with np.errstate(divide="ignore", invalid="ignore"):
            emit_llr[i, : len(p0)] = np.where((p0 > 0) | (p1 > 0), np.log(p1) - np.log(p0), 0.0)
    half = max(1, n_chunks // 2)
    correct = 0
    for label, trans in ((False, t_orig), (True, t_trans)):
        rng = derive_rng(seed, "oracle")
        restart, mask = _chunk_layout(rng, cfg, half, chunk_size)
        cum = np.cumsum(trans, axis=1)
        cum[:, -1] = 1.0
        llr = np.zeros(half)
        prev = np.full(half, s)
        for t in range(restart.shape[1]):
            prev = np.where(restart[:, t], s, prev)
            cur = np.minimum((cum[prev] < rng.random(half)[:, None]).sum(axis=1), s - 1)
            w = np.minimum((emit_cum[label][cur] < rng.random(half)[:, None]).sum(axis=1), vmax - 1)
            step = trans_llr[prev, cur] + emit_llr[cur, w]
            llr += np.where(mask[:, t], step, 0.0)
            prev = cur
        correct += int(np.sum(llr > 0)) if label else int(np.sum(~(llr > 0)))
    return float(min(1.0, max(0.5, correct / (2 * half))))

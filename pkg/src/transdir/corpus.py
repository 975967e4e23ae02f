"""Derive direction-annotated bilingual corpora from a UN-style tree.

Layout expected under ``root``::

    root/fr/<rel>.xml        foreign documents
    root/en/<rel>.xml        English counterparts (same relative path)
    root/fr_en/<rel>.lnk     sentence links, foreign id -> English id

Derivation always walks the foreign side, because link files map foreign
sentences onto English ones and not the other way round.

Document schema::

    <doc lang="fr" source_language="fr">
      <s id="1" lang="fr">Texte.</s>
    </doc>

Link schema::

    <linkGrp src="fr/a/x.xml" trg="en/a/x.xml">
      <link src="1" trg="1"/>
      <link src="2 3" trg="2"/>      <!-- 2:1, dropped -->
    </linkGrp>

Everything that knows about these schemas lives in :class:`XmlFormat`; an
adapter for another on-disk schema only has to provide ``read_document``
and ``read_links``.
"""

from __future__ import annotations

import enum
import json
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataError

ENGLISH = "en"
_ISO_RE = re.compile(r"^[a-z]{2}$")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True, order=True)
class LanguagePair:
    foreign: str
    english: str = ENGLISH

    def __post_init__(self):
        if not _ISO_RE.match(self.foreign):
            raise ConfigError(f"not a two-letter language code: {self.foreign!r}")
        if self.foreign == ENGLISH:
            raise ConfigError("the foreign side of a pair cannot be English")
        if self.english != ENGLISH:
            raise ConfigError("the second language of a pair must be 'en'")

    def __str__(self):
        return f"{self.foreign}-{self.english}"

    @property
    def link_dir(self):
        return f"{self.foreign}_{self.english}"

    @classmethod
    def parse(cls, text):
        """Accept ``fr``, ``fr-en`` or ``fr_en``."""
        parts = re.split(r"[-_]", text.strip().lower())
        if len(parts) == 1:
            return cls(parts[0])
        if len(parts) == 2 and parts[1] == ENGLISH:
            return cls(parts[0])
        raise ConfigError(f"cannot parse language pair {text!r}")


@dataclass(frozen=True)
class Sentence:
    id: str
    lang: str
    text: str


@dataclass(frozen=True)
class DocumentRecord:
    relative_path: str
    language: str
    declared_source_language: str | None
    sentences: tuple[Sentence, ...]

    def by_id(self):
        return {s.id: s for s in self.sentences}


@dataclass(frozen=True)
class LinkRecord:
    src_doc: str
    trg_doc: str
    links: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]


@dataclass(frozen=True)
class AlignedSentence:
    english_text: str
    foreign_text: str
    original_language: str
    source_doc: str = ""


class RejectCode(enum.Enum):
    # PARSE_ERROR is checked before every other filter: nothing else can be
    # decided about a document that does not parse.
    PARSE_ERROR = "PARSE_ERROR"
    NO_COUNTERPART = "NO_COUNTERPART"
    NO_SOURCE_LANG = "NO_SOURCE_LANG"
    SOURCE_LANG_MISMATCH = "SOURCE_LANG_MISMATCH"
    CONTRADICTORY_SOURCE_LANG = "CONTRADICTORY_SOURCE_LANG"
    SENT_LANG_TAG_MISMATCH = "SENT_LANG_TAG_MISMATCH"
    SENT_NO_LINK = "SENT_NO_LINK"
    NON_ONE_TO_ONE_LINK = "NON_ONE_TO_ONE_LINK"


@dataclass(frozen=True)
class RejectReason:
    code: RejectCode
    path: str
    sentence_id: str | None = None

    def tsv_line(self):
        return f"{self.path}\t{self.sentence_id or ''}\t{self.code.value}"


class ParseFailure:
    """Marker stored in the index in place of a document that failed to parse."""

    def __init__(self, path, message):
        self.path = path
        self.message = message

    def __repr__(self):
        return f"ParseFailure({self.path!r}, {self.message!r})"


class XmlFormat:
    """Reader for the simple XML document and link schemas."""

    doc_suffix = ".xml"
    link_suffix = ".lnk"

    def read_document(self, path, relative_path):
        root = ET.parse(path).getroot()
        language = root.get("lang", "").strip().lower()
        source = (root.get("source_language") or "").strip().lower() or None
        sentences = []
        seen = set()
        for s in root.iter("s"):
            sid = s.get("id")
            if sid is None:
                raise DataError(f"{relative_path}: <s> element without id")
            if sid in seen:
                raise DataError(f"{relative_path}: duplicate sentence id {sid!r}")
            seen.add(sid)
            text = _WS_RE.sub(" ", "".join(s.itertext())).strip()
            sentences.append(Sentence(sid, (s.get("lang") or language).lower(), text))
        return DocumentRecord(relative_path, language, source, tuple(sentences))

    def read_links(self, path):
        root = ET.parse(path).getroot()
        links = []
        for link in root.iter("link"):
            src = tuple((link.get("src") or "").split())
            trg = tuple((link.get("trg") or "").split())
            links.append((src, trg))
        return LinkRecord(root.get("src", ""), root.get("trg", ""), tuple(links))


@dataclass
class IndexEntry:
    relative_path: str
    foreign_doc: DocumentRecord | ParseFailure
    english_doc: DocumentRecord | ParseFailure | None
    link_file: Path | None


@dataclass
class DocumentPair:
    relative_path: str
    foreign: DocumentRecord
    english: DocumentRecord
    link_file: Path
    source_language: str


def _load(fmt, path, rel):
    try:
        return fmt.read_document(path, rel)
    except (ET.ParseError, DataError) as exc:
        return ParseFailure(rel, str(exc))


def scan_pair(root, pair, fmt=None):
    """Index every foreign document with its English mirror and link file.

    Entries come back sorted by relative path. A missing English document or
    link file is recorded as ``None``; unparsable XML becomes a
    :class:`ParseFailure`.
    """
    fmt = fmt or XmlFormat()
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"corpus root {root} does not exist or is not a directory")
    foreign_dir = root / pair.foreign
    if not foreign_dir.is_dir():
        return []
    rels = sorted(
        p.relative_to(foreign_dir).as_posix()
        for p in foreign_dir.rglob("*" + fmt.doc_suffix)
        if p.is_file()
    )
    index = []
    for rel in rels:
        foreign_doc = _load(fmt, foreign_dir / rel, f"{pair.foreign}/{rel}")
        en_path = root / ENGLISH / rel
        english_doc = _load(fmt, en_path, f"{ENGLISH}/{rel}") if en_path.is_file() else None
        link_path = (root / pair.link_dir / rel).with_suffix(fmt.link_suffix)
        index.append(IndexEntry(rel, foreign_doc, english_doc,
                                link_path if link_path.is_file() else None))
    return index


def filter_documents(index, pair):
    """Split the index into valid document pairs and document-level rejects."""
    valid, rejects = [], []
    allowed = {pair.foreign, ENGLISH}
    for entry in index:
        subject = f"{pair.foreign}/{entry.relative_path}"
        if isinstance(entry.foreign_doc, ParseFailure) or isinstance(entry.english_doc, ParseFailure):
            rejects.append(RejectReason(RejectCode.PARSE_ERROR, subject))
            continue
        if entry.english_doc is None or entry.link_file is None:
            rejects.append(RejectReason(RejectCode.NO_COUNTERPART, subject))
            continue
        declared = [d for d in (entry.foreign_doc.declared_source_language,
                                entry.english_doc.declared_source_language) if d]
        if not declared:
            rejects.append(RejectReason(RejectCode.NO_SOURCE_LANG, subject))
        elif any(d not in allowed for d in declared):
            rejects.append(RejectReason(RejectCode.SOURCE_LANG_MISMATCH, subject))
        elif len(set(declared)) > 1:
            rejects.append(RejectReason(RejectCode.CONTRADICTORY_SOURCE_LANG, subject))
        else:
            valid.append(DocumentPair(entry.relative_path, entry.foreign_doc,
                                      entry.english_doc, entry.link_file, declared[0]))
    return valid, rejects


def resolve_directions(doc_pair, link):
    """Turn the 1:1 links of one document pair into aligned sentences.

    Accounting is done per foreign sentence: each one is either emitted or
    rejected with exactly one code. Links that point at ids missing from
    either document are rejected as ``SENT_NO_LINK`` against the missing side.
    """
    foreign, english = doc_pair.foreign, doc_pair.english
    f_path, e_path = foreign.relative_path, english.relative_path
    f_ids, e_ids = foreign.by_id(), english.by_id()

    use = Counter(sid for src, _ in link.links for sid in src)
    link_of = {}
    rejects = []
    for src, trg in link.links:
        for sid in src:
            link_of.setdefault(sid, (src, trg))
        for sid in src:
            if sid not in f_ids:
                rejects.append(RejectReason(RejectCode.SENT_NO_LINK, f_path, sid))
        for tid in trg:
            if tid not in e_ids:
                rejects.append(RejectReason(RejectCode.SENT_NO_LINK, e_path, tid))

    trg_use = Counter(tid for _, trg in link.links for tid in trg)
    out = []
    for s in foreign.sentences:
        if s.lang != foreign.language:
            rejects.append(RejectReason(RejectCode.SENT_LANG_TAG_MISMATCH, f_path, s.id))
            continue
        if s.id not in link_of:
            rejects.append(RejectReason(RejectCode.SENT_NO_LINK, f_path, s.id))
            continue
        src, trg = link_of[s.id]
        if len(src) != 1 or len(trg) != 1 or use[s.id] > 1 or trg_use[trg[0]] > 1:
            rejects.append(RejectReason(RejectCode.NON_ONE_TO_ONE_LINK, f_path, s.id))
            continue
        target = e_ids.get(trg[0])
        if target is None:
            # already logged against the English side above
            continue
        if target.lang != english.language:
            rejects.append(RejectReason(RejectCode.SENT_LANG_TAG_MISMATCH, e_path, target.id))
            continue
        out.append(AlignedSentence(target.text, s.text, doc_pair.source_language, f_path))
    return out, rejects


def output_paths(out_dir, pair):
    out_dir = Path(out_dir)
    return (
        out_dir / f"{pair}.src.en.txt",
        out_dir / f"{pair}.trg.{pair.foreign}.txt",
        out_dir / f"{pair}.origin.txt",
    )


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")


def emit_parallel_files(sentences, out_dir, pair):
    """Write the English, foreign and origin-label files; line i is sentence i."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    en_path, fo_path, lab_path = output_paths(out_dir, pair)
    _write_lines(en_path, (s.english_text for s in sentences))
    _write_lines(fo_path, (s.foreign_text for s in sentences))
    _write_lines(lab_path, (s.original_language for s in sentences))
    return en_path, fo_path, lab_path


def _read_lines(path):
    text = Path(path).read_text(encoding="utf-8")
    return text.split("\n")[:-1] if text else []


def read_parallel_files(out_dir, pair):
    en_path, fo_path, lab_path = output_paths(out_dir, pair)
    en, fo, lab = _read_lines(en_path), _read_lines(fo_path), _read_lines(lab_path)
    if not len(en) == len(fo) == len(lab):
        raise DataError(f"parallel files for {pair} have unequal line counts "
                        f"({len(en)}, {len(fo)}, {len(lab)})")
    for i, code in enumerate(lab, 1):
        if code not in (pair.foreign, ENGLISH):
            raise DataError(f"{lab_path}: unexpected origin label {code!r}", line=i)
    return [AlignedSentence(e, f, o) for e, f, o in zip(en, fo, lab)]


@dataclass
class DerivationStats:
    initial_docs: int = 0
    valid_docs_foreign_original: int = 0
    valid_docs_english_original: int = 0
    valid_sentences_total: int = 0
    valid_sentences_foreign_original: int = 0
    valid_sentences_english_original: int = 0
    rejects_by_reason: dict[str, int] = field(default_factory=dict)

    def to_dict(self):
        d = {
            "initial_docs": self.initial_docs,
            "valid_docs_foreign_original": self.valid_docs_foreign_original,
            "valid_docs_english_original": self.valid_docs_english_original,
            "valid_sentences_total": self.valid_sentences_total,
            "valid_sentences_foreign_original": self.valid_sentences_foreign_original,
            "valid_sentences_english_original": self.valid_sentences_english_original,
            "rejects_by_reason": dict(sorted(self.rejects_by_reason.items())),
        }
        init = self.initial_docs
        total = self.valid_sentences_total
        d["fractions"] = {
            "valid_docs_foreign_original": _frac(self.valid_docs_foreign_original, init),
            "valid_docs_english_original": _frac(self.valid_docs_english_original, init),
            "valid_sentences_foreign_original": _frac(self.valid_sentences_foreign_original, total),
            "valid_sentences_english_original": _frac(self.valid_sentences_english_original, total),
        }
        return d


def _frac(a, b):
    return a / b if b else 0.0


def derivation_stats(initial_docs, valid_docs, sentences, rejects, pair):
    stats = DerivationStats(initial_docs=initial_docs)
    for doc in valid_docs:
        if doc.source_language == ENGLISH:
            stats.valid_docs_english_original += 1
        else:
            stats.valid_docs_foreign_original += 1
    for s in sentences:
        if s.original_language == ENGLISH:
            stats.valid_sentences_english_original += 1
        else:
            stats.valid_sentences_foreign_original += 1
    stats.valid_sentences_total = len(sentences)
    stats.rejects_by_reason = dict(Counter(r.code.value for r in rejects))
    return stats


@dataclass
class DerivationResult:
    pair: LanguagePair
    sentences: list[AlignedSentence]
    valid_docs: list[DocumentPair]
    rejects: list[RejectReason]
    stats: DerivationStats


def derive_pair(root, pair, fmt=None):
    """Run scan, document filters and sentence resolution for one pair."""
    fmt = fmt or XmlFormat()
    index = scan_pair(root, pair, fmt)
    valid_docs, rejects = filter_documents(index, pair)
    sentences, kept_docs = [], []
    for doc in valid_docs:
        try:
            link = fmt.read_links(doc.link_file)
        except ET.ParseError:
            rejects.append(RejectReason(RejectCode.PARSE_ERROR, f"{pair.foreign}/{doc.relative_path}"))
            continue
        kept, dropped = resolve_directions(doc, link)
        kept_docs.append(doc)
        sentences.extend(kept)
        rejects.extend(dropped)
    valid_docs = kept_docs
    stats = derivation_stats(len(index), valid_docs, sentences, rejects, pair)
    return DerivationResult(pair, sentences, valid_docs, rejects, stats)


def write_derivation(result, out_dir):
    """Write the triple files, ``.stats.json`` and ``.rejects.tsv``."""
    out_dir = Path(out_dir)
    paths = list(emit_parallel_files(result.sentences, out_dir, result.pair))
    stats_path = out_dir / f"{result.pair}.stats.json"
    stats_path.write_text(json.dumps(result.stats.to_dict(), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
    rejects_path = out_dir / f"{result.pair}.rejects.tsv"
    _write_lines(rejects_path, (r.tsv_line() for r in result.rejects))
    return paths + [stats_path, rejects_path]

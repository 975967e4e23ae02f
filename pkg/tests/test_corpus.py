import pytest

from transdir.corpus import (
    AlignedSentence,
    DocumentPair,
    DocumentRecord,
    LanguagePair,
    LinkRecord,
    RejectCode,
    Sentence,
    derivation_stats,
    derive_pair,
    emit_parallel_files,
    filter_documents,
    read_parallel_files,
    resolve_directions,
    scan_pair,
    write_derivation,
)
from transdir.errors import ConfigError

from conftest import doc, links, write

FR = LanguagePair("fr")


def test_language_pair_parsing():
    assert str(LanguagePair.parse("fr_en")) == "fr-en"
    assert LanguagePair.parse("RU-en").foreign == "ru"
    assert LanguagePair.parse("de").link_dir == "de_en"
    for bad in ("en", "fra", "fr-de"):
        with pytest.raises(ConfigError):
            LanguagePair.parse(bad)


def test_scan_single_resolved_entry(tmp_path):
    write(tmp_path / "fr/a/x.xml", doc("fr", [("1", "fr", "Oui.")], "fr"))
    write(tmp_path / "en/a/x.xml", doc("en", [("1", "en", "Yes.")]))
    write(tmp_path / "fr_en/a/x.lnk", links([("1", "1")]))
    index = scan_pair(tmp_path, FR)
    assert len(index) == 1
    entry = index[0]
    assert entry.relative_path == "a/x.xml"
    assert entry.english_doc.relative_path == "en/a/x.xml"
    assert entry.link_file == tmp_path / "fr_en/a/x.lnk"


def test_scan_empty_root(tmp_path):
    assert scan_pair(tmp_path, FR) == []


def test_scan_missing_root_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        scan_pair(tmp_path / "nope", FR)


def test_scan_missing_english(tmp_path):
    write(tmp_path / "fr/a/y.xml", doc("fr", [("1", "fr", "Oui.")], "fr"))
    (entry,) = scan_pair(tmp_path, FR)
    assert entry.english_doc is None and entry.link_file is None


def test_scan_order_is_lexicographic(mini_corpus):
    rels = [e.relative_path for e in scan_pair(mini_corpus, FR)]
    assert rels == sorted(rels) and len(rels) == 6


def test_malformed_xml_becomes_parse_reject(tmp_path):
    write(tmp_path / "fr/a/bad.xml", "<doc lang='fr'><s id='1'>unclosed</doc>")
    write(tmp_path / "en/a/bad.xml", doc("en", [("1", "en", "x")], "fr"))
    write(tmp_path / "fr_en/a/bad.lnk", links([("1", "1")]))
    index = scan_pair(tmp_path, FR)
    valid, rejects = filter_documents(index, FR)
    assert valid == [] and [r.code for r in rejects] == [RejectCode.PARSE_ERROR]


def _entry(tmp_path, fr_source=None, en_source=None):
    write(tmp_path / "fr/d.xml", doc("fr", [("1", "fr", "Un.")], fr_source))
    write(tmp_path / "en/d.xml", doc("en", [("1", "en", "One.")], en_source))
    write(tmp_path / "fr_en/d.lnk", links([("1", "1")]))
    return scan_pair(tmp_path, FR)


@pytest.mark.parametrize("fr_source,en_source,expected", [
    ("fr", None, None),
    (None, "en", None),
    ("fr", "fr", None),
    (None, None, RejectCode.NO_SOURCE_LANG),
    ("de", None, RejectCode.SOURCE_LANG_MISMATCH),
    ("fr", "de", RejectCode.SOURCE_LANG_MISMATCH),
    ("fr", "en", RejectCode.CONTRADICTORY_SOURCE_LANG),
])
def test_document_filters(tmp_path, fr_source, en_source, expected):
    valid, rejects = filter_documents(_entry(tmp_path, fr_source, en_source), FR)
    if expected is None:
        assert len(valid) == 1 and not rejects
        assert valid[0].source_language == (fr_source or en_source)
    else:
        assert not valid and [r.code for r in rejects] == [expected]


def _pair(fr_sents, en_sents, source="fr"):
    return DocumentPair(
        "d.xml",
        DocumentRecord("fr/d.xml", "fr", source, tuple(Sentence(*s) for s in fr_sents)),
        DocumentRecord("en/d.xml", "en", None, tuple(Sentence(*s) for s in en_sents)),
        None, source)


def _links(*pairs):
    return LinkRecord("", "", tuple((tuple(s.split()), tuple(t.split())) for s, t in pairs))


def test_resolve_three_clean_links():
    dp = _pair([(str(i), "fr", f"f{i}") for i in range(1, 4)],
               [(str(i), "en", f"e{i}") for i in range(1, 4)])
    out, rejects = resolve_directions(dp, _links(("1", "1"), ("2", "2"), ("3", "3")))
    assert [s.english_text for s in out] == ["e1", "e2", "e3"]
    assert {s.original_language for s in out} == {"fr"} and not rejects


def test_resolve_language_tag_mismatch():
    dp = _pair([("1", "fr", "f1"), ("2", "en", "f2")], [("1", "en", "e1"), ("2", "en", "e2")])
    out, rejects = resolve_directions(dp, _links(("1", "1"), ("2", "2")))
    assert len(out) == 1
    assert [(r.code, r.sentence_id) for r in rejects] == [(RejectCode.SENT_LANG_TAG_MISMATCH, "2")]


def test_resolve_unlinked_sentence():
    dp = _pair([("1", "fr", "f1"), ("2", "fr", "f2")], [("1", "en", "e1")])
    out, rejects = resolve_directions(dp, _links(("1", "1")))
    assert len(out) == 1
    assert [(r.code, r.sentence_id) for r in rejects] == [(RejectCode.SENT_NO_LINK, "2")]


def test_resolve_non_one_to_one_and_missing_target():
    dp = _pair([("1", "fr", "a"), ("2", "fr", "b"), ("3", "fr", "c")], [("1", "en", "x")])
    out, rejects = resolve_directions(dp, _links(("1 2", "1"), ("3", "9")))
    assert out == []
    codes = sorted((r.code.value, r.path, r.sentence_id) for r in rejects)
    assert codes == [
        ("NON_ONE_TO_ONE_LINK", "fr/d.xml", "1"),
        ("NON_ONE_TO_ONE_LINK", "fr/d.xml", "2"),
        ("SENT_NO_LINK", "en/d.xml", "9"),
    ]


def test_emit_two_sentences_byte_exact(tmp_path):
    sents = [AlignedSentence("Hello.", "Bonjour.", "fr"), AlignedSentence("Bye.", "Salut.", "en")]
    en, fo, lab = emit_parallel_files(sents, tmp_path, FR)
    assert lab.read_bytes() == b"fr\nen\n"
    assert en.read_bytes() == b"Hello.\nBye.\n"
    assert fo.read_bytes() == "Bonjour.\nSalut.\n".encode("utf-8")
    assert (en.name, fo.name, lab.name) == ("fr-en.src.en.txt", "fr-en.trg.fr.txt", "fr-en.origin.txt")


def test_emit_empty(tmp_path):
    paths = emit_parallel_files([], tmp_path, FR)
    assert all(p.read_bytes() == b"" for p in paths)
    assert read_parallel_files(tmp_path, FR) == []


def test_emit_round_trip(tmp_path):
    sents = [AlignedSentence(f"e {i} é", f"f {i} ß", "fr" if i % 3 else "en") for i in range(20)]
    emit_parallel_files(sents, tmp_path, FR)
    back = read_parallel_files(tmp_path, FR)
    assert [(s.english_text, s.foreign_text, s.original_language) for s in back] == \
           [(s.english_text, s.foreign_text, s.original_language) for s in sents]


def test_stats_three_docs(tmp_path):
    write(tmp_path / "fr/1.xml", doc("fr", [("1", "fr", "a")], "fr"))
    write(tmp_path / "en/1.xml", doc("en", [("1", "en", "A")]))
    write(tmp_path / "fr_en/1.lnk", links([("1", "1")]))
    write(tmp_path / "fr/2.xml", doc("fr", [("1", "fr", "b")], "en"))
    write(tmp_path / "en/2.xml", doc("en", [("1", "en", "B")]))
    write(tmp_path / "fr_en/2.lnk", links([("1", "1")]))
    write(tmp_path / "fr/3.xml", doc("fr", [("1", "fr", "c")], "fr"))
    res = derive_pair(tmp_path, FR)
    s = res.stats
    assert (s.valid_docs_foreign_original, s.valid_docs_english_original) == (1, 1)
    assert s.rejects_by_reason == {"NO_COUNTERPART": 1}
    assert s.initial_docs == 3


def test_stats_empty():
    s = derivation_stats(0, [], [], [], FR)
    d = s.to_dict()
    assert all(v == 0 for k, v in d.items() if k not in ("rejects_by_reason", "fractions"))
    assert d["rejects_by_reason"] == {}


def test_partition_and_conservation(mini_corpus):
    res = derive_pair(mini_corpus, FR)
    doc_rejects = {r.path for r in res.rejects if r.sentence_id is None}
    valid = {f"fr/{d.relative_path}" for d in res.valid_docs}
    assert not (doc_rejects & valid)
    assert len(doc_rejects | valid) == res.stats.initial_docs
    # every foreign sentence of a valid document is kept or rejected exactly once
    for d in res.valid_docs:
        ids = [s.id for s in d.foreign.sentences]
        rejected = [r.sentence_id for r in res.rejects if r.path == d.foreign.relative_path]
        kept = [s for s in res.sentences if s.source_doc == d.foreign.relative_path]
        assert len(rejected) + len(kept) == len(ids)
    s = res.stats
    assert s.valid_sentences_total == s.valid_sentences_foreign_original + s.valid_sentences_english_original


def test_derivation_is_deterministic(mini_corpus, tmp_path):
    a = write_derivation(derive_pair(mini_corpus, FR), tmp_path / "a")
    b = write_derivation(derive_pair(mini_corpus, FR), tmp_path / "b")
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]

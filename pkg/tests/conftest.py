import time
from pathlib import Path

import pytest

from transdir.text import TaggedSentence

ACCEPTANCE = {}


def write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def doc(lang, sentences, source=None):
    attr = f' source_language="{source}"' if source else ""
    body = "".join(f'<s id="{sid}" lang="{slang}">{text}</s>\n' for sid, slang, text in sentences)
    return f'<doc lang="{lang}"{attr}>\n{body}</doc>\n'


def links(pairs):
    body = "".join(f'<link src="{s}" trg="{t}"/>\n' for s, t in pairs)
    return f'<linkGrp src="fr" trg="en">\n{body}</linkGrp>\n'


def build_mini_corpus(root):
    """Six fr-en documents: 2 fr-original, 2 en-original, 2 rejected."""
    root = Path(root)
    # a/doc1: source declared on the French side only
    write(root / "fr/a/doc1.xml", doc("fr", [("1", "fr", "Bonjour le monde."), ("2", "fr", "Merci.")], "fr"))
    write(root / "en/a/doc1.xml", doc("en", [("1", "en", "Hello world."), ("2", "en", "Thanks.")]))
    write(root / "fr_en/a/doc1.lnk", links([("1", "1"), ("2", "2")]))
    # a/doc2: source declared on the English side only; sentence 2 is tagged English
    write(root / "fr/a/doc2.xml", doc("fr", [("1", "fr", "Bon matin."), ("2", "en", "Stray line.")]))
    write(root / "en/a/doc2.xml", doc("en", [("1", "en", "Good morning."), ("2", "en", "Stray line.")], "fr"))
    write(root / "fr_en/a/doc2.lnk", links([("1", "1"), ("2", "2")]))
    # b/doc3: English original; French sentence 3 has no link
    write(root / "fr/b/doc3.xml", doc("fr", [("1", "fr", "Nous sommes d'accord."),
                                             ("2", "fr", "La séance est ouverte."),
                                             ("3", "fr", "Note.")], "en"))
    write(root / "en/b/doc3.xml", doc("en", [("1", "en", "We agree."),
                                             ("2", "en", "The session is open.")], "en"))
    write(root / "fr_en/b/doc3.lnk", links([("1", "1"), ("2", "2")]))
    # b/doc4: English original; a 2:1 link is dropped
    write(root / "fr/b/doc4.xml", doc("fr", [("1", "fr", "Il est"), ("2", "fr", "adopté."),
                                             ("3", "fr", "Il en est ainsi décidé.")], "en"))
    write(root / "en/b/doc4.xml", doc("en", [("1", "en", "It is adopted."),
                                             ("2", "en", "It is so decided.")], "en"))
    write(root / "fr_en/b/doc4.lnk", links([("1 2", "1"), ("3", "2")]))
    # c/doc5: no English counterpart
    write(root / "fr/c/doc5.xml", doc("fr", [("1", "fr", "Seul.")], "fr"))
    # c/doc6: no source language anywhere
    write(root / "fr/c/doc6.xml", doc("fr", [("1", "fr", "Rien.")]))
    write(root / "en/c/doc6.xml", doc("en", [("1", "en", "Nothing.")]))
    write(root / "fr_en/c/doc6.lnk", links([("1", "1")]))
    return root


@pytest.fixture
def mini_corpus(tmp_path):
    return build_mini_corpus(tmp_path / "corpus")


def sent(tags, origin="en", pair="fr-en", tokens=None):
    tags = tuple(tags)
    tokens = tuple(tokens) if tokens is not None else tuple(f"w{i}" for i in range(len(tags)))
    return TaggedSentence(tokens, tags, origin, pair)


class Criterion:
    def __init__(self, key, title):
        self.key, self.title = key, title

    def __enter__(self):
        self.start = time.perf_counter()
        ACCEPTANCE[self.key] = ("FAIL", self.title, "")
        return self

    def detail(self, text):
        status, title, _ = ACCEPTANCE[self.key]
        ACCEPTANCE[self.key] = (status, title, text)

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        _, title, text = ACCEPTANCE[self.key]
        status = "PASS" if exc_type is None else "FAIL"
        ACCEPTANCE[self.key] = (status, title, f"{text} [{elapsed:.1f}s]".strip())
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        status, title, text = ACCEPTANCE[key]
        terminalreporter.write_line(f"{status} {key} {title}: {text}")

"""Sentence splitting, tokenization and length filtering of monolingual text.

Raw documents are split into sentences with a small rule-based splitter,
whitespace is collapsed, and every sentence whose token count falls outside
``[min_words, max_words]`` is dropped.  Token counts include punctuation
tokens.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, ValidationError

TERMINALS = frozenset(".!?…")
CLOSERS = frozenset("\"')]}’”»")
OPENING_QUOTES = frozenset("\"'“‘«„")
DEFAULT_ABBREVIATIONS = frozenset({"Dr.", "Mr.", "Mrs.", "Prof.", "St.", "No.", "vs."})

# A word is a run of letters/digits, optionally joined by single internal
# apostrophes or hyphens; anything else non-blank is a one-character token.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['’\-][^\W_]+)*|\S")


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    text: str


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    token_count: int


@dataclass(frozen=True)
class CleanCorpus:
    language_tag: str
    sentences: tuple[Sentence, ...]

    def __len__(self) -> int:
        return len(self.sentences)

    def __getitem__(self, i: int) -> Sentence:
        return self.sentences[i]

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]

    @classmethod
    def from_texts(cls, texts: Iterable[str], language_tag: str = "und") -> "CleanCorpus":
        """Wrap already-clean sentences without applying the length filter."""
        sentences = []
        for i, raw in enumerate(texts):
            text = normalize_whitespace(raw)
            if not text:
                raise ValidationError(f"sentence {i} is empty")
            sentences.append(Sentence(i, text, len(tokenize_words(text))))
        return cls(language_tag, tuple(sentences))


@dataclass
class PrepReport:
    n_raw: int = 0
    n_kept: int = 0
    n_dropped_short: int = 0
    n_dropped_long: int = 0
    n_dropped_empty: int = 0
    # only ever non-zero when deduplication is switched on
    n_dropped_duplicate: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())


def tokenize_words(text: str) -> list[str]:
    """Split ``text`` into word and punctuation tokens.

    >>> tokenize_words("How are you?")
    ['How', 'are', 'you', '?']
    """
    return _TOKEN_RE.findall(text)


def split_sentences(
    doc: RawDocument | str,
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
) -> list[str]:
    """Split a document into sentences.

    A boundary is placed after a run of terminal punctuation (plus any closing
    quotes/brackets) when it ends the text, or when it is followed by a space
    and then an uppercase letter, an opening quote or a digit.  No boundary is
    placed after a word found in ``abbreviations``.
    """
    text = normalize_whitespace(doc.text if isinstance(doc, RawDocument) else doc)
    guard = frozenset(abbreviations)
    out: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] not in TERMINALS:
            i += 1
            continue
        j = i + 1
        while j < n and (text[j] in TERMINALS or text[j] in CLOSERS):
            j += 1
        if j == n:
            break
        nxt = text[j + 1] if text[j] == " " and j + 1 < n else ""
        if nxt and (nxt.isupper() or nxt.isdigit() or nxt in OPENING_QUOTES):
            word_start = text.rfind(" ", start, i) + 1
            if text[max(word_start, start) : i + 1] not in guard:
                out.append(text[start:j])
                start = j + 1
        i = j
    if start < n:
        out.append(text[start:])
    return out


def clean_corpus(
    sentences: Sequence[str],
    min_words: int = 5,
    max_words: int = 80,
    *,
    language_tag: str = "und",
    dedup: bool = False,
) -> tuple[CleanCorpus, PrepReport]:
    if min_words < 1:
        raise ConfigError(f"min_words must be >= 1, got {min_words}")
    if min_words > max_words:
        raise ConfigError(f"min_words ({min_words}) exceeds max_words ({max_words})")

    report = PrepReport(n_raw=len(sentences))
    kept: list[Sentence] = []
    seen: set[str] = set()
    for raw in sentences:
        text = normalize_whitespace(raw)
        if not text:
            report.n_dropped_empty += 1
            continue
        n_tok = len(tokenize_words(text))
        if n_tok < min_words:
            report.n_dropped_short += 1
        elif n_tok > max_words:
            report.n_dropped_long += 1
        elif dedup and text in seen:
            report.n_dropped_duplicate += 1
        else:
            seen.add(text)
            kept.append(Sentence(len(kept), text, n_tok))
    report.n_kept = len(kept)
    return CleanCorpus(language_tag, tuple(kept)), report


def prepare_documents(
    docs: Sequence[RawDocument],
    min_words: int = 5,
    max_words: int = 80,
    *,
    language_tag: str = "und",
    dedup: bool = False,
    workers: int = 1,
) -> tuple[CleanCorpus, PrepReport]:
    """Split every document, merge in document order, then filter."""
    ids = [d.doc_id for d in docs]
    if any(not i for i in ids) or len(set(ids)) != len(ids):
        raise ValidationError("document ids must be non-empty and unique")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            per_doc = list(pool.map(split_sentences, docs))
    else:
        per_doc = [split_sentences(d) for d in docs]
    merged = [s for sents in per_doc for s in sents]
    return clean_corpus(merged, min_words, max_words, language_tag=language_tag, dedup=dedup)


def read_documents(path: str | Path) -> list[RawDocument]:
    """Load raw documents from a directory of ``.txt`` files or a single file.

    Directory entries are read in sorted filename order.  A single file holds
    documents separated by blank lines.
    """
    path = Path(path)
    if path.is_dir():
        return [
            RawDocument(p.name, p.read_text(encoding="utf-8"))
            for p in sorted(path.glob("*.txt"))
        ]
    text = path.read_text(encoding="utf-8")
    blocks = re.split(r"\n[ \t\r]*\n", text)
    return [
        RawDocument(f"{path.name}#{i}", block)
        for i, block in enumerate(b for b in blocks if b.strip())
    ]


def write_corpus(corpus: CleanCorpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in corpus.sentences:
            fh.write(s.text + "\n")


def read_lines(path: str | Path) -> list[str]:
    """Lines of a LF-separated UTF-8 file (a trailing newline adds no line)."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def read_corpus(path: str | Path, language_tag: str = "und") -> CleanCorpus:
    lines = read_lines(path)
    for no, line in enumerate(lines, 1):
        if not line.strip():
            raise ValidationError(f"{path}: line {no} is empty")
    return CleanCorpus.from_texts(lines, language_tag)

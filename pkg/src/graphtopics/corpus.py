"""Corpus loading, normalization, tokenization, and vocabulary construction."""

from __future__ import annotations

import csv
import datetime
import json
import re
import unicodedata
import warnings
from dataclasses import dataclass, field, replace

# Common low-content tokens removed by default during normalization.
DEFAULT_STOPWORDS = frozenset(
    {
        "be", "have", "do", "make", "get", "more", "even", "also",
        "just", "much", "other", "n't", "not", "say", "tell", "re",
    }
)

_WORD_RE = re.compile(r"\w+")
_MARKUP_RE = re.compile(r"<[^>]*>|&#?\w+;")
_CONTROL_RE = re.compile(r"[\x00-\x1f\x7f-\x9f]")

CORPUS_FORMATS = ("jsonl", "csv", "pre_tokenized_jsonl")


class CorpusFormatError(ValueError):
    """Raised when a corpus file does not parse in the declared format."""


@dataclass
class Document:
    """One document: stable id, optional date, raw text, and normalized tokens."""

    id: str
    raw_text: str = ""
    date: datetime.date | None = None
    tokens: list[str] = field(default_factory=list)


@dataclass
class Corpus:
    """Ordered, id-distinct collection of documents.

    A built corpus is treated as immutable; downstream matrices and graphs
    are row-aligned to ``documents`` order.
    """

    documents: list[Document]
    provenance: str = ""

    def __post_init__(self):
        seen: set[str] = set()
        for doc in self.documents:
            if not doc.id:
                raise ValueError("document with empty id")
            if doc.id in seen:
                raise ValueError(f"duplicate document id: {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def doc_ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def token_lists(self) -> list[list[str]]:
        return [d.tokens for d in self.documents]


@dataclass(frozen=True)
class NormalizeConfig:
    """Knobs for :func:`normalize`.

    min_token_length drops tokens shorter than the given length; min_tokens
    drops whole documents during :func:`normalize_corpus`.
    """

    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    min_token_length: int = 2
    min_tokens: int = 30


@dataclass
class Vocabulary:
    """Lexicographically ordered terms with per-term document frequencies."""

    terms: list[str]
    document_frequency: dict[str, int]
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.document_frequency

    @property
    def index(self) -> dict[str, int]:
        if not hasattr(self, "_index"):
            self._index = {t: i for i, t in enumerate(self.terms)}
        return self._index


def _parse_date(value) -> datetime.date | None:
    if value in (None, ""):
        return None
    return datetime.date.fromisoformat(str(value)[:10])


def _records_jsonl(path: str):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: malformed JSON record: {exc}") from exc


def load_corpus(path: str, format: str = "jsonl") -> Corpus:
    """Load a corpus file into one Document per record, preserving file order.

    Formats: ``jsonl`` (fields id, optional date, text), ``csv`` (header row
    id,date,text), and ``pre_tokenized_jsonl`` (fields id, tokens) for text
    tokenized by an external pipeline.
    """
    if format not in CORPUS_FORMATS:
        raise CorpusFormatError(f"unknown corpus format: {format!r}")
    documents: list[Document] = []
    seen: set[str] = set()

    def add(lineno: int, doc_id, raw_text: str, date, tokens=None):
        doc_id = "" if doc_id is None else str(doc_id)
        if not doc_id or doc_id in seen:
            raise CorpusFormatError(f"{path}:{lineno}: duplicate/empty id: {doc_id!r}")
        seen.add(doc_id)
        try:
            parsed = _parse_date(date)
        except ValueError as exc:
            raise CorpusFormatError(f"{path}:{lineno}: bad date {date!r}") from exc
        documents.append(
            Document(id=doc_id, raw_text=raw_text, date=parsed, tokens=list(tokens or []))
        )

    if format == "jsonl":
        for lineno, rec in _records_jsonl(path):
            if not isinstance(rec, dict) or "text" not in rec:
                raise CorpusFormatError(f"{path}:{lineno}: record missing 'text' field")
            add(lineno, rec.get("id"), str(rec["text"]), rec.get("date"))
    elif format == "pre_tokenized_jsonl":
        for lineno, rec in _records_jsonl(path):
            if not isinstance(rec, dict) or not isinstance(rec.get("tokens"), list):
                raise CorpusFormatError(f"{path}:{lineno}: record missing 'tokens' list")
            add(lineno, rec.get("id"), "", rec.get("date"), [str(t) for t in rec["tokens"]])
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "text"} <= set(reader.fieldnames):
                raise CorpusFormatError(f"{path}:1: csv header must include id and text")
            for lineno, rec in enumerate(reader, start=2):
                add(lineno, rec.get("id"), rec.get("text") or "", rec.get("date"))

    return Corpus(documents, provenance=f"{format}:{path}")


def fold_to_ascii(text: str) -> str:
    """Decompose accents and drop characters with no ASCII mapping."""
    decomposed = unicodedata.normalize("NFKD", text)
    return decomposed.encode("ascii", "ignore").decode("ascii")


def tokenize(text: str, config: NormalizeConfig = NormalizeConfig()) -> list[str]:
    """Markup-stripped, accent-folded, lowercased word tokens of a string."""
    text = _MARKUP_RE.sub(" ", text)
    text = _CONTROL_RE.sub(" ", text)
    text = fold_to_ascii(text)
    tokens = [t.lower() for t in _WORD_RE.findall(text)]
    return [
        t
        for t in tokens
        if len(t) >= config.min_token_length and t not in config.stopwords
    ]


def normalize(doc: Document, config: NormalizeConfig = NormalizeConfig()) -> Document:
    """Return a copy of the document with tokens derived from its raw text.

    Deterministic: the same raw text always yields the same token list. A
    document that already carries tokens but no raw text passes through
    unchanged (the pre-tokenized escape hatch).
    """
    if not doc.raw_text and doc.tokens:
        return replace(doc, tokens=list(doc.tokens))
    return replace(doc, tokens=tokenize(doc.raw_text, config))


def normalize_corpus(corpus: Corpus, config: NormalizeConfig = NormalizeConfig()) -> Corpus:
    """Normalize every document and drop those with fewer than min_tokens tokens."""
    normalized = [normalize(doc, config) for doc in corpus]
    kept = [d for d in normalized if len(d.tokens) >= config.min_tokens]
    dropped = len(normalized) - len(kept)
    if dropped:
        warnings.warn(f"dropped {dropped} documents shorter than {config.min_tokens} tokens")
    return Corpus(kept, provenance=corpus.provenance)


def build_vocabulary(corpus: Corpus, min_df: int = 1, max_df_ratio: float = 1.0) -> Vocabulary:
    """Collect terms by document frequency, filtered to min_df <= df <= max_df_ratio * N.

    Terms are sorted lexicographically. Raises ValueError if nothing survives.
    """
    n_docs = len(corpus)
    df: dict[str, int] = {}
    for doc in corpus:
        for term in set(doc.tokens):
            df[term] = df.get(term, 0) + 1
    cutoff = max_df_ratio * n_docs
    kept = {t: c for t, c in df.items() if c >= min_df and c <= cutoff}
    if not kept:
        raise ValueError("empty vocabulary after document-frequency filtering")
    terms = sorted(kept)
    return Vocabulary(terms=terms, document_frequency=kept, n_docs=n_docs)


def save_corpus(corpus: Corpus, path: str) -> None:
    """Write a normalized corpus snapshot as pre_tokenized_jsonl."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            rec = {"id": doc.id, "tokens": doc.tokens}
            if doc.date is not None:
                rec["date"] = doc.date.isoformat()
            fh.write(json.dumps(rec, ensure_ascii=True) + "\n")

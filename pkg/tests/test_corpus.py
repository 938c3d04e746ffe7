import json

import pytest

from graphtopics import (
    DEFAULT_STOPWORDS,
    Corpus,
    CorpusFormatError,
    Document,
    NormalizeConfig,
    build_vocabulary,
    load_corpus,
    normalize,
    normalize_corpus,
    save_corpus,
    tokenize,
)

from conftest import token_corpus

NO_STOPWORDS = NormalizeConfig(stopwords=frozenset())


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadCorpus:
    def test_jsonl_preserves_file_order(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_lines(p, [
            json.dumps({"id": "b", "text": "second doc", "date": "2020-01-02"}),
            json.dumps({"id": "a", "text": "first doc"}),
            json.dumps({"id": "c", "text": "third doc"}),
        ])
        corpus = load_corpus(str(p), "jsonl")
        assert corpus.doc_ids == ["b", "a", "c"]
        assert corpus.documents[0].date.isoformat() == "2020-01-02"
        assert corpus.documents[1].date is None

    def test_malformed_record_names_line(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_lines(p, ['{"id": "a", "text": "ok"}', "{not json"])
        with pytest.raises(CorpusFormatError, match=r":2:"):
            load_corpus(str(p), "jsonl")

    def test_duplicate_id_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_lines(p, [
            json.dumps({"id": "a", "text": "x"}),
            json.dumps({"id": "a", "text": "y"}),
        ])
        with pytest.raises(CorpusFormatError, match="duplicate/empty id: 'a'"):
            load_corpus(str(p), "jsonl")

    def test_empty_id_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_lines(p, [json.dumps({"id": "", "text": "x"})])
        with pytest.raises(CorpusFormatError, match="duplicate/empty id"):
            load_corpus(str(p), "jsonl")

    def test_pre_tokenized_passthrough(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_lines(p, [json.dumps({"id": "a", "tokens": ["gun", "control"]})])
        corpus = load_corpus(str(p), "pre_tokenized_jsonl")
        assert corpus.documents[0].tokens == ["gun", "control"]
        # tokens survive normalization untouched when no raw text exists
        assert normalize(corpus.documents[0]).tokens == ["gun", "control"]

    def test_csv_format(self, tmp_path):
        p = tmp_path / "c.csv"
        write_lines(p, ["id,date,text", "a,2020-05-01,hello there", "b,,general kenobi"])
        corpus = load_corpus(str(p), "csv")
        assert corpus.doc_ids == ["a", "b"]
        assert corpus.documents[0].raw_text == "hello there"

    def test_csv_missing_header_rejected(self, tmp_path):
        p = tmp_path / "c.csv"
        write_lines(p, ["foo,bar", "1,2"])
        with pytest.raises(CorpusFormatError, match="header"):
            load_corpus(str(p), "csv")

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(CorpusFormatError, match="unknown corpus format"):
            load_corpus(str(tmp_path / "x"), "parquet")

    def test_bad_date_names_line(self, tmp_path):
        p = tmp_path / "c.jsonl"
        write_lines(p, [json.dumps({"id": "a", "text": "x", "date": "not-a-date"})])
        with pytest.raises(CorpusFormatError, match=r":1:.*date"):
            load_corpus(str(p), "jsonl")


class TestTokenize:
    def test_word_splitting(self):
        assert tokenize("Gun Control, gun-control!", NO_STOPWORDS) == [
            "gun", "control", "gun", "control",
        ]

    def test_stoplist_and_short_tokens(self):
        assert tokenize("He didn't say much") == ["he", "didn"]

    def test_accent_folding(self):
        assert tokenize("Café déjà vu", NO_STOPWORDS) == ["cafe", "deja", "vu"]

    def test_markup_stripped(self):
        assert tokenize("<p>bold &amp; strong</p> words", NO_STOPWORDS) == [
            "bold", "strong", "words",
        ]

    def test_deterministic(self):
        text = "Repeated runs; MUST, match exactlyé"
        assert tokenize(text) == tokenize(text)

    def test_empty_result_allowed(self):
        assert tokenize("!!! ???", NO_STOPWORDS) == []

    def test_default_stoplist_contents(self):
        assert "say" in DEFAULT_STOPWORDS and "much" in DEFAULT_STOPWORDS
        assert len(DEFAULT_STOPWORDS) == 16


class TestNormalizeCorpus:
    def test_short_documents_dropped_with_warning(self):
        long_doc = Document(id="long", raw_text="word " * 40)
        short_doc = Document(id="short", raw_text="tiny text")
        with pytest.warns(UserWarning, match="dropped 1 documents"):
            out = normalize_corpus(Corpus([long_doc, short_doc]))
        assert out.doc_ids == ["long"]
        assert len(out.documents[0].tokens) == 40

    def test_min_tokens_threshold_exact(self):
        doc = Document(id="edge", raw_text="word " * 30)
        out = normalize_corpus(Corpus([doc]))
        assert out.doc_ids == ["edge"]


class TestVocabulary:
    def test_direct_counts(self):
        corpus = token_corpus([["a", "b"], ["b", "c"]])
        vocab = build_vocabulary(corpus, min_df=1, max_df_ratio=1.0)
        assert vocab.terms == ["a", "b", "c"]
        assert vocab.document_frequency == {"a": 1, "b": 2, "c": 1}

    def test_min_df_threshold(self):
        corpus = token_corpus([["a", "b"], ["b", "c"]])
        vocab = build_vocabulary(corpus, min_df=2)
        assert vocab.terms == ["b"]

    def test_min_df_above_n_errors(self):
        corpus = token_corpus([["a", "b"], ["b", "c"]])
        with pytest.raises(ValueError, match="empty vocabulary"):
            build_vocabulary(corpus, min_df=3)

    def test_max_df_ratio_drops_ubiquitous_terms(self):
        corpus = token_corpus([["a", "b"], ["b", "c"]])
        vocab = build_vocabulary(corpus, max_df_ratio=0.5)
        assert vocab.terms == ["a", "c"]

    def test_df_counts_document_level(self):
        # repeats within one document count once
        corpus = token_corpus([["a", "a", "a"], ["a"]])
        vocab = build_vocabulary(corpus)
        assert vocab.document_frequency["a"] == 2


class TestCorpusContainer:
    def test_duplicate_ids_rejected(self):
        docs = [Document(id="a"), Document(id="a")]
        with pytest.raises(ValueError, match="duplicate document id"):
            Corpus(docs)

    def test_empty_id_rejected(self):
        with pytest.raises(ValueError, match="empty id"):
            Corpus([Document(id="")])

    def test_save_load_round_trip(self, tmp_path):
        corpus = token_corpus([["alpha", "beta"], ["gamma"]])
        corpus.documents[0].date = __import__("datetime").date(2020, 3, 4)
        path = tmp_path / "snap.jsonl"
        save_corpus(corpus, str(path))
        back = load_corpus(str(path), "pre_tokenized_jsonl")
        assert back.doc_ids == corpus.doc_ids
        assert back.token_lists() == corpus.token_lists()
        assert back.documents[0].date == corpus.documents[0].date

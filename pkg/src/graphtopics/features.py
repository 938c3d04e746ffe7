"""Document feature matrices: TF-IDF, LSA reduction, and external vector ingestion.

Every result is an :class:`EmbeddingMatrix` whose rows are aligned to the
corpus document order, so downstream graphs and partitions can be joined
back to document ids by position.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.extmath import randomized_svd, svd_flip

from .corpus import Corpus, Vocabulary, build_vocabulary
from .validation import check_matrix, row_norms

EMBEDDING_KINDS = ("tf", "tfidf", "tfidf_lsa", "external")

# Randomized SVD accuracy knobs, fixed for reproducibility.
_SVD_OVERSAMPLES = 10
_SVD_POWER_ITERATIONS = 4
# Below these cutoffs dense LAPACK SVD is cheap and exact; same switch rule
# as sklearn PCA's svd_solver="auto".
_EXACT_SVD_MAX_DIM = 500
_EXACT_SVD_RANK_RATIO = 0.8


@dataclass
class EmbeddingMatrix:
    """N x D feature matrix with row-aligned document ids.

    ``matrix`` is a dense float64 array or a scipy CSR matrix; entries must
    be finite. ``l2_normalized`` asserts that every nonzero row has unit
    Euclidean norm (checked to 1e-9).
    """

    doc_ids: list[str]
    matrix: np.ndarray | sparse.csr_matrix
    kind: str = "external"
    l2_normalized: bool = False

    def __post_init__(self):
        if self.kind not in EMBEDDING_KINDS:
            raise ValueError(f"unknown embedding kind: {self.kind!r}")
        self.matrix = check_matrix(self.matrix, name="embedding matrix")
        if len(self.doc_ids) != self.matrix.shape[0]:
            raise ValueError("doc_ids length does not match matrix rows")
        if self.l2_normalized:
            norms = row_norms(self.matrix)
            nonzero = norms > 0
            if nonzero.any() and np.abs(norms[nonzero] - 1.0).max() > 1e-9:
                raise ValueError("l2_normalized set but some nonzero row is not unit norm")

    @property
    def n_docs(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.matrix)

    def zero_row_indices(self) -> np.ndarray:
        return np.flatnonzero(row_norms(self.matrix) == 0)


def l2_normalize(m: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every nonzero row to unit Euclidean norm; zero rows pass through.

    Idempotent. Zero rows are reported with a warning and keep their zeros.
    """
    norms = row_norms(m.matrix)
    zero = norms == 0
    if zero.any():
        ids = [m.doc_ids[i] for i in np.flatnonzero(zero)[:5]]
        warnings.warn(
            f"{int(zero.sum())} zero rows left unnormalized (first ids: {ids})"
        )
    scale = np.where(zero, 1.0, norms)
    if sparse.issparse(m.matrix):
        out = sparse.diags(1.0 / scale) @ m.matrix
        out = out.tocsr()
    else:
        out = m.matrix / scale[:, None]
    return EmbeddingMatrix(list(m.doc_ids), out, kind=m.kind, l2_normalized=True)


def tfidf(corpus: Corpus, vocab: Vocabulary, sublinear: bool = False) -> EmbeddingMatrix:
    """TF-IDF rows over the vocabulary, L2-normalized, as a sparse matrix.

    tf is the raw in-document count (or 1 + ln(count) when sublinear);
    idf(t) = ln(N / df(t)) with N the corpus size. Documents with no
    in-vocabulary tokens come out as zero rows and are reported.
    """
    n_docs = len(corpus)
    index = vocab.index
    idf = np.array(
        [math.log(vocab.n_docs / vocab.document_frequency[t]) for t in vocab.terms]
    )
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for row, doc in enumerate(corpus):
        counts: dict[int, int] = {}
        for tok in doc.tokens:
            col = index.get(tok)
            if col is not None:
                counts[col] = counts.get(col, 0) + 1
        for col in sorted(counts):
            tf_val = 1.0 + math.log(counts[col]) if sublinear else float(counts[col])
            rows.append(row)
            cols.append(col)
            vals.append(tf_val * idf[col])
    mat = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n_docs, len(vocab.terms)), dtype=np.float64
    )
    mat.eliminate_zeros()
    raw = EmbeddingMatrix(corpus.doc_ids, mat, kind="tfidf")
    return l2_normalize(raw) if raw.n_docs else raw


class TfidfEmbedder(BaseEstimator, TransformerMixin):
    """Corpus -> TF-IDF embedding transformer.

    fit() builds the vocabulary (document-frequency filtered); transform()
    produces the L2-normalized TF-IDF matrix for any corpus sharing that
    vocabulary. Idf always comes from the fitted corpus.
    """

    def __init__(self, min_df: int = 1, max_df_ratio: float = 1.0, sublinear: bool = False):
        self.min_df = min_df
        self.max_df_ratio = max_df_ratio
        self.sublinear = sublinear

    def fit(self, corpus: Corpus, y=None):
        self.vocabulary_ = build_vocabulary(corpus, self.min_df, self.max_df_ratio)
        return self

    def transform(self, corpus: Corpus) -> EmbeddingMatrix:
        return tfidf(corpus, self.vocabulary_, sublinear=self.sublinear)


class LsaReducer(BaseEstimator, TransformerMixin):
    """Project TF-IDF rows onto the top singular directions (LSA).

    Document coordinates are U_k * Sigma_k. Small matrices (or near-full
    target ranks) go through exact LAPACK SVD; larger ones use a seeded
    randomized truncated SVD. When n_components exceeds the matrix rank
    (or its smaller dimension), the missing columns are zero-padded with
    a warning.
    """

    def __init__(self, n_components: int = 300, random_state: int = 0):
        self.n_components = n_components
        self.random_state = random_state

    def fit(self, m: EmbeddingMatrix, y=None):
        self.fit_transform(m)
        return self

    def fit_transform(self, m: EmbeddingMatrix, y=None) -> EmbeddingMatrix:
        X = m.matrix
        n, d = X.shape
        k_eff = min(self.n_components, n, d)
        if k_eff < 1:
            raise ValueError("n_components must be at least 1")
        if max(n, d) <= _EXACT_SVD_MAX_DIM or k_eff >= _EXACT_SVD_RANK_RATIO * min(n, d):
            dense = X.toarray() if sparse.issparse(X) else np.asarray(X, dtype=np.float64)
            u, s, vt = np.linalg.svd(dense, full_matrices=False)
            u, vt = svd_flip(u, vt)
            u, s, vt = u[:, :k_eff], s[:k_eff], vt[:k_eff]
        else:
            u, s, vt = randomized_svd(
                X,
                n_components=k_eff,
                n_oversamples=_SVD_OVERSAMPLES,
                n_iter=_SVD_POWER_ITERATIONS,
                random_state=self.random_state,
            )
        order = np.argsort(-s, kind="stable")
        u, s, vt = u[:, order], s[order], vt[order]
        self.components_ = vt
        self.singular_values_ = s
        coords = u * s
        if k_eff < self.n_components:
            warnings.warn(
                f"requested {self.n_components} components but only {k_eff} "
                "available; padding with zero columns"
            )
            coords = np.hstack(
                [coords, np.zeros((n, self.n_components - k_eff))]
            )
        return EmbeddingMatrix(list(m.doc_ids), coords, kind="tfidf_lsa")

    def transform(self, m: EmbeddingMatrix) -> EmbeddingMatrix:
        coords = np.asarray(m.matrix @ self.components_.T)
        if coords.shape[1] < self.n_components:
            coords = np.hstack(
                [coords, np.zeros((coords.shape[0], self.n_components - coords.shape[1]))]
            )
        return EmbeddingMatrix(list(m.doc_ids), coords, kind="tfidf_lsa")


def lsa_reduce(m: EmbeddingMatrix, target_dim: int = 300, seed: int = 0) -> EmbeddingMatrix:
    """Reduce an embedding matrix to target_dim LSA coordinates (seeded)."""
    return LsaReducer(n_components=target_dim, random_state=seed).fit_transform(m)


def save_embeddings(m: EmbeddingMatrix, path: str) -> None:
    """Write embeddings as TSV: id column then float columns, `#dim=` header."""
    dense = m.matrix.toarray() if m.is_sparse else m.matrix
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#dim={m.dim}\n")
        for doc_id, row in zip(m.doc_ids, dense):
            fh.write(doc_id + "\t" + "\t".join(format(v, ".17g") for v in row) + "\n")


def load_embeddings(path: str, corpus: Corpus) -> EmbeddingMatrix:
    """Load one vector per document id from TSV and reorder to corpus order.

    Every corpus id must be present; unknown ids are ignored with a warning;
    all rows must share one dimension and be finite.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("#dim="):
                    dim = int(line[5:])
                continue
            parts = line.split("\t")
            doc_id, values = parts[0], parts[1:]
            try:
                row = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from exc
            if not np.isfinite(row).all():
                raise ValueError(f"{path}:{lineno}: non-finite value for id {doc_id!r}")
            if dim is None:
                dim = row.size
            if row.size != dim:
                raise ValueError(
                    f"{path}:{lineno}: dimension {row.size} != expected {dim}"
                )
            vectors[doc_id] = row

    wanted = corpus.doc_ids
    missing = [i for i in wanted if i not in vectors]
    if missing:
        raise ValueError(f"missing embedding for id {missing[0]!r} ({len(missing)} total)")
    extra = set(vectors) - set(wanted)
    if extra:
        warnings.warn(f"ignoring {len(extra)} embeddings with unknown ids")
    mat = np.vstack([vectors[i] for i in wanted]) if wanted else np.zeros((0, dim or 0))
    return EmbeddingMatrix(list(wanted), mat, kind="external")

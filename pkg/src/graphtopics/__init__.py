"""Unsupervised multiscale topic extraction over document similarity graphs.

The package walks a corpus through five steps: normalize text, embed
documents (TF-IDF, optionally LSA-reduced), sparsify cosine similarities
into an MST-plus-kNN graph, find partitions across Markov time by stability
optimization, then score and export the chosen scales alongside k-means and
Ward baselines.
"""

from .baselines import (
    Dendrogram,
    KMeansClusterer,
    KMeansResult,
    WardClusterer,
    kmeans,
    ward,
    ward_linkage,
)
from .coherence import (
    CoherenceReport,
    ExternalLabels,
    ReferenceStats,
    aggregate_pmi,
    build_reference_stats,
    external_agreement,
    load_external_labels,
    load_reference_stats,
    pmi_coherence,
    save_reference_stats,
    top_words,
)
from .corpus import (
    CORPUS_FORMATS,
    DEFAULT_STOPWORDS,
    Corpus,
    CorpusFormatError,
    Document,
    NormalizeConfig,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    normalize,
    normalize_corpus,
    save_corpus,
    tokenize,
)
from .datasets import make_hierarchical_benchmark, make_sbm_graph, make_topic_corpus
from .export import (
    SankeyData,
    WordcloudData,
    export_sankey,
    export_wordclouds,
    load_sankey,
    load_wordclouds,
)
from .features import (
    EmbeddingMatrix,
    LsaReducer,
    TfidfEmbedder,
    l2_normalize,
    load_embeddings,
    lsa_reduce,
    save_embeddings,
    tfidf,
)
from .graph import (
    GraphConnectivityError,
    SimilarityGraph,
    cosine_similarity_matrix,
    graph_from_edges,
    knn_edges,
    load_graph,
    minimum_spanning_tree,
    mst_knn,
    save_graph,
)
from .partitions import (
    Partition,
    adjusted_rand_index,
    contingency_table,
    normalized_mutual_information,
    variation_of_information,
)
from .pipeline import (
    ConfigError,
    PipelineConfig,
    StageError,
    compare_partitions,
    load_partition_csv,
    run_pipeline,
    write_partition_csv,
)
from .stability import (
    MarkovStabilityClustering,
    MSScanResult,
    RandomWalkContext,
    ScaleSelection,
    SelectedScale,
    build_context,
    default_t_grid,
    louvain_optimize,
    scan,
    select_robust_scales,
    stability,
)

__version__ = "0.1.0"

__all__ = [
    "CORPUS_FORMATS",
    "CoherenceReport",
    "ConfigError",
    "Corpus",
    "CorpusFormatError",
    "DEFAULT_STOPWORDS",
    "Dendrogram",
    "Document",
    "EmbeddingMatrix",
    "ExternalLabels",
    "GraphConnectivityError",
    "KMeansClusterer",
    "KMeansResult",
    "LsaReducer",
    "MSScanResult",
    "MarkovStabilityClustering",
    "NormalizeConfig",
    "Partition",
    "PipelineConfig",
    "RandomWalkContext",
    "ReferenceStats",
    "SankeyData",
    "ScaleSelection",
    "SelectedScale",
    "SimilarityGraph",
    "StageError",
    "TfidfEmbedder",
    "Vocabulary",
    "WardClusterer",
    "WordcloudData",
    "adjusted_rand_index",
    "aggregate_pmi",
    "build_context",
    "build_reference_stats",
    "build_vocabulary",
    "compare_partitions",
    "contingency_table",
    "cosine_similarity_matrix",
    "default_t_grid",
    "export_sankey",
    "export_wordclouds",
    "external_agreement",
    "graph_from_edges",
    "kmeans",
    "knn_edges",
    "l2_normalize",
    "load_corpus",
    "load_embeddings",
    "load_external_labels",
    "load_graph",
    "load_partition_csv",
    "load_reference_stats",
    "load_sankey",
    "load_wordclouds",
    "louvain_optimize",
    "lsa_reduce",
    "make_hierarchical_benchmark",
    "make_sbm_graph",
    "make_topic_corpus",
    "minimum_spanning_tree",
    "mst_knn",
    "normalize",
    "normalize_corpus",
    "normalized_mutual_information",
    "pmi_coherence",
    "run_pipeline",
    "save_corpus",
    "save_embeddings",
    "save_graph",
    "save_reference_stats",
    "scan",
    "select_robust_scales",
    "stability",
    "tfidf",
    "tokenize",
    "top_words",
    "variation_of_information",
    "ward",
    "ward_linkage",
    "write_partition_csv",
]

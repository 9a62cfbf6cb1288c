"""Mine parallel sentence pairs from two monolingual corpora with multilingual embeddings."""

from .alignment import (
    AlignmentParams,
    AlignmentPair,
    AlignmentResult,
    align,
    align_csls,
    align_invnn,
    align_invsoftmax,
    align_matrices,
    align_nn,
    cosine_block,
    knn_mean_sim,
)
from .corpus_prep import CleanCorpus, PrepReport, RawDocument, Sentence, clean_corpus, split_sentences, tokenize_words
from .embedding import EmbeddingMatrix, ProviderConfig, RateLimiterConfig, embed_corpus, normalize_rows
from .evaluation import F1Report, GoldAlignment, PairStats, compute_stats, evaluate_f1

__version__ = "0.1.0"

__all__ = [
    "AlignmentParams",
    "AlignmentPair",
    "AlignmentResult",
    "align",
    "align_csls",
    "align_invnn",
    "align_invsoftmax",
    "align_matrices",
    "align_nn",
    "cosine_block",
    "knn_mean_sim",
    "CleanCorpus",
    "PrepReport",
    "RawDocument",
    "Sentence",
    "clean_corpus",
    "split_sentences",
    "tokenize_words",
    "EmbeddingMatrix",
    "ProviderConfig",
    "RateLimiterConfig",
    "embed_corpus",
    "normalize_rows",
    "F1Report",
    "GoldAlignment",
    "PairStats",
    "compute_stats",
    "evaluate_f1",
]

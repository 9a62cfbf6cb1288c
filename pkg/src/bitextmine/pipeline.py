"""End-to-end helpers that chain embedding, alignment and scoring."""

from __future__ import annotations

from dataclasses import dataclass

from .alignment import AlignmentResult, align
from .config import RunConfig
from .corpus_prep import CleanCorpus
from .embedding.cache import EmbeddingCache
from .embedding.embed import embed_corpora
from .embedding.schedule import Clock
from .errors import LineCountMismatch
from .evaluation import F1Report, GoldAlignment, evaluate_f1, shuffle_corpus, unshuffle_targets


def mine(
    src: CleanCorpus,
    tgt: CleanCorpus,
    cfg: RunConfig,
    *,
    cache: EmbeddingCache | None = None,
    clock: Clock | None = None,
    transport=None,
) -> AlignmentResult:
    run = embed_corpora(
        src, tgt, cfg.provider, cfg.rate, cache if cache is not None else cfg.cache_path, clock, transport=transport
    )
    return align(src, tgt, run.source, run.target, cfg.align, cfg.threads)


@dataclass(frozen=True)
class GoldRun:
    report: F1Report
    result: AlignmentResult
    n_sents: int


def evaluate_parallel(
    src: CleanCorpus,
    tgt: CleanCorpus,
    cfg: RunConfig,
    *,
    cache: EmbeddingCache | None = None,
    clock: Clock | None = None,
    transport=None,
) -> GoldRun:
    """Score the aligner on two line-parallel corpora.

    The target side is shuffled with ``cfg.seed`` before embedding and
    alignment, and predictions are mapped back afterwards, so an aligner that
    simply echoes row positions cannot score well.
    """
    if len(tgt) != len(src):
        raise LineCountMismatch(len(src), len(tgt))
    gold = GoldAlignment.identity(len(src))
    shuffled, perm = shuffle_corpus(tgt, cfg.seed)
    result = mine(src, shuffled, cfg, cache=cache, clock=clock, transport=transport)
    result = unshuffle_targets(result, perm)
    return GoldRun(evaluate_f1(result, gold), result, len(src))

"""Corpus-level embedding: cache lookup, scheduled provider calls, normalization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus_prep import CleanCorpus
from ..errors import DimensionMismatch, NormalizationError
from .cache import CacheRecord, EmbeddingCache, cache_key
from .providers import ProviderConfig, Transport, request_embeddings
from .schedule import BatchPlan, Clock, RateGuard, RateLimiterConfig, SystemClock, plan_batches

log = logging.getLogger(__name__)

MIN_NORM = 1e-12


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Row-major float32 matrix; row i belongs to sentence i."""

    data: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32, order="C", copy=True)
        if arr.ndim != 2:
            raise DimensionMismatch(f"embedding matrix must be 2-D, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.n_rows


def normalize_rows(m: EmbeddingMatrix | np.ndarray) -> EmbeddingMatrix:
    data = m.data if isinstance(m, EmbeddingMatrix) else np.asarray(m)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {data.shape}")
    norms = np.sqrt(np.einsum("ij,ij->i", data, data))
    bad = np.flatnonzero(~(norms >= MIN_NORM))
    if bad.size:
        raise NormalizationError(int(bad[0]), float(norms[bad[0]]))
    return EmbeddingMatrix(data / norms[:, None], normalized=True)


@dataclass
class EmbedRun:
    """Outcome of one embedding pass over a source and a target corpus."""

    source: EmbeddingMatrix | None
    target: EmbeddingMatrix | None
    plan: BatchPlan
    n_cached: int = 0
    n_requested: int = 0
    n_calls: int = 0
    request_log: list[tuple[float, int]] = field(default_factory=list)


def _pending(texts, keys, cache: EmbeddingCache, skip: set[str]) -> list[tuple[str, str]]:
    out = []
    for key, text in zip(keys, texts):
        if key in cache or key in skip:
            continue
        skip.add(key)
        out.append((key, text))
    return out


def _assemble(keys: list[str], cache: EmbeddingCache, dim: int) -> EmbeddingMatrix:
    rows = np.empty((len(keys), dim), dtype=np.float32)
    for i, key in enumerate(keys):
        rec = cache.get(key)
        if rec.dim != dim:
            raise DimensionMismatch(f"cached vector for row {i} has dim {rec.dim}, expected {dim}")
        rows[i] = rec.vector
    return normalize_rows(rows)


def embed_corpora(
    src: CleanCorpus | None,
    tgt: CleanCorpus | None,
    cfg: ProviderConfig,
    rate: RateLimiterConfig = RateLimiterConfig(),
    cache: EmbeddingCache | str | Path = "embeddings.cache",
    clock: Clock | None = None,
    *,
    transport: Transport | None = None,
) -> EmbedRun:
    """Embed both sides, fetching only what the cache lacks.

    Uncached texts are cut into chunks and packed into rate windows by
    :func:`plan_batches`.  For a remote provider the clock sleeps a full
    window between consecutive windows (never after the last one).
    """
    clock = clock or SystemClock()
    if not isinstance(cache, EmbeddingCache):
        cache = EmbeddingCache(cache)
    model = cfg.cache_model_id
    src_texts = src.texts if src is not None else []
    tgt_texts = tgt.texts if tgt is not None else []
    src_keys = [cache_key(model, cfg.input_type, t) for t in src_texts]
    tgt_keys = [cache_key(model, cfg.input_type, t) for t in tgt_texts]

    seen: set[str] = set()
    pending = {"source": _pending(src_texts, src_keys, cache, seen)}
    pending["target"] = _pending(tgt_texts, tgt_keys, cache, seen)
    plan = plan_batches(len(pending["source"]), len(pending["target"]), rate)
    guard = RateGuard(rate, clock) if cfg.is_remote else None

    n_calls = 0
    for w, window in enumerate(plan.windows):
        if w > 0 and cfg.is_remote:
            clock.sleep(rate.window_seconds)
        for ci in window:
            chunk = plan.chunks[ci]
            items = pending[chunk.side][chunk.start : chunk.start + chunk.length]
            vectors = request_embeddings(
                [t for _, t in items], cfg, rate=rate, clock=clock, transport=transport, guard=guard
            )
            n_calls += 1
            cache.put_many(CacheRecord.build(k, v) for (k, _), v in zip(items, vectors))
        log.info("window %d/%d done", w + 1, len(plan.windows))

    n_requested = sum(c.length for c in plan.chunks)
    return EmbedRun(
        source=_assemble(src_keys, cache, cfg.dim) if src is not None else None,
        target=_assemble(tgt_keys, cache, cfg.dim) if tgt is not None else None,
        plan=plan,
        n_cached=len(set(src_keys) | set(tgt_keys)) - n_requested,
        n_requested=n_requested,
        n_calls=n_calls,
        request_log=list(guard.history) if guard is not None else [],
    )


def embed_corpus(
    corpus: CleanCorpus,
    cfg: ProviderConfig,
    rate: RateLimiterConfig = RateLimiterConfig(),
    cache_path: EmbeddingCache | str | Path = "embeddings.cache",
    clock: Clock | None = None,
    *,
    transport: Transport | None = None,
) -> EmbeddingMatrix:
    return embed_corpora(corpus, None, cfg, rate, cache_path, clock, transport=transport).source

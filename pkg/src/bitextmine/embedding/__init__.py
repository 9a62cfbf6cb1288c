from .cache import CacheRecord, EmbeddingCache, cache_get, cache_key, cache_put
from .embed import EmbeddingMatrix, EmbedRun, embed_corpora, embed_corpus, normalize_rows
from .providers import (
    HttpTransport,
    ProviderConfig,
    hash_embed,
    oracle_embed,
    oracle_text,
    parse_oracle_text,
    request_embeddings,
)
from .schedule import (
    BatchPlan,
    Chunk,
    RateGuard,
    RateLimiterConfig,
    SimulatedClock,
    SystemClock,
    plan_batches,
)

__all__ = [
    "CacheRecord",
    "EmbeddingCache",
    "cache_get",
    "cache_key",
    "cache_put",
    "EmbeddingMatrix",
    "EmbedRun",
    "embed_corpora",
    "embed_corpus",
    "normalize_rows",
    "HttpTransport",
    "ProviderConfig",
    "hash_embed",
    "oracle_embed",
    "oracle_text",
    "parse_oracle_text",
    "request_embeddings",
    "BatchPlan",
    "Chunk",
    "RateGuard",
    "RateLimiterConfig",
    "SimulatedClock",
    "SystemClock",
    "plan_batches",
]

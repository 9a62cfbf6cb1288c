"""Embedding providers: a JSON-over-HTTPS client and two offline stand-ins.

``hash_mock`` maps every text to a pseudo-random vector derived from SHA-256;
``oracle`` reads a pair id out of synthetic texts so that translations are
known to lie close together, which gives the rest of the pipeline a ground
truth to be tested against.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Literal, Protocol, Sequence

import numpy as np

from ..errors import (
    AuthError,
    ConfigError,
    DimensionMismatch,
    ProviderError,
    RateLimitError,
    TransportError,
)
from .schedule import Clock, RateGuard, RateLimiterConfig, SystemClock

log = logging.getLogger(__name__)

ProviderKind = Literal["remote", "hash_mock", "oracle"]

MAX_RATE_LIMIT_RETRIES = 5
BACKOFF_SECONDS = (1, 2, 4, 8, 16)

DEFAULT_FIELD_MAP = {
    "model": "model",
    "input_type": "input_type",
    "texts": "texts",
    "embeddings": "embeddings",
}

_U32_SCALE = float(2**31)
_ORACLE_TEXT_RE = re.compile(r"^(src|tgt)-(\d+)(?:\s|$)")


@dataclass(frozen=True)
class ProviderConfig:
    kind: ProviderKind = "hash_mock"
    model_id: str = "hash-mock"
    endpoint_url: str = ""
    input_type: str = "search_document"
    dim: int = 768
    api_key_env: str = "EMBED_API_KEY"
    seed: int = 0
    noise_sigma: float = 0.0
    timeout: float = 60.0
    # request/response field names, so other vendors can be wired by config
    field_map: dict = field(default_factory=lambda: dict(DEFAULT_FIELD_MAP))

    def __post_init__(self):
        if self.kind not in ("remote", "hash_mock", "oracle"):
            raise ConfigError(f"unknown provider kind {self.kind!r}")
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        if self.kind == "remote" and not (self.endpoint_url and self.model_id):
            raise ConfigError("remote provider needs endpoint_url and model_id")
        missing = set(DEFAULT_FIELD_MAP) - set(self.field_map)
        if missing:
            raise ConfigError(f"field_map lacks {sorted(missing)}")

    @property
    def is_remote(self) -> bool:
        return self.kind == "remote"

    @property
    def cache_model_id(self) -> str:
        """Model identity used in cache keys.

        The offline providers fold their parameters in, so vectors produced
        under different seeds or noise levels never collide in one cache file.
        """
        if self.kind == "remote":
            return self.model_id
        ident = f"{self.model_id}|{self.kind}|dim={self.dim}|seed={self.seed}"
        if self.kind == "oracle":
            ident += f"|sigma={self.noise_sigma!r}"
        return ident


def hash_embed(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-random vector in [-1, 1)^dim for ``text``.

    SHA-256 over the 8-byte big-endian seed followed by the UTF-8 text gives a
    root digest; counter-mode rehashing ``SHA-256(root || be32(k))`` supplies
    4*dim bytes, read as little-endian uint32 and mapped by u / 2**31 - 1.
    """
    if dim < 1:
        raise ConfigError(f"dim must be >= 1, got {dim}")
    root = hashlib.sha256((seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "big") + text.encode("utf-8")).digest()
    n_blocks = -(-4 * dim // 32)
    stream = b"".join(hashlib.sha256(root + k.to_bytes(4, "big")).digest() for k in range(n_blocks))
    u = np.frombuffer(stream, dtype="<u4", count=dim)
    return u.astype(np.float64) / _U32_SCALE - 1.0


def oracle_embed(pair_id: int, side: str, noise_sigma: float, dim: int, seed: int = 0) -> np.ndarray:
    """Shared base vector for both sides of a pair; the target side gets noise."""
    if noise_sigma < 0:
        raise ConfigError("noise_sigma must be non-negative")
    base = hash_embed(str(pair_id), dim, seed)
    if side in ("source", "src") or noise_sigma == 0:
        return base
    if side not in ("target", "tgt"):
        raise ConfigError(f"unknown side {side!r}")
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, pair_id, 1])
    noise = np.random.Generator(np.random.PCG64(ss)).standard_normal(dim)
    return base + noise_sigma * noise


def oracle_text(side: str, pair_id: int, payload: str = "") -> str:
    """Synthetic sentence that the oracle provider can map back to its pair."""
    tag = "src" if side in ("source", "src") else "tgt"
    body = payload or f"synthetic sentence number {pair_id} for testing"
    return f"{tag}-{pair_id:06d} {body}"


def parse_oracle_text(text: str) -> tuple[str, int]:
    m = _ORACLE_TEXT_RE.match(text)
    if m is None:
        raise ConfigError(f"oracle provider cannot parse text {text[:40]!r}")
    return ("source" if m.group(1) == "src" else "target"), int(m.group(2))


class Transport(Protocol):
    def post_json(self, url: str, payload: dict, headers: dict, timeout: float) -> tuple[int, object]: ...


class HttpTransport:
    """Minimal JSON POST over urllib."""

    def post_json(self, url: str, payload: dict, headers: dict, timeout: float) -> tuple[int, object]:
        data = json.dumps(payload).encode("utf-8")
        req = urllib.request.Request(
            url, data=data, method="POST", headers={"Content-Type": "application/json", **headers}
        )
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                status, raw = resp.status, resp.read()
        except urllib.error.HTTPError as exc:
            status, raw = exc.code, exc.read()
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise TransportError(f"request to {url} failed: {exc}") from exc
        try:
            body = json.loads(raw.decode("utf-8")) if raw else None
        except (UnicodeDecodeError, json.JSONDecodeError):
            body = None
        return status, body


def _check_vectors(vectors: Sequence, n: int, dim: int) -> list[np.ndarray]:
    if not isinstance(vectors, (list, tuple)) or len(vectors) != n:
        got = len(vectors) if isinstance(vectors, (list, tuple)) else type(vectors).__name__
        raise DimensionMismatch(f"provider returned {got} vectors for {n} texts")
    out = []
    for i, v in enumerate(vectors):
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != dim:
            raise DimensionMismatch(f"vector {i} has shape {arr.shape}, expected ({dim},)")
        out.append(arr)
    return out


def _request_remote(texts, cfg: ProviderConfig, transport, clock, rate, guard) -> list[np.ndarray]:
    key = os.environ.get(cfg.api_key_env, "")
    if not key:
        raise AuthError(f"credential variable {cfg.api_key_env} is not set")
    fm = cfg.field_map
    payload = {fm["model"]: cfg.model_id, fm["input_type"]: cfg.input_type, fm["texts"]: list(texts)}
    headers = {"Authorization": f"Bearer {key}"}
    rate_retries = 0
    transport_retries = 0
    while True:
        if guard is not None:
            guard.acquire(len(texts))
        try:
            status, body = transport.post_json(cfg.endpoint_url, payload, headers, cfg.timeout)
            if status >= 500:
                raise TransportError(f"server error HTTP {status}")
        except TransportError as exc:
            if transport_retries == len(BACKOFF_SECONDS):
                raise
            delay = BACKOFF_SECONDS[transport_retries]
            transport_retries += 1
            log.warning("transport failure (%s); retrying in %ss", exc, delay)
            clock.sleep(delay)
            continue
        if status in (401, 403):
            raise AuthError(f"provider rejected the credential (HTTP {status})")
        if status == 429:
            if rate_retries == MAX_RATE_LIMIT_RETRIES:
                raise RateLimitError(f"still rate limited after {rate_retries} retries")
            rate_retries += 1
            log.warning("rate limited; sleeping %ss (retry %d)", rate.window_seconds, rate_retries)
            clock.sleep(rate.window_seconds)
            continue
        if status != 200 or not isinstance(body, dict) or fm["embeddings"] not in body:
            raise ProviderError(f"unexpected provider response (HTTP {status})")
        return _check_vectors(body[fm["embeddings"]], len(texts), cfg.dim)


def request_embeddings(
    texts: Sequence[str],
    cfg: ProviderConfig,
    *,
    rate: RateLimiterConfig | None = None,
    clock: Clock | None = None,
    transport: Transport | None = None,
    guard: RateGuard | None = None,
) -> list[np.ndarray]:
    """Embed one chunk of texts; returns raw (unnormalized) float64 vectors."""
    rate = rate or RateLimiterConfig()
    if not 1 <= len(texts) <= rate.chunk_size:
        raise ConfigError(f"chunk must hold 1..{rate.chunk_size} texts, got {len(texts)}")
    if cfg.kind == "hash_mock":
        return [hash_embed(t, cfg.dim, cfg.seed) for t in texts]
    if cfg.kind == "oracle":
        out = []
        for t in texts:
            side, pair_id = parse_oracle_text(t)
            out.append(oracle_embed(pair_id, side, cfg.noise_sigma, cfg.dim, cfg.seed))
        return out
    return _request_remote(
        texts, cfg, transport or HttpTransport(), clock or SystemClock(), rate, guard
    )

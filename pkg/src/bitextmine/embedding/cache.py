r"""Append-only on-disk store of raw embedding vectors.

One record per line::

    <sha256 hex key>\t<dim>\t<base64 of little-endian float32 values>\n

Later records for a key override earlier ones.  A record is only readable
once its terminating newline is on disk, so an interrupted append shows up as
a malformed final line instead of a silently short vector.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import os
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from ..errors import CacheCorruption, ValidationError

_KEY_RE = re.compile(r"^[0-9a-f]{64}$")


def cache_key(model_id: str, input_type: str, text: str) -> str:
    return hashlib.sha256(f"{model_id}\n{input_type}\n{text}".encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CacheRecord:
    key: str
    dim: int
    vector: np.ndarray

    @classmethod
    def build(cls, key: str, vector) -> "CacheRecord":
        vec = np.ascontiguousarray(vector, dtype="<f4").reshape(-1)
        vec.flags.writeable = False
        return cls(key, int(vec.shape[0]), vec)

    def encode(self) -> str:
        if not _KEY_RE.match(self.key):
            raise ValidationError(f"cache key must be 64 lowercase hex chars, got {self.key!r}")
        vec = np.asarray(self.vector, dtype="<f4")
        if vec.ndim != 1 or vec.shape[0] != self.dim or self.dim < 1:
            raise ValidationError(f"record dim {self.dim} does not match vector shape {vec.shape}")
        payload = base64.b64encode(vec.tobytes()).decode("ascii")
        return f"{self.key}\t{self.dim}\t{payload}\n"


def _decode(line: str, line_no: int, path) -> CacheRecord:
    if not line.endswith("\n"):
        raise CacheCorruption(line_no, "record is not newline-terminated (torn write?)", path)
    parts = line[:-1].split("\t")
    if len(parts) != 3:
        raise CacheCorruption(line_no, f"expected 3 tab-separated fields, got {len(parts)}", path)
    key, dim_s, payload = parts
    if not _KEY_RE.match(key):
        raise CacheCorruption(line_no, "malformed key", path)
    if not dim_s.isdigit() or int(dim_s) < 1:
        raise CacheCorruption(line_no, f"malformed dim {dim_s!r}", path)
    dim = int(dim_s)
    try:
        raw = base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError):
        raise CacheCorruption(line_no, "payload is not valid base64", path) from None
    if len(raw) != 4 * dim:
        raise CacheCorruption(line_no, f"payload has {len(raw)} bytes, expected {4 * dim}", path)
    vec = np.frombuffer(raw, dtype="<f4")
    return CacheRecord(key, dim, vec)


def iter_records(path: str | Path) -> Iterator[CacheRecord]:
    path = Path(path)
    if not path.exists():
        return
    # undecodable bytes become U+FFFD and fail validation on their own line
    with open(path, encoding="ascii", errors="replace", newline="") as fh:
        for line_no, line in enumerate(fh, 1):
            yield _decode(line, line_no, path)


class EmbeddingCache:
    """In-memory index over a cache file, with serialized appends."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._index: dict[str, CacheRecord] = {}
        for rec in iter_records(self.path):
            self._index[rec.key] = rec

    def __contains__(self, key: str) -> bool:
        return key in self._index

    def __len__(self) -> int:
        return len(self._index)

    def get(self, key: str) -> CacheRecord | None:
        return self._index.get(key)

    def put_many(self, records: Iterable[CacheRecord]) -> None:
        records = list(records)
        if not records:
            return
        blob = "".join(r.encode() for r in records)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="ascii", newline="") as fh:
                fh.write(blob)
                fh.flush()
                os.fsync(fh.fileno())
            for r in records:
                self._index[r.key] = r

    def put(self, record: CacheRecord) -> None:
        self.put_many([record])


def cache_put(record: CacheRecord, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    line = record.encode()
    with open(path, "a", encoding="ascii", newline="") as fh:
        fh.write(line)
        fh.flush()
        os.fsync(fh.fileno())


def cache_get(key: str, path: str | Path) -> CacheRecord | None:
    """Scan the whole file; the last record for ``key`` wins."""
    found = None
    for rec in iter_records(path):
        if rec.key == key:
            found = rec
    return found

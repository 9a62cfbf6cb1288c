"""Chunking, window packing and rate limiting for remote embedding requests."""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Literal, Protocol

from ..errors import ConfigError

Side = Literal["source", "target"]


@dataclass(frozen=True)
class RateLimiterConfig:
    window_seconds: float = 61.0
    max_texts_per_window: int = 4000
    chunk_size: int = 2000

    def __post_init__(self):
        if self.window_seconds <= 0:
            raise ConfigError("window_seconds must be positive")
        if self.chunk_size < 1 or self.max_texts_per_window < 1:
            raise ConfigError("chunk_size and max_texts_per_window must be positive")
        if self.chunk_size > self.max_texts_per_window:
            raise ConfigError(
                f"chunk_size ({self.chunk_size}) exceeds max_texts_per_window "
                f"({self.max_texts_per_window})"
            )


@dataclass(frozen=True)
class Chunk:
    side: Side
    start: int
    length: int


@dataclass(frozen=True)
class BatchPlan:
    chunks: tuple[Chunk, ...] = ()
    # each window is a tuple of indices into ``chunks``
    windows: tuple[tuple[int, ...], ...] = ()

    @property
    def n_sleeps(self) -> int:
        return max(len(self.windows) - 1, 0)

    def window_sizes(self) -> list[int]:
        return [sum(self.chunks[c].length for c in w) for w in self.windows]


def _side_chunks(side: Side, n: int, size: int) -> list[Chunk]:
    return [Chunk(side, s, min(size, n - s)) for s in range(0, n, size)]


def plan_batches(n_src: int, n_tgt: int, cfg: RateLimiterConfig = RateLimiterConfig()) -> BatchPlan:
    """Cut both sides into chunks and pack them greedily into rate windows.

    Source chunks come first, then target chunks; a new window is opened
    whenever the next chunk would push the current one past the limit.
    """
    if n_src < 0 or n_tgt < 0:
        raise ConfigError("text counts must be non-negative")
    chunks = _side_chunks("source", n_src, cfg.chunk_size) + _side_chunks(
        "target", n_tgt, cfg.chunk_size
    )
    windows: list[list[int]] = []
    load = 0
    for ci, chunk in enumerate(chunks):
        if not windows or load + chunk.length > cfg.max_texts_per_window:
            windows.append([])
            load = 0
        windows[-1].append(ci)
        load += chunk.length
    return BatchPlan(tuple(chunks), tuple(tuple(w) for w in windows))


def expected_counts(n_src: int, n_tgt: int, cfg: RateLimiterConfig) -> tuple[int, int]:
    return math.ceil(n_src / cfg.chunk_size), math.ceil(n_tgt / cfg.chunk_size)


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


@dataclass
class SimulatedClock:
    """Clock whose ``sleep`` only advances a counter; records every sleep."""

    t: float = 0.0
    sleeps: list[float] = field(default_factory=list)

    def now(self) -> float:
        return self.t

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self.sleeps.append(seconds)
            self.t += seconds

    def advance(self, seconds: float) -> None:
        self.t += seconds


class RateGuard:
    """Sliding-window admission check over every request attempt.

    The batch schedule already sleeps between windows; this guard only ever
    adds waiting when retries would otherwise overfill a window.
    """

    def __init__(self, cfg: RateLimiterConfig, clock: Clock):
        self.cfg = cfg
        self.clock = clock
        self._log: deque[tuple[float, int]] = deque()
        self.history: list[tuple[float, int]] = []

    def _expire(self, now: float) -> None:
        while self._log and self._log[0][0] <= now - self.cfg.window_seconds:
            self._log.popleft()

    def acquire(self, n: int) -> None:
        if n > self.cfg.max_texts_per_window:
            raise ConfigError(f"request of {n} texts can never fit in one window")
        while True:
            now = self.clock.now()
            self._expire(now)
            if sum(c for _, c in self._log) + n <= self.cfg.max_texts_per_window:
                break
            self.clock.sleep(self._log[0][0] + self.cfg.window_seconds - now)
        self._log.append((now, n))
        self.history.append((now, n))


def max_texts_in_any_window(history: list[tuple[float, int]], window_seconds: float) -> int:
    """Largest number of texts requested in any half-open interval (t, t + window]."""
    times = sorted(history)
    best = 0
    for i, (t_start, _) in enumerate(times):
        # the worst interval starts just before some request time
        total = sum(c for t, c in times[i:] if t < t_start + window_seconds)
        best = max(best, total)
    return best

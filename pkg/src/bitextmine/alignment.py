"""Exact one-best retrieval of target sentences for every source sentence.

Four criteria are supported: plain nearest neighbour (``nn``), inverted
nearest neighbour (``invnn``), inverted softmax (``invsoftmax``) and
cross-domain similarity local scaling (``csls``).  All of them reduce to dot
products of unit rows, evaluated block by block so that at most
``block_size x n`` similarities are held at once.

Similarities are always produced by one matrix product per aligned tile of
``TILE_ROWS`` query rows.  ``block_size`` is rounded up to whole tiles, which
makes every score bit-identical for any block size or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .corpus_prep import CleanCorpus
from .embedding.embed import EmbeddingMatrix
from .errors import ConfigError, DimensionMismatch, EmptyTargetError, ValidationError

Method = Literal["nn", "invnn", "invsoftmax", "csls"]
METHODS = ("nn", "invnn", "invsoftmax", "csls")
TILE_ROWS = 64


@dataclass(frozen=True)
class AlignmentParams:
    method: Method = "nn"
    csls_k: int = 10
    beta: float = 30.0
    threshold: float | None = None
    block_size: int = 1024

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.csls_k < 1:
            raise ConfigError("csls_k must be >= 1")
        if not self.beta > 0:
            raise ConfigError("beta must be > 0")
        if self.block_size < 1:
            raise ConfigError("block_size must be >= 1")
        if self.threshold is not None and not math.isfinite(self.threshold):
            raise ConfigError("threshold must be finite")

    def header(self) -> str:
        t = "none" if self.threshold is None else repr(float(self.threshold))
        return f"#method={self.method} k={self.csls_k} beta={float(self.beta)!r} threshold={t}"

    @classmethod
    def from_header(cls, line: str, **overrides) -> "AlignmentParams":
        if not line.startswith("#"):
            raise ValidationError(f"not an alignment header: {line!r}")
        fields = dict(tok.split("=", 1) for tok in line[1:].split())
        try:
            kw = dict(
                method=fields["method"],
                csls_k=int(fields["k"]),
                beta=float(fields["beta"]),
                threshold=None if fields["threshold"] == "none" else float(fields["threshold"]),
            )
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"malformed alignment header {line!r}") from exc
        kw.update(overrides)
        return cls(**kw)


@dataclass(frozen=True)
class AlignmentPair:
    src_idx: int
    tgt_idx: int
    score: float
    method: Method


@dataclass(frozen=True)
class AlignmentResult:
    pairs: tuple[AlignmentPair, ...]
    params: AlignmentParams
    n_src: int
    n_tgt: int

    def index_pairs(self) -> set[tuple[int, int]]:
        return {(p.src_idx, p.tgt_idx) for p in self.pairs}


# -- similarity primitives ---------------------------------------------------


def _as64(m) -> np.ndarray:
    data = m.data if isinstance(m, EmbeddingMatrix) else m
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"embedding dims differ: {a.shape[1]} vs {b.shape[1]}")


def cosine_block(src_rows, tgt) -> np.ndarray:
    """Dot products between unit rows: entry (i, j) = <src_i, tgt_j>."""
    a, b = _as64(src_rows), _as64(tgt)
    _check_dims(a, b)
    return a @ b.T


def _blocks(n: int, block_size: int) -> list[tuple[int, int]]:
    step = -(-block_size // TILE_ROWS) * TILE_ROWS
    return [(s, min(s + step, n)) for s in range(0, n, step)]


def _block_sims(queries: np.ndarray, keys: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Similarities of query rows [start, stop) against all keys, tile by tile."""
    keys_t = keys.T
    parts = [queries[t : min(t + TILE_ROWS, stop)] @ keys_t for t in range(start, stop, TILE_ROWS)]
    return parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)


def _map_blocks(fn: Callable[[int, int], object], n: int, block_size: int, n_threads: int) -> list:
    blocks = _blocks(n, block_size)
    if n_threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            return list(pool.map(lambda b: fn(*b), blocks))
    return [fn(s, e) for s, e in blocks]


def _topk_mean(sims: np.ndarray, k: int) -> np.ndarray:
    n = sims.shape[1]
    top = np.partition(sims, n - k, axis=1)[:, n - k :] if k < n else sims
    # partition leaves the top-k unordered; sort so the sum is order-stable
    return np.sort(top, axis=1).sum(axis=1) / k


def knn_mean_sim(queries, keys, k: int, *, block_size: int = 1024, n_threads: int = 1) -> np.ndarray:
    """Mean of the ``k`` largest similarities between each query and all keys."""
    q, kk = _as64(queries), _as64(keys)
    _check_dims(q, kk)
    if k < 1 or k > kk.shape[0]:
        raise ConfigError(f"k={k} must lie in 1..{kk.shape[0]} (number of keys)")
    parts = _map_blocks(
        lambda s, e: _topk_mean(_block_sims(q, kk, s, e), k), q.shape[0], block_size, n_threads
    )
    return np.concatenate(parts) if parts else np.zeros(0)


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1)
    return m + np.log(np.exp(x - m[:, None]).sum(axis=1))


# -- criteria ----------------------------------------------------------------


def _prepare(src, tgt, params: AlignmentParams) -> tuple[np.ndarray, np.ndarray]:
    s, t = _as64(src), _as64(tgt)
    _check_dims(s, t)
    if t.shape[0] == 0:
        raise EmptyTargetError("target matrix has no rows")
    return s, t


def _finish(idx, scores, params: AlignmentParams, n_src: int, n_tgt: int) -> AlignmentResult:
    pairs = []
    for i, (j, sc) in enumerate(zip(idx.tolist(), scores.tolist())):
        if params.threshold is not None and sc < params.threshold:
            continue
        pairs.append(AlignmentPair(i, int(j), float(sc), params.method))
    return AlignmentResult(tuple(pairs), params, n_src, n_tgt)


def _row_argmax(scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # np.argmax returns the first maximum, i.e. the lowest target index
    j = scores.argmax(axis=1)
    return j, scores[np.arange(scores.shape[0]), j]


def _source_pass(s, t, params, n_threads, score_fn) -> tuple[np.ndarray, np.ndarray]:
    def run(start, stop):
        return _row_argmax(score_fn(_block_sims(s, t, start, stop), start, stop))

    parts = _map_blocks(run, s.shape[0], params.block_size, n_threads)
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def align_nn(src, tgt, params: AlignmentParams = AlignmentParams(), n_threads: int = 1) -> AlignmentResult:
    s, t = _prepare(src, tgt, params)
    idx, sc = _source_pass(s, t, params, n_threads, lambda sims, a, b: sims)
    return _finish(idx, sc, params, s.shape[0], t.shape[0])


def align_csls(src, tgt, params: AlignmentParams = AlignmentParams(method="csls"), n_threads: int = 1) -> AlignmentResult:
    s, t = _prepare(src, tgt, params)
    k = params.csls_k
    if k > t.shape[0] or k > s.shape[0]:
        raise ConfigError(f"csls_k={k} exceeds corpus size ({s.shape[0]} sources, {t.shape[0]} targets)")
    r_src = knn_mean_sim(s, t, k, block_size=params.block_size, n_threads=n_threads)
    r_tgt = knn_mean_sim(t, s, k, block_size=params.block_size, n_threads=n_threads)

    def score(sims, a, b):
        return (2.0 * sims - r_src[a:b, None]) - r_tgt[None, :]

    idx, sc = _source_pass(s, t, params, n_threads, score)
    return _finish(idx, sc, params, s.shape[0], t.shape[0])


def _target_pass(s, t, params, n_threads, tile_fn, better) -> tuple:
    """Walk target tiles in order, keeping a running per-source best.

    ``tile_fn(cols)`` gets similarities of a target tile against every source
    (shape tile x n_src) and returns the tile's best (key..., local j) per
    source; ``better(new, old)`` decides strict improvement, so earlier (lower)
    target indices win ties.
    """

    def run(start, stop):
        out = []
        for ts in range(start, stop, TILE_ROWS):
            te = min(ts + TILE_ROWS, stop)
            *keys, j = tile_fn(t[ts:te] @ s.T)
            out.append((*keys, j + ts))
        return out

    best = None
    for block in _map_blocks(run, t.shape[0], params.block_size, n_threads):
        for cand in block:
            if best is None:
                best = list(cand)
                continue
            mask = better(cand, best)
            for slot, arr in zip(best, cand):
                slot[mask] = arr[mask]
    return best


def align_invsoftmax(
    src, tgt, params: AlignmentParams = AlignmentParams(method="invsoftmax"), n_threads: int = 1
) -> AlignmentResult:
    s, t = _prepare(src, tgt, params)
    if s.shape[0] == 0:
        return AlignmentResult((), params, 0, t.shape[0])
    beta = float(params.beta)

    def tile(cols):
        logits = beta * cols
        probs = np.exp(logits - _logsumexp_rows(logits)[:, None])
        j = probs.argmax(axis=0)
        return probs[j, np.arange(cols.shape[1])], j

    score, idx = _target_pass(s, t, params, n_threads, tile, lambda new, old: new[0] > old[0])
    return _finish(idx, score, params, s.shape[0], t.shape[0])


def _ranks_in_columns(cols: np.ndarray) -> np.ndarray:
    """rank[j, i] = number of sources scoring strictly above source i for target j."""
    srt = np.sort(cols, axis=1)
    n = cols.shape[1]
    return np.stack([n - np.searchsorted(srt[r], cols[r], side="right") for r in range(cols.shape[0])])


def align_invnn(src, tgt, params: AlignmentParams = AlignmentParams(method="invnn"), n_threads: int = 1) -> AlignmentResult:
    s, t = _prepare(src, tgt, params)
    if s.shape[0] == 0:
        return AlignmentResult((), params, 0, t.shape[0])
    cols_idx = np.arange(s.shape[0])

    def tile(cols):
        ranks = _ranks_in_columns(cols)
        min_rank = ranks.min(axis=0)
        cos = np.where(ranks == min_rank, cols, -np.inf)
        best_cos = cos.max(axis=0)
        j = (cos == best_cos).argmax(axis=0)
        return min_rank, cols[j, cols_idx], j

    def better(new, old):
        return (new[0] < old[0]) | ((new[0] == old[0]) & (new[1] > old[1]))

    rank, _, idx = _target_pass(s, t, params, n_threads, tile, better)
    return _finish(idx, -rank.astype(np.float64), params, s.shape[0], t.shape[0])


def score_table(src, tgt, params: AlignmentParams = AlignmentParams()) -> np.ndarray:
    """Dense n_src x n_tgt table of method scores, for inspection on small inputs."""
    s, t = _prepare(src, tgt, params)
    sims = cosine_block(s, t)
    if params.method == "nn":
        return sims
    if params.method == "csls":
        k = params.csls_k
        if k > t.shape[0] or k > s.shape[0]:
            raise ConfigError(f"csls_k={k} exceeds corpus size")
        return (2.0 * sims - knn_mean_sim(s, t, k)[:, None]) - knn_mean_sim(t, s, k)[None, :]
    cols = sims.T
    if params.method == "invsoftmax":
        logits = params.beta * cols
        return np.exp(logits - _logsumexp_rows(logits)[:, None]).T
    return -_ranks_in_columns(cols).T.astype(np.float64)


_DISPATCH = {"nn": align_nn, "invnn": align_invnn, "invsoftmax": align_invsoftmax, "csls": align_csls}


def align_matrices(src, tgt, params: AlignmentParams = AlignmentParams(), n_threads: int = 1) -> AlignmentResult:
    return _DISPATCH[params.method](src, tgt, params, n_threads)


def align(
    src_corpus: CleanCorpus,
    tgt_corpus: CleanCorpus,
    src_m,
    tgt_m,
    params: AlignmentParams = AlignmentParams(),
    n_threads: int = 1,
) -> AlignmentResult:
    if len(src_corpus) != _as64(src_m).shape[0] or len(tgt_corpus) != _as64(tgt_m).shape[0]:
        raise DimensionMismatch("matrix row counts do not match corpus sizes")
    return align_matrices(src_m, tgt_m, params, n_threads)


# -- TSV I/O -----------------------------------------------------------------


@dataclass(frozen=True)
class AlignedRow:
    src_idx: int
    tgt_idx: int
    score: float
    src_text: str
    tgt_text: str


def tsv_field(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def aligned_rows(result: AlignmentResult, src_corpus: CleanCorpus, tgt_corpus: CleanCorpus) -> list[AlignedRow]:
    return [
        AlignedRow(p.src_idx, p.tgt_idx, p.score, src_corpus[p.src_idx].text, tgt_corpus[p.tgt_idx].text)
        for p in result.pairs
    ]


def format_row(row: AlignedRow) -> str:
    return f"{row.src_idx}\t{row.tgt_idx}\t{row.score:.6f}\t{tsv_field(row.src_text)}\t{tsv_field(row.tgt_text)}"


def format_alignment_tsv(result: AlignmentResult, src_corpus: CleanCorpus, tgt_corpus: CleanCorpus) -> str:
    lines = [result.params.header()]
    lines += [format_row(r) for r in aligned_rows(result, src_corpus, tgt_corpus)]
    return "\n".join(lines) + "\n"


def write_alignment_tsv(result, src_corpus, tgt_corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_alignment_tsv(result, src_corpus, tgt_corpus))


def read_alignment_tsv(path: str | Path) -> tuple[AlignmentParams | None, list[AlignedRow]]:
    """Parse an alignment TSV; the header line is optional."""
    params = None
    rows: list[AlignedRow] = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                if no == 1:
                    params = AlignmentParams.from_header(line)
                continue
            parts = line.split("\t")
            if len(parts) < 5:
                raise ValidationError(f"{path}: line {no} has {len(parts)} fields, expected 5")
            try:
                rows.append(AlignedRow(int(parts[0]), int(parts[1]), float(parts[2]), parts[3], parts[4]))
            except ValueError as exc:
                raise ValidationError(f"{path}: line {no}: {exc}") from None
    return params, rows

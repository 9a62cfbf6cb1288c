"""Scoring alignments against gold pairings, pair statistics, annotation files."""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .alignment import AlignedRow, AlignmentPair, AlignmentResult, tsv_field
from .corpus_prep import CleanCorpus, read_lines, tokenize_words
from .errors import (
    ConfigError,
    EmptyPairs,
    IndexOutOfBounds,
    InvalidLabel,
    LineCountMismatch,
    ValidationError,
)

LABELS = (1, 2, 3, 4, 5)
LABEL_NAMES = {
    1: "not a translation",
    2: "bad",
    3: "acceptable translation",
    4: "good",
    5: "perfect",
}
ANNOTATION_HEADER = "src_idx\ttgt_idx\tscore\tsrc_text\ttgt_text\tlabel"
RATIO_DEFINITION = "mean over pairs of tgt_tokens / src_tokens"


@dataclass(frozen=True)
class GoldAlignment:
    pairs: frozenset[tuple[int, int]]
    n_src: int
    n_tgt: int

    def __post_init__(self):
        srcs = [i for i, _ in self.pairs]
        if len(set(srcs)) != len(srcs):
            raise ValidationError("gold alignment has more than one pair for some source")
        for i, j in self.pairs:
            if not (0 <= i < self.n_src and 0 <= j < self.n_tgt):
                raise IndexOutOfBounds(f"gold pair ({i}, {j}) outside {self.n_src}x{self.n_tgt}")

    @classmethod
    def identity(cls, n: int) -> "GoldAlignment":
        return cls(frozenset((i, i) for i in range(n)), n, n)


@dataclass(frozen=True)
class F1Report:
    precision: float
    recall: float
    f1: float
    n_pred: int
    n_gold: int
    n_correct: int

    def to_dict(self) -> dict:
        return asdict(self)


def _index_pairs(pred) -> tuple[list[tuple[int, int]], int | None, int | None]:
    if isinstance(pred, AlignmentResult):
        return [(p.src_idx, p.tgt_idx) for p in pred.pairs], pred.n_src, pred.n_tgt
    out = []
    for p in pred:
        out.append((p.src_idx, p.tgt_idx) if hasattr(p, "src_idx") else (int(p[0]), int(p[1])))
    return out, None, None


def evaluate_f1(pred: AlignmentResult | Iterable, gold: GoldAlignment) -> F1Report:
    """Micro precision/recall/F1 over (source, target) index pairs."""
    pairs, n_src, n_tgt = _index_pairs(pred)
    if n_src is not None and (n_src > gold.n_src or n_tgt > gold.n_tgt):
        raise IndexOutOfBounds(
            f"prediction covers {n_src}x{n_tgt} sentences, gold only {gold.n_src}x{gold.n_tgt}"
        )
    for i, j in pairs:
        if not (0 <= i < gold.n_src and 0 <= j < gold.n_tgt):
            raise IndexOutOfBounds(f"predicted pair ({i}, {j}) outside {gold.n_src}x{gold.n_tgt}")
    pred_set = set(pairs)
    n_correct = len(pred_set & gold.pairs)
    n_pred, n_gold = len(pred_set), len(gold.pairs)
    precision = n_correct / n_pred if n_pred else 0.0
    recall = n_correct / n_gold if n_gold else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return F1Report(precision, recall, f1, n_pred, n_gold, n_correct)


def load_gold_from_parallel(src_file: str | Path, tgt_file: str | Path) -> GoldAlignment:
    """Line i of the source file is the translation of line i of the target file."""
    n_src, n_tgt = len(read_lines(src_file)), len(read_lines(tgt_file))
    if n_src != n_tgt:
        raise LineCountMismatch(n_src, n_tgt)
    return GoldAlignment.identity(n_src)


def shuffle_permutation(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n)


def shuffle_corpus(corpus: CleanCorpus, seed: int) -> tuple[CleanCorpus, np.ndarray]:
    """Reorder a corpus; position p of the result holds original sentence perm[p]."""
    perm = shuffle_permutation(len(corpus), seed)
    texts = corpus.texts
    return CleanCorpus.from_texts([texts[p] for p in perm], corpus.language_tag), perm


def unshuffle_targets(result: AlignmentResult, perm: np.ndarray) -> AlignmentResult:
    pairs = tuple(
        AlignmentPair(p.src_idx, int(perm[p.tgt_idx]), p.score, p.method) for p in result.pairs
    )
    return AlignmentResult(pairs, result.params, result.n_src, result.n_tgt)


@dataclass(frozen=True)
class PairStats:
    mean_len_ratio: float
    unique_tgt_frac: float
    n_pairs: int
    ratio_definition: str = RATIO_DEFINITION

    def to_dict(self) -> dict:
        return asdict(self)


def _stats(lengths: Sequence[tuple[int, int]], tgt_ids: Sequence[int]) -> PairStats:
    if not lengths:
        raise EmptyPairs("no aligned pairs to compute statistics over")
    ratios = []
    for n, (ls, lt) in enumerate(lengths):
        if ls <= 0:
            raise ValidationError(f"pair {n} has an empty source sentence")
        ratios.append(lt / ls)
    n = len(lengths)
    return PairStats(math.fsum(ratios) / n, len(set(tgt_ids)) / n, n)


def compute_stats(pairs, src_corpus: CleanCorpus, tgt_corpus: CleanCorpus) -> PairStats:
    idx, _, _ = _index_pairs(pairs)
    lengths = []
    for i, j in idx:
        if not (0 <= i < len(src_corpus) and 0 <= j < len(tgt_corpus)):
            raise IndexOutOfBounds(f"pair ({i}, {j}) outside corpora")
        lengths.append((src_corpus[i].token_count, tgt_corpus[j].token_count))
    return _stats(lengths, [j for _, j in idx])


def stats_from_rows(rows: Sequence[AlignedRow]) -> PairStats:
    """Same statistics, counting tokens straight from the texts in an alignment file."""
    lengths = [(len(tokenize_words(r.src_text)), len(tokenize_words(r.tgt_text))) for r in rows]
    return _stats(lengths, [r.tgt_idx for r in rows])


# -- human annotation ----------------------------------------------------------


def sample_for_annotation(rows: Sequence, k: int, seed: int) -> list:
    """Uniform sample of ``k`` rows without replacement, kept in original order."""
    if not 1 <= k <= len(rows):
        raise ConfigError(f"sample size {k} must lie in 1..{len(rows)}")
    chosen = sorted(random.Random(seed).sample(range(len(rows)), k))
    return [rows[i] for i in chosen]


def format_annotation_tsv(sample: Sequence[AlignedRow], labels: Sequence | None = None) -> str:
    labels = labels if labels is not None else [""] * len(sample)
    lines = [ANNOTATION_HEADER]
    for r, lab in zip(sample, labels):
        lines.append(
            f"{r.src_idx}\t{r.tgt_idx}\t{r.score:.6f}\t{tsv_field(r.src_text)}\t{tsv_field(r.tgt_text)}\t{lab}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LabelDistribution:
    counts: dict[int, int]
    fractions: dict[int, float]
    n_labeled: int
    n_blank: int

    def to_dict(self) -> dict:
        return {
            "counts": {str(k): v for k, v in self.counts.items()},
            "fractions": {str(k): v for k, v in self.fractions.items()},
            "n_labeled": self.n_labeled,
            "n_blank": self.n_blank,
        }

    def percentages(self) -> dict[int, float]:
        return {k: 100.0 * v for k, v in self.fractions.items()}


def summarize_annotations(tsv: str | Path | Iterable[str]) -> LabelDistribution:
    """Label distribution of an annotation file; blank labels are counted apart.

    ``tsv`` is a path or an iterable of lines (line 1 may be the header).
    """
    if isinstance(tsv, (str, Path)):
        with open(tsv, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in tsv]
    counts = {lab: 0 for lab in LABELS}
    n_blank = 0
    for no, line in enumerate(lines, 1):
        if not line.strip() or (no == 1 and line.startswith("src_idx")):
            continue
        parts = line.split("\t")
        value = parts[5].strip() if len(parts) >= 6 else ""
        if not value:
            n_blank += 1
            continue
        try:
            label = int(value)
        except ValueError:
            raise InvalidLabel(no, value) from None
        if label not in counts:
            raise InvalidLabel(no, value)
        counts[label] += 1
    n = sum(counts.values())
    fractions = {lab: (c / n if n else 0.0) for lab, c in counts.items()}
    return LabelDistribution(counts, fractions, n, n_blank)


def format_f1_table(entries: Sequence[tuple[str, int, F1Report]]) -> str:
    """Tab-separated table of F1 scores (in percent), one row per evaluation set."""
    lines = ["data\t# sents\tf1"]
    lines += [f"{name}\t{n:,}\t{100 * rep.f1:.2f}%" for name, n, rep in entries]
    return "\n".join(lines) + "\n"


def dumps(obj) -> str:
    return json.dumps(obj.to_dict() if hasattr(obj, "to_dict") else obj, indent=2, sort_keys=True)

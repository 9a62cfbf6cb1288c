"""Synthetic parallel corpora whose gold alignment is known by construction."""

from __future__ import annotations

from pathlib import Path

from .corpus_prep import CleanCorpus
from .embedding.providers import oracle_text

_FILLER = (
    "the council met on monday to discuss the new water project",
    "farmers in the north reported a strong harvest this season",
    "the minister promised new roads before the rainy season",
    "students returned to school after a long strike ended",
    "traders said prices at the market rose again this week",
)


def oracle_corpora(n_pairs: int) -> tuple[CleanCorpus, CleanCorpus]:
    """``n_pairs`` source and target sentences; line i pairs with line i."""
    src = [oracle_text("source", i, _FILLER[i % len(_FILLER)]) for i in range(n_pairs)]
    tgt = [oracle_text("target", i, _FILLER[(i + 2) % len(_FILLER)]) for i in range(n_pairs)]
    return CleanCorpus.from_texts(src, "src"), CleanCorpus.from_texts(tgt, "tgt")


def write_oracle_fixture(n_pairs: int, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    src, tgt = oracle_corpora(n_pairs)
    paths = out_dir / "oracle.src", out_dir / "oracle.tgt"
    for corpus, path in zip((src, tgt), paths):
        path.write_text("".join(t + "\n" for t in corpus.texts), encoding="utf-8")
    return paths

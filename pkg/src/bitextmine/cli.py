"""Command-line entry point.

Exit codes: 0 success, 1 usage/configuration, 2 I/O, 3 provider or
credential failure, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import corpus_prep
from .alignment import format_alignment_tsv, read_alignment_tsv
from .config import RunConfig, load_config
from .embedding.cache import EmbeddingCache
from .embedding.embed import embed_corpora
from .errors import BitextError, ConfigError, ProviderError, ValidationError
from .evaluation import (
    evaluate_f1,
    format_annotation_tsv,
    load_gold_from_parallel,
    sample_for_annotation,
    stats_from_rows,
    summarize_annotations,
)
from .pipeline import evaluate_parallel, mine

log = logging.getLogger("bitextmine")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_PROVIDER, EXIT_VALIDATION = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--config", help="JSON run configuration")
    g.add_argument("--cache", help="embedding cache file")
    g.add_argument("--seed", type=int, help="seed for sampling and shuffling (default 42)")
    g.add_argument("--out", help="write output here instead of stdout")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _provider_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("provider")
    g.add_argument("--provider", dest="kind", choices=["remote", "hash_mock", "oracle"])
    g.add_argument("--model-id")
    g.add_argument("--endpoint", dest="endpoint_url")
    g.add_argument("--input-type")
    g.add_argument("--dim", type=int)
    g.add_argument("--api-key-env", help="name of the variable holding the credential")
    g.add_argument("--provider-seed", type=int)
    g.add_argument("--noise-sigma", type=float)
    g = p.add_argument_group("rate limit")
    g.add_argument("--window-seconds", type=float)
    g.add_argument("--max-texts-per-window", type=int)
    g.add_argument("--chunk-size", type=int)


def _align_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("alignment")
    g.add_argument("--method", choices=["nn", "invnn", "invsoftmax", "csls"])
    g.add_argument("--csls-k", type=int)
    g.add_argument("--beta", type=float)
    g.add_argument("--threshold", type=float)
    g.add_argument("--block-size", type=int)
    g.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="bitextmine", description="Mine and evaluate parallel sentences.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prepare", parents=[common], help="split and filter raw documents")
    p.add_argument("input", help="directory of .txt documents, or one file with blank-line separated documents")
    p.add_argument("output", help="sentence file to write")
    p.add_argument("--lang", default="und")
    p.add_argument("--min-words", type=int, default=5)
    p.add_argument("--max-words", type=int, default=80)
    p.add_argument("--dedup", action="store_true", help="drop repeated sentences (off by default)")
    p.add_argument("--report", help="write the preparation report JSON here")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("embed", parents=[common], help="fill the embedding cache for one or two corpora")
    p.add_argument("source")
    p.add_argument("target", nargs="?")
    _provider_flags(p)

    p = sub.add_parser("align", parents=[common], help="align SOURCE sentences to TARGET sentences")
    p.add_argument("source")
    p.add_argument("target")
    _provider_flags(p)
    _align_flags(p)

    p = sub.add_parser("evaluate", parents=[common], help="F1 against line-parallel gold files")
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--pred", help="score this alignment TSV instead of running the aligner")
    _provider_flags(p)
    _align_flags(p)

    p = sub.add_parser("stats", parents=[common], help="length ratio and target uniqueness of an alignment")
    p.add_argument("alignment")

    p = sub.add_parser("sample", parents=[common], help="draw pairs for human annotation")
    p.add_argument("alignment")
    p.add_argument("-k", type=int, default=150)

    p = sub.add_parser("report", parents=[common], help="label distribution of an annotated sample")
    p.add_argument("annotations")
    return parser


def _overrides(args) -> dict:
    get = lambda name: getattr(args, name, None)  # noqa: E731
    provider = {
        "kind": get("kind"),
        "model_id": get("model_id"),
        "endpoint_url": get("endpoint_url"),
        "input_type": get("input_type"),
        "dim": get("dim"),
        "api_key_env": get("api_key_env"),
        "seed": get("provider_seed"),
        "noise_sigma": get("noise_sigma"),
    }
    rate = {
        "window_seconds": get("window_seconds"),
        "max_texts_per_window": get("max_texts_per_window"),
        "chunk_size": get("chunk_size"),
    }
    align = {
        "method": get("method"),
        "csls_k": get("csls_k"),
        "beta": get("beta"),
        "threshold": get("threshold"),
        "block_size": get("block_size"),
    }
    return {
        "provider": provider,
        "rate": rate,
        "align": align,
        "cache_path": get("cache"),
        "seed": get("seed"),
        "threads": get("threads"),
    }


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_prepare(args, cfg: RunConfig) -> int:
    if args.min_words > args.max_words or args.min_words < 1:
        raise ConfigError(f"--min-words {args.min_words} / --max-words {args.max_words} is not a valid range")
    if not Path(args.input).exists():
        raise FileNotFoundError(f"input path {args.input} does not exist")
    docs = corpus_prep.read_documents(args.input)
    corpus, report = corpus_prep.prepare_documents(
        docs, args.min_words, args.max_words, language_tag=args.lang, dedup=args.dedup, workers=args.workers
    )
    corpus_prep.write_corpus(corpus, args.output)
    text = _json(json.loads(report.to_json()))
    _emit(text, args.report or args.out)
    return EXIT_OK


def cmd_embed(args, cfg: RunConfig) -> int:
    src = corpus_prep.read_corpus(args.source)
    tgt = corpus_prep.read_corpus(args.target) if args.target else None
    run = embed_corpora(src, tgt, cfg.provider, cfg.rate, EmbeddingCache(cfg.cache_path))
    summary = {
        "n_source": len(src),
        "n_target": len(tgt) if tgt is not None else 0,
        "n_cached": run.n_cached,
        "n_requested": run.n_requested,
        "n_calls": run.n_calls,
        "n_windows": len(run.plan.windows),
        "cache": str(cfg.cache_path),
    }
    _emit(_json(summary), args.out)
    return EXIT_OK


def cmd_align(args, cfg: RunConfig) -> int:
    src = corpus_prep.read_corpus(args.source)
    tgt = corpus_prep.read_corpus(args.target)
    result = mine(src, tgt, cfg, cache=EmbeddingCache(cfg.cache_path))
    _emit(format_alignment_tsv(result, src, tgt), args.out)
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    gold = load_gold_from_parallel(args.source, args.target)
    if args.pred:
        _, rows = read_alignment_tsv(args.pred)
        report = evaluate_f1(rows, gold)
    else:
        src = corpus_prep.read_corpus(args.source)
        tgt = corpus_prep.read_corpus(args.target)
        report = evaluate_parallel(src, tgt, cfg, cache=EmbeddingCache(cfg.cache_path)).report
    out = report.to_dict()
    out["n_sents"] = gold.n_src
    out["averaging"] = "micro over (src_idx, tgt_idx) pairs"
    _emit(_json(out), args.out)
    return EXIT_OK


def cmd_stats(args, cfg: RunConfig) -> int:
    _, rows = read_alignment_tsv(args.alignment)
    _emit(_json(stats_from_rows(rows).to_dict()), args.out)
    return EXIT_OK


def cmd_sample(args, cfg: RunConfig) -> int:
    _, rows = read_alignment_tsv(args.alignment)
    sample = sample_for_annotation(rows, args.k, cfg.seed)
    _emit(format_annotation_tsv(sample), args.out)
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    dist = summarize_annotations(args.annotations)
    out = dist.to_dict()
    out["percentages"] = {str(k): round(v, 2) for k, v in dist.percentages().items()}
    _emit(_json(out), args.out)
    return EXIT_OK


COMMANDS = {
    "prepare": cmd_prepare,
    "embed": cmd_embed,
    "align": cmd_align,
    "evaluate": cmd_evaluate,
    "stats": cmd_stats,
    "sample": cmd_sample,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BitextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

"""Noise sweep on synthetic oracle corpora: F1 of every retrieval method.

    python3 scripts/oracle_sweep.py --pairs 1000 --sigmas 0 0.5 1 2 4 8
"""

import argparse
import tempfile
import time
from pathlib import Path

from bitextmine.alignment import METHODS, AlignmentParams
from bitextmine.config import RunConfig
from bitextmine.embedding import EmbeddingCache, ProviderConfig
from bitextmine.pipeline import evaluate_parallel
from bitextmine.synthetic import oracle_corpora


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--dim", type=int, default=768)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
    ap.add_argument("--methods", nargs="+", default=list(METHODS), choices=METHODS)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    src, tgt = oracle_corpora(args.pairs)
    print("sigma\t" + "\t".join(args.methods) + "\tseconds")
    with tempfile.TemporaryDirectory() as tmp:
        for sigma in args.sigmas:
            provider = ProviderConfig(kind="oracle", model_id="oracle", dim=args.dim, seed=args.seed, noise_sigma=sigma)
            cache = EmbeddingCache(Path(tmp) / f"sigma-{sigma}.cache")
            t0 = time.perf_counter()
            cells = []
            for method in args.methods:
                cfg = RunConfig(provider=provider, align=AlignmentParams(method=method), seed=args.seed, threads=args.threads)
                cells.append(f"{evaluate_parallel(src, tgt, cfg, cache=cache).report.f1:.4f}")
            print(f"{sigma:g}\t" + "\t".join(cells) + f"\t{time.perf_counter() - t0:.2f}")


if __name__ == "__main__":
    main()

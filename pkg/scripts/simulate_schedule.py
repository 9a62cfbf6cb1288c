"""Replay the request schedule for a corpus pair against a simulated clock.

No network traffic: a stub transport answers every request, and the clock
only advances when the embedder sleeps.  Prints the batch plan, the sleeps and
the busiest window.

    python3 scripts/simulate_schedule.py 13560 22671
"""

import argparse
import os
import tempfile
from pathlib import Path

import numpy as np

from bitextmine.corpus_prep import CleanCorpus
from bitextmine.embedding import ProviderConfig, RateLimiterConfig, SimulatedClock, embed_corpora
from bitextmine.embedding.schedule import max_texts_in_any_window


class StubTransport:
    def __init__(self, clock, dim):
        self.clock, self.dim, self.calls = clock, dim, []

    def post_json(self, url, payload, headers, timeout):
        self.calls.append((self.clock.now(), len(payload["texts"])))
        return 200, {"embeddings": np.ones((len(payload["texts"]), self.dim)).tolist()}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("n_src", type=int)
    ap.add_argument("n_tgt", type=int)
    ap.add_argument("--window-seconds", type=float, default=61.0)
    ap.add_argument("--max-texts-per-window", type=int, default=4000)
    ap.add_argument("--chunk-size", type=int, default=2000)
    args = ap.parse_args()

    rate = RateLimiterConfig(args.window_seconds, args.max_texts_per_window, args.chunk_size)
    os.environ.setdefault("EMBED_API_KEY", "simulated")
    cfg = ProviderConfig(kind="remote", endpoint_url="https://embed.invalid", model_id="sim", dim=2)
    clock = SimulatedClock()
    stub = StubTransport(clock, cfg.dim)
    src = CleanCorpus.from_texts(f"src {i}" for i in range(args.n_src))
    tgt = CleanCorpus.from_texts(f"tgt {i}" for i in range(args.n_tgt))
    with tempfile.TemporaryDirectory() as tmp:
        run = embed_corpora(src, tgt, cfg, rate, Path(tmp) / "sim.cache", clock, transport=stub)

    plan = run.plan
    print(f"chunks:  {len(plan.chunks)} ({sum(c.side == 'source' for c in plan.chunks)} source)")
    print(f"windows: {len(plan.windows)}  sizes={plan.window_sizes()}")
    print(f"sleeps:  {len(clock.sleeps)} x {args.window_seconds:g}s = {sum(clock.sleeps):g}s simulated")
    print(f"busiest {args.window_seconds:g}s interval: {max_texts_in_any_window(stub.calls, args.window_seconds)} texts")


if __name__ == "__main__":
    main()

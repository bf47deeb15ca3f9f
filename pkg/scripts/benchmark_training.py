#!/usr/bin/env python3
"""Measure training throughput on a synthetic corpus.

Useful for sizing epochs/dimensions before a long run:

    python3 scripts/benchmark_training.py --tokens-per-slot 50000 --dim 100
"""

from __future__ import annotations

import argparse
import time

from verseshift import corpus, synthgen, trainer


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--slots", type=int, default=6)
    parser.add_argument("--tokens-per-slot", type=int, default=50_000)
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--window", type=int, default=5)
    parser.add_argument("--negatives", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=1)
    parser.add_argument("--batch-size", type=int, default=2048)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    occurrences = max(5, args.tokens_per_slot // (40 * 10 * 2))  # half the budget is background
    planted = [
        synthgen.PlantedWord(f"w{i:02d}", "stable", occurrences_per_slot=occurrences, cluster_size=10)
        for i in range(40)
    ]
    spec = synthgen.SynthSpec(
        slot_count=args.slots,
        start_year=1600,
        slot_width=50,
        filler_words=50,
        tokens_per_slot=args.tokens_per_slot,
        seed=args.seed,
        planted=planted,
    )
    records = synthgen.generate(spec)
    stanzas = corpus.normalize(
        [corpus.Stanza(r["id"], r["poem_id"], r["author"], r["year"], r["lines"]) for r in records]
    )
    table = corpus.build_slots(1600, 1600 + args.slots * 50, 50, 50)
    assignment = corpus.assign_slots(stanzas, table)
    vocab = corpus.build_vocab(assignment, min_count=1)
    docs = [[s.tokens for s in slot] for slot in assignment.per_slot]

    config = trainer.TrainConfig(
        dim=args.dim,
        context_window=args.window,
        negatives=args.negatives,
        epochs=args.epochs,
        subsample_threshold=0.0,
        seed=args.seed,
        workers=args.workers,
        batch_size=args.batch_size,
    )
    total_tokens = sum(len(s.tokens) for slot in assignment.per_slot for s in slot)
    print(f"{len(vocab)} words, {total_tokens} tokens, d={args.dim}, workers={args.workers}")
    started = time.monotonic()
    model = trainer.train(docs, vocab, table, config)
    elapsed = time.monotonic() - started
    pairs = total_tokens * 2 * args.window * args.epochs  # upper bound, windows clip at bounds
    print(f"trained in {elapsed:.1f}s  (~{pairs / elapsed / 1e6:.2f} M pair-steps/s upper bound)")
    print(f"final mean loss {model.epoch_losses[-1]:.5f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""End-to-end dataset build: training split, static test split, the four
perturbed sets, fine-tuning and few-shot prompts, and dataset statistics.

Full-scale sizes (tens of thousands of records) take a while; the defaults build a
small but fully structured mirror of the pipeline. Example:

    python scripts/build_datasets.py --out data_build --train 600 --static 200
"""
import argparse
import json
import sys
from pathlib import Path

from derivekit.cli import main as cli


def run(args):
    code = cli([str(a) for a in args])
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data_build")
    parser.add_argument("--train", type=int, default=600)
    parser.add_argument("--static", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    opts = parser.parse_args()

    out = Path(opts.out)
    out.mkdir(parents=True, exist_ok=True)

    # disjoint seeds give disjoint training and held-out static splits
    run(["generate", "--count", opts.train, "--seed", opts.seed,
         "--out", out / "train.jsonl"])
    run(["generate", "--count", opts.static, "--seed", opts.seed + 1,
         "--out", out / "static.jsonl"])

    run(["prompt", "--mode", "finetune", "--in", out / "train.jsonl",
         "--out", out / "train_prompts.jsonl"])
    run(["prompt", "--mode", "finetune", "--in", out / "static.jsonl",
         "--out", out / "static_prompts.jsonl"])

    for kind in ("vr", "ee", "ag", "sr"):
        run(["perturb", "--kind", kind, "--seed", opts.seed,
             "--in", out / "static.jsonl",
             "--out", out / f"{kind}.jsonl",
             "--prompts-out", out / f"{kind}_prompts.jsonl"])

    run(["prompt", "--mode", "fewshot", "--in", out / "static_prompts.jsonl",
         "--train", out / "train_prompts.jsonl", "--seed", opts.seed,
         "--out", out / "static_fewshot.jsonl"])
    for kind in ("vr", "ee", "ag", "sr"):
        run(["prompt", "--mode", "fewshot", "--in", out / f"{kind}_prompts.jsonl",
             "--train", out / "train_prompts.jsonl", "--seed", opts.seed,
             "--out", out / f"{kind}_fewshot.jsonl"])

    run(["verify", "--in", out / "train.jsonl"])
    run(["stats", "--in", out / "train.jsonl", "--out", out / "train_stats.json"])

    sizes = {p.name: sum(1 for _ in open(p)) for p in sorted(out.glob("*.jsonl"))}
    print(json.dumps(sizes, indent=1))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""WER versus Eb/N0 for RPA, SRPA and SDSS on RM(7,2) at several pruning factors.

One CSV per decoder setting lands in the output directory; every setting uses
the same trial streams so the curves share their noise realizations.
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from rmdecode import DecoderConfig, SimJob, run_job
from rmdecode.cli import parse_grid
from rmdecode.harness import persist


@dataclass
class Config:
    m: int = 7
    r: int = 2
    ebn0: str = "1:0.5:4"
    rps: list[Fraction] = field(default_factory=lambda: [Fraction(1, 32), Fraction(1, 8), Fraction(1, 2)])
    r_q: Fraction = Fraction(17, 20)
    min_words: int = 100_000
    min_errors: int = 400
    max_words: int = 10_000_000
    seed: int = 0
    workers: int = 1
    outdir: str = "results/fig1"


def settings(cfg: Config):
    yield "rpa", DecoderConfig("rpa")
    for rp in cfg.rps:
        tag = f"{rp.numerator}_{rp.denominator}"
        yield f"srpa_{tag}", DecoderConfig("srpa", r_p=rp)
        yield f"sdss_{tag}", DecoderConfig("sdss", r_p=rp, r_q=cfg.r_q)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ebn0", default=Config.ebn0, help="grid a:step:b or list")
    ap.add_argument("--min-words", type=int, default=Config.min_words)
    ap.add_argument("--min-errors", type=int, default=Config.min_errors)
    ap.add_argument("--max-words", type=int, default=Config.max_words)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--workers", type=int, default=Config.workers)
    ap.add_argument("--outdir", default=Config.outdir)
    ap.add_argument("--skip-rpa", action="store_true", help="leave out the (slow) full RPA curve")
    args = ap.parse_args()
    cfg = Config(ebn0=args.ebn0, min_words=args.min_words, min_errors=args.min_errors, max_words=args.max_words,
                 seed=args.seed, workers=args.workers, outdir=args.outdir)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    points = tuple(float(x) for x in parse_grid(cfg.ebn0))
    for name, dec in settings(cfg):
        if name == "rpa" and args.skip_rpa:
            continue
        job = SimJob(cfg.m, cfg.r, dec, points, min_words=cfg.min_words, min_word_errors=cfg.min_errors,
                     max_words=cfg.max_words, master_seed=cfg.seed)
        results = run_job(job, workers=cfg.workers)
        persist(results, outdir / f"{name}.csv", job)
        print(name, " ".join(f"{r.ebn0_db:g}:{r.wer:.3g}" for r in results), flush=True)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""WER of SDSS decoding versus the DSS factor r_q at a single Eb/N0."""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from fractions import Fraction

from rmdecode import DecoderConfig, SimJob, sweep_rq
from rmdecode.cli import parse_grid
from rmdecode.harness import persist


@dataclass
class Config:
    m: int = 7
    r: int = 2
    r_p: Fraction = Fraction(1, 32)
    ebn0_db: float = 2.0
    grid: str = "0:0.05:1"
    words: int = 100_000
    seed: int = 0
    workers: int = 1
    out: str = "results/fig2_rq_sweep.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--words", type=int, default=Config.words, help="words per r_q value")
    ap.add_argument("--grid", default=Config.grid)
    ap.add_argument("--ebn0", type=float, default=Config.ebn0_db)
    ap.add_argument("--seed", type=int, default=Config.seed)
    ap.add_argument("--workers", type=int, default=Config.workers)
    ap.add_argument("--out", default=Config.out)
    args = ap.parse_args()
    cfg = Config(ebn0_db=args.ebn0, grid=args.grid, words=args.words, seed=args.seed, workers=args.workers,
                 out=args.out)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    job = SimJob(cfg.m, cfg.r, DecoderConfig("sdss", r_p=cfg.r_p), (cfg.ebn0_db,), min_words=cfg.words,
                 min_word_errors=0, max_words=cfg.words, master_seed=cfg.seed)
    grid = parse_grid(cfg.grid)
    sweep = sweep_rq(job, grid, workers=cfg.workers)
    for rq, res in sweep.entries:
        print(f"r_q={float(rq):.2f} wer={res.wer:.5f} [{res.wer_ci_lo:.5f}, {res.wer_ci_hi:.5f}]")
    print(f"best r_q = {sweep.best_rq}")
    persist([res for _, res in sweep.entries], cfg.out, job,
            extra={"rq_grid": [str(x) for x in grid], "best_rq": str(sweep.best_rq)})


if __name__ == "__main__":
    main()

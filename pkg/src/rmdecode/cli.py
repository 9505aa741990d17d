"""Command-line front end: ``rmdecode <subcommand> ...``.

Every run prints its fully resolved configuration as one JSON line on stderr
before doing any work; results go to stdout and, where given, ``--out``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

import numpy as np

from .channel import ChannelConfig, RngStream, decoder_keys, simulate_words
from .complexity import complexity_gain, count_fht_bound
from .decoders import DecoderConfig, as_fraction, decode, decode_batch
from .harness import SimJob, persist, persist_subset_study, run_job, subset_study, sweep_rq
from .rm_core import ParameterError, make_code


class UsageError(Exception):
    pass


def parse_code(text: str) -> tuple[int, int]:
    try:
        m, r = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected m,r but got {text!r}")
    try:
        make_code(m, r)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return m, r


def parse_rational(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational or decimal: {text!r}")


def parse_grid(text: str) -> list[Fraction]:
    """``a:step:b`` (inclusive), a comma list, or a single value."""
    try:
        if ":" in text:
            a, step, b = (as_fraction(x) for x in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            count = int((b - a) / step)
            return [a + i * step for i in range(count + 1)]
        return [as_fraction(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"unparsable grid {text!r}")


def _decoder_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", type=parse_code, required=True, metavar="M,R", help="RM code parameters")
    p.add_argument("--decoder", choices=("rpa", "srpa", "sdss"), default="rpa", help="decoder variant (default: rpa)")
    p.add_argument("--rp", type=parse_rational, default=Fraction(1), help="pruning factor, e.g. 1/32 (default: 1)")
    p.add_argument("--rq", type=parse_rational, default=None,
                   help="DSS factor (default: 0.85 for sdss, 0 otherwise)")
    p.add_argument("--theta", type=float, default=0.05, help="convergence threshold (default: 0.05)")
    p.add_argument("--schedule", choices=("full", "top-only"), default=None,
                   help="iteration schedule (default: top-only for sdss, full otherwise)")
    p.add_argument("--fixed-subset", action="store_true", help="draw one subset per word instead of per iteration")
    p.add_argument("--llr-cap", type=float, default=40.0, help="LLR clipping magnitude (default: 40)")
    p.add_argument("--reed-ties", choices=("keyed", "zero"), default="keyed",
                   help="tie rule of the final Reed pass (default: keyed)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")


def _sim_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-words", type=int, default=100_000, help="minimum words per point (default: 100000)")
    p.add_argument("--min-errors", type=int, default=400, help="minimum word errors per point (default: 400)")
    p.add_argument("--max-words", type=int, default=10_000_000, help="hard cap on words per point (default: 1e7)")
    p.add_argument("--chunk-words", type=int, default=1000, help="words per work item (default: 1000)")
    p.add_argument("--all-zero", action="store_true", help="send the all-zero codeword only")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    p.add_argument("--out", default=None, help="CSV output path; a .json sidecar is written next to it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmdecode", description="Reed-Muller RPA/SRPA/SDSS decoding benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo WER/BER over an SNR grid")
    _decoder_args(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ebn0", type=parse_grid, help="Eb/N0 grid in dB: a:step:b, list, or value")
    g.add_argument("--bsc", type=parse_grid, help="BSC crossover grid")
    _sim_args(p)

    p = sub.add_parser("sweep-rq", help="WER versus DSS factor at one Eb/N0")
    _decoder_args(p)
    p.add_argument("--ebn0", type=float, required=True, help="Eb/N0 in dB")
    p.add_argument("--rq-grid", type=parse_grid, default=parse_grid("0:0.05:1"), help="r_q grid (default: 0:0.05:1)")
    _sim_args(p)

    p = sub.add_parser("count-fht", help="worst-case FHT decodings per word")
    _decoder_args(p)
    p.add_argument("--measure", type=int, default=0, metavar="WORDS",
                   help="also decode this many words and report the mean count (default: 0)")
    p.add_argument("--ebn0", type=float, default=2.0, help="Eb/N0 for --measure (default: 2.0)")

    p = sub.add_parser("subset-study", help="error counts of every fixed p-subset decoder over all received words")
    p.add_argument("--code", type=parse_code, default=(4, 2), metavar="M,R", help="RM code (default: 4,2)")
    p.add_argument("--p", type=int, default=3, help="subset size (default: 3)")
    p.add_argument("--crossover", type=float, default=0.1, help="BSC crossover setting the LLR magnitude (default: 0.1)")
    p.add_argument("--theta", type=float, default=0.05, help="convergence threshold (default: 0.05)")
    p.add_argument("--reed-ties", choices=("keyed", "zero"), default="keyed", help="final Reed tie rule (default: keyed)")
    p.add_argument("--seed", type=int, default=0, help="seed for keyed ties (default: 0)")
    p.add_argument("--out", default=None, help="CSV output path")

    p = sub.add_parser("decode-one", help="decode a single LLR vector")
    _decoder_args(p)
    p.add_argument("--llr", required=True, help="comma-separated LLRs, length 2^m")
    return parser


def _decoder_config(args) -> DecoderConfig:
    rq = args.rq if args.rq is not None else (Fraction(17, 20) if args.decoder == "sdss" else Fraction(0))
    return DecoderConfig(
        variant=args.decoder,
        r_p=args.rp,
        r_q=rq,
        theta=args.theta,
        schedule=args.schedule,
        llr_cap=args.llr_cap,
        fixed_subset=args.fixed_subset,
        reed_ties=args.reed_ties,
    )


def _sim_job(args, cfg: DecoderConfig, points, channel: str) -> SimJob:
    return SimJob(
        m=args.code[0],
        r=args.code[1],
        decoder=cfg,
        points=tuple(float(x) for x in points),
        channel=channel,
        min_words=args.min_words,
        min_word_errors=args.min_errors,
        max_words=args.max_words,
        master_seed=args.seed,
        all_zero=args.all_zero,
        chunk_words=args.chunk_words,
    )


def _echo(config: dict) -> None:
    print("# config " + json.dumps(config, sort_keys=True), file=sys.stderr)


def _print_results(results) -> None:
    print("code,decoder,r_p,r_q,point,words,word_errors,wer,wer_ci_lo,wer_ci_hi,ber,mean_fht")
    for res in results:
        point = res.ebn0_db if res.ebn0_db is not None else res.crossover
        print(f"{res.code},{res.decoder},{res.r_p},{res.r_q},{point:g},{res.words},{res.word_errors},"
              f"{res.wer:.6g},{res.wer_ci_lo:.6g},{res.wer_ci_hi:.6g},{res.ber:.6g},{res.mean_fht:.6g}")


def cmd_simulate(args) -> int:
    cfg = _decoder_config(args)
    points, channel = (args.ebn0, "awgn") if args.ebn0 is not None else (args.bsc, "bsc")
    job = _sim_job(args, cfg, points, channel)
    _echo({"command": "simulate", "workers": args.workers, "out": args.out, **job.to_dict()})
    results = run_job(job, workers=args.workers)
    if args.out:
        persist(results, args.out, job)
    _print_results(results)
    return 0


def cmd_sweep_rq(args) -> int:
    cfg = _decoder_config(args)
    job = _sim_job(args, cfg, [args.ebn0], "awgn")
    grid = args.rq_grid
    _echo({"command": "sweep-rq", "rq_grid": [str(x) for x in grid], "workers": args.workers,
           "out": args.out, **job.to_dict()})
    sweep = sweep_rq(job, grid, workers=args.workers)
    results = [res for _, res in sweep.entries]
    if args.out:
        persist(results, args.out, job, extra={"rq_grid": [str(x) for x in grid], "best_rq": str(sweep.best_rq)})
    _print_results(results)
    print(f"best r_q = {sweep.best_rq} (wer {sweep.best[1].wer:.6g})")
    return 0


def cmd_count_fht(args) -> int:
    cfg = _decoder_config(args)
    code = make_code(*args.code)
    _echo({"command": "count-fht", "code": list(args.code), "decoder": cfg.to_dict(), "measure": args.measure,
           "ebn0_db": args.ebn0, "seed": args.seed})
    bound = count_fht_bound(code, cfg)
    print(bound)
    if args.measure > 0:
        ch = ChannelConfig("awgn", ebn0_db=args.ebn0, rate=code.rate, llr_cap=cfg.llr_cap)
        ids = np.arange(args.measure)
        _, _, llrs = simulate_words(code, ch, args.seed, ids)
        out = decode_batch(llrs, code, cfg, decoder_keys(args.seed, ids))
        mean = float(out.fht_count.mean())
        srpa = count_fht_bound(code, DecoderConfig("srpa", r_p=cfg.r_p, schedule="full"))
        print(f"measured mean {mean:.2f} over {args.measure} words; SRPA bound {srpa}; "
              f"gain {complexity_gain(mean, srpa):.4f}")
    return 0


def cmd_subset_study(args) -> int:
    m, r = args.code
    _echo({"command": "subset-study", "code": [m, r], "p": args.p, "crossover": args.crossover,
           "theta": args.theta, "reed_ties": args.reed_ties, "seed": args.seed, "out": args.out})
    study = subset_study(m, r, args.p, args.crossover, args.theta, args.seed, args.reed_ties)
    if args.out:
        persist_subset_study(study, args.out)
    print(f"subsets {len(study.subsets)}, inputs {study.inputs}, mean word errors {study.mean:.2f}, "
          f"max relative spread {study.max_relative_spread:.3g}")
    for count, freq in study.histogram.items():
        print(f"{count},{freq}")
    return 0


def cmd_decode_one(args) -> int:
    cfg = _decoder_config(args)
    code = make_code(*args.code)
    try:
        llr = np.array([float(x) for x in args.llr.split(",")])
    except ValueError:
        raise UsageError(f"unparsable LLR list {args.llr!r}")
    if llr.shape != (code.n,):
        raise UsageError(f"expected {code.n} LLRs, got {llr.size}")
    _echo({"command": "decode-one", "code": list(args.code), "decoder": cfg.to_dict(), "seed": args.seed,
           "llr": llr.tolist()})
    out = decode(llr, code, cfg, RngStream(args.seed, 0))
    print("".join(str(b) for b in out.codeword))
    print(f"iterations {out.iterations}, fht {out.fht_count}, converged {out.converged}", file=sys.stderr)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-rq": cmd_sweep_rq,
    "count-fht": cmd_count_fht,
    "subset-study": cmd_subset_study,
    "decode-one": cmd_decode_one,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        print(f"rmdecode {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"rmdecode {args.command}: runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Monte Carlo WER/BER estimation, r_q sweeps, the exhaustive subset study and result files.

Trials are grouped into fixed-size chunks. A chunk's draws depend only on the
master seed and the trial ids it covers, and the stop rule is evaluated on
chunks in index order, so results do not depend on the worker count.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import numpy as np

from .channel import ChannelConfig, bsc_llr_magnitude, decoder_keys, simulate_words
from .decoders import DecoderConfig, as_fraction, decode_batch, num_projections
from .rm_core import ParameterError, ResourceLimitError, make_code

log = logging.getLogger(__name__)

Z95 = 1.959963984540054


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = errors / trials
    z2n = z * z / trials
    centre = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class SimJob:
    m: int
    r: int
    decoder: DecoderConfig
    points: tuple[float, ...]
    channel: str = "awgn"
    min_words: int = 100_000
    min_word_errors: int = 400
    max_words: int = 10_000_000
    master_seed: int = 0
    all_zero: bool = False
    chunk_words: int = 1000

    def __post_init__(self):
        make_code(self.m, self.r)
        object.__setattr__(self, "points", tuple(float(x) for x in self.points))
        if self.channel not in ("awgn", "bsc"):
            raise ParameterError(f"unknown channel {self.channel!r}")
        if self.chunk_words < 1 or self.max_words < 1:
            raise ParameterError("chunk_words and max_words must be positive")

    def channel_config(self, point: float) -> ChannelConfig:
        rate = make_code(self.m, self.r).rate
        if self.channel == "awgn":
            return ChannelConfig("awgn", ebn0_db=point, rate=rate, llr_cap=self.decoder.llr_cap)
        return ChannelConfig("bsc", crossover=point, rate=rate, llr_cap=self.decoder.llr_cap)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["decoder"] = self.decoder.to_dict()
        d["points"] = list(self.points)
        return d


@dataclass(frozen=True)
class PointResult:
    """Statistics for one channel point; field order is the CSV column order."""

    code: str
    decoder: str
    r_p: str
    r_q: str
    channel: str
    ebn0_db: float | None
    crossover: float | None
    words: int
    word_errors: int
    bit_errors: int
    wer: float
    wer_ci_lo: float
    wer_ci_hi: float
    ber: float
    mean_fht: float
    mean_iters: float
    seed: int
    capped: bool


CSV_COLUMNS = [f.name for f in fields(PointResult)]


@dataclass
class _Tally:
    words: int = 0
    word_errors: int = 0
    bit_errors: int = 0
    fht: int = 0
    iters: int = 0

    def add(self, other: "_Tally") -> None:
        self.words += other.words
        self.word_errors += other.word_errors
        self.bit_errors += other.bit_errors
        self.fht += other.fht
        self.iters += other.iters


def run_chunk(job: SimJob, point: float, start: int, count: int) -> _Tally:
    """Simulate trials ``start .. start+count-1`` at one channel point."""
    code = make_code(job.m, job.r)
    ids = np.arange(start, start + count)
    msgs, words, llrs = simulate_words(code, job.channel_config(point), job.master_seed, ids, job.all_zero)
    out = decode_batch(llrs, code, job.decoder, decoder_keys(job.master_seed, ids))
    wrong = np.any(out.codewords != words, axis=1)
    return _Tally(
        words=count,
        word_errors=int(wrong.sum()),
        bit_errors=int((out.messages != msgs).sum()),
        fht=int(out.fht_count.sum()),
        iters=int(out.iterations.sum()),
    )


def _run_chunk_args(args):
    return run_chunk(*args)


def _done(t: _Tally, job: SimJob) -> bool:
    return t.words >= job.min_words and t.word_errors >= job.min_word_errors


def _summarize(job: SimJob, point: float, t: _Tally, capped: bool) -> PointResult:
    code = make_code(job.m, job.r)
    lo, hi = wilson_interval(t.word_errors, t.words)
    words = max(t.words, 1)
    return PointResult(
        code=f"RM({job.m},{job.r})",
        decoder=job.decoder.variant,
        r_p=str(job.decoder.r_p),
        r_q=str(job.decoder.r_q),
        channel=job.channel,
        ebn0_db=point if job.channel == "awgn" else None,
        crossover=point if job.channel == "bsc" else None,
        words=t.words,
        word_errors=t.word_errors,
        bit_errors=t.bit_errors,
        wer=t.word_errors / words,
        wer_ci_lo=lo,
        wer_ci_hi=hi,
        ber=t.bit_errors / (words * code.k),
        mean_fht=t.fht / words,
        mean_iters=t.iters / words,
        seed=job.master_seed,
        capped=capped,
    )


def _run_point(job: SimJob, point: float, pool: ProcessPoolExecutor | None, workers: int) -> PointResult:
    tally = _Tally()
    chunk = 0
    n_chunks = math.ceil(job.max_words / job.chunk_words)
    while chunk < n_chunks:
        wave = range(chunk, min(n_chunks, chunk + workers))
        args = [
            (job, point, c * job.chunk_words, min(job.chunk_words, job.max_words - c * job.chunk_words))
            for c in wave
        ]
        results = pool.map(_run_chunk_args, args) if pool is not None else map(_run_chunk_args, args)
        for res in results:
            tally.add(res)
            chunk += 1
            if _done(tally, job):
                break
        if _done(tally, job):
            break
    res = _summarize(job, point, tally, capped=not _done(tally, job))
    log.info("%s %s point=%g words=%d errors=%d wer=%.4g", res.code, res.decoder, point, res.words, res.word_errors, res.wer)
    return res


def run_job(job: SimJob, workers: int = 1) -> list[PointResult]:
    """Simulate every channel point of ``job``.

    Each point runs until both ``min_words`` and ``min_word_errors`` are met,
    checked after every chunk; reaching ``max_words`` first marks the point
    as ``capped``.
    """
    if workers < 1:
        raise ParameterError("workers must be >= 1")
    if workers == 1:
        return [_run_point(job, pt, None, 1) for pt in job.points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [_run_point(job, pt, pool, workers) for pt in job.points]


@dataclass
class SweepResult:
    entries: list[tuple[Fraction, PointResult]]

    @property
    def best(self) -> tuple[Fraction, PointResult]:
        return min(self.entries, key=lambda e: (e[1].wer, e[0]))

    @property
    def best_rq(self) -> Fraction:
        return self.best[0]


def sweep_rq(job: SimJob, rq_grid, workers: int = 1) -> SweepResult:
    """Run ``job`` once per r_q value on identical trial streams."""
    grid = [as_fraction(x) for x in rq_grid]
    if not grid:
        raise ParameterError("empty r_q grid")
    if len(job.points) != 1:
        raise ParameterError("an r_q sweep needs exactly one channel point")
    entries = []
    for rq in grid:
        sub = replace(job, decoder=replace(job.decoder, r_q=rq))
        entries.append((rq, run_job(sub, workers)[0]))
    return SweepResult(entries)


@dataclass
class SubsetStudy:
    subsets: list[tuple[int, ...]]
    word_errors: np.ndarray
    inputs: int
    histogram: dict[int, int] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(self.word_errors.mean())

    @property
    def max_relative_spread(self) -> float:
        """Largest |count - mean| / mean over subsets."""
        return float(np.max(np.abs(self.word_errors - self.mean)) / self.mean)


def subset_study(
    m: int, r: int, p: int, crossover: float = 0.1, theta: float = 0.05, seed: int = 0, reed_ties: str = "keyed"
) -> SubsetStudy:
    """Decode every received word of F_2^n with each fixed p-subset SRPA decoder.

    The all-zero codeword is taken as sent, so any nonzero decision is a word
    error. LLRs are the BSC values for ``crossover``. Received word ``i`` uses
    decoder stream ``(seed, i)`` for every subset, so only the subset varies.
    """
    code = make_code(m, r)
    n = code.n
    if r != 2:
        raise ParameterError("the subset study fixes the top-level subset only and needs r = 2")
    if n > 16:
        raise ResourceLimitError(f"subset study limited to n <= 16, got n={n}")
    if not 0 < p <= n - 1:
        raise ParameterError(f"p must lie in [1, {n - 1}]")
    if math.comb(n - 1, p) > 1000:
        raise ResourceLimitError(f"C({n - 1},{p}) subsets exceed the 1000 guard")
    ys = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    llrs = bsc_llr_magnitude(crossover) * (1.0 - 2.0 * ys)
    keys = decoder_keys(seed, np.arange(len(ys)))
    cfg = DecoderConfig("srpa", r_p=Fraction(p, n - 1), theta=theta, schedule="full", reed_ties=reed_ties)
    assert num_projections(cfg.r_p, m) == p
    subsets = list(combinations(range(1, n), p))
    errors = np.empty(len(subsets), dtype=np.int64)
    for i, s in enumerate(subsets):
        out = decode_batch(llrs, code, cfg, keys, top_subset=s)
        errors[i] = int(np.any(out.codewords != 0, axis=1).sum())
    return SubsetStudy(subsets, errors, len(ys), dict(sorted(Counter(errors.tolist()).items())))


# ---------------------------------------------------------------------------
# persistence


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def persist(results: list[PointResult], path, job: SimJob | None = None, extra: dict | None = None) -> Path:
    """Write one CSV row per point and a JSON sidecar describing the job."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for res in results:
            w.writerow([_fmt(getattr(res, c)) for c in CSV_COLUMNS])
    sidecar = {"job": job.to_dict() if job is not None else None, "columns": CSV_COLUMNS}
    if extra:
        sidecar.update(extra)
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


_PARSERS = {
    "ebn0_db": lambda s: float(s) if s else None,
    "crossover": lambda s: float(s) if s else None,
    "words": int,
    "word_errors": int,
    "bit_errors": int,
    "wer": float,
    "wer_ci_lo": float,
    "wer_ci_hi": float,
    "ber": float,
    "mean_fht": float,
    "mean_iters": float,
    "seed": int,
    "capped": lambda s: s == "1",
}


def load_results(path) -> list[PointResult]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [PointResult(**{c: _PARSERS.get(c, str)(row[c]) for c in CSV_COLUMNS}) for row in rows]


def result_dict(res: PointResult) -> dict:
    return asdict(res)


def persist_subset_study(study: SubsetStudy, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subset", "word_errors"])
        for s, e in zip(study.subsets, study.word_errors.tolist()):
            w.writerow([" ".join(map(str, s)), e])
    summary = {
        "inputs": study.inputs,
        "subsets": len(study.subsets),
        "mean": study.mean,
        "max_relative_spread": study.max_relative_spread,
        "histogram": {str(k): v for k, v in study.histogram.items()},
    }
    path.with_suffix(".json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path

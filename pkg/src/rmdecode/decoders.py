"""Recursive projection-aggregation decoders for RM codes.

Three variants share one recursion:

* ``rpa``  -- every nonzero one-dimensional subspace at every level;
* ``srpa`` -- a uniformly random subset of ``p`` subspaces per level;
* ``sdss`` -- the ``q`` subspaces whose cosets pair the most similarly reliable
  LLRs form a shortlist, and ``p`` of them are drawn at random.

All work is vectorized over a batch of words. Randomness comes from per-word
64-bit keys hashed with the iteration index and candidate position, so a word
decodes identically whether it is alone or inside any batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from fractions import Fraction

import numpy as np

from .channel import LLR_CAP, RngStream, mix_keys
from .rm_core import ParameterError, RmCode, coset_tables, make_code, parity_table

VARIANTS = ("rpa", "srpa", "sdss")
SCHEDULES = ("full", "top-only")

# salts separating the different uses of a word key
_SALT_SELECT = 1 << 40
_SALT_CHILD = 2 << 40
_SALT_FIXED = 3 << 40
_SALT_REED = 4 << 40

# soft limit on elements per gathered array inside one vectorized step
_CHUNK_ELEMENTS = 1 << 21


def as_fraction(x) -> Fraction:
    """Exact rational from "1/32", "0.85", 0.85 or Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x).strip())


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder variant and its parameters.

    ``schedule=None`` resolves to ``top-only`` for SDSS and ``full`` otherwise.
    ``fixed_subset`` makes SRPA/SDSS draw one subset per word and level instead
    of redrawing every iteration. ``reed_ties`` chooses how tied majority votes
    in the final Reed pass resolve: ``keyed`` flips a coin derived from the
    word key, ``zero`` always votes 0 (which favours the all-zero codeword).
    """

    variant: str = "rpa"
    r_p: Fraction = Fraction(1)
    r_q: Fraction = Fraction(0)
    theta: float = 0.05
    schedule: str | None = None
    llr_cap: float = LLR_CAP
    fixed_subset: bool = False
    reed_ties: str = "keyed"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown decoder variant {self.variant!r}")
        r_p = Fraction(1) if self.variant == "rpa" else as_fraction(self.r_p)
        r_q = as_fraction(self.r_q)
        if not 0 < r_p <= 1:
            raise ParameterError(f"r_p must lie in (0, 1], got {r_p}")
        if not 0 <= r_q <= 1:
            raise ParameterError(f"r_q must lie in [0, 1], got {r_q}")
        if self.reed_ties not in ("keyed", "zero"):
            raise ParameterError(f"unknown reed tie rule {self.reed_ties!r}")
        if self.theta < 0:
            raise ParameterError(f"theta must be >= 0, got {self.theta}")
        schedule = self.schedule
        if schedule is None:
            schedule = "top-only" if self.variant == "sdss" else "full"
        schedule = schedule.replace("_", "-").lower()
        if schedule not in SCHEDULES:
            raise ParameterError(f"unknown schedule {self.schedule!r}")
        object.__setattr__(self, "r_p", r_p)
        object.__setattr__(self, "r_q", r_q)
        object.__setattr__(self, "schedule", schedule)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "r_p": str(self.r_p),
            "r_q": str(self.r_q),
            "theta": self.theta,
            "schedule": self.schedule,
            "llr_cap": self.llr_cap,
            "fixed_subset": self.fixed_subset,
            "reed_ties": self.reed_ties,
        }


def num_projections(r_p: Fraction, m: int) -> int:
    """p = ceil(r_p (n - 1)) for n = 2^m."""
    return max(1, math.ceil(as_fraction(r_p) * ((1 << m) - 1)))


def pool_size(r_p: Fraction, r_q: Fraction, m: int) -> int:
    """Shortlist size q = ceil((1 - r_q + r_q r_p)(n - 1)), clamped to [p, n - 1]."""
    r_p, r_q = as_fraction(r_p), as_fraction(r_q)
    n1 = (1 << m) - 1
    q = math.ceil((1 - r_q + r_q * r_p) * n1)
    return min(n1, max(num_projections(r_p, m), q))


def max_iterations(m: int) -> int:
    return (m + 1) // 2


@dataclass(frozen=True)
class SubsetSelection:
    chosen: tuple[int, ...]
    candidate_pool_size: int


@dataclass
class DecodeOutcome:
    codeword: np.ndarray
    message: np.ndarray
    final_llr: np.ndarray
    iterations: int
    fht_count: int
    converged: bool


@dataclass
class BatchOutcome:
    """Per-word results of :func:`decode_batch`; arrays share the batch axis."""

    codewords: np.ndarray
    messages: np.ndarray
    final_llr: np.ndarray
    iterations: np.ndarray
    fht_count: np.ndarray
    converged: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# elementary steps


def boxplus(a, b):
    """ln(e^(a+b) + 1) - ln(e^a + e^b), evaluated with log-sum-exp."""
    return np.logaddexp(np.add(a, b), 0.0) - np.logaddexp(a, b)


def project(llr, subspace: int) -> np.ndarray:
    """Projected LLRs onto the quotient by ``{0, subspace}``, in quotient-index order."""
    llr = np.asarray(llr, dtype=np.float64)
    m = llr.shape[-1].bit_length() - 1
    if llr.shape[-1] != 1 << m or m < 2:
        raise ParameterError(f"LLR length {llr.shape[-1]} is not a power of two >= 4")
    if not 0 < subspace < llr.shape[-1]:
        raise ParameterError(f"subspace id {subspace} out of range")
    reps, _ = coset_tables(m)
    r = reps[subspace]
    return boxplus(llr[..., r], llr[..., r ^ subspace])


def fwht(x: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis: out[j] = sum_z x[z] (-1)^<j,z>."""
    x = np.array(x, dtype=np.float64)
    n = x.shape[-1]
    lead = x.shape[:-1]
    x = x.reshape(-1, n)
    h = 1
    while h < n:
        y = x.reshape(x.shape[0], n // (2 * h), 2, h)
        a = y[:, :, 0, :]
        b = y[:, :, 1, :]
        x = np.stack((a + b, a - b), axis=2).reshape(-1, n)
        h *= 2
    return x.reshape(*lead, n)


def _fht_decode_batch(llr: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    spectrum = fwht(llr)
    j = np.argmax(np.abs(spectrum), axis=1)
    peak = spectrum[np.arange(len(j)), j]
    bits = parity_table(m)[j] ^ (peak < 0).astype(np.uint8)[:, None]
    return bits, np.abs(peak)


def fht_decode_order1(llr) -> tuple[np.ndarray, float]:
    """Soft-decision ML decoding of a first-order RM code through its Hadamard spectrum.

    The largest-magnitude coefficient picks the linear part; its sign picks
    the complement. Ties go to the smallest transform index.
    """
    llr = np.asarray(llr, dtype=np.float64)
    m = llr.shape[-1].bit_length() - 1
    if llr.ndim != 1 or llr.shape[0] != 1 << m or m < 1:
        raise ParameterError(f"LLR length {llr.shape[-1]} is not a power of two >= 2")
    bits, metric = _fht_decode_batch(llr[None, :], m)
    return bits[0], float(metric[0])


def aggregate(llr, selections) -> np.ndarray:
    """Average sign-corrected neighbour LLRs over the selected subspaces.

    Args:
        llr: length-n LLR vector.
        selections: iterable of ``(subspace_id, reconstruction)`` pairs, the
            reconstruction being a length-n/2 binary word in quotient order.
    """
    llr = np.asarray(llr, dtype=np.float64)
    selections = list(selections)
    if not selections:
        raise ParameterError("aggregation needs at least one reconstruction")
    n = llr.shape[-1]
    m = n.bit_length() - 1
    _, index = coset_tables(m)
    z = np.arange(n)
    total = np.zeros(n)
    for s, rec in selections:
        rec = np.asarray(rec, dtype=np.uint8)
        if rec.shape != (n // 2,):
            raise ParameterError(f"reconstruction length {rec.shape} != {n // 2}")
        nb = llr[z ^ s]
        total += np.where(rec[index[s]] == 1, -nb, nb)
    return total / len(selections)


def is_converged(old, new, theta: float) -> bool:
    old = np.asarray(old, dtype=np.float64)
    new = np.asarray(new, dtype=np.float64)
    return bool(np.all(np.abs(new - old) <= theta * np.abs(old)))


def subspace_distances(llr, metric: str = "weighted") -> np.ndarray:
    """Per-subspace reliability mismatch, ordered by subspace id 1..n-1.

    ``raw`` sums ||L(z0)| - |L(z1)|| over cosets; ``weighted`` sums
    |exp(-|L(z0)|) - exp(-|L(z1)|)|.
    """
    llr = np.asarray(llr, dtype=np.float64)
    m = llr.shape[-1].bit_length() - 1
    return _distances(llr.reshape(-1, llr.shape[-1]), m, metric).reshape(*llr.shape[:-1], -1)


def _distances(L: np.ndarray, m: int, metric: str = "weighted") -> np.ndarray:
    if metric == "weighted":
        w = np.exp(-np.abs(L))
    elif metric == "raw":
        w = np.abs(L)
    else:
        raise ParameterError(f"unknown distance metric {metric!r}")
    reps, _ = coset_tables(m)
    n = 1 << m
    s = np.arange(1, n)
    r = reps[1:]
    diff = np.abs(w[:, r] - w[:, r ^ s[:, None]])
    # fixed left-to-right order so a word's sum does not depend on the batch shape
    total = diff[:, :, 0].copy()
    for c in range(1, diff.shape[2]):
        total += diff[:, :, c]
    return total


def _random_subset(pool: np.ndarray, p: int, keys: np.ndarray) -> np.ndarray:
    """Uniform p-subset of each row of ``pool``; positions with the p smallest hashes win."""
    q = pool.shape[1]
    if p == q:
        return pool
    h = mix_keys(keys[:, None], np.arange(q, dtype=np.uint64)[None, :])
    pick = np.argsort(h, axis=1, kind="stable")[:, :p]
    return np.take_along_axis(pool, pick, axis=1)


def shortlist(distances, q: int) -> np.ndarray:
    """Subspace ids of the q smallest distances per row (ties: smaller id first)."""
    d = np.atleast_2d(np.asarray(distances, dtype=np.float64))
    return np.argsort(d, axis=1, kind="stable")[:, :q] + 1


def _sdss_pool(L: np.ndarray, m: int, q: int) -> np.ndarray:
    n1 = (1 << m) - 1
    if q >= n1:
        return np.broadcast_to(np.arange(1, n1 + 1), (L.shape[0], n1))
    return shortlist(_distances(L, m, "weighted"), q)


def select_random(pool, p: int, rng: RngStream) -> SubsetSelection:
    pool = np.asarray(list(pool), dtype=np.int64)
    if not 0 < p <= len(pool):
        raise ParameterError(f"cannot draw {p} of {len(pool)} subspaces")
    key = np.array([rng.decoder_key()], dtype=np.uint64)
    chosen = _random_subset(pool[None, :], p, key)[0]
    return SubsetSelection(tuple(sorted(int(c) for c in chosen)), len(pool))


def sdss_select(llr, m: int, r_p, r_q, rng: RngStream) -> SubsetSelection:
    """Shortlist the q lowest weighted-distance subspaces, then draw p of them."""
    L = np.asarray(llr, dtype=np.float64)[None, :]
    p = num_projections(r_p, m)
    q = pool_size(r_p, r_q, m)
    pool = _sdss_pool(L, m, q)
    key = np.array([rng.decoder_key()], dtype=np.uint64)
    chosen = _random_subset(np.ascontiguousarray(pool), p, key)[0]
    return SubsetSelection(tuple(sorted(int(c) for c in chosen)), q)


# ---------------------------------------------------------------------------
# recursion


def _footprint(m: int, r: int, cfg: DecoderConfig) -> int:
    """Rough element count one word occupies while being decoded at this level."""
    n = 1 << m
    if r <= 1:
        return n
    p = num_projections(cfg.r_p, m)
    own = p * n
    if cfg.variant == "sdss":
        own = max(own, (n - 1) * n // 2)
    return own + p * _footprint(m - 1, r - 1, cfg)


def _select(L, m, cfg, p, q, keys, it, fixed):
    n1 = (1 << m) - 1
    if fixed is not None:
        return np.broadcast_to(fixed, (L.shape[0], len(fixed)))
    if cfg.variant == "rpa" or p == n1:
        return np.broadcast_to(np.arange(1, n1 + 1), (L.shape[0], n1))
    salt = _SALT_FIXED if cfg.fixed_subset else _SALT_SELECT + it
    sel_keys = mix_keys(keys, np.uint64(salt))
    if cfg.variant == "srpa":
        pool = np.broadcast_to(np.arange(1, n1 + 1), (L.shape[0], n1))
    else:
        pool = _sdss_pool(L, m, q)
    return np.sort(_random_subset(np.ascontiguousarray(pool), p, sel_keys), axis=1)


def _iteration(L, m, r, cfg, p, q, keys, it, fixed):
    """One projection / decode / aggregation pass. Returns (new LLRs, FHT counts)."""
    A, n = L.shape
    S = _select(L, m, cfg, p, q, keys, it, fixed)
    ps = S.shape[1]
    reps, index = coset_tables(m)
    base = (np.arange(A) * n)[:, None, None]
    flat = L.reshape(-1)
    r0 = reps[S]
    proj = boxplus(np.take(flat, base + r0), np.take(flat, base + (r0 ^ S[:, :, None])))

    child_salt = _SALT_CHILD if cfg.fixed_subset else _SALT_CHILD + it
    child_keys = mix_keys(mix_keys(keys, np.uint64(child_salt))[:, None], S.astype(np.uint64))
    child = _decode_level(proj.reshape(A * ps, n // 2), m - 1, r - 1, child_keys.reshape(-1), cfg, False)
    rec = child.bits.reshape(A, ps, n // 2)

    rec_base = (np.arange(A * ps) * (n // 2)).reshape(A, ps, 1)
    yhat = np.take(rec.reshape(-1), rec_base + index[S])
    nb = np.take(flat, base + (np.arange(n)[None, None, :] ^ S[:, :, None]))
    signed = np.where(yhat == 1, -nb, nb)
    total = signed[:, 0, :].copy()
    for j in range(1, ps):
        total += signed[:, j, :]
    return total / ps, child.fht.reshape(A, ps).sum(axis=1)


@dataclass
class _LevelResult:
    bits: np.ndarray
    llr: np.ndarray
    fht: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray


def _decode_level(L, m, r, keys, cfg: DecoderConfig, top: bool, fixed=None) -> _LevelResult:
    B, n = L.shape
    if r == 1:
        bits, _ = _fht_decode_batch(L, m)
        ones = np.ones(B, dtype=np.int64)
        return _LevelResult(bits, L, ones, np.zeros(B, dtype=np.int64), np.ones(B, dtype=bool))

    n_iter = max_iterations(m) if (top or cfg.schedule == "full") else 1
    p = num_projections(cfg.r_p, m)
    q = pool_size(cfg.r_p, cfg.r_q, m)
    L = np.array(L, dtype=np.float64)
    fht = np.zeros(B, dtype=np.int64)
    iters = np.zeros(B, dtype=np.int64)
    conv = np.zeros(B, dtype=bool)
    chunk = max(1, _CHUNK_ELEMENTS // _footprint(m, r, cfg))

    active = np.arange(B)
    for it in range(n_iter):
        if active.size == 0:
            break
        still = []
        for lo in range(0, active.size, chunk):
            idx = active[lo:lo + chunk]
            old = L[idx]
            new, count = _iteration(old, m, r, cfg, p, q, keys[idx], it, fixed)
            ok = np.all(np.abs(new - old) <= cfg.theta * np.abs(old), axis=1)
            L[idx] = new
            fht[idx] += count
            iters[idx] += 1
            conv[idx] = ok
            still.append(idx[~ok])
        active = np.concatenate(still)

    bits = (L < 0).astype(np.uint8)
    return _LevelResult(bits, L, fht, iters, conv)


# ---------------------------------------------------------------------------
# Reed's majority-logic decoder


@lru_cache(maxsize=None)
def _vote_matrices(m: int, r: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per degree d (from r down to 0): generator row ids and the (n, rows * 2^(m-d))
    0/1 matrix whose columns select the subcubes summed by each vote."""
    code = make_code(m, r)
    z = np.arange(code.n)
    out = []
    for d in range(r, -1, -1):
        rows = np.array([i for i, mono in enumerate(code.monomials) if len(mono) == d])
        blocks = []
        for i in rows:
            free = [v for v in range(m) if v not in code.monomials[i]]
            cell = np.zeros(code.n, dtype=np.int64)
            for pos, v in enumerate(free):
                cell |= ((z >> v) & 1) << pos
            blocks.append(np.eye(1 << (m - d), dtype=np.float32)[cell])
        out.append((rows, np.concatenate(blocks, axis=1)))
    return out


def reed_decode_batch(hard, code: RmCode, keys=None) -> tuple[np.ndarray, np.ndarray]:
    """Majority-logic decoding of hard words, highest degree first.

    Each degree-d coefficient is voted on by the 2^(m-d) XOR sums over the
    subcubes spanned by its variables. Ties vote 0, or, when per-word ``keys``
    are given, follow a coin hashed from the key and the monomial index.

    Returns:
        (codewords (B, n), messages (B, k))
    """
    y = np.array(hard, dtype=np.uint8).reshape(-1, code.n)
    B, m = y.shape[0], code.m
    msg = np.zeros((B, code.k), dtype=np.uint8)
    G = code.generator.astype(np.float32)
    for rows, votes in _vote_matrices(m, code.r):
        n_votes = votes.shape[1] // len(rows)
        parity = (y.astype(np.float32) @ votes).astype(np.int64) & 1
        ones = parity.reshape(B, len(rows), n_votes).sum(axis=2)
        decided = 2 * ones > n_votes
        if keys is not None:
            coin = mix_keys(keys[:, None], (rows + _SALT_REED).astype(np.uint64)[None, :]) >> np.uint64(63)
            decided |= (2 * ones == n_votes) & (coin == 1)
        msg[:, rows] = decided
        layer = (msg[:, rows].astype(np.float32) @ G[rows]).astype(np.int64) & 1
        y = y ^ layer.astype(np.uint8)
    codewords = (msg.astype(np.float32) @ G).astype(np.int64) & 1
    return codewords.astype(np.uint8), msg


def reed_decode(hard, code: RmCode) -> np.ndarray:
    hard = np.asarray(hard, dtype=np.uint8)
    if hard.shape != (code.n,):
        raise ParameterError(f"word length {hard.shape} != n = {code.n}")
    return reed_decode_batch(hard[None, :], code)[0][0]


# ---------------------------------------------------------------------------
# public decoding entry points


def decode_batch(llrs, code: RmCode, cfg: DecoderConfig, keys, top_subset=None) -> BatchOutcome:
    """Decode a (B, n) batch of LLR vectors.

    Args:
        keys: (B,) uint64 per-word keys, e.g. from ``channel.decoder_keys``.
        top_subset: optional fixed list of subspace ids used at the top level
            for every word and iteration (subset studies).
    """
    L = np.asarray(llrs, dtype=np.float64)
    if L.ndim != 2 or L.shape[1] != code.n:
        raise ParameterError(f"LLR batch shape {L.shape} does not match n = {code.n}")
    if code.r < 1:
        raise ParameterError("order-0 (repetition) codes are not supported")
    keys = np.asarray(keys, dtype=np.uint64).reshape(-1)
    if keys.shape[0] != L.shape[0]:
        raise ParameterError("need one key per word")
    L = np.clip(L, -cfg.llr_cap, cfg.llr_cap)
    fixed = None
    if top_subset is not None:
        fixed = np.array(sorted(set(int(s) for s in top_subset)), dtype=np.int64)
        if fixed.size == 0 or fixed[0] < 1 or fixed[-1] >= code.n:
            raise ParameterError(f"invalid fixed subset {top_subset}")
    res = _decode_level(L, code.m, code.r, keys, cfg, True, fixed)
    if code.r == 1:
        codewords = res.bits
        _, msgs = reed_decode_batch(codewords, code)
    else:
        codewords, msgs = reed_decode_batch(res.bits, code, keys if cfg.reed_ties == "keyed" else None)
    return BatchOutcome(codewords, msgs, res.llr, res.iterations, res.fht, res.converged)


def decode(llr, code: RmCode, cfg: DecoderConfig, rng: RngStream | None = None) -> DecodeOutcome:
    rng = rng if rng is not None else RngStream(0, 0)
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (code.n,):
        raise ParameterError(f"LLR length {llr.shape} != n = {code.n}")
    out = decode_batch(llr[None, :], code, cfg, np.array([rng.decoder_key()], dtype=np.uint64))
    return DecodeOutcome(
        codeword=out.codewords[0],
        message=out.messages[0],
        final_llr=out.final_llr[0],
        iterations=int(out.iterations[0]),
        fht_count=int(out.fht_count[0]),
        converged=bool(out.converged[0]),
    )


def with_variant(cfg: DecoderConfig, **changes) -> DecoderConfig:
    """Copy of ``cfg`` with fields replaced and the schedule re-resolved if not given."""
    if "variant" in changes and "schedule" not in changes:
        changes["schedule"] = None
    return replace(cfg, **changes)


__all__ = [
    "DecoderConfig",
    "DecodeOutcome",
    "BatchOutcome",
    "SubsetSelection",
    "aggregate",
    "as_fraction",
    "boxplus",
    "decode",
    "decode_batch",
    "fht_decode_order1",
    "fwht",
    "is_converged",
    "make_code",
    "max_iterations",
    "num_projections",
    "pool_size",
    "project",
    "reed_decode",
    "reed_decode_batch",
    "sdss_select",
    "select_random",
    "shortlist",
    "subspace_distances",
]

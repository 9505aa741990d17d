"""BPSK/AWGN and BSC channels producing capped LLR vectors, plus seeded streams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rm_core import ParameterError, RmCode, encode

LLR_CAP = 40.0

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_DECODER_DOMAIN = 0xD1B54A32D192ED03


def splitmix64(x) -> np.ndarray:
    """Vectorized splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def mix_keys(key, value) -> np.ndarray:
    """Derive a child key from ``key`` and an integer label; broadcasts."""
    return splitmix64(np.asarray(key, dtype=np.uint64) ^ splitmix64(np.asarray(value, dtype=np.uint64)))


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream identified by ``(master_seed, stream_id)``.

    The channel draws come from a Philox generator keyed on both integers, so a
    trial's noise does not depend on which worker or batch produced it.
    """

    master_seed: int
    stream_id: int

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v <= _MASK64:
                raise ParameterError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=(self.stream_id << 64) | self.master_seed))

    def decoder_key(self) -> np.uint64:
        """64-bit key seeding the decoder's subspace draws for this stream."""
        k = mix_keys(np.uint64(self.master_seed), np.uint64(_DECODER_DOMAIN))
        return mix_keys(k, np.uint64(self.stream_id))[()]


def decoder_keys(master_seed: int, stream_ids) -> np.ndarray:
    """Vector form of ``RngStream(master_seed, s).decoder_key()`` for many ``s``."""
    k = mix_keys(np.uint64(master_seed), np.uint64(_DECODER_DOMAIN))
    return mix_keys(k, np.asarray(stream_ids, dtype=np.uint64))


@dataclass(frozen=True)
class ChannelConfig:
    kind: str = "awgn"
    ebn0_db: float = 0.0
    crossover: float = 0.1
    rate: float = 1.0
    llr_cap: float = LLR_CAP

    def __post_init__(self):
        if self.kind not in ("awgn", "bsc"):
            raise ParameterError(f"unknown channel kind {self.kind!r}")
        if self.kind == "bsc" and not 0.0 < self.crossover < 0.5:
            raise ParameterError(f"BSC crossover must lie in (0, 0.5), got {self.crossover}")
        if not 0.0 < self.rate <= 1.0:
            raise ParameterError(f"rate must lie in (0, 1], got {self.rate}")


def noise_sigma(cfg: ChannelConfig) -> float:
    """Noise standard deviation for unit-energy BPSK at the configured Eb/N0."""
    if cfg.kind != "awgn":
        raise ParameterError("noise_sigma is only defined for the AWGN channel")
    if math.isinf(cfg.ebn0_db):
        return 0.0 if cfg.ebn0_db > 0 else math.inf
    return math.sqrt(1.0 / (2.0 * cfg.rate * 10.0 ** (cfg.ebn0_db / 10.0)))


def bsc_llr_magnitude(crossover: float) -> float:
    return math.log((1.0 - crossover) / crossover)


def _llrs(bits: np.ndarray, cfg: ChannelConfig, gen: np.random.Generator) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if cfg.kind == "awgn":
        sigma = noise_sigma(cfg)
        s = 1.0 - 2.0 * bits
        if sigma == 0.0:
            return s * cfg.llr_cap
        y = s + sigma * gen.standard_normal(bits.shape)
        return np.clip(2.0 * y / sigma**2, -cfg.llr_cap, cfg.llr_cap)
    received = bits ^ (gen.random(bits.shape) < cfg.crossover)
    mag = min(bsc_llr_magnitude(cfg.crossover), cfg.llr_cap)
    return mag * (1.0 - 2.0 * received)


def transmit(codeword, cfg: ChannelConfig, rng: RngStream) -> np.ndarray:
    """Send one binary word through the channel and return its LLR vector."""
    return _llrs(codeword, cfg, rng.generator())


def simulate_words(
    code: RmCode,
    cfg: ChannelConfig,
    master_seed: int,
    trial_ids,
    all_zero: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw message, codeword and LLRs for each trial id.

    Every trial uses its own stream, so the draws for a given trial id are the
    same whatever batch it is generated in.

    Returns:
        (messages (B, k), codewords (B, n), llrs (B, n))
    """
    trial_ids = list(trial_ids)
    msgs = np.zeros((len(trial_ids), code.k), dtype=np.uint8)
    llrs = np.empty((len(trial_ids), code.n))
    zero = np.zeros(code.n, dtype=np.uint8)
    for row, t in enumerate(trial_ids):
        gen = RngStream(master_seed, int(t)).generator()
        if all_zero:
            word = zero
        else:
            msgs[row] = gen.integers(0, 2, code.k, dtype=np.uint8)
            word = encode(code, msgs[row])
        llrs[row] = _llrs(word, cfg, gen)
    return msgs, encode(code, msgs), llrs

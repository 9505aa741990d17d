"""Reed-Muller code construction over F_2^m index vectors.

Coordinates of a length-2^m word are indexed by integers ``z`` whose bit ``i``
holds the variable ``v_{i+1}`` (LSB first). A one-dimensional subspace is
identified by its nonzero element ``z_i``; its cosets ``{rep, rep ^ z_i}`` use
the representative with the lowest set bit of ``z_i`` cleared, and the quotient
index of a coset is ``rep`` with that bit deleted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

MAX_M = 20
MAX_CODEBOOK_K = 26


class ParameterError(ValueError):
    """Invalid code or decoder parameters."""


class ResourceLimitError(RuntimeError):
    """Requested computation exceeds a configured resource guard."""


@dataclass(frozen=True)
class Coset:
    rep: int
    subspace: int

    @property
    def elements(self) -> tuple[int, int]:
        return self.rep, self.rep ^ self.subspace


@dataclass(frozen=True, eq=False)
class RmCode:
    """Binary RM(m, r) code with a degree-major monomial generator."""

    m: int
    r: int
    monomials: tuple[tuple[int, ...], ...] = field(repr=False)
    generator: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return 1 << self.m

    @property
    def k(self) -> int:
        return len(self.monomials)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def min_distance(self) -> int:
        return 1 << (self.m - self.r)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RmCode) and (self.m, self.r) == (other.m, other.r)

    def __hash__(self) -> int:
        return hash((self.m, self.r))

    def __reduce__(self):
        return make_code, (self.m, self.r)


def monomial_eval(variables: tuple[int, ...], m: int) -> np.ndarray:
    """Evaluation vector of the monomial prod(v_{i+1} for i in variables)."""
    z = np.arange(1 << m)
    out = np.ones(1 << m, dtype=np.uint8)
    for i in variables:
        out &= ((z >> i) & 1).astype(np.uint8)
    return out


@lru_cache(maxsize=None)
def make_code(m: int, r: int) -> RmCode:
    if not isinstance(m, int) or not isinstance(r, int):
        raise ParameterError(f"m and r must be integers, got m={m!r}, r={r!r}")
    if m < 1 or m > MAX_M:
        raise ParameterError(f"m must lie in [1, {MAX_M}], got {m}")
    if not 0 <= r <= m:
        raise ParameterError(f"need 0 <= r <= m, got m={m}, r={r}")
    monomials = tuple(mono for d in range(r + 1) for mono in combinations(range(m), d))
    generator = np.stack([monomial_eval(mono, m) for mono in monomials])
    generator.setflags(write=False)
    code = RmCode(m=m, r=r, monomials=monomials, generator=generator)
    assert code.k == sum(comb(m, i) for i in range(r + 1))
    return code


def encode(code: RmCode, message) -> np.ndarray:
    """Codeword ``message @ G`` over F_2. Accepts a single message or a (B, k) batch."""
    msg = np.asarray(message, dtype=np.int64)
    if msg.shape[-1] != code.k:
        raise ParameterError(f"message length {msg.shape[-1]} != k = {code.k}")
    return ((msg @ code.generator.astype(np.int64)) & 1).astype(np.uint8)


def enumerate_subspaces(m: int) -> list[int]:
    return list(range(1, 1 << m))


def lowest_set_bit(z: int) -> int:
    return (z & -z).bit_length() - 1


def cosets_of(subspace: int, m: int) -> list[Coset]:
    if not 0 < subspace < (1 << m):
        raise ParameterError(f"subspace id {subspace} out of range for m={m}")
    b = lowest_set_bit(subspace)
    return [Coset(rep, subspace) for rep in range(1 << m) if not (rep >> b) & 1]


def _delete_bit(x, b: int):
    return ((x >> (b + 1)) << b) | (x & ((1 << b) - 1))


def quotient_map(coset: Coset, m: int) -> int:
    """Index in F_2^(m-1) of a canonical coset: its rep with bit b(z_i) removed."""
    b = lowest_set_bit(coset.subspace)
    if (coset.rep >> b) & 1:
        raise ParameterError(f"coset rep {coset.rep} is not canonical for subspace {coset.subspace}")
    return _delete_bit(coset.rep, b)


@lru_cache(maxsize=None)
def coset_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Lookup tables shared by the vectorized decoders.

    Returns ``(reps, index)`` where ``reps[z_i]`` lists the n/2 canonical coset
    representatives of subspace ``z_i`` in quotient-index order, and
    ``index[z_i, z]`` is the quotient index of the coset containing ``z``.
    Row 0 of both tables is unused.
    """
    n = 1 << m
    z = np.arange(n, dtype=np.int64)
    reps = np.zeros((n, n // 2), dtype=np.int64)
    index = np.zeros((n, n), dtype=np.int64)
    for s in range(1, n):
        b = lowest_set_bit(s)
        reps[s] = z[((z >> b) & 1) == 0]
        rep = np.where((z >> b) & 1, z ^ s, z)
        index[s] = _delete_bit(rep, b)
    reps.setflags(write=False)
    index.setflags(write=False)
    return reps, index


@lru_cache(maxsize=None)
def parity_table(m: int) -> np.ndarray:
    """``table[j, z] = <j, z> mod 2``, the first-order codewords without complement."""
    n = 1 << m
    z = np.arange(n, dtype=np.int64)
    x = z[:, None] & z[None, :]
    par = np.zeros((n, n), dtype=np.uint8)
    while x.any():
        par ^= (x & 1).astype(np.uint8)
        x >>= 1
    par.setflags(write=False)
    return par


def binary_projection(word, subspace: int, m: int) -> np.ndarray:
    """XOR of each coset pair, indexed by quotient_map."""
    reps, _ = coset_tables(m)
    w = np.asarray(word, dtype=np.uint8)
    r = reps[subspace]
    return w[..., r] ^ w[..., r ^ subspace]


def codebook(code: RmCode) -> np.ndarray:
    """All 2^k codewords as a (2^k, n) array; row i encodes the bits of i."""
    if code.k > MAX_CODEBOOK_K:
        raise ResourceLimitError(f"codebook of 2^{code.k} words exceeds the 2^{MAX_CODEBOOK_K} guard")
    idx = np.arange(1 << code.k, dtype=np.int64)
    msgs = ((idx[:, None] >> np.arange(code.k)) & 1).astype(np.uint8)
    return encode(code, msgs)


def minimum_distance(code: RmCode) -> int:
    words = codebook(code)
    return int(words[1:].sum(axis=1).min())

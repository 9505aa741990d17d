"""FHT-count bounds and the complexity-reduction gain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoders import DecoderConfig, max_iterations, num_projections
from .rm_core import ParameterError, RmCode


@dataclass(frozen=True)
class FhtBudget:
    bound: int
    measured_mean: float

    @property
    def ratio(self) -> float:
        return self.measured_mean / self.bound


def count_fht_bound(code: RmCode, cfg: DecoderConfig) -> int:
    """Worst-case first-order decodings per word.

    Level l works on RM(m-l, r-l) and projects onto ceil(r_p (2^(m-l) - 1))
    subspaces. Under the full schedule every level above first order iterates
    ceil((m-l)/2) times; under top-only only the top level does.
    """
    if code.r < 2:
        raise ParameterError(f"FHT bound needs r >= 2, got r={code.r}")
    total = 1
    for level in range(code.r - 1):
        mm = code.m - level
        iters = max_iterations(mm) if (level == 0 or cfg.schedule == "full") else 1
        total *= iters * num_projections(cfg.r_p, mm)
    return total


def complexity_gain(n_sdss_mean: float, n_srpa_bound: float) -> float:
    if n_sdss_mean <= 0 or n_srpa_bound <= 0:
        raise ParameterError("FHT counts must be positive")
    return 1.0 - n_sdss_mean / n_srpa_bound


def fht_budget(code: RmCode, cfg: DecoderConfig, fht_counts) -> FhtBudget:
    counts = np.asarray(fht_counts)
    return FhtBudget(count_fht_bound(code, cfg), float(counts.mean()))

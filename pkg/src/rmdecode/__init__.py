"""Reed-Muller codes with RPA, SRPA and SDSS-SRPA decoding plus a Monte Carlo harness."""

from .channel import ChannelConfig, RngStream, noise_sigma, transmit
from .complexity import FhtBudget, complexity_gain, count_fht_bound
from .decoders import DecodeOutcome, DecoderConfig, decode, decode_batch, reed_decode
from .harness import SimJob, run_job, subset_study, sweep_rq
from .rm_core import ParameterError, ResourceLimitError, RmCode, encode, make_code

__version__ = "0.1.0"

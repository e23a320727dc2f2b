"""Repeater-assisted DFT-spread-OFDM link simulation.

Random direct-plus-repeater channels, the full waveform Monte Carlo chain,
one-tap MMSE equalization with the exact residual-interference
decomposition, a semi-analytic bit-error-rate engine built on it, and a
reproducible sweep harness.
"""

__version__ = "0.1.0"

from .ber import (BerPoint, SweepResult, conditional_ber_qpsk,
                  conditional_ber_rect_qam, diversity_metric, full_stack_ber,
                  semi_analytic_ber, snr_db_to_noise_var)
from .channel import (ChannelConfig, ChannelRealization, Pdp, RepeaterSpec,
                      average_pdp, cascade_branch, deterministic_channel,
                      draw_channel, freq_response, frequency_correlation,
                      gen_rayleigh_taps)
from .constellation import ConstellationSpec, make_constellation, make_qam16, make_qpsk
from .equalizer import (EqualizerState, build_state, equalize_despread,
                        interference_term, mmse_weights)
from .exceptions import ConfigError, DegenerateFrameError
from .harness import (Counts, ExperimentConfig, ResultsFile, SnrGrid,
                      emit_curves, parse_and_validate, read_results, run_sweep,
                      table1_config)
from .numerics import (SeededRng, draw_complex_gaussian, q_function,
                       scaled_idft, unitary_dft)
from .waveform import TxBlock, WaveformConfig, apply_channel, modulate, receive_demap

__all__ = [
    "__version__",
    "BerPoint", "SweepResult", "conditional_ber_qpsk", "conditional_ber_rect_qam",
    "diversity_metric", "full_stack_ber", "semi_analytic_ber", "snr_db_to_noise_var",
    "ChannelConfig", "ChannelRealization", "Pdp", "RepeaterSpec", "average_pdp",
    "cascade_branch", "deterministic_channel", "draw_channel", "freq_response",
    "frequency_correlation", "gen_rayleigh_taps",
    "ConstellationSpec", "make_constellation", "make_qam16", "make_qpsk",
    "EqualizerState", "build_state", "equalize_despread", "interference_term",
    "mmse_weights",
    "ConfigError", "DegenerateFrameError",
    "Counts", "ExperimentConfig", "ResultsFile", "SnrGrid", "emit_curves",
    "parse_and_validate", "read_results", "run_sweep", "table1_config",
    "SeededRng", "draw_complex_gaussian", "q_function", "scaled_idft", "unitary_dft",
    "TxBlock", "WaveformConfig", "apply_channel", "modulate", "receive_demap",
]

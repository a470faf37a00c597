"""PAC codes with polarized-metric Fano decoding, cutoff-rate profiling and Monte-Carlo tooling."""

from .channels import AwgnParams, DiscreteChannel, analytic_channel, bpsk_awgn_transmit, ebn0_to_esn0
from .cutoff import (
    BitChannelStats,
    BoundQuery,
    ChunkRates,
    bec_polarize_exact,
    bhattacharyya_from_llrs,
    expected_computation_bound,
    gallager_e0,
    mgf_bound_audit,
    pareto_ccdf_bound,
    polarized_cutoff_rates,
    theorem1_bound,
)
from .fano import DecodeOutcome, FanoConfig, branch_metric, chunk_genie_decode, fano_decode, fano_trace, make_bias
from .listdec import ListConfig, sc_decode, scl_decode, scl_max_visits
from .polar import DemapState, PolarCode, genie_sc_llr_samples, polar_transform, sc_llr_next
from .precoder import CodeSpec, conv_encode, extract_data, insert_data, pac_encode, toeplitz_matrix
from .profiler import (
    InfeasibleDesign,
    ProfileDesign,
    apply_cutoff_constraint,
    design_pac_code,
    freeze_min_weight_rows,
    rm_profile,
)
from .sim import ExperimentConfig, SimSummary, fit_pareto_tail, run_sweep

__all__ = [name for name in dir() if not name.startswith("_")]

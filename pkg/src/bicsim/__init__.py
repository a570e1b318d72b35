"""Collision-model simulator for two-qubit waveguide bound states.

A single photon (or an initially excited qubit pair) interacts with two
distant qubits coupled to a one-dimensional waveguide.  Time evolution is
a sequence of local collision unitaries on a matrix-product state whose
chain interleaves time-bin field modes with the qubit pair; the photon
round-trip delay between the qubits enters through a relabelled site
layout rather than long-range gates.  Closed-form targets and a dense
single-excitation oracle validate every number the simulator produces.
"""

from .analytics import (
    bandwidth_fixed_point,
    bic_weights,
    discretized_bic_state,
    infer_p_bic_from_bell,
    optimal_bandwidth,
    p_bell_analytic,
    p_bic_analytic,
    peak_coefficient,
    peak_probabilities,
    relaxation_baselines,
)
from .engine import ObservableRecord, RunResult, asymptote_and_t90, run, run_full
from .errors import ConfigError, NumericalFailure
from .gates import StepGate, build_step_gate, build_step_generator
from .oracle import ExactState, evolve_exact, fidelity_against_mps
from .params import IDEAL_SWITCH, MODES, ModelParams
from .wavepacket import (
    BinAmplitudes,
    build_input_mps,
    direction_weights,
    exponential_bin_amplitudes,
)

__version__ = "0.1.0"

__all__ = [
    "BinAmplitudes",
    "ConfigError",
    "ExactState",
    "IDEAL_SWITCH",
    "MODES",
    "ModelParams",
    "NumericalFailure",
    "ObservableRecord",
    "RunResult",
    "StepGate",
    "asymptote_and_t90",
    "bandwidth_fixed_point",
    "bic_weights",
    "build_input_mps",
    "build_step_gate",
    "build_step_generator",
    "direction_weights",
    "discretized_bic_state",
    "evolve_exact",
    "exponential_bin_amplitudes",
    "fidelity_against_mps",
    "infer_p_bic_from_bell",
    "optimal_bandwidth",
    "p_bell_analytic",
    "p_bic_analytic",
    "peak_coefficient",
    "peak_probabilities",
    "relaxation_baselines",
    "run",
    "run_full",
    "__version__",
]

"""Trapped-ion lattice surgery resource estimation and purification search.

Dense density-matrix simulation of entanglement purification circuits,
a genetic search over Clifford purification circuits, and closed-form /
Monte-Carlo estimators for the communication-ion budget of lattice
surgery between ion-trap modules.
"""

from .quantum import (
    CLIFFORD_CONJUGATE_PARTNER,
    CLIFFORD_INDEX,
    DEVICE_NOISE,
    IDEAL_NOISE,
    MAX_QUBITS,
    BellDiagonalState,
    DensityMatrix,
    NoiseModel,
    apply_gate,
    bell_diagonal,
    bell_state,
    clifford_index,
    clifford_unitary,
    depolarize,
    fidelity_to_bell,
    measure_branches,
    partial_trace,
    stephenson_pair,
    tensor,
    twirl,
)
from .purify import (
    AcceptRule,
    EntanglementReport,
    Measure,
    ProtocolOutcome,
    PurificationCircuit,
    SingleQubitClifford,
    TwoQubitGate,
    bbpssw_circuit,
    dejmps_circuit,
    load_circuit,
    marginal_entanglement_check,
    save_circuit,
    simulate,
)
from .ga import (
    BenchmarkRow,
    GaConfig,
    RankedCircuit,
    benchmark_sweep,
    fitness,
    resolve_input,
    search,
)
from .resources import (
    DeviceParams,
    EstimateResult,
    SurgeryQuery,
    attempts_required,
    binomial_tail_geq,
    default_device,
    device_from_dict,
    device_to_dict,
    load_device,
    max_rate,
    min_attempts,
    min_ions,
    multiplexing_k,
    p_onepair,
    pairs_required,
    sweep_coupling,
)
from .collection import (
    CollectionResult,
    TrialConfig,
    collection_report,
    empirical_attempts_bracket,
    empirical_min_attempts,
    simulate_collection,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptRule",
    "BellDiagonalState",
    "BenchmarkRow",
    "CLIFFORD_CONJUGATE_PARTNER",
    "CLIFFORD_INDEX",
    "CollectionResult",
    "DEVICE_NOISE",
    "DensityMatrix",
    "DeviceParams",
    "EntanglementReport",
    "EstimateResult",
    "GaConfig",
    "IDEAL_NOISE",
    "MAX_QUBITS",
    "Measure",
    "NoiseModel",
    "ProtocolOutcome",
    "PurificationCircuit",
    "RankedCircuit",
    "SingleQubitClifford",
    "SurgeryQuery",
    "TrialConfig",
    "TwoQubitGate",
    "apply_gate",
    "attempts_required",
    "bbpssw_circuit",
    "bell_diagonal",
    "bell_state",
    "benchmark_sweep",
    "binomial_tail_geq",
    "clifford_index",
    "clifford_unitary",
    "collection_report",
    "default_device",
    "dejmps_circuit",
    "depolarize",
    "device_from_dict",
    "device_to_dict",
    "empirical_attempts_bracket",
    "empirical_min_attempts",
    "fidelity_to_bell",
    "fitness",
    "load_circuit",
    "load_device",
    "marginal_entanglement_check",
    "max_rate",
    "measure_branches",
    "min_attempts",
    "min_ions",
    "multiplexing_k",
    "p_onepair",
    "pairs_required",
    "partial_trace",
    "resolve_input",
    "save_circuit",
    "search",
    "simulate",
    "simulate_collection",
    "stephenson_pair",
    "sweep_coupling",
    "tensor",
    "twirl",
    "wilson_interval",
]

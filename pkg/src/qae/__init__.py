"""End-to-end learned transceivers over block-fading channels.

Two transmitter families share one receiver and one training harness: a
classical dense autoencoder (ae) and a hybrid scheme (qae) whose transmitter
is a pair of parallel parameterized Ry/CNOT circuits simulated exactly as
statevectors. Conventional BPSK and soft-decision Hamming(7,4) links serve
as baselines for the Monte Carlo BLER comparisons.
"""

from .autoencoder import (
    Model,
    SystemConfig,
    build_model,
    count_parameters,
    decode,
    e2e_gradient,
    encode,
    load_checkpoint,
    save_checkpoint,
    transmit_table,
)
from .channel import (
    ChannelRealization,
    apply_channel,
    draw_fading,
    draw_realization,
    equalize,
    snr_to_sigma2,
)
from .harness import (
    BlerCurve,
    BpskLink,
    ConvergenceTrace,
    HammingLink,
    LearnedLink,
    TrainConfig,
    compare_convergence,
    evaluate_bler,
    report_params,
    train,
)
from .qsim import CircuitSpec, StateVector, amplitude_embed, circuit_jacobian, run_circuit

__version__ = "0.1.0"

__all__ = [
    "Model", "SystemConfig", "build_model", "count_parameters", "decode",
    "e2e_gradient", "encode", "load_checkpoint", "save_checkpoint", "transmit_table",
    "ChannelRealization", "apply_channel", "draw_fading", "draw_realization",
    "equalize", "snr_to_sigma2",
    "BlerCurve", "BpskLink", "ConvergenceTrace", "HammingLink", "LearnedLink",
    "TrainConfig", "compare_convergence", "evaluate_bler", "report_params", "train",
    "CircuitSpec", "StateVector", "amplitude_embed", "circuit_jacobian", "run_circuit",
    "__version__",
]

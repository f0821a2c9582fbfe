"""masksparse: mask-encoded sparsification for split-learning feature maps.

Thin wrapper around the C++ core. See the project README for the codec
semantics, the wire format, and the CLI.
"""

from ._core import (
    CorruptPayloadError,
    InputError,
    ParameterError,
    Payload,
    WireError,
    compression_error,
    compression_rate,
    compute_alpha,
    crossover_sparsity,
    decode,
    deserialize,
    dominance_report,
    encode,
    error_sweep,
    l2_norm,
    ms_bound,
    qu_bound,
    relu_bias_probe,
    serialize,
    sp_bound,
    storage_cost,
    synthetic_activations,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CorruptPayloadError",
    "InputError",
    "ParameterError",
    "Payload",
    "WireError",
    "compression_error",
    "compression_rate",
    "compute_alpha",
    "crossover_sparsity",
    "decode",
    "deserialize",
    "dominance_report",
    "encode",
    "error_sweep",
    "l2_norm",
    "ms_bound",
    "qu_bound",
    "relu_bias_probe",
    "serialize",
    "sp_bound",
    "storage_cost",
    "synthetic_activations",
    "train",
]

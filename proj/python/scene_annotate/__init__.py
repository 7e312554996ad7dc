"""Region-based scene annotation: segmentation, descriptors, pLSA and adaptive padding."""

from ._core import (
    ContractError,
    DataError,
    Model,
    NumericalError,
    default_config,
    describe,
    evaluate,
    read_png,
    segment,
    synthesize,
    train,
    write_png,
)

__all__ = [
    "ContractError",
    "DataError",
    "Model",
    "NumericalError",
    "default_config",
    "describe",
    "evaluate",
    "read_png",
    "segment",
    "synthesize",
    "train",
    "write_png",
]

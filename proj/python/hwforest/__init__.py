"""Deep forest with hashing screening and window confidence screening."""

from ._core import (
    CascadeConfig,
    Dataset,
    GrainConfig,
    HwForestError,
    Model,
    ScreeningKind,
    accuracy,
    fit,
    fit_eval,
    friedman,
    load_csv,
    load_idx,
    load_model,
    nemenyi_cd,
    paired_t,
    set_thread_limit,
    split,
    subsample,
)

__all__ = [
    "CascadeConfig",
    "Dataset",
    "GrainConfig",
    "HwForestError",
    "Model",
    "ScreeningKind",
    "accuracy",
    "fit",
    "fit_eval",
    "friedman",
    "load_csv",
    "load_idx",
    "load_model",
    "nemenyi_cd",
    "paired_t",
    "set_thread_limit",
    "split",
    "subsample",
]

"""Time-series classification with coefficient-ranked transform pruning."""

from ._core import (
    Dataset,
    Pipeline,
    from_arrays,
    generate,
    load_dataset,
    normalize_per_channel,
    quality_metrics,
    save_dataset,
    split_folds,
    train,
)

__all__ = [
    "Dataset",
    "Pipeline",
    "from_arrays",
    "generate",
    "load_dataset",
    "normalize_per_channel",
    "quality_metrics",
    "save_dataset",
    "split_folds",
    "train",
]

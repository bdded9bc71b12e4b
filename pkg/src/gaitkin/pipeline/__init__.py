"""Dataset assembly, experiment orchestration, and metrics."""

from gaitkin.pipeline.windowing import (
    ItemTags,
    Split,
    WindowedDataset,
    concat_datasets,
    mix_datasets,
    sk_quota_indices,
    split_train_test,
    split_validation_tail,
    window_dataset,
)
from gaitkin.pipeline.metrics import (
    EvalReport,
    format_report_text,
    improvement_pct,
    rmse_report,
    write_report_jsonl,
)
# the experiments layer sits on top of both tcn and pipeline.windowing;
# importing it lazily keeps `tcn.training -> pipeline.windowing` acyclic
_EXPERIMENT_NAMES = (
    "AdaptedModels",
    "ExperimentData",
    "ExperimentSpec",
    "SweepPoint",
    "adapt_models",
    "build_experiment_data",
    "evaluate_on_dataset",
    "evaluate_on_recordings",
    "experiment_matrix",
    "ratio_sweep",
)


def __getattr__(name):
    if name in _EXPERIMENT_NAMES:
        from gaitkin.pipeline import experiments

        return getattr(experiments, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

__all__ = [
    "ItemTags",
    "WindowedDataset",
    "Split",
    "window_dataset",
    "concat_datasets",
    "split_train_test",
    "split_validation_tail",
    "mix_datasets",
    "sk_quota_indices",
    "EvalReport",
    "rmse_report",
    "improvement_pct",
    "format_report_text",
    "write_report_jsonl",
    "ExperimentSpec",
    "ExperimentData",
    "AdaptedModels",
    "SweepPoint",
    "build_experiment_data",
    "adapt_models",
    "ratio_sweep",
    "evaluate_on_dataset",
    "evaluate_on_recordings",
    "experiment_matrix",
]

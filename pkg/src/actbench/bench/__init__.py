from .families import (
    MODEL_ROWS,
    Fitted,
    ModelSpec,
    fit_model,
    predict,
    predict_instance,
    resolve_models,
    score,
    search_grid,
)
from .manifest import MANIFEST_FILE, RunManifest
from .runner import BenchmarkRun, load_source, run_benchmark, run_row

__all__ = [
    "MANIFEST_FILE",
    "MODEL_ROWS",
    "BenchmarkRun",
    "Fitted",
    "ModelSpec",
    "RunManifest",
    "fit_model",
    "load_source",
    "predict",
    "predict_instance",
    "resolve_models",
    "run_benchmark",
    "run_row",
    "score",
    "search_grid",
]

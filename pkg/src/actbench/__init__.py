from actbench.config import DatasetSource, RunConfig, SelectionConfig, SplitSpec

__version__ = "0.1.0"

__all__ = [
    "DatasetSource",
    "RunConfig",
    "SelectionConfig",
    "SplitSpec",
    "__version__",
]

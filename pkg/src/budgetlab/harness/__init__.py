from .dataset import Dataset, DatasetError, Item, load_dataset
from .eventlog import EventLog, LogError, read_log, recover, strip_volatile
from .matrix import Cell, QuestionResult, RunMatrix, RunResult, replay, replay_records, run_matrix
from .report import Layout, emit_curves, emit_results_table, render_curves_svg

__all__ = [
    "Cell",
    "Dataset",
    "DatasetError",
    "EventLog",
    "Item",
    "Layout",
    "LogError",
    "QuestionResult",
    "RunMatrix",
    "RunResult",
    "emit_curves",
    "emit_results_table",
    "load_dataset",
    "read_log",
    "recover",
    "render_curves_svg",
    "replay",
    "replay_records",
    "run_matrix",
    "strip_volatile",
]

"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 partial completion (flagged
failures or incomplete cells), 3 backend unreachable.

The live backend reads its endpoint from ``BUDGETLAB_ENDPOINT`` and the API
key from ``BUDGETLAB_API_KEY``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .backend import API_KEY_ENV, ENDPOINT_ENV, BackendError, MockBackend, MockScript, OpenAIBackend
from .backend.mock import ScriptError
from .config import ConfigError, RunConfig, check_inputs, load_config
from .core import ValidationError, budget_plan
from .harness import (
    DatasetError,
    Layout,
    LogError,
    RunMatrix,
    emit_curves,
    emit_results_table,
    load_dataset,
    read_log,
    replay_records,
    run_matrix,
)
from .prompts import PromptSet

log = logging.getLogger("budgetlab")

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL, EXIT_UNREACHABLE = 0, 1, 2, 3
EVENT_LOG = "events.jsonl"
RESULTS_CSV = "results.csv"


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "output_dir", None):
        cfg = replace(cfg, output_dir=Path(args.output_dir))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if getattr(args, "parallelism", None) is not None:
        if args.parallelism < 1:
            raise ConfigError("--parallelism", "must be >= 1")
        cfg = replace(cfg, parallelism=args.parallelism)
    if getattr(args, "mock_script", None):
        cfg = replace(cfg, backend_kind="mock", mock_script=Path(args.mock_script))
    return cfg


def _build_backend(cfg: RunConfig):
    if cfg.backend_kind == "mock":
        return MockBackend(MockScript.load(cfg.mock_script), chunk_tokens=cfg.chunk_tokens)
    return OpenAIBackend.from_env(cfg.model, timeout=cfg.timeout,
                                  template_opens_think=cfg.template_opens_think)


def cmd_run(args) -> int:
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        check_inputs(cfg)
        dataset = load_dataset(cfg.dataset)
        prompts = PromptSet.load_dir(cfg.prompts_dir) if cfg.prompts_dir else PromptSet()
        matrix = RunMatrix(
            model_tag=cfg.model_tag, dataset=dataset, cells=tuple(cfg.cells),
            base_seed=cfg.base_seed, parallelism=cfg.parallelism, repeats=cfg.repeats,
            slack=cfg.slack, max_force_iterations=cfg.max_force_iterations,
            no_think_answer_cap=cfg.no_think_answer_cap, answer_cap=cfg.answer_cap,
            filler=cfg.filler,
        )
    except (ConfigError, DatasetError, ScriptError, ValidationError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    try:
        backend = _build_backend(cfg)
    except BackendError as exc:
        _err(f"backend unavailable: {exc}")
        return EXIT_UNREACHABLE
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        results = run_matrix(matrix, backend, prompts, out / EVENT_LOG, resume=args.resume)
    except BackendError as exc:
        _err(f"backend unreachable: {exc}")
        return EXIT_UNREACHABLE
    emit_results_table(results, Layout.WIDE_BY_DATASET, out / RESULTS_CSV)
    emit_curves(results, out)
    failed = sum(r.n_failed for r in results)
    for r in results:
        calls, total = r.planned
        print(f"{r.spec.label:<24} budget={r.budget:<6} calls={calls} total={total} "
              f"acc={r.accuracy:.2f} realized_calls={r.realized_calls_total} "
              f"realized_think={r.realized_think_tokens_total}")
    if failed:
        _err(f"{failed} question(s) failed; see {out / EVENT_LOG}")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_report(args) -> int:
    log_path = Path(args.log)
    if not log_path.is_file():
        _err(f"log not found: {log_path}")
        return EXIT_INVALID
    try:
        records = read_log(log_path)
    except LogError as exc:
        _err(str(exc))
        return EXIT_INVALID
    if not records:
        _err("log is empty")
        return EXIT_INVALID
    try:
        results, incomplete = replay_records(records)
    except (LogError, KeyError, TypeError, ValueError) as exc:
        _err(f"log is inconsistent: {exc}")
        return EXIT_INVALID
    for key in incomplete:
        print(f"incomplete cell: {key}", file=sys.stderr)
    if results:
        out = Path(args.output_dir) if args.output_dir else None
        if args.format == "csv":
            text = emit_results_table(results, Layout(args.layout))
            if out is None:
                sys.stdout.write(text)
            else:
                out.mkdir(parents=True, exist_ok=True)
                (out / RESULTS_CSV).write_text(text, encoding="utf-8")
        else:
            out = out or log_path.parent
            out.mkdir(parents=True, exist_ok=True)
            for p in emit_curves(results, out):
                print(p)
    elif not incomplete:
        _err("log holds no cells")
        return EXIT_INVALID
    return EXIT_PARTIAL if incomplete else EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
        check_inputs(cfg)
        if cfg.backend_kind == "mock":
            MockScript.load(cfg.mock_script)
        load_dataset(cfg.dataset)
        if cfg.prompts_dir:
            PromptSet.load_dir(cfg.prompts_dir)
    except (ConfigError, DatasetError, ScriptError, ValidationError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    for group in cfg.groups:
        for budget in group.budgets:
            calls, total = budget_plan(group.spec, budget)
            worst = " (worst case)" if group.spec.kind.is_judge else ""
            print(f"{group.name}: {group.spec.label} budget={budget} calls={calls} "
                  f"total={total}{worst}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="budgetlab",
        description="Thinking-budget experiments over reasoning strategies.",
        epilog=f"Live endpoint: ${ENDPOINT_ENV}; API key: ${API_KEY_ENV}.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a run matrix")
    run.add_argument("--config", required=True)
    run.add_argument("--output-dir")
    run.add_argument("--seed", type=int)
    run.add_argument("--parallelism", type=int)
    run.add_argument("--mock-script")
    run.add_argument("--resume", action=argparse.BooleanOptionalAction, default=True)
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="rebuild tables or curves from an event log")
    report.add_argument("log")
    report.add_argument("--format", choices=["csv", "svg"], default="csv")
    report.add_argument("--layout", choices=[l.value for l in Layout], default="wide")
    report.add_argument("--output-dir")
    report.set_defaults(func=cmd_report)

    validate = sub.add_parser("validate", help="check a config and echo planned compute")
    validate.add_argument("--config", required=True)
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Run configuration: a sectioned key-value (INI) file.

::

    [run]
    schema_version = 1
    model_tag = qwen3-8b
    dataset = data/aime24.jsonl      ; relative paths resolve against this file
    output_dir = out
    base_seed = 0
    parallelism = 4
    repeats = 1

    [backend]
    kind = mock                      ; or openai (endpoint/key from the environment)
    mock_script = scripts/mock.txt
    model = Qwen/Qwen3-8B

    [budget]
    slack = 256
    max_force_iterations = 8

    [cell sc3]
    strategy = self_consistency
    n = 3
    budgets = 0, 2000, 4000, 8000
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .core import StrategyKind, StrategySpec, ValidationError
from .harness.matrix import Cell

SCHEMA_VERSION = 1

STRATEGY_ALIASES = {
    "vanilla": StrategyKind.VANILLA,
    "self_consistency": StrategyKind.SELF_CONSISTENCY,
    "sc": StrategyKind.SELF_CONSISTENCY,
    "summary": StrategyKind.SUMMARY,
    "reflect": StrategyKind.REFLECT,
    "judge": StrategyKind.JUDGE,
    "judge_with_history": StrategyKind.JUDGE_WITH_HISTORY,
    "judge_reflection": StrategyKind.JUDGE_REFLECTION,
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class CellGroup:
    name: str
    spec: StrategySpec
    budgets: tuple[int, ...]

    def cells(self) -> list[Cell]:
        return [Cell(self.spec, b) for b in self.budgets]


@dataclass
class RunConfig:
    model_tag: str
    dataset: Path
    output_dir: Path
    groups: list[CellGroup]
    backend_kind: str = "mock"
    mock_script: Path | None = None
    chunk_tokens: int = 1
    model: str = ""
    template_opens_think: bool = False
    timeout: float = 600.0
    base_seed: int = 0
    parallelism: int = 1
    repeats: int = 1
    slack: int = 256
    max_force_iterations: int = 8
    no_think_answer_cap: int = 4096
    answer_cap: int = 2048
    filler: str = "Wait"
    prompts_dir: Path | None = None
    source: Path | None = field(default=None, repr=False)

    @property
    def cells(self) -> list[Cell]:
        return [c for g in self.groups for c in g.cells()]


def _int(section, key: str, default=None, *, minimum: int | None = None) -> int:
    where = f"{section.name}.{key}"
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(where, "missing")
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(where, f"expected an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value}")
    return value


def _float(section, key: str):
    raw = section.get(key)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{section.name}.{key}", f"expected a number, got {raw!r}") from None


def _path(base: Path, raw: str) -> Path:
    p = Path(raw).expanduser()
    return p if p.is_absolute() else (base / p)


def _parse_cell(section) -> CellGroup:
    name = section.name
    raw_kind = section.get("strategy")
    if raw_kind is None:
        raise ConfigError(f"{name}.strategy", "missing")
    kind = STRATEGY_ALIASES.get(raw_kind.strip().lower())
    if kind is None:
        raise ConfigError(f"{name}.strategy", f"unknown strategy {raw_kind!r}")
    raw_budgets = section.get("budgets")
    if raw_budgets is None:
        raise ConfigError(f"{name}.budgets", "missing")
    budgets = []
    for part in raw_budgets.split(","):
        part = part.strip()
        try:
            b = int(part)
        except ValueError:
            raise ConfigError(f"{name}.budgets", f"expected integers, got {part!r}") from None
        if b < 0:
            raise ConfigError(f"{name}.budgets", f"budgets must be non-negative, got {b}")
        budgets.append(b)
    if not budgets:
        raise ConfigError(f"{name}.budgets", "empty")
    multi = kind in (StrategyKind.SELF_CONSISTENCY, StrategyKind.SUMMARY)
    try:
        spec = StrategySpec(
            kind,
            trace_count=_int(section, "n", 3 if multi else 1),
            reflect_rounds=_int(section, "k", 1 if kind is StrategyKind.REFLECT else 0),
            max_judge_retries=_int(section, "retries", 1),
            trace_temperature=_float(section, "trace_temperature"),
            aggregate_temperature=_float(section, "aggregate_temperature"),
        )
    except ValidationError as exc:
        raise ConfigError(name, str(exc)) from None
    return CellGroup(name.removeprefix("cell ").strip(), spec, tuple(budgets))


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a run configuration; raises ``ConfigError`` naming the field."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from None
    base = path.parent
    if not parser.has_section("run"):
        raise ConfigError("run", "missing section")
    run = parser["run"]
    version = _int(run, "schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError("run.schema_version", f"unsupported version {version}")
    if not run.get("dataset"):
        raise ConfigError("run.dataset", "missing")
    if not run.get("output_dir"):
        raise ConfigError("run.output_dir", "missing")
    backend = parser["backend"] if parser.has_section("backend") else parser["DEFAULT"]
    budget = parser["budget"] if parser.has_section("budget") else parser["DEFAULT"]
    groups = [_parse_cell(parser[s]) for s in parser.sections() if s.startswith("cell ")]
    if not groups:
        raise ConfigError("cell", "no [cell <name>] sections")
    kind = (backend.get("kind") or "mock").strip().lower()
    if kind not in ("mock", "openai"):
        raise ConfigError("backend.kind", f"expected mock or openai, got {kind!r}")
    cfg = RunConfig(
        model_tag=run.get("model_tag", "model"),
        dataset=_path(base, run["dataset"]),
        output_dir=_path(base, run["output_dir"]),
        groups=groups,
        backend_kind=kind,
        mock_script=_path(base, backend["mock_script"]) if backend.get("mock_script") else None,
        chunk_tokens=_int(backend, "chunk_tokens", 1, minimum=1),
        model=backend.get("model", ""),
        template_opens_think=backend.getboolean("template_opens_think", False),
        timeout=_float(backend, "timeout") or 600.0,
        base_seed=_int(run, "base_seed", 0),
        parallelism=_int(run, "parallelism", 1, minimum=1),
        repeats=_int(run, "repeats", 1, minimum=1),
        slack=_int(budget, "slack", 256, minimum=0),
        max_force_iterations=_int(budget, "max_force_iterations", 8, minimum=1),
        no_think_answer_cap=_int(budget, "no_think_answer_cap", 4096, minimum=1),
        answer_cap=_int(budget, "answer_cap", 2048, minimum=1),
        filler=budget.get("filler", "Wait"),
        prompts_dir=(_path(base, parser["prompts"]["dir"])
                     if parser.has_section("prompts") and parser["prompts"].get("dir") else None),
        source=path,
    )
    return cfg


def check_inputs(cfg: RunConfig) -> None:
    """Existence checks for files the run will read."""
    if not cfg.dataset.is_file():
        raise ConfigError("run.dataset", f"file not found: {cfg.dataset}")
    if cfg.backend_kind == "mock":
        if cfg.mock_script is None:
            raise ConfigError("backend.mock_script", "missing (required for the mock backend)")
        if not cfg.mock_script.is_file():
            raise ConfigError("backend.mock_script", f"file not found: {cfg.mock_script}")
    elif not cfg.model:
        raise ConfigError("backend.model", "missing (required for the openai backend)")
    if cfg.prompts_dir is not None and not cfg.prompts_dir.is_dir():
        raise ConfigError("prompts.dir", f"directory not found: {cfg.prompts_dir}")

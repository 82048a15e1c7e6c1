"""Write and run the full configuration x budget grid.

By default it uses a synthetic 30-question dataset and a mock script that
answers a chosen number of questions correctly, so the whole pipeline runs
offline in seconds. Pass --dataset and --live to point the same grid at an
OpenAI-compatible server (BUDGETLAB_ENDPOINT / BUDGETLAB_API_KEY).

    python scripts/run_grid.py --out runs/mock
    python scripts/run_grid.py --out runs/qwen3-8b --live --model Qwen/Qwen3-8B \
        --dataset data/aime24.jsonl --parallelism 8
"""

import argparse
import json
import sys
from pathlib import Path

from budgetlab.cli import main as cli_main

GRID = {
    "vanilla": ("vanilla", {}, [0, 2000, 4000, 6000, 8000, 10000, 12000, 20000, 24000]),
    "sc3": ("self_consistency", {"n": 3}, [0, 2000, 4000, 8000]),
    "sc5": ("self_consistency", {"n": 5}, [0, 2000, 4000]),
    "reflect1": ("reflect", {"k": 1}, [0, 2000, 4000, 8000]),
    "reflect2": ("reflect", {"k": 2}, [0, 2000, 4000]),
    "summary3": ("summary", {"n": 3}, [0, 2000, 4000, 6000]),
    "summary5": ("summary", {"n": 5}, [0, 1000, 2000, 4000]),
    "judge": ("judge", {"retries": 1}, [0, 2000, 4000]),
    "judge_history": ("judge_with_history", {"retries": 1}, [0, 2000, 4000]),
    "judge_reflection": ("judge_reflection", {"retries": 1}, [0, 2000, 4000]),
}


def write_mock(out: Path, n: int, correct: int) -> tuple[Path, Path]:
    data = out / "synthetic.jsonl"
    rules = []
    with data.open("w") as fh:
        for i in range(n):
            fh.write(json.dumps({"id": f"p{i:02d}", "question": f"Problem {i}. What is {i} * 3?",
                                 "answer": str(3 * i)}) + "\n")
            if i < correct:
                rules.append(f'RULE "Problem {i}." THINK step*40 </think> step*30000 '
                             f"ANSWER so \\boxed{{{3 * i}}}")
    rules.append("DEFAULT THINK step*40 </think> step*30000 ANSWER \\boxed{-1}")
    script = out / "mock.txt"
    script.write_text("# synthetic grid script\n" + "\n".join(rules) + "\n")
    return data, script


def write_config(out: Path, dataset: Path, backend: str, args) -> Path:
    lines = ["[run]", "schema_version = 1", f"model_tag = {args.model_tag}",
             f"dataset = {dataset.resolve()}", f"output_dir = {(out / 'results').resolve()}",
             f"base_seed = {args.seed}", f"parallelism = {args.parallelism}", "",
             "[backend]", backend, "", "[budget]", "slack = 256", "max_force_iterations = 8", ""]
    for name, (strategy, params, budgets) in GRID.items():
        lines.append(f"[cell {name}]")
        lines.append(f"strategy = {strategy}")
        lines += [f"{k} = {v}" for k, v in params.items()]
        lines.append("budgets = " + ", ".join(map(str, budgets)))
        lines.append("")
    cfg = out / "grid.ini"
    cfg.write_text("\n".join(lines))
    return cfg


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--live", action="store_true", help="use the OpenAI-compatible backend")
    ap.add_argument("--model", default="Qwen/Qwen3-8B")
    ap.add_argument("--model-tag", default="mock")
    ap.add_argument("--dataset", type=Path)
    ap.add_argument("--correct", type=int, default=7, help="mock: questions answered correctly")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--parallelism", type=int, default=4)
    ap.add_argument("--validate-only", action="store_true")
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    if args.live:
        if args.dataset is None:
            ap.error("--live needs --dataset")
        dataset, backend = args.dataset, f"kind = openai\nmodel = {args.model}"
    else:
        dataset, script = write_mock(args.out, 30, args.correct)
        if args.dataset is not None:
            dataset = args.dataset
        backend = f"kind = mock\nmock_script = {script.resolve()}\nchunk_tokens = 16"
    cfg = write_config(args.out, dataset, backend, args)
    print(f"config written to {cfg}", file=sys.stderr)
    if args.validate_only:
        return cli_main(["validate", "--config", str(cfg)])
    return cli_main(["run", "--config", str(cfg)])


if __name__ == "__main__":
    sys.exit(main())

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DatasetError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class Item:
    question_id: str
    question: str
    gold_answer: str


@dataclass(frozen=True)
class Dataset:
    name: str
    items: tuple[Item, ...]

    def __post_init__(self):
        if not self.items:
            raise DatasetError(f"dataset {self.name!r} is empty")
        seen: set[str] = set()
        for item in self.items:
            if item.question_id in seen:
                raise DatasetError(f"duplicate question id {item.question_id!r}")
            seen.add(item.question_id)

    def __len__(self) -> int:
        return len(self.items)


def load_dataset(path: str | Path, name: str | None = None) -> Dataset:
    """Read a JSON-lines file with ``id``, ``question`` and ``answer`` on every line."""
    path = Path(path)
    items: list[Item] = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(record, dict):
                raise DatasetError("record is not an object", lineno)
            for key in ("id", "question", "answer"):
                if key not in record:
                    raise DatasetError(f"missing field {key!r}", lineno)
            qid = str(record["id"])
            if qid in seen:
                raise DatasetError(
                    f"duplicate question id {qid!r} (first seen on line {seen[qid]})", lineno
                )
            seen[qid] = lineno
            items.append(Item(qid, str(record["question"]), str(record["answer"])))
    return Dataset(name or path.stem, tuple(items))

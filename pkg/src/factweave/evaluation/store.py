"""JSONL annotation persistence.

One line per annotation, append-only.  A (task, annotator, response) triple
may appear once; resubmissions are conflicts, not updates, because study
data must never silently change under an annotator.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Iterable, Optional, Union

from .rubric import Annotation


class DuplicateAnnotation(ValueError):
    pass


class AnnotationStore:
    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._keys: set[tuple[str, str, str]] = set()
        if self.path.exists():
            for annotation in self._read():
                self._keys.add(self._key(annotation))
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()

    @staticmethod
    def _key(annotation: Annotation) -> tuple[str, str, str]:
        return (annotation.task_id, annotation.annotator_id, annotation.response_id)

    def _read(self) -> Iterable[Annotation]:
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield Annotation.from_dict(json.loads(line))

    def append(self, annotation: Annotation) -> None:
        key = self._key(annotation)
        with self._lock:
            if key in self._keys:
                raise DuplicateAnnotation(
                    f"annotation already stored for task={key[0]} "
                    f"annotator={key[1]} response={key[2]}"
                )
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(annotation.to_dict(), ensure_ascii=False) + "\n")
            self._keys.add(key)

    def has(self, task_id: str, annotator_id: str, response_id: str) -> bool:
        return (task_id, annotator_id, response_id) in self._keys

    def load_all(self) -> list[Annotation]:
        return list(self._read())

    def for_task(self, task_id: str, annotator_id: Optional[str] = None) -> list[Annotation]:
        return [
            a for a in self._read()
            if a.task_id == task_id
            and (annotator_id is None or a.annotator_id == annotator_id)
        ]

    def __len__(self) -> int:
        return len(self._keys)

"""Task assignment with pair overlap.

Annotators work in fixed pairs.  Each pair receives a block of tasks; a few
of those are assigned to both members (for agreement measurement) and the
rest are split evenly.  Dual-assigned tasks weight each of their
annotations at 0.5 so a task never counts twice downstream.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .rubric import AnnotationTask


class InfeasibleAssignment(ValueError):
    pass


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[tuple[str, str], ...]
    by_annotator: dict[str, tuple[str, ...]]
    shared_by_pair: dict[int, frozenset[str]]
    task_weights: dict[str, float]

    def annotators_for(self, task_id: str) -> tuple[str, ...]:
        return tuple(
            a for a, tasks in sorted(self.by_annotator.items()) if task_id in set(tasks)
        )


def _split_blocks(items: list[str], parts: int) -> list[list[str]]:
    """Contiguous blocks with sizes as even as possible, larger blocks first."""
    base, extra = divmod(len(items), parts)
    blocks = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        blocks.append(items[start:start + size])
        start += size
    return blocks


def derive_shared_count(block_size: int, overlap_fraction: float) -> int:
    """Shared-task count whose resulting share of each annotator's quota is
    closest to the requested overlap fraction."""
    best_s, best_gap = 0, float("inf")
    for s in range(block_size + 1):
        solo = block_size - s
        quota = s + (solo + 1) // 2  # the larger member's quota
        if quota == 0:
            continue
        gap = abs(s / quota - overlap_fraction)
        if gap < best_gap:
            best_s, best_gap = s, gap
    return best_s


def assign_tasks(
    task_ids: list[str],
    annotators: list[str],
    overlap_fraction: float = 0.3,
    seed: int = 0,
    shared_per_pair: int | None = None,
) -> Assignment:
    """Deterministic pair-based assignment.

    ``shared_per_pair`` overrides the derived overlap count when a study
    design fixes it outright.
    """
    if len(annotators) < 2 or len(annotators) % 2 != 0:
        raise InfeasibleAssignment("annotators must form pairs")
    if len(set(annotators)) != len(annotators):
        raise InfeasibleAssignment("duplicate annotator ids")
    if len(set(task_ids)) != len(task_ids):
        raise InfeasibleAssignment("duplicate task ids")
    if not 0.0 <= overlap_fraction < 1.0:
        raise InfeasibleAssignment("overlap_fraction must be in [0, 1)")

    pairs = tuple(
        (annotators[i], annotators[i + 1]) for i in range(0, len(annotators), 2)
    )
    if len(task_ids) < len(pairs):
        raise InfeasibleAssignment(
            f"{len(task_ids)} tasks cannot cover {len(pairs)} pairs"
        )

    rng = random.Random(seed)
    shuffled = list(task_ids)
    rng.shuffle(shuffled)
    blocks = _split_blocks(shuffled, len(pairs))

    by_annotator: dict[str, list[str]] = {a: [] for a in annotators}
    shared_by_pair: dict[int, frozenset[str]] = {}
    task_weights: dict[str, float] = {}

    for index, ((first, second), block) in enumerate(zip(pairs, blocks)):
        shared = (
            shared_per_pair if shared_per_pair is not None
            else derive_shared_count(len(block), overlap_fraction)
        )
        if shared > len(block):
            raise InfeasibleAssignment(
                f"pair {index}: {shared} shared tasks exceed its block of {len(block)}"
            )
        shared_tasks = block[:shared]
        solo_tasks = block[shared:]
        shared_by_pair[index] = frozenset(shared_tasks)

        for task in shared_tasks:
            by_annotator[first].append(task)
            by_annotator[second].append(task)
            task_weights[task] = 0.5
        for pos, task in enumerate(solo_tasks):
            by_annotator[first if pos % 2 == 0 else second].append(task)
            task_weights[task] = 1.0

    return Assignment(
        pairs=pairs,
        by_annotator={a: tuple(tasks) for a, tasks in by_annotator.items()},
        shared_by_pair=shared_by_pair,
        task_weights=task_weights,
    )


def tasks_from_assignment(
    assignment: Assignment,
    post_by_task: dict[str, str],
    responses_by_task: dict[str, tuple[str, ...]],
) -> list[AnnotationTask]:
    """Materialize AnnotationTask records from an assignment plus the task
    contents."""
    annotators_by_task: dict[str, list[str]] = {}
    for annotator, tasks in sorted(assignment.by_annotator.items()):
        for task in tasks:
            annotators_by_task.setdefault(task, []).append(annotator)
    return [
        AnnotationTask(
            task_id=task,
            post_id=post_by_task[task],
            response_ids=responses_by_task[task],
            annotators=tuple(assigned),
        )
        for task, assigned in sorted(annotators_by_task.items())
    ]

"""Weighted aggregation and grouped reporting.

Each (task, response) pair's criterion scores are the weight-blended view
of its one or two annotations; weights must close to 1.0 so dual-annotated
tasks never count double.  Reports compare approaches on the aggregated
values, with pairwise U tests and criterion-vs-overall rank correlations,
whole and split at a normalized overall quality of 0.6.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .rubric import CRITERIA, OVERALL, RESPONSE_LEVEL_CRITERIA, Annotation, Kind
from .stats import (
    NOT_APPLICABLE,
    EmptySample,
    mann_whitney_u,
    observed_agreement,
    spearman_rho,
    weighted_kappa,
)

OVERALL_SPLIT_THRESHOLD = 0.6  # on overall normalized to [0, 1]

GROUPABLE_LABELS = ("modality", "fact_checked", "leaning", "domain", "tactic")


class MissingAnnotation(ValueError):
    pass


class UnknownGrouping(ValueError):
    pass


def numeric_value(criterion: str, value: Any) -> float:
    """Criterion value on its ordinal scale, as a float."""
    spec = OVERALL if criterion == "overall" else CRITERIA[criterion]
    if spec.kind is Kind.INT_SCALE:
        return float(spec.validate(value))
    return float(spec.ordinal(value))


def response_scores(annotations: list[Annotation]) -> dict[tuple[str, str], dict]:
    """Collapse annotations into one weighted record per (task, response).

    Raises MissingAnnotation when a response's annotation weights do not sum
    to 1.0 (a dual-assigned task with only one submission, or bad weights).
    """
    grouped: dict[tuple[str, str], list[Annotation]] = {}
    for annotation in annotations:
        grouped.setdefault((annotation.task_id, annotation.response_id), []).append(annotation)

    out: dict[tuple[str, str], dict] = {}
    for key in sorted(grouped):
        group = grouped[key]
        total_weight = sum(a.weight for a in group)
        if total_weight != 1.0:
            raise MissingAnnotation(
                f"task {key[0]} response {key[1]}: weights sum to {total_weight}, expected 1.0"
            )
        values: dict[str, float] = {}
        for criterion in RESPONSE_LEVEL_CRITERIA + ("overall",):
            values[criterion] = sum(
                a.weight * numeric_value(criterion, a.values[criterion]) for a in group
            )
        metadata: dict[str, str] = {}
        for annotation in group:
            for label, value in annotation.metadata.items():
                metadata.setdefault(label, value)
        out[key] = {
            "task_id": key[0],
            "response_id": key[1],
            "values": values,
            "metadata": metadata,
        }
    return out


def _mean_sd(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    variance = sum((v - mean) ** 2 for v in values) / n
    return mean, variance ** 0.5


def _approach_of(record: dict) -> str:
    return record["metadata"].get("approach", "unlabeled")


def approach_summary(records: list[dict]) -> dict[str, dict]:
    """Per-approach mean/SD/n for every criterion."""
    by_approach: dict[str, list[dict]] = {}
    for record in records:
        by_approach.setdefault(_approach_of(record), []).append(record)

    out: dict[str, dict] = {}
    for approach in sorted(by_approach):
        group = by_approach[approach]
        criteria: dict[str, dict] = {}
        for criterion in RESPONSE_LEVEL_CRITERIA + ("overall",):
            values = [r["values"][criterion] for r in group]
            mean, sd = _mean_sd(values)
            criteria[criterion] = {"mean": mean, "sd": sd, "n": len(values)}
        out[approach] = criteria
    return out


def pairwise_overall_tests(records: list[dict]) -> list[dict]:
    """Two-sided U tests on the aggregated overall score for every pair of
    approaches present."""
    by_approach: dict[str, list[float]] = {}
    for record in records:
        by_approach.setdefault(_approach_of(record), []).append(record["values"]["overall"])

    approaches = sorted(by_approach)
    tests = []
    for i, first in enumerate(approaches):
        for second in approaches[i + 1:]:
            try:
                result = mann_whitney_u(by_approach[first], by_approach[second])
            except EmptySample:
                continue
            tests.append(
                {
                    "a": first,
                    "b": second,
                    "u": result.u,
                    "p_value": result.p_value,
                    "method": result.method,
                }
            )
    return tests


def criterion_correlations(records: list[dict]) -> dict[str, dict]:
    """Spearman of each criterion against overall: across all responses and
    within the low/high halves split at normalized overall 0.6."""

    def table(subset: list[dict]) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for criterion in RESPONSE_LEVEL_CRITERIA:
            if len(subset) < 2:
                out[criterion] = None
                continue
            rho = spearman_rho(
                [r["values"][criterion] for r in subset],
                [r["values"]["overall"] for r in subset],
            )
            out[criterion] = None if rho is NOT_APPLICABLE else rho
        return out

    low = [r for r in records if r["values"]["overall"] / 10.0 <= OVERALL_SPLIT_THRESHOLD]
    high = [r for r in records if r["values"]["overall"] / 10.0 > OVERALL_SPLIT_THRESHOLD]
    return {
        "all": table(records),
        "low_quality": table(low),
        "high_quality": table(high),
        "split_threshold": OVERALL_SPLIT_THRESHOLD,
        "low_n": len(low),
        "high_n": len(high),
    }


def build_report(
    annotations: list[Annotation], group_by: Optional[str] = None
) -> dict:
    """The full evaluation report over aggregated responses.

    ``group_by`` may name any metadata label in GROUPABLE_LABELS; grouped
    sections repeat the summary and tests within each present label value.
    """
    if group_by is not None and group_by not in GROUPABLE_LABELS:
        raise UnknownGrouping(
            f"cannot group by {group_by!r}; known labels: {GROUPABLE_LABELS}"
        )
    records = list(response_scores(annotations).values())

    report: dict[str, Any] = {
        "n_responses": len(records),
        "approaches": approach_summary(records),
        "pairwise_overall": pairwise_overall_tests(records),
        "correlations": criterion_correlations(records),
    }
    if group_by is not None:
        groups: dict[str, list[dict]] = {}
        for record in records:
            label = record["metadata"].get(group_by)
            if label is not None:
                groups.setdefault(label, []).append(record)
        report["group_by"] = group_by
        report["groups"] = {
            label: {
                "n_responses": len(members),
                "approaches": approach_summary(members),
                "pairwise_overall": pairwise_overall_tests(members),
            }
            for label, members in sorted(groups.items())
        }
    return report


def write_report_json(report: dict, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(report, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_report_csv(report: dict, path: Union[str, Path]) -> None:
    """Plot-ready flat table: one row per (group, approach, criterion)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "approach", "criterion", "mean", "sd", "n"])

        def emit(group_label: str, approaches: dict) -> None:
            for approach, criteria in sorted(approaches.items()):
                for criterion, cell in criteria.items():
                    writer.writerow(
                        [group_label, approach, criterion,
                         f"{cell['mean']:.6g}", f"{cell['sd']:.6g}", cell["n"]]
                    )

        emit("all", report["approaches"])
        for label, section in sorted(report.get("groups", {}).items()):
            emit(label, section["approaches"])


def paired_ratings(annotations: Sequence[Annotation]) -> Dict[str, List[Tuple[object, object]]]:
    """Collect double-annotated (task, response) rating pairs per criterion.

    Only units with exactly two annotators contribute; annotator order within
    a pair is normalised by id so repeated calls pair identically.
    """
    units: Dict[Tuple[str, str], List[Annotation]] = {}
    for ann in annotations:
        units.setdefault((ann.task_id, ann.response_id), []).append(ann)
    pairs: Dict[str, List[Tuple[object, object]]] = {name: [] for name in RESPONSE_LEVEL_CRITERIA}
    pairs[OVERALL.name] = []
    for group in units.values():
        if len(group) != 2:
            continue
        first, second = sorted(group, key=lambda a: a.annotator_id)
        for name in RESPONSE_LEVEL_CRITERIA:
            pairs[name].append((first.values[name], second.values[name]))
        pairs[OVERALL.name].append((first.values[OVERALL.name], second.values[OVERALL.name]))
    return pairs


def agreement_summary(annotations: Sequence[Annotation], weights: str = "linear") -> dict:
    """Chance-corrected and raw agreement per criterion over shared units."""
    pairs = paired_ratings(annotations)
    summary: dict = {}
    for name, rated in sorted(pairs.items()):
        spec = OVERALL if name == OVERALL.name else CRITERIA[name]
        if not rated:
            summary[name] = {"kappa": None, "observed": None, "n": 0}
            continue
        first = [p[0] for p in rated]
        second = [p[1] for p in rated]
        kappa = weighted_kappa(first, second, spec.scale(), weights=weights)
        summary[name] = {
            "kappa": None if kappa is NOT_APPLICABLE else kappa,
            "observed": observed_agreement(first, second),
            "n": len(rated),
        }
    return summary

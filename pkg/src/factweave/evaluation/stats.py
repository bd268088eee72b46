"""Agreement and comparison statistics.

Implemented from the standard formulas rather than wrapped from a stats
package because the edge behavior is contractual here: weighted kappa must
degrade to a NotApplicable sentinel on zero-variance marginals (skewed
criteria hit this constantly), the U test must be exact for small samples,
and ranking must mid-rank ties.  The test suite cross-checks every routine
against independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union


class LengthMismatch(ValueError):
    pass


class EmptySample(ValueError):
    pass


class _NotApplicableType:
    """Singleton returned when a coefficient is undefined for the data."""

    _instance = None

    def __new__(cls) -> "_NotApplicableType":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NotApplicable"

    def __bool__(self) -> bool:
        return False


NOT_APPLICABLE = _NotApplicableType()

KappaResult = Union[float, _NotApplicableType]


def _check_paired(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise LengthMismatch(f"paired samples differ in length: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise EmptySample("paired samples are empty")


def weighted_kappa(
    ratings_a: Sequence,
    ratings_b: Sequence,
    categories: Sequence,
    weights: str = "linear",
) -> KappaResult:
    """Weighted Cohen's kappa over a declared category order.

    Disagreement weights are |i-j|/(k-1) (linear) or its square (quadratic).
    When the weighted expected disagreement is zero (both raters pinned to
    one category), chance correction is undefined and NotApplicable is
    returned rather than a misleading number.
    """
    _check_paired(ratings_a, ratings_b)
    if weights not in ("linear", "quadratic"):
        raise ValueError(f"weights must be linear or quadratic, got {weights!r}")
    index = {category: i for i, category in enumerate(categories)}
    if len(index) != len(categories):
        raise ValueError("categories must be distinct")
    for value in list(ratings_a) + list(ratings_b):
        if value not in index:
            raise ValueError(f"rating {value!r} not among declared categories")

    k = len(categories)
    n = len(ratings_a)
    if k == 1:
        return NOT_APPLICABLE

    def weight(i: int, j: int) -> float:
        d = abs(i - j) / (k - 1)
        return d * d if weights == "quadratic" else d

    marginal_a = [0.0] * k
    marginal_b = [0.0] * k
    observed = 0.0
    for va, vb in zip(ratings_a, ratings_b):
        i, j = index[va], index[vb]
        marginal_a[i] += 1.0
        marginal_b[j] += 1.0
        observed += weight(i, j)
    observed /= n

    expected = 0.0
    for i in range(k):
        if marginal_a[i] == 0.0:
            continue
        for j in range(k):
            expected += (marginal_a[i] / n) * (marginal_b[j] / n) * weight(i, j)

    if expected == 0.0:
        return NOT_APPLICABLE
    return 1.0 - observed / expected


def observed_agreement(ratings_a: Sequence, ratings_b: Sequence) -> float:
    """Raw fraction of exact matches; the fallback when kappa degenerates."""
    _check_paired(ratings_a, ratings_b)
    matches = sum(1 for va, vb in zip(ratings_a, ratings_b) if va == vb)
    return matches / len(ratings_a)


def _midranks(values: Sequence[float]) -> list[float]:
    """Ranks 1..n with ties sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2 + 1
        for pos in range(i, j + 1):
            ranks[order[pos]] = average
        i = j + 1
    return ranks


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    method: str  # "exact" | "normal"


EXACT_ENUMERATION_MAX = 8


def _exact_u_distribution(n1: int, n2: int) -> list[int]:
    """Frequency table of U over all C(n1+n2, n1) arrangements, by the
    standard recurrence c(a, b, u) = c(a-1, b, u-b) + c(a, b-1, u)."""
    max_u = n1 * n2
    # table[a][b] = list of counts over u for samples of size a and b
    table: list[list[list[int]]] = [
        [[0] * (max_u + 1) for _ in range(n2 + 1)] for _ in range(n1 + 1)
    ]
    for b in range(n2 + 1):
        table[0][b][0] = 1
    for a in range(1, n1 + 1):
        table[a][0][0] = 1
        for b in range(1, n2 + 1):
            for u in range(max_u + 1):
                ways = table[a][b - 1][u]
                if u >= b:
                    ways += table[a - 1][b][u - b]
                table[a][b][u] = ways
    return table[n1][n2]


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def mann_whitney_u(
    sample_a: Sequence[float], sample_b: Sequence[float], method: str = "auto"
) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U.

    Exact by full enumeration when the smaller sample has at most
    EXACT_ENUMERATION_MAX values and there are no ties; otherwise the
    tie-corrected normal approximation with a 0.5 continuity correction.
    ``method`` forces one branch ("exact" requires tie-free data).
    """
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    if len(sample_a) == 0 or len(sample_b) == 0:
        raise EmptySample("both samples must be nonempty")
    n1, n2 = len(sample_a), len(sample_b)
    combined = list(sample_a) + list(sample_b)
    ranks = _midranks(combined)
    rank_sum_a = sum(ranks[:n1])
    u_a = rank_sum_a - n1 * (n1 + 1) / 2

    has_ties = len(set(combined)) != len(combined)
    if method == "exact" and has_ties:
        raise ValueError("exact enumeration requires tie-free samples")
    use_exact = method == "exact" or (
        method == "auto" and min(n1, n2) <= EXACT_ENUMERATION_MAX and not has_ties
    )
    if use_exact:
        distribution = _exact_u_distribution(n1, n2)
        total = sum(distribution)
        u_int = int(round(u_a))
        u_min = min(u_int, n1 * n2 - u_int)
        p = 2.0 * sum(distribution[: u_min + 1]) / total
        return MannWhitneyResult(u=u_a, p_value=min(1.0, p), method="exact")

    mean = n1 * n2 / 2.0
    n = n1 + n2
    tie_term = 0.0
    seen: dict[float, int] = {}
    for value in combined:
        seen[value] = seen.get(value, 0) + 1
    for t in seen.values():
        tie_term += t * t * t - t
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0.0:
        # all values identical: no evidence either way
        return MannWhitneyResult(u=u_a, p_value=1.0, method="normal")
    deviation = u_a - mean
    if deviation > 0:
        deviation -= 0.5
    elif deviation < 0:
        deviation += 0.5
    z = deviation / math.sqrt(variance)
    p = 2.0 * _normal_sf(abs(z))
    return MannWhitneyResult(u=u_a, p_value=min(1.0, p), method="normal")


def _pearson(x: Sequence[float], y: Sequence[float]) -> KappaResult:
    n = len(x)
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    cov = sum((a - mean_x) * (b - mean_y) for a, b in zip(x, y))
    var_x = sum((a - mean_x) ** 2 for a in x)
    var_y = sum((b - mean_y) ** 2 for b in y)
    if var_x == 0.0 or var_y == 0.0:
        return NOT_APPLICABLE
    return cov / math.sqrt(var_x * var_y)


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> KappaResult:
    """Spearman rank correlation with mid-ranked ties: Pearson over ranks.
    NotApplicable when either input is constant."""
    _check_paired(x, y)
    if len(x) < 2:
        raise EmptySample("need at least two pairs")
    return _pearson(_midranks(x), _midranks(y))

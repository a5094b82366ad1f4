"""Pairwise dissimilarities: Jaccard, Manhattan, and Gower.

All three are pure functions; the matrix builder accumulates per-feature
terms in schema order so a matrix cell is bitwise identical to the scalar
call for the same pair, regardless of how rows are scheduled.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .cohort import Cohort
from .errors import IncompatibleMetric, LengthMismatch


class Metric(Enum):
    JACCARD = "jaccard"
    MANHATTAN = "manhattan"
    GOWER = "gower"

    @classmethod
    def parse(cls, text: str) -> "Metric":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"not a metric: {text!r}") from None


def jaccard(a, b) -> float:
    """Jaccard dissimilarity for asymmetric binary vectors, in [0, 1].

    Positions where both vectors are 0 carry no information and are ignored.
    A pair with no informative position (both all-zero) is defined as 0.
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise LengthMismatch(f"{a.shape} vs {b.shape}")
    mismatch = int(np.sum(a != b))
    union = mismatch + int(np.sum((a == 1) & (b == 1)))
    if union == 0:
        return 0.0
    return float(mismatch) / float(union)


def manhattan(a, b) -> float:
    """Mismatch count between binary vectors (Hamming, unnormalized)."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    if a.shape != b.shape:
        raise LengthMismatch(f"{a.shape} vs {b.shape}")
    return float(np.sum(a != b))


def gower(a_binary, b_binary, a_continuous, b_continuous, ranges) -> float:
    """Gower dissimilarity over mixed binary/continuous features, in [0, 1].

    Binary features use the asymmetric rule (0/0 pairs are excluded, like
    Jaccard); continuous features score |a-b| normalized by the cohort-wide
    range. Zero-range features carry zero weight. A pair with total weight
    zero is defined as 0.
    """
    a_binary = np.asarray(a_binary, dtype=np.uint8)
    b_binary = np.asarray(b_binary, dtype=np.uint8)
    if a_binary.shape != b_binary.shape or len(a_continuous) != len(b_continuous):
        raise LengthMismatch("records do not share a schema")
    if len(ranges) != len(a_continuous):
        raise LengthMismatch("ranges do not cover the continuous features")
    mismatch = int(np.sum(a_binary != b_binary))
    union = mismatch + int(np.sum((a_binary == 1) & (b_binary == 1)))
    score = float(mismatch)
    weight = float(union)
    for x, y, (lo, hi) in zip(a_continuous, b_continuous, ranges):
        span = hi - lo
        if span > 0:
            score += abs(float(x) - float(y)) / span
            weight += 1.0
    if weight == 0.0:
        return 0.0
    return score / weight


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric matrix of dissimilarities with a zero diagonal.

    degenerate_pairs counts unordered pairs that hit the zero-weight
    convention (distance defined as 0); surfaced so runs can be audited.
    """

    ids: tuple[str, ...]
    values: np.ndarray
    metric: Metric
    degenerate_pairs: int = 0

    def __post_init__(self):
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise ValueError("matrix shape does not match id count")
        self.values.setflags(write=False)

    @cached_property
    def id_index(self) -> dict:
        return {rid: i for i, rid in enumerate(self.ids)}

    def row(self, record_id: str) -> np.ndarray:
        return self.values[self.id_index[record_id]]


def _pair_counts(binary):
    """(mismatch, union) count matrices via exact integer matmuls."""
    b = binary.astype(np.int64)
    ones = b @ b.T
    inv = 1 - b
    mismatch = b @ inv.T + inv @ b.T
    return mismatch, mismatch + ones


def distance_matrix(cohort: Cohort, metric: Metric) -> DistanceMatrix:
    """Materialize the full n x n matrix for the chosen metric."""
    n_cont = len(cohort.schema.continuous_names)
    if metric is not Metric.GOWER and n_cont > 0:
        raise IncompatibleMetric(
            f"{metric.value} requires a schema without continuous features"
        )
    n = len(cohort)
    if n == 0:
        return DistanceMatrix((), np.zeros((0, 0)), metric, 0)

    mismatch, union = _pair_counts(cohort.binary)
    degenerate = 0
    if metric is Metric.MANHATTAN:
        values = mismatch.astype(np.float64)
    elif metric is Metric.JACCARD:
        empty = union == 0
        degenerate = int((np.triu(empty, k=1)).sum())
        values = np.where(
            empty, 0.0, mismatch.astype(np.float64) / np.where(empty, 1, union)
        )
    else:
        score = mismatch.astype(np.float64)
        weight = union.astype(np.float64)
        for j, (lo, hi) in enumerate(cohort.continuous_ranges):
            span = hi - lo
            if span > 0:
                col = cohort.continuous[:, j]
                score = score + np.abs(col[:, None] - col[None, :]) / span
                weight = weight + 1.0
        unweighted = weight == 0.0
        degenerate = int((np.triu(unweighted, k=1)).sum())
        values = np.where(unweighted, 0.0, score / np.where(unweighted, 1.0, weight))
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(cohort.ids, values, metric, degenerate)


def distance_row(cohort: Cohort, metric: Metric, index: int) -> np.ndarray:
    """One record's distances to every record, without the n x n matrix.

    Fallback for cohorts too large to materialize; cell arithmetic is
    identical to distance_matrix, so values agree bitwise.
    """
    n_cont = len(cohort.schema.continuous_names)
    if metric is not Metric.GOWER and n_cont > 0:
        raise IncompatibleMetric(
            f"{metric.value} requires a schema without continuous features"
        )
    b = cohort.binary.astype(np.int64)
    own = b[index]
    inv = 1 - b
    mismatch = b @ (1 - own) + inv @ own
    union = mismatch + b @ own
    if metric is Metric.MANHATTAN:
        values = mismatch.astype(np.float64)
    elif metric is Metric.JACCARD:
        empty = union == 0
        values = np.where(
            empty, 0.0, mismatch.astype(np.float64) / np.where(empty, 1, union)
        )
    else:
        score = mismatch.astype(np.float64)
        weight = union.astype(np.float64)
        for j, (lo, hi) in enumerate(cohort.continuous_ranges):
            span = hi - lo
            if span > 0:
                col = cohort.continuous[:, j]
                score = score + np.abs(col - col[index]) / span
                weight = weight + 1.0
        unweighted = weight == 0.0
        values = np.where(unweighted, 0.0, score / np.where(unweighted, 1.0, weight))
    values[index] = 0.0
    return values


def export_distance_csv(matrix: DistanceMatrix, path) -> None:
    """Diagnostic CSV dump: row/column headers are record ids, 17 signif. digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("," + ",".join(matrix.ids) + "\n")
        for i, rid in enumerate(matrix.ids):
            cells = (format(v, ".17g") for v in matrix.values[i])
            fh.write(rid + "," + ",".join(cells) + "\n")

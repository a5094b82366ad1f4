"""Leave-one-out evaluation and (radius, threshold) grid search.

Two notions of "best" are supported: maximize precision subject to a
minimum number of true positives, or maximize true positives subject to a
precision floor. Ties are broken by a fixed total order so repeated runs
pick the same winner.
"""

from dataclasses import dataclass

import numpy as np

from .classify import Hyperparameters, base_rate
from .cohort import Cohort
from .distance import DistanceMatrix, Metric, distance_matrix
from .errors import EmptyGrid, NoFeasibleCell, TooFewLabeled
from .parallel import thread_map
from .stats import binom_sf


@dataclass(frozen=True)
class LooMetrics:
    """Counts from predicting each labeled record with itself held out.

    precision is None when no record was decided POS: an undefined ratio is
    reported as such, never silently as 0 or 1. yield_proportion relates
    newly classified UNKNOWN records to the labeled pool, so it can
    legitimately exceed 1.
    """

    true_positives: int
    false_positives: int
    precision: float | None
    yield_proportion: float


@dataclass(frozen=True)
class CriterionA:
    """Maximize precision subject to at least min_tp true positives."""

    min_tp: int = 10


@dataclass(frozen=True)
class CriterionB:
    """Maximize true positives subject to precision >= min_precision."""

    min_precision: float = 0.85


@dataclass(frozen=True)
class GridCell:
    radius: float
    p_threshold: float
    metrics: LooMetrics


@dataclass(frozen=True)
class GridSearchReport:
    grid: tuple[GridCell, ...]
    winner: GridCell
    criterion: object


@dataclass(frozen=True)
class FrontierPoint:
    min_precision: float
    feasible: bool
    achieved_precision: float | None = None
    yield_proportion: float | None = None
    winner_radius: float | None = None
    winner_p_threshold: float | None = None
    true_positives: int | None = None


def _radius_pvalues(cohort, distances, p0, radius):
    """Per-record (n, k, p) with the record itself excluded from its ball."""
    within = distances.values <= radius
    np.fill_diagonal(within, False)
    n_arr = (within & cohort.labeled_mask[None, :]).sum(axis=1)
    k_arr = (within & cohort.pos_mask[None, :]).sum(axis=1)
    p_arr = np.empty(len(cohort), dtype=np.float64)
    memo = {}
    for i, (n, k) in enumerate(zip(n_arr.tolist(), k_arr.tolist())):
        key = (k, n)
        p = memo.get(key)
        if p is None:
            p = binom_sf(k, n, p0)
            memo[key] = p
        p_arr[i] = p
    return n_arr, k_arr, p_arr


def _cell_metrics(cohort, p_arr, threshold) -> LooMetrics:
    decided = p_arr < threshold
    labeled = cohort.labeled_mask
    pos = cohort.pos_mask
    tp = int((decided & pos).sum())
    fp = int((decided & labeled & ~pos).sum())
    n_labeled = int(labeled.sum())
    newly = int((decided & ~labeled).sum())
    precision = tp / (tp + fp) if tp + fp > 0 else None
    return LooMetrics(tp, fp, precision, newly / n_labeled)


def loo_evaluate(
    cohort: Cohort, hp: Hyperparameters, distances: DistanceMatrix
) -> LooMetrics:
    """Leave-one-out counts for one hyperparameter pair.

    Each labeled record is classified with itself removed from the
    evidence; the base rate stays fixed at the full labeled pool's value.
    UNKNOWN records are classified under the same pair to obtain the yield.
    """
    if int(cohort.labeled_mask.sum()) < 2:
        raise TooFewLabeled("leave-one-out needs at least 2 labeled records")
    p0 = base_rate(cohort)
    _, _, p_arr = _radius_pvalues(cohort, distances, p0, hp.radius)
    return _cell_metrics(cohort, p_arr, hp.p_threshold)


def default_radius_grid(cohort: Cohort, distances: DistanceMatrix) -> tuple[float, ...]:
    """41 evenly spaced quantiles (0%, 2.5%, ..., 100%) of labeled-pair distances."""
    labeled = np.flatnonzero(cohort.labeled_mask)
    sub = distances.values[np.ix_(labeled, labeled)]
    pairs = sub[np.triu_indices(len(labeled), k=1)]
    if pairs.size == 0:
        raise TooFewLabeled("no labeled pairs to build a radius grid from")
    qs = np.quantile(pairs, np.linspace(0.0, 1.0, 41))
    return tuple(sorted(set(float(q) for q in qs)))


def default_threshold_grid() -> tuple[float, ...]:
    decades = [10.0 ** e for e in range(-6, 0)]
    return tuple(sorted(set(decades + [0.02, 0.03, 0.05])))


def _feasible(cell: GridCell, criterion) -> bool:
    m = cell.metrics
    if isinstance(criterion, CriterionA):
        return m.true_positives >= criterion.min_tp
    return m.precision is not None and m.precision >= criterion.min_precision


def _rank_key(cell: GridCell, criterion):
    # larger key wins; (radius, threshold) ascending settles exact ties
    m = cell.metrics
    precision = m.precision if m.precision is not None else -1.0
    if isinstance(criterion, CriterionA):
        return (precision, m.true_positives, -cell.radius, -cell.p_threshold)
    return (m.true_positives, precision, -cell.radius, -cell.p_threshold)


def evaluate_grid(
    cohort: Cohort,
    metric: Metric,
    radius_grid=None,
    threshold_grid=None,
    distances: DistanceMatrix | None = None,
    threads: int = 1,
) -> tuple[GridCell, ...]:
    """LOO metrics for every (radius, threshold) pair, sorted by (S, T)."""
    if distances is None:
        distances = distance_matrix(cohort, metric)
    if radius_grid is None:
        radius_grid = default_radius_grid(cohort, distances)
    if threshold_grid is None:
        threshold_grid = default_threshold_grid()
    radii = tuple(sorted(set(float(s) for s in radius_grid)))
    thresholds = tuple(sorted(set(float(t) for t in threshold_grid)))
    if not radii or not thresholds:
        raise EmptyGrid("both grids must be non-empty")
    if any(s < 0 for s in radii):
        raise ValueError("radii must be >= 0")
    if any(not 0.0 < t <= 1.0 for t in thresholds):
        raise ValueError("thresholds must be in (0, 1]")
    if int(cohort.labeled_mask.sum()) < 2:
        raise TooFewLabeled("leave-one-out needs at least 2 labeled records")
    p0 = base_rate(cohort)

    def eval_radius(radius):
        _, _, p_arr = _radius_pvalues(cohort, distances, p0, radius)
        return tuple(
            GridCell(radius, t, _cell_metrics(cohort, p_arr, t)) for t in thresholds
        )

    per_radius = thread_map(eval_radius, radii, threads)
    return tuple(cell for group in per_radius for cell in group)


def select_winner(cells, criterion) -> GridCell:
    best = None
    best_key = None
    for cell in cells:
        if not _feasible(cell, criterion):
            continue
        key = _rank_key(cell, criterion)
        if best is None or key > best_key:
            best, best_key = cell, key
    if best is None:
        raise NoFeasibleCell(tuple(cells))
    return best


def grid_search(
    cohort: Cohort,
    metric: Metric,
    radius_grid=None,
    threshold_grid=None,
    criterion=CriterionA(),
    distances: DistanceMatrix | None = None,
    threads: int = 1,
) -> GridSearchReport:
    cells = evaluate_grid(cohort, metric, radius_grid, threshold_grid, distances, threads)
    winner = select_winner(cells, criterion)
    return GridSearchReport(grid=cells, winner=winner, criterion=criterion)


def precision_yield_frontier(
    cohort: Cohort,
    metric: Metric,
    radius_grid=None,
    threshold_grid=None,
    thresholds=(0.80, 0.85, 0.90, 0.95),
    distances: DistanceMatrix | None = None,
    threads: int = 1,
) -> list[FrontierPoint]:
    """Best yield at each precision floor, plus the unconstrained point.

    The grid is evaluated once; each floor just re-selects a winner, so the
    feasible sets nest and yields are weakly monotone in the floor.
    """
    cells = evaluate_grid(cohort, metric, radius_grid, threshold_grid, distances, threads)
    points = []
    for floor in list(thresholds) + [0.0]:
        try:
            w = select_winner(cells, CriterionB(min_precision=floor))
        except NoFeasibleCell:
            points.append(FrontierPoint(min_precision=floor, feasible=False))
            continue
        points.append(
            FrontierPoint(
                min_precision=floor,
                feasible=True,
                achieved_precision=w.metrics.precision,
                yield_proportion=w.metrics.yield_proportion,
                winner_radius=w.radius,
                winner_p_threshold=w.p_threshold,
                true_positives=w.metrics.true_positives,
            )
        )
    return points

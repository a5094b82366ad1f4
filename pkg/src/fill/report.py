"""Report and table emission.

All numbers are written with 17 significant digits so files round-trip
float64 exactly and reruns are byte-comparable. Undefined precision is
emitted as null (reports) or NA (flat tables), never as a fake 0 or 1.
"""

from .classify import ClassificationResult
from .explain import NeighborhoodExplanation, format_feature_cell, top_features
from .tune import CriterionA, FrontierPoint, GridSearchReport


def g17(x) -> str:
    return format(float(x), ".17g")


def dumps_tree(obj, indent: int = 0) -> str:
    """JSON text with deterministic layout and g17 floats."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True or obj is False:
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return g17(obj)
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f'{pad}  "{key}": {dumps_tree(value, indent + 1)}'
            for key, value in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(
            f"{pad}  {dumps_tree(value, indent + 1)}" for value in obj
        )
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def write_tree(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_tree(obj) + "\n")


def _criterion_tree(criterion):
    if isinstance(criterion, CriterionA):
        return {"type": "a", "min_tp": criterion.min_tp}
    return {"type": "b", "min_precision": criterion.min_precision}


def _cell_tree(cell):
    m = cell.metrics
    return {
        "radius": cell.radius,
        "p_threshold": cell.p_threshold,
        "tp": m.true_positives,
        "fp": m.false_positives,
        "precision": m.precision,
        "yield": m.yield_proportion,
    }


def grid_report_tree(report: GridSearchReport) -> dict:
    return {
        "criterion": _criterion_tree(report.criterion),
        "feasible": True,
        "winner": _cell_tree(report.winner),
        "grid": [_cell_tree(cell) for cell in report.grid],
    }


def infeasible_report_tree(criterion, grid) -> dict:
    return {
        "criterion": _criterion_tree(criterion),
        "feasible": False,
        "winner": None,
        "grid": [_cell_tree(cell) for cell in grid],
    }


def write_grid_table(cells, path) -> None:
    """Flat CSV companion for external plotting: S,T,tp,fp,precision,yield."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("S,T,tp,fp,precision,yield\n")
        for cell in cells:
            m = cell.metrics
            precision = "NA" if m.precision is None else g17(m.precision)
            fh.write(
                f"{g17(cell.radius)},{g17(cell.p_threshold)},"
                f"{m.true_positives},{m.false_positives},"
                f"{precision},{g17(m.yield_proportion)}\n"
            )


def write_imputations(results: list[ClassificationResult], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("record_id,n,k,p_value,decision\n")
        for r in results:
            fh.write(
                f"{r.record_id},{r.neighborhood_n},{r.positive_k},"
                f"{g17(r.p_value)},{r.decision.value}\n"
            )


def write_volcano(expl: NeighborhoodExplanation, path) -> None:
    """All features, including the insignificant cloud, for volcano plots."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("feature,kind,effect,raw_p,adjusted_p\n")
        for c in expl.comparisons:
            fh.write(
                f"{c.feature},{c.kind.value},{g17(c.effect)},"
                f"{g17(c.raw_p)},{g17(c.adjusted_p)}\n"
            )


def write_top_features(explanations, path, k: int = 5) -> None:
    """One row per explained record, ranked feature cells left to right."""
    ordinals = []
    for i in range(1, k + 1):
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(i if i < 20 else i % 10, "th")
        ordinals.append(f"{i}{suffix}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("record_id," + ",".join(ordinals) + "\n")
        for expl in explanations:
            cells = [format_feature_cell(c) for c in top_features(expl, k)]
            cells += [""] * (k - len(cells))
            fh.write(expl.record_id + "," + ",".join(cells) + "\n")


def frontier_tree(points: list[FrontierPoint]) -> list:
    out = []
    for p in points:
        out.append(
            {
                "min_precision": p.min_precision,
                "feasible": p.feasible,
                "achieved_precision": p.achieved_precision,
                "yield": p.yield_proportion,
                "tp": p.true_positives,
                "radius": p.winner_radius,
                "p_threshold": p.winner_p_threshold,
            }
        )
    return out


def write_baseline_report(path, accuracy_pair, precision_pair, c_stat, cutoffs) -> None:
    """Accuracy/precision at the default cutoff with the optimal-cutoff
    result in brackets, one metric per line."""
    def fmt(value):
        return "NA" if value is None else g17(value)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"cutoff_default = {g17(cutoffs[0])}\n")
        fh.write(f"cutoff_optimal = {g17(cutoffs[1])}\n")
        fh.write(f"accuracy = {fmt(accuracy_pair[0])} ({fmt(accuracy_pair[1])})\n")
        fh.write(f"precision = {fmt(precision_pair[0])} ({fmt(precision_pair[1])})\n")
        fh.write(f"c_statistic = {fmt(c_stat)}\n")

"""Orbit statistics, repeater arithmetic and the small-graph class survey."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .circuit import METRICS, Circuit, cost_report
from .graphs import Graph
from .mapper import map_to_circuit
from .noise import (  # noqa: F401  re-exported
    DistillationPlan,
    FidelityEstimate,
    NoiseModel,
    distill_pattern,
    epr_fidelity_mc,
    leaf_pairs,
)
from .orbit import ClassPartition, OrbitRecord, entanglement_classes

X_METRICS = ("edges",) + METRICS


class AnalysisError(ValueError):
    """Statistic undefined for the given input."""


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("pearson needs two equal-length sequences")
    if x.size < 2:
        raise AnalysisError("pearson needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise AnalysisError("pearson is undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def record_costs(
    records: Iterable[OrbitRecord], mapper: Callable[[Graph], Circuit] | None = None
) -> list[OrbitRecord]:
    """Attach ``edges`` plus every cost metric of the natural-order circuit."""
    mapper = mapper or (lambda g: map_to_circuit(g, verify=False))
    out = []
    for rec in records:
        costs = cost_report(mapper(rec.graph)).as_dict()
        costs["edges"] = rec.graph.edge_count()
        out.append(replace(rec, costs=costs))
    return out


def _metric(rec: OrbitRecord, name: str) -> float:
    if name == "edges" and "edges" not in (rec.costs or {}):
        return rec.graph.edge_count()
    if not rec.costs or name not in rec.costs:
        raise AnalysisError(f"record lacks cost metric {name!r}")
    return rec.costs[name]


@dataclass(frozen=True)
class SeriesRow:
    x: float
    mean_y: float
    std_y: float
    count: int


@dataclass(frozen=True)
class CorrelationSeries:
    x_metric: str
    y_metric: str
    rows: tuple[SeriesRow, ...]

    @property
    def pearson(self) -> float:
        """Pearson coefficient of the grouped means (needs two or more groups)."""
        return pearson([r.x for r in self.rows], [r.mean_y for r in self.rows])

    def to_csv(self, header: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "mean_y", "std_y", "count"])
        for r in self.rows:
            w.writerow([_num(r.x), f"{r.mean_y:.6f}", f"{r.std_y:.6f}", r.count])
        return buf.getvalue()


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:.6f}"


def correlation_series(records: Sequence[OrbitRecord], x_metric: str = "edges", y_metric: str = "ee_cnots") -> CorrelationSeries:
    if not records:
        raise AnalysisError("correlation series of an empty record set")
    groups: dict[float, list[float]] = {}
    for rec in records:
        groups.setdefault(_metric(rec, x_metric), []).append(_metric(rec, y_metric))
    rows = []
    for x in sorted(groups):
        ys = np.asarray(groups[x], dtype=float)
        rows.append(SeriesRow(x, float(ys.mean()), float(ys.std()), int(ys.size)))
    return CorrelationSeries(x_metric, y_metric, tuple(rows))


# ---------------------------------------------------------------------------
# repeater model


@dataclass(frozen=True)
class RepeaterModel:
    n: int
    N: int
    P_b: float

    def __post_init__(self) -> None:
        if self.n < 4:
            raise AnalysisError("a repeater graph state needs n >= 4 photons")
        if self.N < 1:
            raise AnalysisError("need at least one station")
        if not 0.0 <= self.P_b <= 1.0:
            raise AnalysisError("P_b must lie in [0, 1]")


def success_probability(rm: RepeaterModel) -> float:
    """``(1 - (1 - P_b)^(n/4))^N`` with a real exponent ``n/4``."""
    return (1.0 - (1.0 - rm.P_b) ** (rm.n / 4)) ** rm.N


def link_probability(loss_db_per_km: float, half_link_km: float, bsm_success: float) -> float:
    """Bell-measurement success times the survival of both photons over one half link each."""
    if min(loss_db_per_km, half_link_km, bsm_success) < 0:
        raise AnalysisError("link parameters must be nonnegative")
    return bsm_success * 10 ** (-loss_db_per_km * 2 * half_link_km / 10)


# ---------------------------------------------------------------------------
# fidelity table


@dataclass(frozen=True)
class FidelityRow:
    n: int
    variant: str
    p_dep: float
    trials: int
    fidelity: float
    stderr: float
    lower_bound: float
    lower_bound_stderr: float


FIDELITY_HEADER = ("n", "variant", "p_dep", "trials", "fidelity", "stderr", "lower_bound", "lower_bound_stderr")


def fidelity_csv(rows: Iterable[FidelityRow], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIDELITY_HEADER)
    for r in rows:
        w.writerow(
            [r.n, r.variant, f"{r.p_dep:g}", r.trials, f"{r.fidelity:.6f}", f"{r.stderr:.6f}",
             f"{r.lower_bound:.6f}", f"{r.lower_bound_stderr:.6f}"]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# small-graph survey


@dataclass(frozen=True)
class SurveyRow:
    class_id: int
    n: int
    class_size: int
    processed: int
    best: Mapping[str, int]
    worst: Mapping[str, int]


@lru_cache(maxsize=None)
def _pair_masks(n: int) -> tuple[tuple[int, int, int], ...]:
    return tuple((k, i, j) for k, (i, j) in enumerate(itertools.combinations(range(n), 2)))


def _graph_of_code(code: int, n: int) -> Graph:
    rows = [0] * n
    for k, i, j in _pair_masks(n):
        if (code >> k) & 1:
            rows[i] |= 1 << j
            rows[j] |= 1 << i
    return Graph._trusted(n, tuple(rows))


def survey_small_graphs(
    n_max: int,
    metrics: Sequence[str] = METRICS,
    n_min: int = 2,
    partition: ClassPartition | None = None,
    limit_per_class: int | None = None,
    rng: np.random.Generator | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> list[SurveyRow]:
    """Best and worst natural-order cost per metric over every labeled member of each class.

    The labeled members of a class are exactly its orbit members under all
    emission orders, so mapping each labeled graph once in natural order
    covers "all members x all orderings". ``limit_per_class`` subsamples
    (with ``rng``) for quick runs.
    """
    for m in metrics:
        if m not in METRICS:
            raise AnalysisError(f"unknown metric {m!r}")
    partition = partition or entanglement_classes(n_max, n_min)
    rows = []
    for cls in partition.classes:
        n = cls.n
        codes = partition.codes[n][partition.labels[n] == cls.class_id]
        if limit_per_class is not None and codes.size > limit_per_class:
            if rng is None:
                raise AnalysisError("subsampling a class needs an rng")
            codes = np.sort(rng.choice(codes, size=limit_per_class, replace=False))
        best = {m: math.inf for m in metrics}
        worst = {m: -math.inf for m in metrics}
        for code in codes.tolist():
            rep = cost_report(map_to_circuit(_graph_of_code(code, n), verify=False)).as_dict()
            for m in metrics:
                v = rep[m]
                if v < best[m]:
                    best[m] = v
                if v > worst[m]:
                    worst[m] = v
        rows.append(
            SurveyRow(cls.class_id, n, cls.labeled_count, int(codes.size),
                      {m: int(best[m]) for m in metrics}, {m: int(worst[m]) for m in metrics})
        )
        if progress is not None:
            progress(cls.class_id, len(partition.classes))
    return rows


def survey_csv(rows: Sequence[SurveyRow], header: Sequence[str] = ()) -> str:
    metrics = list(rows[0].best) if rows else list(METRICS)
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class_id", "n", "class_size", "processed"] + [f"best_{m}" for m in metrics] + [f"max_{m}" for m in metrics])
    for r in rows:
        w.writerow([r.class_id, r.n, r.class_size, r.processed] + [r.best[m] for m in metrics] + [r.worst[m] for m in metrics])
    return buf.getvalue()


def class_count_csv(partition: ClassPartition, header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class_id", "n", "class_size"])
    for c in partition.classes:
        w.writerow([c.class_id, c.n, c.labeled_count])
    return buf.getvalue()

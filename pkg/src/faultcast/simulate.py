"""Synthetic KPI scenarios with known causal structure and ground truth.

The generator is a linear-Gaussian structural model: every KPI keeps an
AR(1) self-term with coefficient 0.5 and receives lagged contributions from
its causal parents plus Gaussian noise.  All lags are at least 1, so each
timestep depends only on the past and generation is well defined.

Fault injection perturbs one target KPI from an onset onward and propagates
the perturbation downstream by re-simulating the recursion.  Because the
model is linear, the perturbed run equals the clean run plus the response to
the perturbation alone (superposition), which is how it is computed: rows
before the onset and KPIs the fault cannot reach stay bitwise identical.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .classifier import SIGMA_GRID, TrainedClassifier, sigma_sweep
from .errors import OnsetOutOfRange, SchemaError, IoError, NoAnomalousReport
from .kpi import KpiDescriptor, KpiId, TimeSeriesDataset, parse_kpi_id
from .ranker import AnomalyReport

SELF_COEFFICIENT = 0.5

FAULT_KINDS = ("drift", "spike", "stuck", "offset")


@dataclass(frozen=True)
class CausalLink:
    """Directed influence: target(t) += coefficient * source(t - lag)."""

    source: KpiId
    target: KpiId
    coefficient: float
    lag: int

    def __post_init__(self) -> None:
        if self.lag < 1:
            raise ValueError("lag must be >= 1")


@dataclass(frozen=True)
class SimulationSpec:
    kpis: tuple[KpiDescriptor, ...]
    causal_edges: tuple[CausalLink, ...]
    noise_std: float
    length: int
    seed: int

    def __post_init__(self) -> None:
        if len(self.kpis) < 1:
            raise ValueError("need at least one KPI")
        ids = [d.kpi for d in self.kpis]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate KPIs in spec")
        known = set(ids)
        for edge in self.causal_edges:
            if edge.source not in known or edge.target not in known:
                raise ValueError(f"edge {edge.source}->{edge.target} references an unknown KPI")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if self.length < 1:
            raise ValueError("length must be >= 1")

    @property
    def kpi_ids(self) -> list[KpiId]:
        return [d.kpi for d in self.kpis]

    def descriptor_table(self) -> dict[KpiId, KpiDescriptor]:
        return {d.kpi: d for d in self.kpis}


@dataclass(frozen=True)
class FaultSpec:
    """One fault on one KPI; the faulty component is the KPI's node.

    onset=0 marks a scenario that is faulty throughout its duration.
    """

    onset: int
    kind: str
    target: KpiId
    magnitude: float

    def __post_init__(self) -> None:
        if self.kind not in FAULT_KINDS:
            raise ValueError(f"kind must be one of {FAULT_KINDS}")
        if self.onset < 0:
            raise OnsetOutOfRange(f"onset {self.onset} is negative")

    @property
    def ground_truth_component(self) -> str:
        return self.target.node


def generate_normal(spec: SimulationSpec, seed: int | None = None) -> TimeSeriesDataset:
    """Simulate a failure-free run; pure function of (spec, seed)."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    n = len(spec.kpis)
    index = {kpi: i for i, kpi in enumerate(spec.kpi_ids)}
    edges = [
        (index[e.source], index[e.target], e.coefficient, e.lag) for e in spec.causal_edges
    ]
    noise = rng.normal(0.0, spec.noise_std, size=(spec.length, n))
    values = np.zeros((spec.length, n))
    for t in range(spec.length):
        row = noise[t].copy()
        if t > 0:
            row += SELF_COEFFICIENT * values[t - 1]
        for src, tgt, coeff, lag in edges:
            if t - lag >= 0:
                row[tgt] += coeff * values[t - lag, src]
        values[t] = row
    return TimeSeriesDataset(
        timestamps=np.arange(spec.length, dtype=np.int64),
        kpis=spec.kpi_ids,
        values=values,
    )


def _fault_delta_on_target(clean_target: np.ndarray, fault: FaultSpec, length: int) -> np.ndarray:
    """Perturbation applied to the target column, full length, zero pre-onset."""
    delta = np.zeros(length)
    t = np.arange(fault.onset, length)
    if fault.kind == "offset":
        delta[t] = fault.magnitude
    elif fault.kind == "drift":
        delta[t] = fault.magnitude * (t - fault.onset) / (length - fault.onset)
    elif fault.kind == "spike":
        delta[fault.onset] = fault.magnitude
    else:  # stuck: hold the value the target had at onset
        delta[t] = clean_target[fault.onset] - clean_target[t]
    return delta


def inject_fault(
    dataset: TimeSeriesDataset, spec: SimulationSpec, fault: FaultSpec
) -> tuple[TimeSeriesDataset, FaultSpec]:
    """Perturb a clean run with one fault; returns (faulty data, ground truth).

    The target column becomes its clean trajectory plus the fault term
    (``stuck`` holds the onset value).  Downstream KPIs respond through the
    generator recursion re-run on the perturbation, so the cascade unfolds
    with the same noise realization.  Rows before the onset match the clean
    dataset bitwise, as do all KPIs unreachable from the target.
    """
    if dataset.kpis != spec.kpi_ids:
        raise SchemaError("dataset columns do not match the simulation spec")
    if not 0 <= fault.onset < dataset.n_rows:
        raise OnsetOutOfRange(
            f"onset {fault.onset} outside the simulated range [0, {dataset.n_rows})"
        )
    n = dataset.n_kpis
    length = dataset.n_rows
    index = {kpi: i for i, kpi in enumerate(spec.kpi_ids)}
    target = index[fault.target]
    edges = [
        (index[e.source], index[e.target], e.coefficient, e.lag) for e in spec.causal_edges
    ]

    delta = np.zeros((length, n))
    forced = _fault_delta_on_target(dataset.values[:, target], fault, length)
    for t in range(fault.onset, length):
        row = np.zeros(n)
        if t > 0:
            row += SELF_COEFFICIENT * delta[t - 1]
        for src, tgt, coeff, lag in edges:
            if t - lag >= 0:
                row[tgt] += coeff * delta[t - lag, src]
        row[target] = forced[t]
        delta[t] = row

    values = dataset.values + delta
    faulty = TimeSeriesDataset(
        timestamps=dataset.timestamps.copy(),
        kpis=list(dataset.kpis),
        values=values,
    )
    return faulty, fault


@dataclass(frozen=True)
class Scenario:
    """One evaluation run: a dataset and, when faulty, its ground truth."""

    name: str
    dataset: TimeSeriesDataset
    fault: FaultSpec | None = None


@dataclass(frozen=True)
class EvalRow:
    scenario: str
    sigma: float
    fp_count: int
    prediction_count: int
    failure_free: bool


@dataclass(frozen=True)
class EvaluationTable:
    """Cross product of scenarios and sigma values, plus per-sigma FP totals."""

    rows: tuple[EvalRow, ...]
    totals: dict[float, int]

    def scenario_names(self) -> list[str]:
        names: list[str] = []
        for row in self.rows:
            if row.scenario not in names:
                names.append(row.scenario)
        return names

    def elbow_curve(self, failure_free_only: bool = True) -> list[tuple[float, int]]:
        """Per-sigma FP totals as (sigma, total_fp), the knee-selection input.

        Restricted to failure-free scenarios when any exist (their false
        positives are what threshold tuning minimizes); otherwise all rows.
        """
        use_all = not failure_free_only or not any(r.failure_free for r in self.rows)
        curve: dict[float, int] = {}
        for row in self.rows:
            if use_all or row.failure_free:
                curve[row.sigma] = curve.get(row.sigma, 0) + row.fp_count
        return sorted(curve.items())

    def to_csv(self) -> str:
        lines = ["scenario,sigma,fp,predictions"]
        for row in self.rows:
            lines.append(f"{row.scenario},{row.sigma:g},{row.fp_count},{row.prediction_count}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        """Aligned table: one row per sigma, one column per scenario (fp/pred)."""
        names = self.scenario_names()
        sigmas = sorted({row.sigma for row in self.rows})
        cells = {(row.scenario, row.sigma): f"{row.fp_count}/{row.prediction_count}" for row in self.rows}
        header = ["sigma", *names, "total_fp"]
        body = [
            [f"{sigma:g}", *(cells.get((name, sigma), "-") for name in names), str(self.totals[sigma])]
            for sigma in sigmas
        ]
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
        lines = [
            "  ".join(cell.rjust(width) for cell, width in zip(row, widths))
            for row in [header, *body]
        ]
        return "\n".join(lines) + "\n"


def evaluate_scenarios(
    classifier: TrainedClassifier,
    scenarios: list[Scenario],
    grid: tuple[float, ...] = SIGMA_GRID,
) -> EvaluationTable:
    """Sigma-sweep every scenario against one trained classifier."""
    rows: list[EvalRow] = []
    totals: dict[float, int] = {float(s): 0 for s in grid}
    for scenario in scenarios:
        onset = scenario.fault.onset if scenario.fault is not None else None
        for point in sigma_sweep(classifier, scenario.dataset, grid, fault_onset=onset):
            rows.append(
                EvalRow(
                    scenario=scenario.name,
                    sigma=point.sigma,
                    fp_count=point.fp_count,
                    prediction_count=point.prediction_count,
                    failure_free=scenario.fault is None,
                )
            )
            totals[point.sigma] += point.fp_count
    return EvaluationTable(rows=tuple(rows), totals=totals)


@dataclass(frozen=True)
class LocalizationScore:
    top3_hit: bool
    root_kpi_rank: int | None


def localization_score(reports: list[AnomalyReport], truth: FaultSpec) -> LocalizationScore:
    """Score the first post-onset anomalous report against the ground truth."""
    report = next(
        (
            r
            for r in reports
            if r.verdict.timestamp >= truth.onset and r.verdict.anomalous
        ),
        None,
    )
    if report is None:
        raise NoAnomalousReport("no post-onset report was classified anomalous")
    top3_hit = truth.ground_truth_component in [c.node for c in report.top_components]
    rank = next(
        (i + 1 for i, r in enumerate(report.root_cause_kpis) if r.kpi == truth.target),
        None,
    )
    return LocalizationScore(top3_hit=top3_hit, root_kpi_rank=rank)


def make_chain_spec(
    components: int = 4,
    kpis_per_component: int = 3,
    chain_coefficient: float = 0.8,
    local_coefficient: float = 0.7,
    noise_std: float = 1.0,
    length: int = 600,
    seed: int = 0,
) -> SimulationSpec:
    """Benchmark topology: a causal chain of components.

    Each component hosts one primary KPI and local KPIs driven by it; the
    primary of each component drives the primary of the next.  A fault at
    the first component's primary KPI cascades through the whole system.
    """
    metrics = ["load", "temperature", "vibration", "current", "flow", "speed"]
    if kpis_per_component < 1 or kpis_per_component > len(metrics):
        raise ValueError(f"kpis_per_component must lie in [1, {len(metrics)}]")
    kpis: list[KpiDescriptor] = []
    edges: list[CausalLink] = []
    primaries: list[KpiId] = []
    for c in range(1, components + 1):
        node = f"component-{c}"
        primary = KpiId(metric=metrics[0], node=node)
        primaries.append(primary)
        kpis.append(
            KpiDescriptor(kpi=primary, description=f"{metrics[0]} on {node}", unit=None)
        )
        for m in range(1, kpis_per_component):
            local = KpiId(metric=metrics[m], node=node)
            kpis.append(
                KpiDescriptor(kpi=local, description=f"{metrics[m]} on {node}", unit=None)
            )
            edges.append(
                CausalLink(source=primary, target=local, coefficient=local_coefficient, lag=m)
            )
    for upstream, downstream in zip(primaries, primaries[1:]):
        edges.append(
            CausalLink(source=upstream, target=downstream, coefficient=chain_coefficient, lag=1)
        )
    return SimulationSpec(
        kpis=tuple(kpis),
        causal_edges=tuple(edges),
        noise_std=noise_std,
        length=length,
        seed=seed,
    )


def spec_to_json(spec: SimulationSpec) -> str:
    payload = {
        "kpis": [
            {"kpi": str(d.kpi), "description": d.description, "unit": d.unit}
            for d in spec.kpis
        ],
        "causal_edges": [
            {
                "source": str(e.source),
                "target": str(e.target),
                "coefficient": e.coefficient,
                "lag": e.lag,
            }
            for e in spec.causal_edges
        ],
        "noise_std": spec.noise_std,
        "length": spec.length,
        "seed": spec.seed,
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def spec_from_json(text: str) -> SimulationSpec:
    try:
        payload = json.loads(text)
        return SimulationSpec(
            kpis=tuple(
                KpiDescriptor(
                    kpi=parse_kpi_id(d["kpi"]),
                    description=d["description"],
                    unit=d.get("unit"),
                )
                for d in payload["kpis"]
            ),
            causal_edges=tuple(
                CausalLink(
                    source=parse_kpi_id(e["source"]),
                    target=parse_kpi_id(e["target"]),
                    coefficient=float(e["coefficient"]),
                    lag=int(e["lag"]),
                )
                for e in payload["causal_edges"]
            ),
            noise_std=float(payload["noise_std"]),
            length=int(payload["length"]),
            seed=int(payload["seed"]),
        )
    except json.JSONDecodeError as exc:
        raise SchemaError("simulation spec is not valid JSON") from exc
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"simulation spec is missing field: {exc}") from exc


def fault_to_json(fault: FaultSpec) -> str:
    return json.dumps(
        {
            "onset": fault.onset,
            "kind": fault.kind,
            "target": str(fault.target),
            "magnitude": fault.magnitude,
            "ground_truth_component": fault.ground_truth_component,
        },
        indent=2,
        sort_keys=True,
    )


def fault_from_json(text: str) -> FaultSpec:
    try:
        payload = json.loads(text)
        return FaultSpec(
            onset=int(payload["onset"]),
            kind=payload["kind"],
            target=parse_kpi_id(payload["target"]),
            magnitude=float(payload["magnitude"]),
        )
    except json.JSONDecodeError as exc:
        raise SchemaError("fault spec is not valid JSON") from exc
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"fault spec is missing field: {exc}") from exc


def load_spec(path: str | os.PathLike[str]) -> SimulationSpec:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return spec_from_json(handle.read())
    except OSError as exc:
        raise IoError(f"cannot read simulation spec: {path}") from exc


def load_fault(path: str | os.PathLike[str]) -> FaultSpec:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return fault_from_json(handle.read())
    except OSError as exc:
        raise IoError(f"cannot read fault spec: {path}") from exc

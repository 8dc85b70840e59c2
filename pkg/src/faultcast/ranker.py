"""Root-cause localization for anomalous system states.

Once a state is classified anomalous, per-KPI squared residuals flag the
anomalous KPIs, pairwise Granger tests over a recent window connect them into
a causality graph, and PageRank against the edge direction concentrates rank
on likely origins.  KPIs are ranked by that centrality and the components
hosting the most central KPIs are named.  Everything downstream of the
verdict is gated: a normal state yields an empty report body.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .classifier import ClassifierConfig, StateVerdict, TrainedClassifier, classify_state
from .errors import InsufficientHistory, SchemaError
from .granger import GrangerConfig, granger_test
from .kpi import KpiDescriptor, KpiId, parse_kpi_id
from .pagerank import PageRankConfig, pagerank

from .autoencoder import AutoencoderModel, forward


@dataclass(frozen=True)
class KpiAnomaly:
    """One KPI whose squared residual exceeded its own threshold."""

    kpi: KpiId
    score: float
    kpi_threshold: float


@dataclass(frozen=True)
class CausalEdge:
    """Directed edge cause -> effect with the test statistics behind it."""

    cause: KpiId
    effect: KpiId
    f_stat: float
    p_value: float


@dataclass(frozen=True)
class CausalityGraph:
    nodes: tuple[KpiId, ...]
    edges: tuple[CausalEdge, ...]

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        for edge in self.edges:
            if edge.cause == edge.effect:
                raise ValueError(f"self-loop on {edge.cause}")
            if edge.cause not in node_set or edge.effect not in node_set:
                raise ValueError("edge endpoints must be graph nodes")


EMPTY_GRAPH = CausalityGraph(nodes=(), edges=())


@dataclass(frozen=True)
class RankedCause:
    kpi: KpiId
    centrality: float
    score: float


@dataclass(frozen=True)
class ComponentAttribution:
    node: str
    central_kpi_count: int


@dataclass(frozen=True)
class AnomalyReport:
    """Verdict plus localization results (empty unless anomalous)."""

    verdict: StateVerdict
    anomalous_kpis: tuple[KpiAnomaly, ...] = ()
    graph: CausalityGraph = EMPTY_GRAPH
    centrality: dict[KpiId, float] = field(default_factory=dict)
    root_cause_kpis: tuple[RankedCause, ...] = ()
    top_components: tuple[ComponentAttribution, ...] = ()
    descriptions: dict[KpiId, str] = field(default_factory=dict)


def kpi_residuals(model: AutoencoderModel, state: np.ndarray) -> np.ndarray:
    """Per-KPI squared reconstruction residuals of one normalized state."""
    state = np.asarray(state, dtype=np.float64)
    return (state - forward(model, state)) ** 2


def detect_anomalous_kpis(
    kpis: list[KpiId],
    residuals: np.ndarray,
    kpi_mu: np.ndarray,
    kpi_std: np.ndarray,
    sigma_kpi: float,
) -> list[KpiAnomaly]:
    """KPIs whose residual strictly exceeds mu_j + sigma_kpi * std_j."""
    anomalies = []
    for j, kpi in enumerate(kpis):
        limit = float(kpi_mu[j] + sigma_kpi * kpi_std[j])
        if residuals[j] > limit:
            anomalies.append(KpiAnomaly(kpi=kpi, score=float(residuals[j]), kpi_threshold=limit))
    return anomalies


def build_causality_graph(
    window: np.ndarray,
    kpis: list[KpiId],
    anomalies: list[KpiAnomaly],
    config: GrangerConfig = GrangerConfig(),
) -> CausalityGraph:
    """Granger-test every ordered pair of anomalous KPIs over the window.

    ``window`` holds the most recent normalized samples (rows oldest to
    newest, one column per KPI in ``kpis``); only its last ``config.window``
    rows are used.  Degenerate regressions contribute no edge.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2 or window.shape[1] != len(kpis):
        raise ValueError("window must be 2-D with one column per KPI")
    if window.shape[0] < config.window:
        raise InsufficientHistory(
            f"need {config.window} samples, have {window.shape[0]}"
        )
    recent = window[-config.window :]
    column = {kpi: i for i, kpi in enumerate(kpis)}
    nodes = tuple(a.kpi for a in anomalies)
    edges: list[CausalEdge] = []
    for cause in nodes:
        for effect in nodes:
            if cause == effect:
                continue
            result = granger_test(
                recent[:, column[cause]], recent[:, column[effect]], config.lag, config.alpha
            )
            if result.significant and not result.degenerate:
                edges.append(
                    CausalEdge(
                        cause=cause,
                        effect=effect,
                        f_stat=result.f_stat,
                        p_value=result.p_value,
                    )
                )
    return CausalityGraph(nodes=nodes, edges=tuple(edges))


def rank_root_causes(
    graph: CausalityGraph,
    centrality: dict[KpiId, float],
    anomalies: list[KpiAnomaly],
) -> list[RankedCause]:
    """Order candidate root causes.

    KPIs touching at least one edge come first, by descending centrality,
    then descending anomaly score, then KPI name.  Isolated KPIs follow,
    by descending score then name.
    """
    score = {a.kpi: a.score for a in anomalies}
    connected_set = {e.cause for e in graph.edges} | {e.effect for e in graph.edges}
    connected = [k for k in graph.nodes if k in connected_set]
    isolated = [k for k in graph.nodes if k not in connected_set]
    connected.sort(key=lambda k: (-centrality[k], -score[k], str(k)))
    isolated.sort(key=lambda k: (-score[k], str(k)))
    return [
        RankedCause(kpi=k, centrality=centrality[k], score=score[k])
        for k in connected + isolated
    ]


def attribute_components(
    ranked: list[RankedCause], count_central_only: bool = True
) -> list[ComponentAttribution]:
    """Top 3 components by number of hosted central KPIs.

    A KPI is central when its centrality is at least the mean centrality of
    all ranked KPIs.  Ties break on summed centrality, then component name.
    With ``count_central_only=False`` every ranked KPI is counted instead.
    """
    if not ranked:
        return []
    mean_centrality = sum(r.centrality for r in ranked) / len(ranked)
    counted = (
        [r for r in ranked if r.centrality >= mean_centrality]
        if count_central_only
        else list(ranked)
    )
    counts: dict[str, int] = {}
    weight: dict[str, float] = {}
    for r in counted:
        counts[r.kpi.node] = counts.get(r.kpi.node, 0) + 1
        weight[r.kpi.node] = weight.get(r.kpi.node, 0.0) + r.centrality
    ordered = sorted(counts, key=lambda node: (-counts[node], -weight[node], node))
    return [ComponentAttribution(node=node, central_kpi_count=counts[node]) for node in ordered[:3]]


class RollingHistory:
    """Fixed-capacity ring buffer of raw KPI rows (single writer)."""

    def __init__(self, n_kpis: int, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._buffer = np.zeros((capacity, n_kpis))
        self._capacity = capacity
        self._count = 0
        self._cursor = 0

    def __len__(self) -> int:
        return self._count

    def push(self, row: np.ndarray) -> None:
        row = np.asarray(row, dtype=np.float64)
        if row.shape != (self._buffer.shape[1],):
            raise ValueError(f"row must have shape ({self._buffer.shape[1]},)")
        self._buffer[self._cursor] = row
        self._cursor = (self._cursor + 1) % self._capacity
        self._count = min(self._count + 1, self._capacity)

    def window(self, length: int) -> np.ndarray:
        """Copy of the most recent ``length`` rows, oldest first."""
        if length > self._count:
            raise InsufficientHistory(f"need {length} samples, have {self._count}")
        end = self._cursor
        start = (end - length) % self._capacity
        if start < end or length == 0:
            return self._buffer[start:end].copy()
        return np.vstack([self._buffer[start:], self._buffer[:end]])


def analyze(
    classifier: TrainedClassifier,
    state: np.ndarray,
    history: np.ndarray | RollingHistory,
    timestamp: int,
    *,
    classifier_config: ClassifierConfig = ClassifierConfig(),
    granger_config: GrangerConfig = GrangerConfig(),
    pagerank_config: PageRankConfig = PageRankConfig(),
    descriptors: dict[KpiId, KpiDescriptor] | None = None,
    count_central_only: bool = True,
) -> AnomalyReport:
    """Classify one raw state and localize root causes if it is anomalous.

    ``state`` and ``history`` are raw engineering values; normalization with
    the classifier's training statistics happens here.  ``history`` holds the
    most recent rows (including the current state) and must cover the Granger
    window.  For a normal verdict every downstream field stays empty.
    """
    if isinstance(history, RollingHistory):
        history = history.window(granger_config.window)
    history = np.asarray(history, dtype=np.float64)
    if history.ndim != 2 or history.shape[0] < granger_config.window:
        raise InsufficientHistory(
            f"analysis needs {granger_config.window} history rows, have {history.shape[0]}"
        )

    normalized_state = classifier.normalization.transform(np.asarray(state, dtype=np.float64))
    verdict = classify_state(classifier, classifier_config, normalized_state, timestamp)
    if not verdict.anomalous:
        return AnomalyReport(verdict=verdict)

    residuals = kpi_residuals(classifier.model, normalized_state)
    anomalies = detect_anomalous_kpis(
        classifier.kpis,
        residuals,
        classifier.baseline.kpi_mu,
        classifier.baseline.kpi_std,
        classifier_config.effective_sigma_kpi,
    )
    descriptions = {
        a.kpi: descriptors[a.kpi].description
        for a in anomalies
        if descriptors is not None and a.kpi in descriptors
    }
    if not anomalies:
        return AnomalyReport(verdict=verdict, descriptions=descriptions)

    normalized_history = classifier.normalization.transform(history)
    graph = build_causality_graph(normalized_history, classifier.kpis, anomalies, granger_config)
    centrality = pagerank(graph.nodes, [(e.cause, e.effect) for e in graph.edges], pagerank_config)
    ranked = rank_root_causes(graph, centrality, anomalies)
    components = attribute_components(ranked, count_central_only)
    return AnomalyReport(
        verdict=verdict,
        anomalous_kpis=tuple(anomalies),
        graph=graph,
        centrality=centrality,
        root_cause_kpis=tuple(ranked),
        top_components=tuple(components),
        descriptions=descriptions,
    )


def analyze_series(
    classifier: TrainedClassifier,
    values: np.ndarray,
    timestamps: np.ndarray,
    analysis_rows: list[int],
    **kwargs,
) -> list[AnomalyReport]:
    """Run :func:`analyze` at selected row indices of a raw series."""
    reports = []
    for row in analysis_rows:
        reports.append(
            analyze(
                classifier,
                values[row],
                values[: row + 1],
                int(timestamps[row]),
                **kwargs,
            )
        )
    return reports


def report_to_json(report: AnomalyReport) -> str:
    """Serialize a report to JSON (KPIs rendered as ``metric@node``)."""
    payload = {
        "verdict": {
            "timestamp": report.verdict.timestamp,
            "state_error": report.verdict.state_error,
            "threshold": report.verdict.threshold,
            "anomalous": report.verdict.anomalous,
        },
        "anomalous_kpis": [
            {"id": str(a.kpi), "score": a.score, "kpi_threshold": a.kpi_threshold}
            for a in report.anomalous_kpis
        ],
        "graph": {
            "nodes": [str(k) for k in report.graph.nodes],
            "edges": [
                {"cause": str(e.cause), "effect": str(e.effect), "f": e.f_stat, "p_value": e.p_value}
                for e in report.graph.edges
            ],
        },
        "centrality": {str(k): v for k, v in report.centrality.items()},
        "root_cause_kpis": [
            {"id": str(r.kpi), "centrality": r.centrality, "score": r.score}
            for r in report.root_cause_kpis
        ],
        "top_components": [
            {"node": c.node, "central_kpi_count": c.central_kpi_count}
            for c in report.top_components
        ],
        "descriptions": {str(k): d for k, d in report.descriptions.items()},
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def report_from_json(text: str) -> AnomalyReport:
    """Inverse of :func:`report_to_json`."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("report is not valid JSON") from exc
    try:
        verdict = StateVerdict(
            timestamp=int(payload["verdict"]["timestamp"]),
            state_error=float(payload["verdict"]["state_error"]),
            threshold=float(payload["verdict"]["threshold"]),
            anomalous=bool(payload["verdict"]["anomalous"]),
        )
        anomalies = tuple(
            KpiAnomaly(
                kpi=parse_kpi_id(a["id"]),
                score=float(a["score"]),
                kpi_threshold=float(a["kpi_threshold"]),
            )
            for a in payload["anomalous_kpis"]
        )
        graph = CausalityGraph(
            nodes=tuple(parse_kpi_id(k) for k in payload["graph"]["nodes"]),
            edges=tuple(
                CausalEdge(
                    cause=parse_kpi_id(e["cause"]),
                    effect=parse_kpi_id(e["effect"]),
                    f_stat=float(e["f"]),
                    p_value=float(e["p_value"]),
                )
                for e in payload["graph"]["edges"]
            ),
        )
        return AnomalyReport(
            verdict=verdict,
            anomalous_kpis=anomalies,
            graph=graph,
            centrality={parse_kpi_id(k): float(v) for k, v in payload["centrality"].items()},
            root_cause_kpis=tuple(
                RankedCause(
                    kpi=parse_kpi_id(r["id"]),
                    centrality=float(r["centrality"]),
                    score=float(r["score"]),
                )
                for r in payload["root_cause_kpis"]
            ),
            top_components=tuple(
                ComponentAttribution(node=c["node"], central_kpi_count=int(c["central_kpi_count"]))
                for c in payload["top_components"]
            ),
            descriptions={parse_kpi_id(k): str(d) for k, d in payload["descriptions"].items()},
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"report JSON is missing field: {exc}") from exc

from __future__ import annotations

import numpy as np
import pytest

from faultcast.classifier import ClassifierConfig, ErrorBaseline
from faultcast.errors import InsufficientHistory, SchemaError
from faultcast.granger import GrangerConfig
from faultcast.kpi import KpiDescriptor, parse_kpi_id
from faultcast.ranker import (
    CausalEdge,
    CausalityGraph,
    KpiAnomaly,
    RankedCause,
    RollingHistory,
    analyze,
    analyze_series,
    attribute_components,
    build_causality_graph,
    detect_anomalous_kpis,
    kpi_residuals,
    rank_root_causes,
    report_from_json,
    report_to_json,
)
from helpers import make_classifier, zero_model

DRIVE = parse_kpi_id("drive@alpha")
FOLLOW = parse_kpi_id("follow@beta")


def _coupled_history(length: int = 60, seed: int = 8) -> np.ndarray:
    """Two columns where the first drives the second at lag one."""
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, 1.0, length)
    noise = rng.normal(0.0, 1.0, length)
    y = np.zeros(length)
    for t in range(1, length):
        y[t] = 1.2 * x[t - 1] + 0.05 * noise[t]
    history = np.column_stack([x, y])
    history[-1] = [3.0, 2.5]
    return history


def _anomalous_classifier():
    """Zero model over (drive, follow) wired to always report an anomaly.

    The state baseline sits below any possible error and the per-KPI limits
    sit below any possible residual, so every call takes the full path.
    """
    baseline = ErrorBaseline(
        state_mu=-1.0, state_std=0.0, kpi_mu=-np.ones(2), kpi_std=np.zeros(2)
    )
    return make_classifier(zero_model(2), baseline, [DRIVE, FOLLOW])


def test_kpi_residuals_zero_model():
    np.testing.assert_allclose(
        kpi_residuals(zero_model(3), np.array([1.0, -2.0, 0.5])), [1.0, 4.0, 0.25]
    )


def test_detect_anomalous_kpis_strictly_above_limit():
    kpis = [parse_kpi_id("a@n"), parse_kpi_id("b@n")]
    found = detect_anomalous_kpis(
        kpis, np.array([0.5, 0.01]), np.array([0.1, 0.1]), np.array([0.1, 0.1]), 3.0
    )
    assert len(found) == 1
    assert found[0].kpi == kpis[0]
    assert found[0].score == pytest.approx(0.5)
    assert found[0].kpi_threshold == pytest.approx(0.4)

    # exactly on the limit does not count
    exact = detect_anomalous_kpis(
        kpis, np.array([4.0, 4.000001]), np.ones(2), np.ones(2), 3.0
    )
    assert [a.kpi for a in exact] == [kpis[1]]


def test_causality_graph_validation():
    with pytest.raises(ValueError, match="self-loop"):
        CausalityGraph(nodes=(DRIVE,), edges=(CausalEdge(DRIVE, DRIVE, 1.0, 0.01),))
    with pytest.raises(ValueError, match="graph nodes"):
        CausalityGraph(nodes=(DRIVE,), edges=(CausalEdge(DRIVE, FOLLOW, 1.0, 0.01),))


def _ranked_fixture(centrality_values, scores):
    kpis = [parse_kpi_id(f"m{i}@n{i}") for i in range(len(scores))]
    graph = CausalityGraph(
        nodes=tuple(kpis), edges=(CausalEdge(kpis[0], kpis[1], 50.0, 0.001),)
    )
    centrality = dict(zip(kpis, centrality_values))
    anomalies = [
        KpiAnomaly(kpi=k, score=s, kpi_threshold=0.0) for k, s in zip(kpis, scores)
    ]
    return kpis, graph, centrality, anomalies


def test_rank_root_causes_connected_before_isolated():
    kpis, graph, centrality, anomalies = _ranked_fixture(
        [0.4, 0.3, 0.2, 0.1], [5.0, 9.0, 2.0, 7.0]
    )
    ranked = rank_root_causes(graph, centrality, anomalies)
    assert [r.kpi for r in ranked] == [kpis[0], kpis[1], kpis[3], kpis[2]]
    assert ranked[0].centrality == 0.4
    assert ranked[0].score == 5.0


def test_rank_root_causes_tie_breaks():
    # equal centrality among connected nodes falls back to the anomaly score
    kpis, graph, centrality, anomalies = _ranked_fixture(
        [0.35, 0.35, 0.2, 0.1], [5.0, 9.0, 2.0, 7.0]
    )
    ranked = rank_root_causes(graph, centrality, anomalies)
    assert [r.kpi for r in ranked[:2]] == [kpis[1], kpis[0]]

    # equal centrality and score falls back to the name
    kpis, graph, centrality, anomalies = _ranked_fixture(
        [0.35, 0.35, 0.2, 0.1], [5.0, 5.0, 2.0, 7.0]
    )
    ranked = rank_root_causes(graph, centrality, anomalies)
    assert [r.kpi for r in ranked[:2]] == [kpis[0], kpis[1]]


def _cause(metric: str, node: str, centrality: float) -> RankedCause:
    return RankedCause(kpi=parse_kpi_id(f"{metric}@{node}"), centrality=centrality, score=1.0)


def test_attribute_components_counts_central_kpis():
    ranked = [
        _cause("a", "c1", 0.5),
        _cause("b", "c1", 0.3),
        _cause("a", "c2", 0.15),
        _cause("a", "c3", 0.05),
    ]
    # mean centrality 0.25: only the two c1 KPIs qualify
    assert [(c.node, c.central_kpi_count) for c in attribute_components(ranked)] == [("c1", 2)]
    # counting everything brings the minor components back
    everything = attribute_components(ranked, count_central_only=False)
    assert [(c.node, c.central_kpi_count) for c in everything] == [
        ("c1", 2),
        ("c2", 1),
        ("c3", 1),
    ]


def test_attribute_components_ties_and_cap():
    # four equally central components: capped to three, name order decides
    ranked = [_cause("a", node, 0.25) for node in ("d", "b", "c", "a")]
    top = attribute_components(ranked)
    assert [c.node for c in top] == ["a", "b", "c"]

    # equal counts break on summed centrality
    ranked = [_cause("a", "low", 0.4), _cause("a", "high", 0.6)]
    top = attribute_components(ranked, count_central_only=False)
    assert [c.node for c in top] == ["high", "low"]

    assert attribute_components([]) == []


def test_rolling_history_ring_buffer():
    history = RollingHistory(n_kpis=2, capacity=3)
    assert len(history) == 0
    with pytest.raises(InsufficientHistory):
        history.window(1)
    rows = [np.array([float(i), float(-i)]) for i in range(5)]
    for row in rows[:2]:
        history.push(row)
    assert len(history) == 2
    with pytest.raises(InsufficientHistory):
        history.window(3)
    for row in rows[2:]:
        history.push(row)
    assert len(history) == 3
    np.testing.assert_array_equal(history.window(3), np.vstack(rows[2:]))
    np.testing.assert_array_equal(history.window(2), np.vstack(rows[3:]))
    assert history.window(0).shape == (0, 2)

    window = history.window(1)
    window[0, 0] = 999.0
    assert history.window(1)[0, 0] == 4.0

    with pytest.raises(ValueError):
        history.push(np.zeros(3))
    with pytest.raises(ValueError):
        RollingHistory(n_kpis=2, capacity=0)


def test_build_causality_graph_finds_the_planted_edge():
    history = _coupled_history()
    anomalies = [
        KpiAnomaly(kpi=DRIVE, score=9.0, kpi_threshold=0.0),
        KpiAnomaly(kpi=FOLLOW, score=6.25, kpi_threshold=0.0),
    ]
    graph = build_causality_graph(history, [DRIVE, FOLLOW], anomalies)
    assert graph.nodes == (DRIVE, FOLLOW)
    pairs = [(e.cause, e.effect) for e in graph.edges]
    assert (DRIVE, FOLLOW) in pairs
    assert all(e.p_value <= 0.05 for e in graph.edges)

    # only the trailing window rows matter
    config = GrangerConfig()
    padded = np.vstack([np.full((7, 2), 1e6), history])
    same = build_causality_graph(padded, [DRIVE, FOLLOW], anomalies, config)
    trimmed = build_causality_graph(history[-config.window :], [DRIVE, FOLLOW], anomalies, config)
    assert same == trimmed


def test_build_causality_graph_degenerate_pairs_add_no_edges():
    rng = np.random.default_rng(1)
    history = np.column_stack([np.ones(60), rng.normal(size=60)])
    anomalies = [
        KpiAnomaly(kpi=DRIVE, score=1.0, kpi_threshold=0.0),
        KpiAnomaly(kpi=FOLLOW, score=1.0, kpi_threshold=0.0),
    ]
    graph = build_causality_graph(history, [DRIVE, FOLLOW], anomalies)
    assert graph.nodes == (DRIVE, FOLLOW)
    assert graph.edges == ()


def test_build_causality_graph_validation():
    anomalies = [KpiAnomaly(kpi=DRIVE, score=1.0, kpi_threshold=0.0)]
    with pytest.raises(InsufficientHistory):
        build_causality_graph(np.zeros((10, 2)), [DRIVE, FOLLOW], anomalies)
    with pytest.raises(ValueError):
        build_causality_graph(np.zeros((40, 3)), [DRIVE, FOLLOW], anomalies)
    with pytest.raises(ValueError):
        build_causality_graph(np.zeros(40), [DRIVE, FOLLOW], anomalies)


def test_analyze_normal_state_reports_nothing_downstream():
    baseline = ErrorBaseline(state_mu=1e9, state_std=0.0, kpi_mu=np.zeros(2), kpi_std=np.ones(2))
    classifier = make_classifier(zero_model(2), baseline, [DRIVE, FOLLOW])
    report = analyze(classifier, np.array([3.0, 2.5]), _coupled_history(), 59)
    assert not report.verdict.anomalous
    assert report.anomalous_kpis == ()
    assert report.graph.nodes == ()
    assert report.centrality == {}
    assert report.root_cause_kpis == ()
    assert report.top_components == ()
    assert report.descriptions == {}


def test_analyze_requires_history_even_for_normal_states():
    baseline = ErrorBaseline(state_mu=1e9, state_std=0.0, kpi_mu=np.zeros(2), kpi_std=np.ones(2))
    classifier = make_classifier(zero_model(2), baseline, [DRIVE, FOLLOW])
    with pytest.raises(InsufficientHistory):
        analyze(classifier, np.array([0.0, 0.0]), np.zeros((5, 2)), 4)


def test_analyze_anomalous_state_without_anomalous_kpis():
    baseline = ErrorBaseline(
        state_mu=-1.0, state_std=0.0, kpi_mu=np.full(2, 1e9), kpi_std=np.zeros(2)
    )
    classifier = make_classifier(zero_model(2), baseline, [DRIVE, FOLLOW])
    report = analyze(classifier, np.array([3.0, 2.5]), _coupled_history(), 59)
    assert report.verdict.anomalous
    assert report.anomalous_kpis == ()
    assert report.graph.nodes == ()
    assert report.root_cause_kpis == ()


def test_analyze_localizes_the_driving_kpi():
    classifier = _anomalous_classifier()
    history = _coupled_history()
    descriptors = {
        DRIVE: KpiDescriptor(kpi=DRIVE, description="drive level"),
        parse_kpi_id("other@zeta"): KpiDescriptor(
            kpi=parse_kpi_id("other@zeta"), description="unrelated"
        ),
    }
    report = analyze(classifier, history[-1], history, 59, descriptors=descriptors)
    assert report.verdict.anomalous
    assert [a.kpi for a in report.anomalous_kpis] == [DRIVE, FOLLOW]
    assert report.graph.nodes == (DRIVE, FOLLOW)
    assert (DRIVE, FOLLOW) in [(e.cause, e.effect) for e in report.graph.edges]
    assert sum(report.centrality.values()) == pytest.approx(1.0, abs=1e-9)
    assert report.root_cause_kpis[0].kpi == DRIVE
    assert report.top_components[0].node == "alpha"
    assert report.descriptions == {DRIVE: "drive level"}


def test_analyze_accepts_rolling_history():
    classifier = _anomalous_classifier()
    history = _coupled_history()
    ring = RollingHistory(n_kpis=2, capacity=64)
    for row in history:
        ring.push(row)
    from_array = analyze(classifier, history[-1], history, 59)
    from_ring = analyze(classifier, history[-1], ring, 59)
    assert report_to_json(from_array) == report_to_json(from_ring)


def test_analyze_normalizes_raw_state_with_training_stats():
    kpi = parse_kpi_id("a@n")
    classifier = make_classifier(
        zero_model(1),
        ErrorBaseline(state_mu=0.0, state_std=1.0, kpi_mu=np.zeros(1), kpi_std=np.ones(1)),
        [kpi],
        mean=np.array([10.0]),
        std=np.array([2.0]),
    )
    config = ClassifierConfig(sigma=1.0)
    history = np.full((40, 1), 10.0)
    centered = analyze(classifier, np.array([10.0]), history, 0, classifier_config=config)
    assert not centered.verdict.anomalous
    assert centered.verdict.state_error == pytest.approx(0.0)
    shifted = analyze(classifier, np.array([14.0]), history, 1, classifier_config=config)
    assert shifted.verdict.anomalous
    assert shifted.verdict.state_error == pytest.approx(4.0)


def test_analyze_series_matches_analyze():
    classifier = _anomalous_classifier()
    history = _coupled_history()
    timestamps = np.arange(len(history))
    reports = analyze_series(classifier, history, timestamps, [45, 59])
    assert len(reports) == 2
    direct = analyze(classifier, history[45], history[:46], 45)
    assert report_to_json(reports[0]) == report_to_json(direct)
    assert reports[1].verdict.timestamp == 59


def test_report_json_round_trip():
    classifier = _anomalous_classifier()
    history = _coupled_history()
    descriptors = {DRIVE: KpiDescriptor(kpi=DRIVE, description="drive level")}
    report = analyze(classifier, history[-1], history, 59, descriptors=descriptors)
    text = report_to_json(report)
    assert report_from_json(text) == report
    assert text.endswith("}")
    # normal reports survive the trip too
    baseline = ErrorBaseline(state_mu=1e9, state_std=0.0, kpi_mu=np.zeros(2), kpi_std=np.ones(2))
    quiet = analyze(
        make_classifier(zero_model(2), baseline, [DRIVE, FOLLOW]),
        history[-1],
        history,
        59,
    )
    assert report_from_json(report_to_json(quiet)) == quiet


def test_report_from_json_rejects_bad_payloads():
    with pytest.raises(SchemaError):
        report_from_json("{broken")
    with pytest.raises(SchemaError):
        report_from_json("{}")

"""End-to-end command line tests.

Every test drives ``faultcast.cli.main`` in process with a temporary working
directory, checking exit codes, printed status lines, and the files each
subcommand writes.  Two smoke tests run the module through a subprocess to
cover the ``--help`` and bare-invocation paths that argparse terminates
itself.
"""

from __future__ import annotations

import json
import os
import re
import subprocess
import sys
from types import SimpleNamespace

import pytest

from faultcast import cli, endpoints
from faultcast.autoencoder import TrainingConfig
from faultcast.classifier import (
    StateVerdict,
    fit_classifier,
    load_classifier,
    save_classifier,
    select_elbow,
    sigma_sweep,
    threshold,
)
from faultcast.kpi import KpiId, TimeSeriesDataset, load_dataset, write_dataset
from faultcast.ranker import AnomalyReport, KpiAnomaly, report_from_json, report_to_json
from faultcast.simulate import (
    FaultSpec,
    Scenario,
    evaluate_scenarios,
    fault_to_json,
    generate_normal,
    inject_fault,
    load_fault,
    make_chain_spec,
    spec_to_json,
)

GRID = (1.5, 3.0, 4.5)


@pytest.fixture(scope="module")
def ws(tmp_path_factory) -> SimpleNamespace:
    """A trained model plus quiet and faulty series shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli-workspace")
    spec = make_chain_spec(
        components=2, kpis_per_component=2, noise_std=1.0, length=260, seed=5
    )
    fault = FaultSpec(
        onset=200, kind="offset", target=KpiId("load", "component-1"), magnitude=8.0
    )
    spec_json = root / "spec.json"
    spec_json.write_text(spec_to_json(spec), encoding="utf-8")
    fault_json = root / "fault.json"
    fault_json.write_text(fault_to_json(fault), encoding="utf-8")

    train = generate_normal(spec, seed=21)
    quiet = generate_normal(spec, seed=22)
    faulty, _ = inject_fault(generate_normal(spec, seed=23), spec, fault)
    train_csv = root / "train.csv"
    quiet_csv = root / "quiet.csv"
    faulty_csv = root / "faulty.csv"
    write_dataset(train, str(train_csv))
    write_dataset(quiet, str(quiet_csv))
    write_dataset(faulty, str(faulty_csv))

    classifier, _ = fit_classifier(train, TrainingConfig(epochs=40, seed=3))
    model = root / "model.json"
    save_classifier(classifier, str(model))

    descriptors = root / "descriptors.csv"
    descriptors.write_text(
        "kpi,description\n"
        "load@component-1,primary load on component-1\n"
        "temperature@component-1,temperature near component-1\n"
        "load@component-2,primary load on component-2\n"
        "temperature@component-2,temperature near component-2\n",
        encoding="utf-8",
    )
    return SimpleNamespace(
        spec=spec,
        fault=fault,
        spec_json=str(spec_json),
        fault_json=str(fault_json),
        train=str(train_csv),
        quiet=str(quiet_csv),
        faulty=str(faulty_csv),
        model=str(model),
        descriptors=str(descriptors),
    )


def _normal_report_file(path, timestamp: int = 7) -> str:
    verdict = StateVerdict(
        timestamp=timestamp, state_error=0.01, threshold=0.5, anomalous=False
    )
    path.write_text(report_to_json(AnomalyReport(verdict=verdict)), encoding="utf-8")
    return str(path)


def _anomalous_report_file(path, *, with_description: bool) -> str:
    kpi = KpiId("pressure", "tank-1")
    report = AnomalyReport(
        verdict=StateVerdict(
            timestamp=9, state_error=9.0, threshold=0.5, anomalous=True
        ),
        anomalous_kpis=(KpiAnomaly(kpi=kpi, score=8.0, kpi_threshold=1.0),),
        descriptions=(
            {kpi: "air pressure in the starting tank"} if with_description else {}
        ),
    )
    path.write_text(report_to_json(report), encoding="utf-8")
    return str(path)


class TestParsing:
    def test_no_arguments_is_a_usage_error(self, capsys) -> None:
        assert cli.main([]) == 1
        assert capsys.readouterr().err.startswith("usage error: ")

    def test_unknown_command(self, capsys) -> None:
        assert cli.main(["frobnicate"]) == 1
        assert capsys.readouterr().err.startswith("usage error: ")

    def test_missing_required_flag(self, ws, capsys) -> None:
        assert cli.main(["train", "--data", ws.train]) == 1
        err = capsys.readouterr().err
        assert err.startswith("usage error: ")
        assert "--out" in err

    def test_non_integer_seed(self, ws, capsys) -> None:
        rc = cli.main(["simulate", "--spec", ws.spec_json, "--seed", "soon"])
        assert rc == 1
        assert capsys.readouterr().err.startswith("usage error: ")

    def test_unknown_override_flag(self, ws, capsys) -> None:
        rc = cli.main(
            ["detect", "--data", ws.quiet, "--model", ws.model, "--bogus.field", "1"]
        )
        assert rc == 1
        assert capsys.readouterr().err.startswith("usage error: ")

    def test_bad_override_value(self, ws, capsys) -> None:
        rc = cli.main(
            [
                "detect",
                "--data",
                ws.quiet,
                "--model",
                ws.model,
                "--classifier.sigma",
                "abc",
            ]
        )
        assert rc == 1
        assert "bad value for --classifier.sigma" in capsys.readouterr().err

    def test_help_lists_every_command(self) -> None:
        proc = subprocess.run(
            [sys.executable, "-m", "faultcast.cli", "--help"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0
        for command in (
            "train",
            "tune",
            "detect",
            "rank",
            "kb",
            "troubleshoot",
            "simulate",
            "evaluate",
        ):
            assert command in proc.stdout

    def test_bare_invocation_exits_one(self) -> None:
        proc = subprocess.run(
            [sys.executable, "-m", "faultcast.cli"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 1
        assert proc.stderr.startswith("usage error: ")


class TestTrain:
    def test_train_writes_a_loadable_model(self, ws, tmp_path, capsys) -> None:
        out = tmp_path / "model.json"
        rc = cli.main(
            [
                "train",
                "--data",
                ws.train,
                "--out",
                str(out),
                "--training.epochs",
                "3",
                "--training.seed",
                "0",
            ]
        )
        assert rc == 0
        message = capsys.readouterr().out
        assert message.startswith("trained on 260 states x 4 KPIs (3 epochs")
        assert f"model: {out}" in message
        classifier = load_classifier(str(out))
        assert classifier.training.epochs == 3
        assert classifier.training.seed == 0
        assert [str(k) for k in classifier.kpis] == [
            "load@component-1",
            "temperature@component-1",
            "load@component-2",
            "temperature@component-2",
        ]

    def test_missing_data_file_is_a_data_error(self, tmp_path, capsys) -> None:
        rc = cli.main(
            ["train", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.json")]
        )
        assert rc == 2
        assert capsys.readouterr().err.startswith("data error: ")


class TestDetect:
    def test_verdict_csv_layout(self, ws, tmp_path, capsys) -> None:
        out = tmp_path / "verdicts.csv"
        rc = cli.main(
            ["detect", "--data", ws.quiet, "--model", ws.model, "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "timestamp,state_error,threshold,anomalous"
        assert len(lines) == 1 + 260
        row = re.compile(r"\d+,[0-9eE.+-]+,[0-9eE.+-]+,(true|false)")
        classifier = load_classifier(ws.model)
        limit = f"{threshold(classifier.baseline, 4.5):.17g}"
        for index, line in enumerate(lines[1:]):
            assert row.fullmatch(line), line
            cells = line.split(",")
            assert cells[0] == str(index)
            assert cells[2] == limit
        message = capsys.readouterr().out
        assert " of 260 states anomalous at sigma=4.5 " in message
        assert f"verdicts: {out}" in message

    def test_sigma_must_be_positive(self, ws, capsys) -> None:
        rc = cli.main(
            ["detect", "--data", ws.quiet, "--model", ws.model, "--sigma", "0"]
        )
        assert rc == 1
        assert "--sigma must be positive" in capsys.readouterr().err

    def test_huge_sigma_flags_nothing(self, ws, tmp_path, capsys) -> None:
        out = tmp_path / "quietest.csv"
        rc = cli.main(
            [
                "detect",
                "--data",
                ws.faulty,
                "--model",
                ws.model,
                "--sigma",
                "1e6",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert capsys.readouterr().out.startswith("0 of 260 states anomalous")
        assert ",false" in out.read_text(encoding="utf-8")

    def test_default_sigma_flags_the_fault(self, ws, tmp_path, capsys) -> None:
        out = tmp_path / "faulty.csv"
        rc = cli.main(
            ["detect", "--data", ws.faulty, "--model", ws.model, "--out", str(out)]
        )
        assert rc == 0
        flagged = int(capsys.readouterr().out.split(" ", 1)[0])
        assert flagged > 0

    def test_schema_mismatch_is_a_data_error(self, ws, tmp_path, capsys) -> None:
        narrow = tmp_path / "narrow.csv"
        dataset = load_dataset(ws.quiet)
        narrowed = TimeSeriesDataset(
            timestamps=dataset.timestamps,
            kpis=[KpiId("load", "component-1")],
            values=dataset.values[:, :1],
        )
        write_dataset(narrowed, str(narrow))
        rc = cli.main(["detect", "--data", str(narrow), "--model", ws.model])
        assert rc == 2
        assert capsys.readouterr().err.startswith("data error: ")

    def test_default_output_is_timestamped_and_never_reused(
        self, ws, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        assert cli.main(["detect", "--data", ws.quiet, "--model", ws.model]) == 0
        assert cli.main(["detect", "--data", ws.quiet, "--model", ws.model]) == 0
        capsys.readouterr()
        files = sorted((tmp_path / "reports").glob("detect-*.csv"))
        assert len(files) == 2


class TestTune:
    def _expected_totals(self, ws, paths: list[str]) -> dict[float, int]:
        classifier = load_classifier(ws.model)
        totals = {float(s): 0 for s in GRID}
        for path in paths:
            for point in sigma_sweep(classifier, load_dataset(path), GRID):
                totals[point.sigma] += point.fp_count
        return totals

    def test_curve_elbow_and_file(self, ws, tmp_path, monkeypatch, capsys) -> None:
        monkeypatch.chdir(tmp_path)
        rc = cli.main(
            ["tune", "--data", ws.quiet, "--model", ws.model, "--grid", "1.5,3,4.5"]
        )
        assert rc == 0
        totals = self._expected_totals(ws, [ws.quiet])
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "sigma,total_fp"
        assert lines[1] == f"1.5,{totals[1.5]}"
        assert lines[2] == f"3,{totals[3.0]}"
        assert lines[3] == f"4.5,{totals[4.5]}"
        elbow = select_elbow(sorted(totals.items()))
        assert lines[4] == f"elbow: sigma={elbow:g}"
        assert lines[5].startswith("curve: ")
        curve_path = lines[5].removeprefix("curve: ")
        body = (tmp_path / curve_path).read_text(encoding="utf-8")
        assert body == (
            "sigma,total_fp\n"
            f"1.5,{totals[1.5]}\n"
            f"3,{totals[3.0]}\n"
            f"4.5,{totals[4.5]}\n"
        )

    def test_two_point_grid_reports_no_elbow(
        self, ws, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        rc = cli.main(
            ["tune", "--data", ws.quiet, "--model", ws.model, "--grid", "1.5,3"]
        )
        assert rc == 0
        assert "elbow: needs at least 3 grid points" in capsys.readouterr().out

    def test_repeated_data_doubles_the_counts(
        self, ws, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        rc = cli.main(
            [
                "tune",
                "--data",
                ws.quiet,
                ws.quiet,
                "--model",
                ws.model,
                "--grid",
                "1.5,3,4.5",
            ]
        )
        assert rc == 0
        totals = self._expected_totals(ws, [ws.quiet])
        lines = capsys.readouterr().out.splitlines()
        assert lines[1] == f"1.5,{2 * totals[1.5]}"
        assert lines[3] == f"4.5,{2 * totals[4.5]}"

    def test_bad_grid_values(self, ws, capsys) -> None:
        rc = cli.main(
            ["tune", "--data", ws.quiet, "--model", ws.model, "--grid", "abc"]
        )
        assert rc == 1
        assert "bad --grid value" in capsys.readouterr().err

    def test_empty_grid(self, ws, capsys) -> None:
        rc = cli.main(["tune", "--data", ws.quiet, "--model", ws.model, "--grid", ","])
        assert rc == 1
        assert "--grid must list at least one sigma" in capsys.readouterr().err


class TestRank:
    def test_faulty_series_produces_an_anomalous_report(
        self, ws, tmp_path, capsys
    ) -> None:
        out = tmp_path / "report.json"
        rc = cli.main(
            [
                "rank",
                "--data",
                ws.faulty,
                "--model",
                ws.model,
                "--out",
                str(out),
                "--paths.descriptors",
                ws.descriptors,
            ]
        )
        assert rc == 0
        message = capsys.readouterr().out
        assert "is anomalous" in message
        assert f"report: {out}" in message
        report = report_from_json(out.read_text(encoding="utf-8"))
        assert report.verdict.anomalous
        assert report.verdict.timestamp == 259
        assert report.anomalous_kpis
        assert report.descriptions
        for kpi in report.descriptions:
            assert any(a.kpi == kpi for a in report.anomalous_kpis)

    def test_quiet_series_is_normal_with_a_loose_threshold(
        self, ws, tmp_path, capsys
    ) -> None:
        out = tmp_path / "report.json"
        rc = cli.main(
            [
                "rank",
                "--data",
                ws.quiet,
                "--model",
                ws.model,
                "--out",
                str(out),
                "--classifier.sigma",
                "30",
            ]
        )
        assert rc == 0
        assert "is normal" in capsys.readouterr().out
        report = report_from_json(out.read_text(encoding="utf-8"))
        assert not report.verdict.anomalous
        assert report.anomalous_kpis == ()
        assert report.root_cause_kpis == ()


class TestKnowledgeBase:
    def test_ingest_creates_the_default_store(
        self, manuals, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        files = [str(m) for m in manuals]
        assert cli.main(["kb", "ingest", *files]) == 0
        first = capsys.readouterr().out
        assert first.startswith("ingested 3 documents (")
        store_path = tmp_path / "artifacts" / "knowledge.json"
        assert store_path.exists()
        assert f"store: {os.path.join('artifacts', 'knowledge.json')}" in first

        assert cli.main(["kb", "ingest", *files]) == 0
        second = capsys.readouterr().out
        assert second == first

    def test_remote_embedder_against_a_dead_endpoint(
        self, manuals, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("NO_PROXY", "127.0.0.1")
        monkeypatch.setenv("no_proxy", "127.0.0.1")
        rc = cli.main(
            [
                "kb",
                "ingest",
                str(manuals[0]),
                "--embedder",
                "remote",
                "--endpoints.base_url",
                "http://127.0.0.1:9",
                "--endpoints.retries",
                "0",
                "--endpoints.backoff",
                "0",
                "--endpoints.timeout",
                "2",
            ]
        )
        assert rc == 3
        assert capsys.readouterr().err.startswith("endpoint error: ")
        assert not (tmp_path / "artifacts" / "knowledge.json").exists()


class TestTroubleshoot:
    def test_normal_report_exits_four_before_touching_the_store(
        self, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        report = _normal_report_file(tmp_path / "normal.json")
        rc = cli.main(
            [
                "troubleshoot",
                "--report",
                report,
                "--paths.kb_store",
                str(tmp_path / "missing" / "nowhere.json"),
            ]
        )
        assert rc == 4
        assert "state is normal; nothing to troubleshoot" in capsys.readouterr().out

    def test_offline_pipeline_answers_from_the_manuals(
        self, ws, manuals, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)

        def _no_network(*args, **kwargs):
            raise AssertionError("offline commands must not touch the network")

        monkeypatch.setattr(endpoints, "post_json", _no_network)
        assert cli.main(["kb", "ingest", *[str(m) for m in manuals]]) == 0
        capsys.readouterr()

        report_path = tmp_path / "report.json"
        rc = cli.main(
            [
                "rank",
                "--data",
                ws.faulty,
                "--model",
                ws.model,
                "--out",
                str(report_path),
                "--paths.descriptors",
                ws.descriptors,
            ]
        )
        assert rc == 0
        capsys.readouterr()

        answer_path = tmp_path / "answer.md"
        rc = cli.main(
            ["troubleshoot", "--report", str(report_path), "--out", str(answer_path)]
        )
        assert rc == 0
        message = capsys.readouterr().out
        assert re.match(r"answered from \d+ sources; answer: ", message)
        lines = answer_path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# Troubleshooting answer"
        assert lines[1] == ""
        assert lines[2].startswith(
            "**Question.** What is the cause of anomalous values regarding "
        )
        assert "## Answer" in lines
        assert "## Sources" in lines
        assert "## Retrieved chunks" in lines
        sources_at = lines.index("## Sources")
        retrieved_at = lines.index("## Retrieved chunks")
        source_lines = [
            line for line in lines[sources_at:retrieved_at] if line.startswith("- ")
        ]
        assert source_lines
        for line in source_lines:
            assert re.fullmatch(r"- .+ \(.+#\d{4}\)", line)
        retrieved_lines = [
            line for line in lines[retrieved_at:] if line.startswith("- ")
        ]
        assert 1 <= len(retrieved_lines) <= 4
        for line in retrieved_lines:
            assert re.fullmatch(r"- .+#\d{4} \(similarity -?\d\.\d{4}\)", line)

    def test_report_without_descriptions_fails_cleanly(
        self, manuals, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        assert cli.main(["kb", "ingest", str(manuals[0])]) == 0
        capsys.readouterr()
        report = _anomalous_report_file(
            tmp_path / "bare.json", with_description=False
        )
        rc = cli.main(["troubleshoot", "--report", report])
        assert rc == 2
        assert capsys.readouterr().err.startswith("error: ")

    def test_http_llm_against_a_dead_endpoint(
        self, manuals, tmp_path, monkeypatch, capsys
    ) -> None:
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv("NO_PROXY", "127.0.0.1")
        monkeypatch.setenv("no_proxy", "127.0.0.1")
        assert cli.main(["kb", "ingest", str(manuals[0])]) == 0
        capsys.readouterr()
        report = _anomalous_report_file(
            tmp_path / "anomalous.json", with_description=True
        )
        rc = cli.main(
            [
                "troubleshoot",
                "--report",
                report,
                "--llm",
                "http",
                "--endpoints.base_url",
                "http://127.0.0.1:9",
                "--endpoints.retries",
                "0",
                "--endpoints.backoff",
                "0",
                "--endpoints.timeout",
                "2",
            ]
        )
        assert rc == 3
        assert capsys.readouterr().err.startswith("endpoint error: ")


class TestSimulate:
    def test_output_is_deterministic_for_a_seed(
        self, ws, tmp_path, capsys
    ) -> None:
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        for out in (first, second):
            rc = cli.main(
                ["simulate", "--spec", ws.spec_json, "--seed", "22", "--out", str(out)]
            )
            assert rc == 0
        message = capsys.readouterr().out
        assert "simulated 260 states x 4 KPIs (seed 22)" in message
        assert first.read_bytes() == second.read_bytes()
        direct = tmp_path / "direct.csv"
        write_dataset(generate_normal(ws.spec, 22), str(direct))
        assert first.read_bytes() == direct.read_bytes()

    def test_fault_injection_is_reported(self, ws, tmp_path, capsys) -> None:
        out = tmp_path / "faulted.csv"
        rc = cli.main(
            [
                "simulate",
                "--spec",
                ws.spec_json,
                "--seed",
                "23",
                "--fault",
                ws.fault_json,
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        message = capsys.readouterr().out
        assert "offset fault on load@component-1 at t=200" in message
        produced = load_dataset(str(out))
        reference = load_dataset(ws.faulty)
        assert produced.kpis == reference.kpis
        assert (produced.values == reference.values).all()

    def test_missing_spec_is_a_data_error(self, tmp_path, capsys) -> None:
        rc = cli.main(
            ["simulate", "--spec", str(tmp_path / "nope.json"), "--seed", "1"]
        )
        assert rc == 2
        assert capsys.readouterr().err.startswith("data error: ")


class TestEvaluate:
    def test_table_curve_and_stdout(self, ws, tmp_path, capsys) -> None:
        scenarios_dir = tmp_path / "scenarios"
        scenarios_dir.mkdir()
        (scenarios_dir / "quiet.csv").write_bytes(
            open(ws.quiet, "rb").read()
        )
        (scenarios_dir / "faulty.csv").write_bytes(
            open(ws.faulty, "rb").read()
        )
        (scenarios_dir / "faulty.fault.json").write_text(
            fault_to_json(ws.fault), encoding="utf-8"
        )
        out_dir = tmp_path / "eval"
        rc = cli.main(
            [
                "evaluate",
                "--scenarios",
                str(scenarios_dir),
                "--model",
                ws.model,
                "--out-dir",
                str(out_dir),
                "--sigma_grid",
                "1.5,3,4.5",
            ]
        )
        assert rc == 0

        classifier = load_classifier(ws.model)
        scenarios = [
            Scenario(
                name="faulty",
                dataset=load_dataset(str(scenarios_dir / "faulty.csv")),
                fault=load_fault(str(scenarios_dir / "faulty.fault.json")),
            ),
            Scenario(
                name="quiet",
                dataset=load_dataset(str(scenarios_dir / "quiet.csv")),
                fault=None,
            ),
        ]
        table = evaluate_scenarios(classifier, scenarios, GRID)
        assert (out_dir / "evaluation.csv").read_text(encoding="utf-8") == table.to_csv()
        curve = table.elbow_curve()
        expected_curve = "sigma,total_fp\n" + "".join(
            f"{sigma:g},{fp}\n" for sigma, fp in curve
        )
        assert (out_dir / "elbow.csv").read_text(encoding="utf-8") == expected_curve
        expected_stdout = (
            table.to_text()
            + f"elbow: sigma={select_elbow(curve):g}\n"
            + f"table: {os.path.join(str(out_dir), 'evaluation.csv')}\n"
            + f"curve: {os.path.join(str(out_dir), 'elbow.csv')}\n"
        )
        assert capsys.readouterr().out == expected_stdout

    def test_empty_scenario_directory(self, ws, tmp_path, capsys) -> None:
        empty = tmp_path / "none"
        empty.mkdir()
        rc = cli.main(
            ["evaluate", "--scenarios", str(empty), "--model", ws.model]
        )
        assert rc == 1
        assert "no scenario CSV files" in capsys.readouterr().err


class TestConfigPlumbing:
    def test_config_file_sets_the_sigma(self, ws, tmp_path, capsys) -> None:
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"classifier": {"sigma": 6.0}}), encoding="utf-8")
        out = tmp_path / "v.csv"
        rc = cli.main(
            [
                "detect",
                "--config",
                str(config),
                "--data",
                ws.quiet,
                "--model",
                ws.model,
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert " at sigma=6 " in capsys.readouterr().out

    def test_flag_overrides_the_config_file(self, ws, tmp_path, capsys) -> None:
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"classifier": {"sigma": 6.0}}), encoding="utf-8")
        out = tmp_path / "v.csv"
        rc = cli.main(
            [
                "detect",
                "--config",
                str(config),
                "--classifier.sigma",
                "9",
                "--data",
                ws.quiet,
                "--model",
                ws.model,
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        assert " at sigma=9 " in capsys.readouterr().out

    def test_unknown_config_field_is_a_data_error(self, ws, tmp_path, capsys) -> None:
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"bogus": 1}), encoding="utf-8")
        rc = cli.main(
            ["detect", "--config", str(config), "--data", ws.quiet, "--model", ws.model]
        )
        assert rc == 2
        assert "unknown config field: bogus" in capsys.readouterr().err

    def test_garbled_config_file_is_a_data_error(self, ws, tmp_path, capsys) -> None:
        config = tmp_path / "config.json"
        config.write_text("{broken", encoding="utf-8")
        rc = cli.main(
            ["detect", "--config", str(config), "--data", ws.quiet, "--model", ws.model]
        )
        assert rc == 2
        assert "config file is not valid JSON" in capsys.readouterr().err

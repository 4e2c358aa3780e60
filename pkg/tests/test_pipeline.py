import json

import pytest
from click.testing import CliRunner

from claimgraph.cli import main as cli_main
from claimgraph.errors import ConfigError, ProviderUnavailableError
from claimgraph.gateway import FixtureProvider
from claimgraph.pipeline import (
    PipelineConfig,
    RunRecord,
    build_runtime,
    cost_report,
    load_run_config,
    load_run_records,
    run_batch,
    run_claim,
)

STANDARD_TRACE = [
    "claim_decomposition",
    "edge_generation",
    "evidence_retrieval",
    "explanation_generation",
    "inference",
    "final_explanation_generation",
]


def test_config_hash_tracks_content():
    a, b = PipelineConfig(), PipelineConfig()
    assert a.config_hash() == b.config_hash()
    assert PipelineConfig(k=3).config_hash() != a.config_hash()
    assert len(a.config_hash()) == 12


def test_ablations_are_sorted_and_deduped():
    config = PipelineConfig(ablations=("no_edges", "no_competing", "no_edges"))
    assert config.ablations == ("no_competing", "no_edges")
    assert config.ablated("no_edges") and not config.ablated("no_evidence")


def test_unknown_ablation_rejected():
    with pytest.raises(ConfigError):
        PipelineConfig(ablations=("no_truth",))


def test_no_inference_training_forces_zero_shot():
    config = PipelineConfig(
        ablations=("no_inference_training",),
        inference_path="external_adapter",
        adapter={"type": "stub", "probabilities": [0.1, 0.7, 0.2]},
    )
    assert config.inference_path == "zero_shot"


def test_background_requires_evidence():
    with pytest.raises(ConfigError):
        PipelineConfig(with_background=True, ablations=("no_evidence",))


def test_adapter_path_requires_adapter_config():
    with pytest.raises(ConfigError):
        PipelineConfig(inference_path="external_adapter")


def test_config_round_trip_and_unknown_field(tmp_path):
    config = PipelineConfig(k=3, ablations=("no_edges",), scheme_name="six_way")
    assert PipelineConfig.from_dict(config.to_dict()) == config
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict(dict(config.to_dict(), verbosity=2))
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config.to_dict()), encoding="utf-8")
    assert PipelineConfig.from_file(path) == config


def run_one(config, claim_record):
    return run_claim(build_runtime(config), claim_record)


def test_standard_stage_trace(scripted_config, two_records):
    record = run_one(scripted_config, two_records[0])
    assert record.succeeded
    assert record.stage_trace == STANDARD_TRACE
    assert record.n >= 2
    assert record.graph is not None
    assert record.structure_text.startswith("Directed Graph")
    assert json.loads(record.explanation_graph)["format"] == "explanation-graph/v1"


def test_no_subclaims_trace(two_records):
    config = PipelineConfig(ablations=("no_subclaims",))
    record = run_one(config, two_records[0])
    assert record.succeeded
    assert record.stage_trace == ["evidence_retrieval", "explanation_generation", "inference"]
    assert record.n == 0 and not record.sub_claims
    assert record.summary


def test_no_edges_trace(two_records):
    config = PipelineConfig(ablations=("no_edges",))
    record = run_one(config, two_records[0])
    assert record.stage_trace == [s for s in STANDARD_TRACE if s != "edge_generation"]
    # Safeguard links only: every edge points at the claim node.
    assert all(e["target"] == 0 for e in record.graph["edges"])
    assert all(e["provenance"] == "safeguard" for e in record.graph["edges"])
    assert record.structure_text is None


def test_no_evidence_trace(two_records):
    config = PipelineConfig(ablations=("no_evidence",))
    record = run_one(config, two_records[0])
    assert record.stage_trace == [s for s in STANDARD_TRACE if s != "evidence_retrieval"]
    assert all(not e["items"] for e in record.evidence)


def test_hypergraph_trace(two_records):
    config = PipelineConfig(graph_structure="hypergraph")
    record = run_one(config, two_records[0])
    expected = list(STANDARD_TRACE)
    expected[1] = "hyperedge_generation"
    assert record.stage_trace == expected
    assert record.structure_text.startswith("Hypergraph")
    assert record.hypergraph is not None


def test_background_trace(two_records):
    config = PipelineConfig(with_background=True)
    record = run_one(config, two_records[0])
    expected = list(STANDARD_TRACE)
    expected.insert(4, "background_generation")
    assert record.stage_trace == expected
    assert all(e["background"] for e in record.explanations)


def test_adapter_prediction_source(two_records):
    config = PipelineConfig(
        inference_path="external_adapter",
        adapter={"type": "stub", "probabilities": [0.1, 0.7, 0.2]},
    )
    record = run_one(config, two_records[0])
    assert record.prediction["source"] == "external_adapter"
    assert record.prediction["label"] == "half"
    assert record.prediction["probabilities"] == [0.1, 0.7, 0.2]


class DeadProvider:
    """Fails every request immediately (no retryable path, no sleeps)."""

    def generate(self, request):
        raise ProviderUnavailableError("endpoint gone")


def test_failures_are_recorded_not_raised(two_records, tmp_path):
    config = PipelineConfig()
    runtime = build_runtime(config, provider=DeadProvider())
    record = run_claim(runtime, two_records[0])
    assert not record.succeeded
    assert record.failure == {
        "stage": "claim_decomposition",
        "message": "endpoint gone",
    }

    result = run_batch(two_records, config, tmp_path / "run", provider=DeadProvider())
    assert result.processed == 2
    assert result.report.failure_count == 2
    assert result.report.failures_by_stage == {"claim_decomposition": 2}


def test_resume_spends_no_provider_calls(workspace):
    provider = FixtureProvider(workspace.fixture_dir)
    result = run_batch(
        workspace.records, workspace.config, workspace.recorded_run_dir, provider=provider
    )
    assert result.processed == 0
    assert result.skipped == len(workspace.records)
    assert provider.call_count == 0


def test_config_mismatch_guard(workspace, two_records, tmp_path):
    run_dir = tmp_path / "run"
    run_batch(two_records, PipelineConfig(), run_dir)
    with pytest.raises(ConfigError):
        run_batch(two_records, PipelineConfig(k=2), run_dir)
    result = run_batch(two_records, PipelineConfig(k=2), run_dir, force=True)
    assert result.skipped == 2  # existing records are still honored


def test_run_record_round_trip(workspace):
    records = load_run_records(workspace.recorded_run_dir)
    assert records
    for record in records:
        assert RunRecord.from_dict(record.to_dict()) == record


def test_load_run_config(workspace):
    assert load_run_config(workspace.recorded_run_dir) == workspace.config


def test_cost_report_arithmetic(workspace):
    records = load_run_records(workspace.recorded_run_dir)
    report = cost_report(workspace.recorded_run_dir, workspace.config)
    assert report.claim_count == len(records)

    expected_in = sum(
        entry["input_tokens"] for r in records for entry in r.stage_usage.values()
    )
    expected_out = sum(
        entry["output_tokens"] for r in records for entry in r.stage_usage.values()
    )
    assert report.total_input_tokens == expected_in
    assert report.total_output_tokens == expected_out
    assert sum(e["input_tokens"] for e in report.stage_tokens.values()) == expected_in
    assert report.avg_tokens_per_claim == pytest.approx(
        (expected_in + expected_out) / len(records)
    )
    assert report.input_cost + report.output_cost == report.total_cost

    c = report.latency_components
    assert report.estimated_latency == pytest.approx(
        c["T_dec"]
        + c["T_rel"]
        + report.avg_subclaims * (c["T_ret"] + c["T_comp"])
        + c["T_pred"]
        + c["T_final"]
    )
    assert report.measured_latency > 0
    assert report.predictions_by_source == {"zero_shot": len(records)}
    assert "latency model:" in report.render_text()


def test_cost_report_empty_run(tmp_path):
    run_dir = tmp_path / "run"
    run_batch([], PipelineConfig(), run_dir)
    report = cost_report(run_dir, PipelineConfig())
    assert report.claim_count == 0
    assert report.total_cost == 0
    assert report.estimated_latency == 0.0


def test_cli_ingest_reports_match(workspace):
    runner = CliRunner()
    result = runner.invoke(cli_main, ["ingest", "--manifest", str(workspace.manifest_path)])
    assert result.exit_code == 0, result.output
    assert "expected stats: match" in result.output


def test_cli_run_evaluate_cost_export(workspace, tmp_path):
    runner = CliRunner()
    run_dir = tmp_path / "cli_run"
    result = runner.invoke(
        cli_main,
        [
            "run",
            "--manifest", str(workspace.manifest_path),
            "--out", str(run_dir),
            "--limit", "2",
        ],
    )
    assert result.exit_code == 0, result.output
    assert "processed 2, skipped 0" in result.output

    result = runner.invoke(cli_main, ["evaluate", "--run-dir", str(run_dir)])
    assert result.exit_code == 0, result.output
    assert "macro precision" in result.output

    result = runner.invoke(cli_main, ["cost", "--run-dir", str(run_dir)])
    assert result.exit_code == 0, result.output
    assert "latency model:" in result.output

    claim_id = load_run_records(run_dir)[0].claim_id
    result = runner.invoke(
        cli_main, ["export", "--run-dir", str(run_dir), "--claim-id", claim_id]
    )
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["format"] == "explanation-graph/v1"

    dot_path = tmp_path / "graph.dot"
    result = runner.invoke(
        cli_main,
        [
            "export",
            "--run-dir", str(run_dir),
            "--claim-id", claim_id,
            "--format", "dot",
            "--out", str(dot_path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert dot_path.read_text(encoding="utf-8").startswith("digraph")

    result = runner.invoke(
        cli_main, ["export", "--run-dir", str(run_dir), "--claim-id", "ghost"]
    )
    assert result.exit_code != 0
    assert "no record" in result.output


def test_cli_run_rejects_scheme_mismatch(workspace, tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(PipelineConfig(scheme_name="six_way").to_dict()), encoding="utf-8"
    )
    runner = CliRunner()
    result = runner.invoke(
        cli_main,
        [
            "run",
            "--manifest", str(workspace.manifest_path),
            "--out", str(tmp_path / "run"),
            "--config", str(config_path),
        ],
    )
    assert result.exit_code != 0
    assert "does not match" in result.output


def test_cli_run_applies_ablation_overrides(workspace, tmp_path):
    runner = CliRunner()
    run_dir = tmp_path / "ablated"
    result = runner.invoke(
        cli_main,
        [
            "run",
            "--manifest", str(workspace.manifest_path),
            "--out", str(run_dir),
            "--limit", "1",
            "--ablation", "no_edges",
        ],
    )
    assert result.exit_code == 0, result.output
    config = load_run_config(run_dir)
    assert config.ablations == ("no_edges",)
    record = load_run_records(run_dir)[0]
    assert "edge_generation" not in record.stage_trace

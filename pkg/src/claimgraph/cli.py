"""Command line entry points: ingest, run, evaluate, cost, export."""
from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .errors import ClaimGraphError
from .ingest import dataset_stats, load_manifest, load_records, write_reject_log
from .pipeline import (
    PipelineConfig,
    cost_report,
    judge_run,
    load_run_config,
    load_run_records,
    run_batch,
    write_reports,
)
from .summarize import export_dot, parse_structured


class _DomainErrorGroup(click.Group):
    """Surface domain failures as exit-code-1 messages, not tracebacks."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except ClaimGraphError as exc:
            raise click.ClickException(str(exc)) from exc


@click.group(cls=_DomainErrorGroup)
def main() -> None:
    """Claim decomposition, evidence-grounded explanation, and veracity checks."""


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--reject-log", type=click.Path(dir_okay=False), default=None)
@click.option("--allow-empty-reports", is_flag=True, default=False)
def ingest(manifest_path: str, reject_log: str, allow_empty_reports: bool) -> None:
    """Validate a dataset and print its shape."""
    manifest = load_manifest(manifest_path)
    records, rejects = load_records(manifest, allow_empty_reports)
    stats = dataset_stats(records)
    click.echo(f"dataset: {manifest.name} ({manifest.scheme.name}, {manifest.split})")
    click.echo(stats.render_text())
    if rejects:
        click.echo(f"rejected: {len(rejects)}")
        if reject_log:
            write_reject_log(reject_log, rejects)
            click.echo(f"reject log: {reject_log}")
    if manifest.expected_stats is not None:
        if stats.to_dict() == manifest.expected_stats:
            click.echo("expected stats: match")
        else:
            click.echo("expected stats: MISMATCH")
            sys.exit(1)


def _apply_overrides(config: PipelineConfig, overrides: dict) -> PipelineConfig:
    changes = {k: v for k, v in overrides.items() if v is not None and v != ()}
    if not changes:
        return config
    return dataclasses.replace(config, **changes)


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "run_dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--ablation", "ablations", multiple=True)
@click.option("--k", type=int, default=None)
@click.option("--graph-structure", type=click.Choice(["dependency", "hypergraph"]), default=None)
@click.option("--decomposition", type=click.Choice(["standard", "enhanced"]), default=None)
@click.option("--background/--no-background", "with_background", default=None)
@click.option("--inference", "inference_path", type=click.Choice(["zero_shot", "external_adapter"]), default=None)
@click.option("--model-id", default=None)
@click.option("--limit", type=int, default=None)
@click.option("--force", is_flag=True, default=False)
def run(
    manifest_path: str,
    run_dir: str,
    config_path: str,
    ablations: tuple,
    k: int,
    graph_structure: str,
    decomposition: str,
    with_background: bool,
    inference_path: str,
    model_id: str,
    limit: int,
    force: bool,
) -> None:
    """Process a dataset into a run directory (resumes if it exists)."""
    manifest = load_manifest(manifest_path)
    if config_path:
        config = PipelineConfig.from_file(config_path)
        if config.scheme_name != manifest.scheme.name:
            raise click.ClickException(
                f"config scheme {config.scheme_name} does not match "
                f"manifest scheme {manifest.scheme.name}"
            )
    else:
        config = PipelineConfig(scheme_name=manifest.scheme.name)
    config = _apply_overrides(
        config,
        {
            "ablations": tuple(ablations),
            "k": k,
            "graph_structure": graph_structure,
            "decomposition": decomposition,
            "with_background": with_background,
            "inference_path": inference_path,
            "model_id": model_id,
        },
    )
    records, rejects = load_records(manifest)
    if rejects:
        click.echo(f"skipping {len(rejects)} rejected records", err=True)
    if limit is not None:
        records = records[:limit]
    result = run_batch(records, config, run_dir, force=force)
    click.echo(f"processed {result.processed}, skipped {result.skipped} (already done)")
    if result.report is not None:
        click.echo(result.report.render_text())
    click.echo(f"run dir: {result.run_dir}")


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--judge/--no-judge", default=False)
def evaluate(run_dir: str, judge: bool) -> None:
    """Rebuild the evaluation report for a run, optionally judging explanations."""
    config = load_run_config(run_dir)
    if judge:
        report = judge_run(run_dir, config)
    else:
        report = write_reports(Path(run_dir), config)
    if report is None:
        click.echo("no labelled outcomes to evaluate")
        return
    click.echo(report.render_text())


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False))
def cost(run_dir: str) -> None:
    """Token, dollar, and latency accounting for a run."""
    config = load_run_config(run_dir)
    click.echo(cost_report(run_dir, config).render_text())


@main.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--claim-id", required=True)
@click.option("--format", "fmt", type=click.Choice(["dot", "structured"]), default="structured")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def export(run_dir: str, claim_id: str, fmt: str, out_path: str) -> None:
    """Write one claim's explanation graph as DOT or structured JSON."""
    matches = [r for r in load_run_records(run_dir) if r.claim_id == claim_id]
    if not matches:
        raise click.ClickException(f"no record for claim id {claim_id!r}")
    record = matches[0]
    if not record.explanation_graph:
        raise click.ClickException(
            f"claim {claim_id!r} has no explanation graph "
            f"(failure: {record.failure or 'none recorded'})"
        )
    if fmt == "dot":
        text = export_dot(parse_structured(record.explanation_graph))
    else:
        text = record.explanation_graph
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()

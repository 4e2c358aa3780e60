#!/usr/bin/env python3
"""Build the offline test corpus: a synthetic dataset plus recorded provider
fixtures, produced by running the batch once against the scripted responder.

The output root ends up with three siblings:
  data/               manifest.json + claims.jsonl
  provider_fixtures/  one JSON file per unique provider exchange
  recorded_run/       the run directory that produced the fixtures
"""
import argparse
from pathlib import Path

from claimgraph.fixtures import build_fixture_dataset
from claimgraph.gateway import RecordingProvider, fixture_totals
from claimgraph.gateway.scripted import ScriptedResponder
from claimgraph.ingest import load_manifest, load_records
from claimgraph.labels import scheme_by_name
from claimgraph.pipeline import PipelineConfig, run_batch


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("fixtures"))
    parser.add_argument("--claims", type=int, default=10)
    parser.add_argument("--scheme", choices=["three_way", "six_way"], default="three_way")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    manifest_path = build_fixture_dataset(
        args.out / "data",
        claim_count=args.claims,
        scheme=scheme_by_name(args.scheme),
        seed=args.seed,
    )
    manifest = load_manifest(manifest_path)
    records, rejects = load_records(manifest)
    assert not rejects, rejects

    fixture_dir = args.out / "provider_fixtures"
    recorder = RecordingProvider(ScriptedResponder(seed=0), fixture_dir)
    config = PipelineConfig(
        scheme_name=args.scheme, provider={"type": "fixture", "path": str(fixture_dir)}
    )
    result = run_batch(records, config, args.out / "recorded_run", provider=recorder)

    totals = fixture_totals(fixture_dir)
    print(f"dataset:   {manifest_path}")
    print(f"fixtures:  {fixture_dir} ({recorder.call_count} exchanges recorded)")
    print(f"run dir:   {result.run_dir} ({result.processed} claims)")
    print(f"tokens:    in {totals.input_tokens}  out {totals.output_tokens}")
    if result.report is not None:
        print(result.report.render_text())


if __name__ == "__main__":
    main()

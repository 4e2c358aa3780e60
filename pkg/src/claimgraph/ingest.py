"""Dataset loading: manifest, canonical claim records, validation, stats.

The canonical on-disk form is a manifest JSON next to a JSONL claims file.
Each claims line is ``{"id", "claim", "label", "reports": [...]}`` where a
report is either ``{"content": "raw text"}`` (split into sentences here) or
``{"sentences": ["...", ...]}`` (already split).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import DatasetError, UnparseableLabelError
from .labels import VeracityLabel, VeracityScheme, scheme_by_name
from .records import ClaimRecord, Report
from .retrieval import split_report_sentences


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    scheme: VeracityScheme
    split: str
    claims_path: Path
    expected_stats: Optional[dict] = None

    VALID_SPLITS = ("train", "valid", "test")

    def __post_init__(self) -> None:
        if self.split not in self.VALID_SPLITS:
            raise DatasetError(f"split must be one of {self.VALID_SPLITS}, got {self.split!r}")


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DatasetError(f"unreadable manifest {path}: {exc}") from exc
    try:
        scheme = scheme_by_name(payload["scheme"])
        claims = path.parent / payload["claims"]
        return DatasetManifest(
            name=payload["name"],
            scheme=scheme,
            split=payload["split"],
            claims_path=claims,
            expected_stats=payload.get("expected_stats"),
        )
    except (KeyError, ValueError) as exc:
        raise DatasetError(f"malformed manifest {path}: {exc}") from exc


@dataclass(frozen=True)
class RejectedRecord:
    claim_id: str
    reason: str


def _parse_report(raw: object) -> Tuple[str, ...]:
    """Sentences of one report; empty tuple means the report is unusable."""
    if isinstance(raw, dict) and isinstance(raw.get("content"), str):
        return tuple(split_report_sentences(raw["content"]))
    if isinstance(raw, dict) and isinstance(raw.get("sentences"), list):
        sentences = raw["sentences"]
        if any(not isinstance(s, str) or not s.strip() for s in sentences):
            return ()
        return tuple(s.strip() for s in sentences)
    return ()


def parse_claim_record(
    payload: dict, scheme: VeracityScheme, allow_empty_reports: bool = False
) -> ClaimRecord:
    """Validate one raw record against the canonical schema.

    Raises DatasetError with a human-readable reason; the loader catches it
    and routes the record to the reject log.
    """
    claim_id = str(payload.get("id", "")).strip()
    if not claim_id:
        raise DatasetError("missing id")
    claim = payload.get("claim")
    if not isinstance(claim, str) or not claim.strip():
        raise DatasetError("missing or empty claim text")
    gold: Optional[VeracityLabel] = None
    if payload.get("label") is not None:
        try:
            gold = VeracityLabel.from_identifier(scheme, str(payload["label"]))
        except UnparseableLabelError as exc:
            raise DatasetError(str(exc)) from None
    raw_reports = payload.get("reports", [])
    if not isinstance(raw_reports, list):
        raise DatasetError("reports must be a list")
    reports: List[Report] = []
    for position, raw in enumerate(raw_reports):
        sentences = _parse_report(raw)
        if not sentences:
            raise DatasetError(f"report {position} is empty or malformed")
        reports.append(Report(sentences))
    if not reports and not allow_empty_reports:
        raise DatasetError("record has no reports")
    return ClaimRecord(claim_id, claim.strip(), tuple(reports), gold)


def load_records(
    manifest: DatasetManifest, allow_empty_reports: bool = False
) -> Tuple[List[ClaimRecord], List[RejectedRecord]]:
    """All usable records plus a reject entry for every line that is not."""
    records: List[ClaimRecord] = []
    rejects: List[RejectedRecord] = []
    seen_ids: set = set()
    try:
        lines = manifest.claims_path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DatasetError(f"unreadable claims file {manifest.claims_path}: {exc}") from exc
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fallback_id = f"line-{line_no}"
        try:
            payload = json.loads(line)
            if not isinstance(payload, dict):
                raise DatasetError("line is not an object")
            record = parse_claim_record(payload, manifest.scheme, allow_empty_reports)
        except DatasetError as exc:
            claim_id = str(payload.get("id", fallback_id)) if isinstance(payload, dict) else fallback_id
            rejects.append(RejectedRecord(claim_id or fallback_id, str(exc)))
            continue
        except ValueError as exc:
            rejects.append(RejectedRecord(fallback_id, f"invalid JSON: {exc}"))
            continue
        if record.claim_id in seen_ids:
            rejects.append(RejectedRecord(record.claim_id, "duplicate id"))
            continue
        seen_ids.add(record.claim_id)
        records.append(record)
    return records, rejects


def write_reject_log(path: Union[str, Path], rejects: Sequence[RejectedRecord]) -> None:
    lines = [
        json.dumps({"id": r.claim_id, "reason": r.reason}, ensure_ascii=False)
        for r in rejects
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


@dataclass(frozen=True)
class DatasetStats:
    claim_count: int
    label_counts: Dict[str, int] = field(default_factory=dict)
    reports_min: int = 0
    reports_max: int = 0
    reports_avg: float = 0.0
    sentences_min: int = 0
    sentences_max: int = 0
    sentences_avg: float = 0.0

    def to_dict(self) -> dict:
        return {
            "claims": self.claim_count,
            "label_counts": dict(self.label_counts),
            "reports_per_claim": {
                "min": self.reports_min,
                "max": self.reports_max,
                "avg": self.reports_avg,
            },
            "sentences_per_report": {
                "min": self.sentences_min,
                "max": self.sentences_max,
                "avg": self.sentences_avg,
            },
        }

    def render_text(self) -> str:
        labels = "  ".join(f"{k}: {v}" for k, v in self.label_counts.items())
        return "\n".join(
            [
                f"claims: {self.claim_count}",
                f"labels: {labels or 'none'}",
                f"reports/claim:    min {self.reports_min}  max {self.reports_max}  "
                f"avg {self.reports_avg:.1f}",
                f"sentences/report: min {self.sentences_min}  max {self.sentences_max}  "
                f"avg {self.sentences_avg:.1f}",
            ]
        )


def dataset_stats(records: Sequence[ClaimRecord]) -> DatasetStats:
    """Corpus shape summary: label counts plus report and sentence extents."""
    if not records:
        return DatasetStats(claim_count=0)
    label_counts: Dict[str, int] = {}
    scheme = None
    for record in records:
        if record.gold_label is not None:
            scheme = record.gold_label.scheme
    if scheme is not None:
        label_counts = {ident: 0 for ident in scheme.labels}
    for record in records:
        key = record.gold_label.identifier if record.gold_label else "unlabeled"
        label_counts[key] = label_counts.get(key, 0) + 1
    report_counts = [len(r.reports) for r in records]
    sentence_counts = [len(rep.sentences) for r in records for rep in r.reports]
    return DatasetStats(
        claim_count=len(records),
        label_counts={k: v for k, v in label_counts.items() if v or k != "unlabeled"},
        reports_min=min(report_counts),
        reports_max=max(report_counts),
        reports_avg=sum(report_counts) / len(report_counts),
        sentences_min=min(sentence_counts) if sentence_counts else 0,
        sentences_max=max(sentence_counts) if sentence_counts else 0,
        sentences_avg=(sum(sentence_counts) / len(sentence_counts)) if sentence_counts else 0.0,
    )

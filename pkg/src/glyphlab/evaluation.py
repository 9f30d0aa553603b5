"""Dataset handling, the attack-grid pipeline, and detection metrics.

The grid runs every attack arm over every sample, scores each attacked
text with every detector, and reduces the verdicts to one metrics report
per (attack, detector) pair. The positive class is always AI-generated.
MCC is the headline metric: unlike F1 it stays near 0 for detectors that
collapse to a single class, which is exactly the failure mode homoglyph
attacks induce.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from ._rng import derive_seed
from .attacks import AttackSpec, TokenScorer, apply_spec
from .confusables import HomoglyphTable
from .detectors import AI, HUMAN, Detector

LABELS = (HUMAN, AI)


class DatasetError(ValueError):
    """Raised for malformed dataset files."""


@dataclass(frozen=True)
class TextSample:
    id: str
    text: str
    label: str

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise DatasetError(f"label must be one of {LABELS}, got {self.label!r}")
        if not self.text:
            raise DatasetError(f"sample {self.id!r} has empty text")


def load_dataset(path: str) -> list[TextSample]:
    """Read a JSONL dataset of {"id", "text", "label"} objects.

    Labels are case-insensitive "human" / "ai". Malformed lines and
    duplicate ids raise :class:`DatasetError` naming the line numbers.
    """
    samples: list[TextSample] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {line_number}: invalid JSON: {exc}") from None
            try:
                sample_id = str(obj["id"])
                text = obj["text"]
                label = str(obj["label"]).lower()
            except (KeyError, TypeError) as exc:
                raise DatasetError(f"line {line_number}: missing field {exc}") from None
            if label not in LABELS:
                raise DatasetError(f"line {line_number}: unknown label {obj['label']!r}")
            if sample_id in seen:
                raise DatasetError(
                    f"line {line_number}: duplicate id {sample_id!r} "
                    f"(first seen on line {seen[sample_id]})"
                )
            seen[sample_id] = line_number
            samples.append(TextSample(id=sample_id, text=text, label=label))
    return samples


def save_dataset(samples: Sequence[TextSample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(
                json.dumps(
                    {"id": sample.id, "text": sample.text, "label": sample.label},
                    ensure_ascii=True,
                )
                + "\n"
            )


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with AI-generated as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def mcc(matrix: ConfusionMatrix) -> float:
    """Matthews Correlation Coefficient; 0 when any marginal is empty."""
    tp, fp, tn, fn = matrix.tp, matrix.fp, matrix.tn, matrix.fn
    factors = (tp + fp, tp + fn, tn + fp, tn + fn)
    if 0 in factors:
        return 0.0
    numerator = tp * tn - fp * fn
    product = factors[0] * factors[1] * factors[2] * factors[3]
    if product < 2**53:  # exactly representable: one correctly rounded sqrt
        denominator = math.sqrt(product)
    else:
        denominator = 1.0
        for factor in factors:
            denominator *= math.sqrt(factor)
    return numerator / denominator


@dataclass(frozen=True)
class StandardMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: tuple[str, ...]


def standard_metrics(matrix: ConfusionMatrix) -> StandardMetrics:
    """Accuracy, precision, recall, and F1, with divisions by zero
    reported as 0 and flagged."""
    tp, fp, tn, fn = matrix.tp, matrix.fp, matrix.tn, matrix.fn
    flags: list[str] = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            flags.append(f"{name}-undefined")
            return 0.0
        return num / den

    accuracy = ratio(tp + tn, matrix.total, "accuracy")
    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    f1 = ratio(2 * tp, 2 * tp + fp + fn, "f1")
    return StandardMetrics(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class MetricsReport:
    """All metrics for one (dataset, detector, attack) cell."""

    dataset: str
    detector: str
    attack: str
    matrix: ConfusionMatrix
    mcc: float
    accuracy: float
    precision: float
    recall: float
    f1: float
    coverage: float
    flags: tuple[str, ...] = ()


def build_report(
    dataset: str,
    detector: str,
    attack: str,
    matrix: ConfusionMatrix,
    errors: int = 0,
) -> MetricsReport:
    metrics = standard_metrics(matrix)
    scored = matrix.total
    return MetricsReport(
        dataset=dataset,
        detector=detector,
        attack=attack,
        matrix=matrix,
        mcc=mcc(matrix),
        accuracy=metrics.accuracy,
        precision=metrics.precision,
        recall=metrics.recall,
        f1=metrics.f1,
        coverage=scored / (scored + errors) if scored + errors else 0.0,
        flags=metrics.flags,
    )


TraceHook = Callable[[dict], None]


def run_grid(
    dataset: Sequence[TextSample],
    table: HomoglyphTable,
    attacks: Sequence[AttackSpec],
    detectors: Sequence[Detector],
    seed: int,
    dataset_name: str = "dataset",
    jobs: int = 1,
    scorer: TokenScorer | None = None,
    trace: TraceHook | None = None,
) -> list[MetricsReport]:
    """Attack every sample under every arm and score with every detector.

    Each sample's attack seed derives from (master seed, sample id), so
    any subset of the dataset reproduces identical attacked texts. One
    report is produced per (attack, detector); per-sample detector errors
    reduce that report's coverage but never abort the grid.
    """
    if not any(spec.kind == "none" for spec in attacks):
        raise ValueError("attack grid must include the identity (no-attack) arm")
    ids = [s.id for s in dataset]
    if len(set(ids)) != len(ids):
        raise DatasetError("dataset contains duplicate sample ids")

    reports: list[MetricsReport] = []
    for spec in attacks:
        attacked_texts = [
            apply_spec(
                table, sample.text, spec, seed=derive_seed(seed, sample.id), scorer=scorer
            ).attacked
            for sample in dataset
        ]
        for detector in detectors:

            def score_one(index: int):
                try:
                    return detector.detect(attacked_texts[index])
                except Exception as exc:
                    return exc

            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    results = list(pool.map(score_one, range(len(dataset))))
            else:
                results = [score_one(i) for i in range(len(dataset))]

            tp = fp = tn = fn = errors = 0
            for sample, result in zip(dataset, results):
                if isinstance(result, Exception):
                    errors += 1
                    if trace:
                        trace(
                            {
                                "id": sample.id,
                                "attack": spec.label,
                                "detector": detector.name,
                                "error": str(result),
                                "truth": sample.label,
                            }
                        )
                    continue
                if trace:
                    trace(
                        {
                            "id": sample.id,
                            "attack": spec.label,
                            "detector": detector.name,
                            "score": result.raw_score,
                            "label": result.label,
                            "truth": sample.label,
                        }
                    )
                if result.label == AI:
                    if sample.label == AI:
                        tp += 1
                    else:
                        fp += 1
                elif sample.label == AI:
                    fn += 1
                else:
                    tn += 1
            reports.append(
                build_report(
                    dataset_name,
                    detector.name,
                    spec.label,
                    ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn),
                    errors=errors,
                )
            )
    return reports


CSV_FIELDS = (
    "dataset",
    "detector",
    "attack",
    "mcc",
    "accuracy",
    "f1",
    "precision",
    "recall",
    "coverage",
)


def reports_to_csv(reports: Sequence[MetricsReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in reports:
        writer.writerow(
            [
                r.dataset,
                r.detector,
                r.attack,
                repr(r.mcc),
                repr(r.accuracy),
                repr(r.f1),
                repr(r.precision),
                repr(r.recall),
                repr(r.coverage),
            ]
        )
    return buffer.getvalue()


def report_to_json_dict(report: MetricsReport) -> dict:
    return {
        "dataset": report.dataset,
        "detector": report.detector,
        "attack": report.attack,
        "matrix": {
            "tp": report.matrix.tp,
            "fp": report.matrix.fp,
            "tn": report.matrix.tn,
            "fn": report.matrix.fn,
        },
        "mcc": report.mcc,
        "accuracy": report.accuracy,
        "f1": report.f1,
        "precision": report.precision,
        "recall": report.recall,
        "coverage": report.coverage,
        "flags": list(report.flags),
    }

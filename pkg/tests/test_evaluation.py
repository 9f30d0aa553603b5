import json
import math
from decimal import Decimal, getcontext

import pytest

from glyphlab._rng import SplitMix64
from glyphlab.attacks import AttackSpec
from glyphlab.detectors import HIGHER_IS_AI, make_verdict
from glyphlab.evaluation import (
    ConfusionMatrix,
    DatasetError,
    TextSample,
    build_report,
    load_dataset,
    mcc,
    report_to_json_dict,
    reports_to_csv,
    run_grid,
    save_dataset,
    standard_metrics,
)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return str(path)


class TestLoadDataset:
    def test_single_ai_sample(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [{"id": "1", "text": "hi", "label": "ai"}])
        (sample,) = load_dataset(path)
        assert sample == TextSample(id="1", text="hi", label="ai")

    def test_labels_case_insensitive(self, tmp_path):
        path = write_jsonl(
            tmp_path / "d.jsonl",
            [{"id": "1", "text": "x", "label": "AI"}, {"id": "2", "text": "y", "label": "Human"}],
        )
        assert [s.label for s in load_dataset(path)] == ["ai", "human"]

    def test_duplicate_ids_name_both_lines(self, tmp_path):
        path = write_jsonl(
            tmp_path / "d.jsonl",
            [
                {"id": "a", "text": "x", "label": "ai"},
                {"id": "a", "text": "y", "label": "human"},
            ],
        )
        with pytest.raises(DatasetError, match="line 2.*line 1"):
            load_dataset(path)

    def test_unknown_label(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [{"id": "1", "text": "x", "label": "robot"}])
        with pytest.raises(DatasetError, match="line 1.*robot"):
            load_dataset(path)

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "d.jsonl"
        path.write_text('{"id": "1", "text": "x", "label": "ai"}\nnot json\n')
        with pytest.raises(DatasetError, match="line 2"):
            load_dataset(str(path))

    def test_large_file_count(self, tmp_path):
        rows = [{"id": str(i), "text": f"t{i}", "label": "ai" if i % 2 else "human"} for i in range(2000)]
        path = write_jsonl(tmp_path / "d.jsonl", rows)
        assert len(load_dataset(path)) == 2000

    def test_round_trip_with_save(self, tmp_path):
        samples = [TextSample("a", "first", "ai"), TextSample("b", "second", "human")]
        save_dataset(samples, str(tmp_path / "d.jsonl"))
        assert load_dataset(str(tmp_path / "d.jsonl")) == samples

    def test_empty_text_rejected(self, tmp_path):
        path = write_jsonl(tmp_path / "d.jsonl", [{"id": "1", "text": "", "label": "ai"}])
        with pytest.raises(DatasetError, match="empty text"):
            load_dataset(path)


def decimal_mcc(tp, fp, tn, fn):
    getcontext().prec = 60
    factors = [tp + fp, tp + fn, tn + fp, tn + fn]
    if 0 in factors:
        return Decimal(0)
    num = Decimal(tp * tn - fp * fn)
    den = Decimal(1)
    for f in factors:
        den *= Decimal(f)
    return num / den.sqrt()


class TestMCC:
    def test_perfect_classifier(self):
        assert mcc(ConfusionMatrix(tp=1000, fp=0, tn=1000, fn=0)) == 1.0

    def test_all_one_class_is_zero(self):
        assert mcc(ConfusionMatrix(tp=1000, fp=1000, tn=0, fn=0)) == 0.0
        assert mcc(ConfusionMatrix(tp=0, fp=0, tn=500, fn=500)) == 0.0

    def test_derived_arithmetic_value(self):
        # 850000 / sqrt(950 * 1000 * 1000 * 1050), checked in exact
        # decimal arithmetic.
        matrix = ConfusionMatrix(tp=900, fp=50, tn=950, fn=100)
        expected = decimal_mcc(900, 50, 950, 100)
        assert mcc(matrix) == pytest.approx(float(expected), abs=1e-14)
        assert mcc(matrix) == pytest.approx(0.8511, abs=5e-5)

    def test_symmetry_and_negation(self):
        rng = SplitMix64(99)
        for _ in range(200):
            tp, fp, tn, fn = (rng.randbelow(50) for _ in range(4))
            base = mcc(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn))
            # swapping both predicted and true labels leaves MCC unchanged
            swapped = mcc(ConfusionMatrix(tp=tn, fp=fn, tn=tp, fn=fp))
            assert swapped == pytest.approx(base, abs=1e-12)
            # flipping only predictions negates it
            flipped = mcc(ConfusionMatrix(tp=fn, fp=tn, tn=fp, fn=tp))
            assert flipped == pytest.approx(-base, abs=1e-12)

    def test_bounds(self):
        rng = SplitMix64(7)
        for _ in range(500):
            m = mcc(
                ConfusionMatrix(
                    tp=rng.randbelow(100), fp=rng.randbelow(100),
                    tn=rng.randbelow(100), fn=rng.randbelow(100),
                )
            )
            assert -1.0 <= m <= 1.0

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(tp=-1, fp=0, tn=0, fn=0)


class TestStandardMetrics:
    def test_perfect(self):
        m = standard_metrics(ConfusionMatrix(tp=10, fp=0, tn=10, fn=0))
        assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0)
        assert m.flags == ()

    def test_zero_precision_flagged(self):
        m = standard_metrics(ConfusionMatrix(tp=0, fp=0, tn=5, fn=5))
        assert m.precision == 0.0
        assert "precision-undefined" in m.flags

    def test_paper_style_tuple_from_integer_matrix(self):
        # An integer matrix over 1000+1000 samples that rounds to the
        # MCC/accuracy/F1/precision/recall shape 0.92/0.96/0.96/0.95/0.96.
        matrix = ConfusionMatrix(tp=964, fp=46, tn=954, fn=36)
        m = standard_metrics(matrix)
        assert round(mcc(matrix), 2) == 0.92
        assert round(m.accuracy, 2) == 0.96
        assert round(m.f1, 2) == 0.96
        assert round(m.precision, 2) == 0.95
        assert round(m.recall, 2) == 0.96

    def test_deceptive_f1_case(self):
        # Balanced set, everything predicted AI: F1 is exactly 2/3 while
        # MCC is 0 by the zero-denominator convention.
        matrix = ConfusionMatrix(tp=500, fp=500, tn=0, fn=0)
        m = standard_metrics(matrix)
        assert m.f1 == 2 / 3
        assert mcc(matrix) == 0.0


class _KeywordDetector:
    """Labels AI iff the text contains a marker substring."""

    def __init__(self, marker="zq", name="keyword"):
        self.marker = marker
        self.name = name

    def detect(self, text):
        return make_verdict(self.name, float(self.marker in text), 0.5, HIGHER_IS_AI)


class _FlakyDetector:
    name = "flaky"

    def detect(self, text):
        if "poison" in text:
            raise RuntimeError("cannot score")
        return make_verdict(self.name, 1.0, 0.5, HIGHER_IS_AI)


def tiny_dataset():
    return [
        TextSample("a1", "zq alpha text", "ai"),
        TextSample("a2", "zq beta text", "ai"),
        TextSample("h1", "plain gamma text", "human"),
        TextSample("h2", "plain delta text", "human"),
    ]


GRID = [AttackSpec("none"), AttackSpec("random", 0.3), AttackSpec("greedy")]


class TestRunGrid:
    def test_identity_arm_required(self, table):
        with pytest.raises(ValueError, match="identity"):
            run_grid(tiny_dataset(), table, [AttackSpec("greedy")], [_KeywordDetector()], seed=1)

    def test_identity_arm_perfect_detector(self, table):
        reports = run_grid(tiny_dataset(), table, GRID, [_KeywordDetector()], seed=1)
        original = next(r for r in reports if r.attack == "original")
        assert original.mcc == 1.0
        assert original.coverage == 1.0
        assert len(reports) == 3

    def test_detector_errors_reduce_coverage_not_abort(self, table):
        dataset = tiny_dataset() + [TextSample("p1", "poison text", "ai")]
        reports = run_grid(dataset, table, [AttackSpec("none")], [_FlakyDetector()], seed=1)
        (report,) = reports
        assert report.coverage == pytest.approx(4 / 5)
        assert report.matrix.total == 4

    def test_jobs_do_not_change_results(self, table):
        serial = run_grid(tiny_dataset(), table, GRID, [_KeywordDetector()], seed=5, jobs=1)
        parallel = run_grid(tiny_dataset(), table, GRID, [_KeywordDetector()], seed=5, jobs=4)
        assert reports_to_csv(serial) == reports_to_csv(parallel)

    def test_subset_reproduces_attacks(self, table):
        # per-sample seeds derive from (master, id): a subset of the
        # dataset sees byte-identical attacked texts.
        dataset = tiny_dataset()
        seen_full, seen_subset = {}, {}

        def keep(store):
            return lambda entry: store.setdefault((entry["id"], entry["attack"]), entry["score"])

        run_grid(dataset, table, GRID, [_KeywordDetector()], seed=9, trace=keep(seen_full))
        run_grid(dataset[:2], table, GRID, [_KeywordDetector()], seed=9, trace=keep(seen_subset))
        for key, value in seen_subset.items():
            assert seen_full[key] == value

    def test_duplicate_ids_rejected(self, table):
        dataset = [TextSample("x", "a text", "ai"), TextSample("x", "b text", "human")]
        with pytest.raises(DatasetError):
            run_grid(dataset, table, [AttackSpec("none")], [_KeywordDetector()], seed=1)

    def test_grid_determinism(self, table):
        a = run_grid(tiny_dataset(), table, GRID, [_KeywordDetector()], seed=3)
        b = run_grid(tiny_dataset(), table, GRID, [_KeywordDetector()], seed=3)
        assert reports_to_csv(a) == reports_to_csv(b)

    def test_trace_records_verdicts(self, table):
        entries = []
        run_grid(tiny_dataset(), table, [AttackSpec("none")], [_KeywordDetector()], seed=1, trace=entries.append)
        assert len(entries) == 4
        assert {e["truth"] for e in entries} == {"ai", "human"}
        assert all(e["attack"] == "original" for e in entries)


class TestReportOutputs:
    def test_csv_shape(self, table):
        reports = run_grid(tiny_dataset(), table, GRID, [_KeywordDetector()], seed=1)
        lines = reports_to_csv(reports).splitlines()
        assert lines[0] == "dataset,detector,attack,mcc,accuracy,f1,precision,recall,coverage"
        assert len(lines) == 4

    def test_json_dict_matrix(self):
        report = build_report("d", "det", "original", ConfusionMatrix(tp=1, fp=2, tn=3, fn=4))
        payload = report_to_json_dict(report)
        assert payload["matrix"] == {"tp": 1, "fp": 2, "tn": 3, "fn": 4}
        assert payload["attack"] == "original"

    def test_matrix_total_plus_errors_is_dataset_size(self, table):
        dataset = tiny_dataset() + [TextSample("p1", "poison text", "ai")]
        (report,) = run_grid(dataset, table, [AttackSpec("none")], [_FlakyDetector()], seed=1)
        errors = round(report.matrix.total / report.coverage) - report.matrix.total
        assert report.matrix.total + errors == len(dataset)

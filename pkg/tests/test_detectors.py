import pytest

from glyphlab.detectors import (
    AI,
    HIGHER_IS_AI,
    HUMAN,
    LOWER_IS_AI,
    DetectorError,
    DetectorVerdict,
    ExternalDetector,
    ExternalDetectorEndpoint,
    detect,
    detect_batch,
    make_verdict,
    verdict_label,
)

from .fakeserver import running_server


class TestVerdictLabel:
    def test_higher_is_ai(self):
        assert verdict_label(0.9, 0.5, HIGHER_IS_AI) == AI
        assert verdict_label(0.1, 0.5, HIGHER_IS_AI) == HUMAN

    def test_lower_is_ai(self):
        assert verdict_label(0.1, 0.5, LOWER_IS_AI) == AI
        assert verdict_label(0.9, 0.5, LOWER_IS_AI) == HUMAN

    def test_tie_is_human_both_polarities(self):
        assert verdict_label(0.5, 0.5, HIGHER_IS_AI) == HUMAN
        assert verdict_label(0.5, 0.5, LOWER_IS_AI) == HUMAN

    def test_unknown_polarity(self):
        with pytest.raises(ValueError):
            verdict_label(0.5, 0.5, "diagonal")

    def test_make_verdict_consistency(self):
        verdict = make_verdict("d", 3.0, 2.0, HIGHER_IS_AI)
        assert verdict == DetectorVerdict("d", 3.0, AI, 2.0, HIGHER_IS_AI)


class _ConstantDetector:
    name = "constant"

    def detect(self, text: str) -> DetectorVerdict:
        return make_verdict(self.name, 1.0, 0.5, HIGHER_IS_AI)


class TestDetect:
    def test_delegates(self):
        assert detect(_ConstantDetector(), "hello").label == AI

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            detect(_ConstantDetector(), "")

    def test_builtin_detectors_are_pure(self):
        detector = _ConstantDetector()
        assert detect(detector, "x") == detect(detector, "x")


def endpoint_for(base_url, **kw):
    kw.setdefault("retry_backoff", 0.01)
    return ExternalDetectorEndpoint(base_url=base_url, name="fake", **kw)


class TestExternalDetector:
    def test_scores_single_text(self):
        with running_server() as (url, _):
            verdict = ExternalDetector(endpoint_for(url)).detect("hello world!!")
            assert verdict.raw_score == 13.0
            assert verdict.threshold == 5.0
            assert verdict.label == AI  # 13 > 5, higher-is-ai

    def test_short_text_labeled_human(self):
        with running_server() as (url, _):
            assert ExternalDetector(endpoint_for(url)).detect("hi").label == HUMAN

    def test_http_500_is_detector_error(self):
        with running_server() as (url, _):
            with pytest.raises(DetectorError, match="HTTP 500"):
                ExternalDetector(endpoint_for(url)).detect("fail:500")

    def test_malformed_json_is_detector_error(self):
        with running_server() as (url, _):
            with pytest.raises(DetectorError, match="malformed"):
                ExternalDetector(endpoint_for(url)).detect("fail:garbage")

    def test_missing_field_is_detector_error(self):
        with running_server() as (url, _):
            with pytest.raises(DetectorError, match="malformed"):
                ExternalDetector(endpoint_for(url)).detect("fail:fields")

    def test_unknown_polarity_is_detector_error(self):
        with running_server() as (url, _):
            with pytest.raises(DetectorError, match="polarity"):
                ExternalDetector(endpoint_for(url)).detect("fail:polarity")

    def test_transport_error_retried_then_succeeds(self):
        with running_server() as (url, state):
            verdict = ExternalDetector(endpoint_for(url)).detect("drop:2")
            assert verdict.raw_score == 6.0
            assert state.total_requests == 3  # two drops + one success

    def test_retries_bounded(self):
        with running_server() as (url, state):
            with pytest.raises(DetectorError, match="transport"):
                ExternalDetector(endpoint_for(url)).detect("drop:99")
            assert state.total_requests == 3  # initial + two retries

    def test_unreachable_endpoint(self):
        endpoint = endpoint_for("http://127.0.0.1:9", timeout=0.2)
        with pytest.raises(DetectorError, match="transport"):
            ExternalDetector(endpoint).detect("text")


class TestDetectBatch:
    def test_empty_list(self):
        endpoint = endpoint_for("http://127.0.0.1:9")
        assert detect_batch(endpoint, []) == []

    def test_order_preserved_with_failures(self):
        with running_server() as (url, _):
            results = detect_batch(
                endpoint_for(url), ["aaa", "fail:500", "ccccc"]
            )
            assert len(results) == 3
            assert isinstance(results[0], DetectorVerdict) and results[0].raw_score == 3.0
            assert isinstance(results[1], DetectorError)
            assert isinstance(results[2], DetectorVerdict) and results[2].raw_score == 5.0

    def test_bounded_concurrency(self):
        texts = [f"text number {i}" for i in range(100)]
        with running_server(hold_seconds=0.01) as (url, state):
            results = detect_batch(endpoint_for(url, max_in_flight=4), texts)
            assert len(results) == 100
            assert all(isinstance(r, DetectorVerdict) for r in results)
            assert state.peak_in_flight <= 4
            assert state.peak_in_flight >= 2  # it did actually parallelize

    def test_results_track_inputs(self):
        texts = ["a" * n for n in range(1, 30)]
        with running_server() as (url, _):
            results = detect_batch(endpoint_for(url, max_in_flight=8), texts)
            assert [r.raw_score for r in results] == [float(n) for n in range(1, 30)]

    def test_max_in_flight_validation(self):
        with pytest.raises(ValueError):
            ExternalDetectorEndpoint(base_url="http://x", name="x", max_in_flight=0)

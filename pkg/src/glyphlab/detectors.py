"""Uniform detector abstraction and the external HTTP detector client.

Every detector, built-in or remote, produces a :class:`DetectorVerdict`
carrying the raw score, the threshold convention it was judged under,
and the resulting binary label. Labels use strict inequality; a score
exactly at the threshold is HUMAN.

External detectors speak a one-text-per-request protocol:

    POST {base_url}/score            body  {"text": "<utf-8 string>"}
    200                              body  {"score": <number>,
                                            "polarity": "higher-is-ai" | "lower-is-ai",
                                            "threshold": <number>}

Anything else (non-200, malformed JSON, bad fields) is an item-level
error; batch calls isolate such errors instead of aborting.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import requests

AI = "ai"
HUMAN = "human"
HIGHER_IS_AI = "higher-is-ai"
LOWER_IS_AI = "lower-is-ai"


class DetectorError(RuntimeError):
    """A detector failed to produce a verdict for one text."""


@dataclass(frozen=True)
class DetectorVerdict:
    detector_name: str
    raw_score: float
    label: str
    threshold: float
    polarity: str


def verdict_label(raw_score: float, threshold: float, polarity: str) -> str:
    """Binary label under strict inequality; ties are HUMAN."""
    if polarity == HIGHER_IS_AI:
        return AI if raw_score > threshold else HUMAN
    if polarity == LOWER_IS_AI:
        return AI if raw_score < threshold else HUMAN
    raise ValueError(f"unknown polarity {polarity!r}")


def make_verdict(
    name: str, raw_score: float, threshold: float, polarity: str
) -> DetectorVerdict:
    return DetectorVerdict(
        detector_name=name,
        raw_score=raw_score,
        label=verdict_label(raw_score, threshold, polarity),
        threshold=threshold,
        polarity=polarity,
    )


@runtime_checkable
class Detector(Protocol):
    name: str

    def detect(self, text: str) -> DetectorVerdict: ...


def detect(detector: Detector, text: str) -> DetectorVerdict:
    """Run any detector on one nonempty text."""
    if not text:
        raise ValueError("cannot run a detector on empty text")
    return detector.detect(text)


@dataclass(frozen=True)
class ExternalDetectorEndpoint:
    """Connection settings for an HTTP-served detector."""

    base_url: str
    name: str
    timeout: float = 10.0
    max_in_flight: int = 4
    max_retries: int = 2
    retry_backoff: float = 0.25

    def __post_init__(self) -> None:
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


def _score_once(endpoint: ExternalDetectorEndpoint, text: str) -> DetectorVerdict:
    url = endpoint.base_url.rstrip("/") + "/score"
    attempt = 0
    while True:
        try:
            response = requests.post(url, json={"text": text}, timeout=endpoint.timeout)
        except requests.RequestException as exc:
            # Transport errors are retried with exponential backoff;
            # protocol errors below are not.
            if attempt >= endpoint.max_retries:
                raise DetectorError(f"{endpoint.name}: transport failure: {exc}") from exc
            time.sleep(endpoint.retry_backoff * (2**attempt))
            attempt += 1
            continue
        if response.status_code != 200:
            raise DetectorError(f"{endpoint.name}: HTTP {response.status_code}")
        try:
            payload = response.json()
            score = float(payload["score"])
            polarity = payload["polarity"]
            threshold = float(payload["threshold"])
        except (ValueError, KeyError, TypeError) as exc:
            raise DetectorError(f"{endpoint.name}: malformed response: {exc}") from exc
        if polarity not in (HIGHER_IS_AI, LOWER_IS_AI):
            raise DetectorError(f"{endpoint.name}: unknown polarity {polarity!r}")
        return make_verdict(endpoint.name, score, threshold, polarity)


class ExternalDetector:
    """Detector-protocol adapter for an HTTP endpoint."""

    def __init__(self, endpoint: ExternalDetectorEndpoint):
        self.endpoint = endpoint
        self.name = endpoint.name

    def detect(self, text: str) -> DetectorVerdict:
        return _score_once(self.endpoint, text)


def detect_batch(
    endpoint: ExternalDetectorEndpoint, texts: Sequence[str]
) -> list[DetectorVerdict | DetectorError]:
    """Score many texts against an endpoint.

    Results preserve input order and length; item failures are returned
    as :class:`DetectorError` placeholders. At most ``max_in_flight``
    requests are in flight at a time.
    """
    if not texts:
        return []

    def worker(text: str) -> DetectorVerdict | DetectorError:
        try:
            return _score_once(endpoint, text)
        except DetectorError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=endpoint.max_in_flight) as pool:
        return list(pool.map(worker, texts))

"""Safeguards against homoglyph substitution: normalization and screening.

Normalization maps every codepoint to the canonical representative of its
homoglyph class, which cancels any class-preserving substitution attack:
normalize(attack(x)) == normalize(x). Screening reports how much of a
text falls outside an allowed set of scripts and how many words mix
scripts, using a bundled codepoint-range table for Latin, Greek, and
Cyrillic letters. Screening only reports; policy stays with the caller
(scientific text legitimately contains Greek, for instance).
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .confusables import HomoglyphTable
from .detectors import Detector, DetectorVerdict
from .ngram_lm import NGramModel, score
from .tokenizer import Vocab, tokenize

# Letter script ranges (inclusive). Letters outside all ranges report as
# "other"; non-letters have no script.
SCRIPT_RANGES: dict[str, tuple[tuple[int, int], ...]] = {
    "latin": (
        (0x0041, 0x005A),
        (0x0061, 0x007A),
        (0x00C0, 0x00D6),
        (0x00D8, 0x00F6),
        (0x00F8, 0x024F),
        (0x1E00, 0x1EFF),
    ),
    "greek": ((0x0370, 0x03FF), (0x1F00, 0x1FFF)),
    "cyrillic": ((0x0400, 0x04FF), (0x0500, 0x052F)),
}


def script_of(cp: int | str) -> str | None:
    """Script name for a letter codepoint, or None for non-letters."""
    ch = cp if isinstance(cp, str) else chr(cp)
    if not unicodedata.category(ch).startswith("L"):
        return None
    value = ord(ch)
    for name, ranges in SCRIPT_RANGES.items():
        for lo, hi in ranges:
            if lo <= value <= hi:
                return name
    return "other"


@dataclass(frozen=True)
class DefenseReport:
    """Screening outcome; normalization fields are filled by callers that
    combine screening with normalization (the CLI does)."""

    suspicious_fraction: float
    mixed_script_words: int
    normalized_text: str
    replaced_positions: tuple[int, ...]


def normalize(table: HomoglyphTable, text: str) -> tuple[str, tuple[int, ...]]:
    """Map every codepoint to its canonical representative.

    Codepoints not in the table pass through unchanged. Returns the
    normalized text and the indices that changed.
    """
    canonical = table.canonical
    chars = []
    replaced = []
    for index, ch in enumerate(text):
        rep = canonical.get(ord(ch))
        if rep is None or rep == ord(ch):
            chars.append(ch)
        else:
            chars.append(chr(rep))
            replaced.append(index)
    return "".join(chars), tuple(replaced)


def screen(text: str, allowed_scripts: set[str] | frozenset[str]) -> DefenseReport:
    """Report the fraction of letters outside the allowed scripts and the
    number of whitespace-delimited words mixing two or more scripts."""
    if not allowed_scripts:
        raise ValueError("allowed_scripts must be nonempty")
    allowed = {name.lower() for name in allowed_scripts}
    unknown = allowed - set(SCRIPT_RANGES) - {"other"}
    if unknown:
        raise ValueError(f"unknown script names: {sorted(unknown)}")

    letters = 0
    suspicious = 0
    for ch in text:
        name = script_of(ch)
        if name is None:
            continue
        letters += 1
        if name not in allowed:
            suspicious += 1

    mixed = 0
    for word in text.split():
        scripts = {script_of(ch) for ch in word}
        scripts.discard(None)
        if len(scripts) >= 2:
            mixed += 1

    return DefenseReport(
        suspicious_fraction=suspicious / letters if letters else 0.0,
        mixed_script_words=mixed,
        normalized_text=text,
        replaced_positions=(),
    )


def defend_then_detect(
    table: HomoglyphTable,
    detector: Detector,
    text: str,
    trace: bool = False,
) -> DetectorVerdict | tuple[DetectorVerdict, dict]:
    """Normalize, then detect. With trace=True also return the pre- and
    post-normalization texts and the replaced positions."""
    normalized, replaced = normalize(table, text)
    verdict = detector.detect(normalized)
    if not trace:
        return verdict
    return verdict, {
        "input_text": text,
        "normalized_text": normalized,
        "replaced_positions": list(replaced),
    }


class DefendedDetector:
    """Detector wrapper that normalizes input before delegating."""

    def __init__(self, table: HomoglyphTable, inner: Detector):
        self.table = table
        self.inner = inner
        self.name = f"{inner.name}+normalize"

    def detect(self, text: str) -> DetectorVerdict:
        normalized, _ = normalize(self.table, text)
        return self.inner.detect(normalized)


def loglikelihood_anomaly(
    model: NGramModel, vocab: Vocab, table: HomoglyphTable, text: str
) -> float:
    """Mean-loglikelihood gain from normalizing the text.

    Near zero for clean text; large and positive when homoglyphs were
    suppressing the language model's token probabilities.
    """
    normalized, _ = normalize(table, text)
    raw = score(model, tokenize(vocab, text)).mean_loglikelihood
    clean = score(model, tokenize(vocab, normalized)).mean_loglikelihood
    return clean - raw

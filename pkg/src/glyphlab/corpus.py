"""Deterministic synthesis of English-like desk corpora.

Experiments in this package need megabytes of homoglyph-free English
text plus held-out samples, reproducible from a seed and free of
licensing baggage. This module assembles such text from a bundled
lexicon and sentence templates. Word choice is frequency-skewed so the
corpus has a natural head-heavy word distribution.

Two registers are available: "human" draws on the full lexicon and all
templates, "ai" only on the most frequent words and a few templates,
which makes its output measurably more predictable to a language model
trained on the corpus (the usual premise of perplexity detectors).
"""
from __future__ import annotations

from collections import Counter

from ._rng import SplitMix64, derive_seed

NOUNS = (
    "village", "pattern", "station", "library", "machine", "journal",
    "morning", "evening", "harvest", "orchard", "structure", "boundary",
    "territory", "industry", "strategy", "mechanism", "tradition",
    "narrative", "argument", "settlement", "expedition", "laboratory",
    "manuscript", "photograph", "collection", "committee", "conference",
    "discovery", "ecosystem", "election", "engineer", "historian",
    "hospital", "interview", "mountain", "musician", "network",
    "newspaper", "notebook", "orchard", "population", "portrait",
    "professor", "railway", "reservoir", "resource", "satellite",
    "scientist", "sculpture", "telescope", "framework", "instrument",
    "observation", "community", "institution", "experiment", "procedure",
    "document", "landscape", "pipeline", "workshop", "archive",
    "chronicle", "catalogue", "diagram", "festival", "granary", "horizon",
    "islander", "junction", "lantern", "merchant", "monument", "neighbor",
    "overlook", "passage", "shoreline", "terrace", "undercurrent",
    "vineyard", "waterway", "almanac", "causeway", "district", "estuary",
)

ADJECTIVES = (
    "ancient", "careful", "detailed", "distant", "extensive", "familiar",
    "frequent", "gradual", "historic", "immense", "intricate", "luminous",
    "meticulous", "mysterious", "notable", "obscure", "original",
    "patient", "peculiar", "persistent", "practical", "precise",
    "rigorous", "seasonal", "spacious", "thorough", "uncertain", "unusual",
    "weathered", "youthful", "abundant", "accurate", "adaptive", "coastal",
    "colorful", "curious", "deliberate", "durable", "dynamic", "earnest",
    "efficient", "elegant", "enormous", "essential", "evident", "faithful",
    "fertile", "flexible", "generous", "genuine", "layered", "systematic",
    "consistent", "unexpected", "remarkable", "elaborate", "fragile",
)

VERBS_PAST = (
    "described", "measured", "recorded", "observed", "collected",
    "reported", "studied", "visited", "repaired", "documented",
    "evaluated", "confirmed", "predicted", "sustained", "examined",
    "compared", "analyzed", "revealed", "suggested", "developed",
    "established", "maintained", "constructed", "displayed", "explored",
    "captured", "organized", "restored", "surveyed", "transformed",
    "translated", "transported", "uncovered", "assembled", "calculated",
    "catalogued", "chronicled", "classified", "composed", "connected",
    "considered", "delivered", "designed", "discovered", "expanded",
    "explained", "extended", "gathered", "identified", "illustrated",
    "imagined", "improved", "inspected", "interpreted", "introduced",
    "investigated", "modeled", "monitored", "navigated", "outlined",
    "performed", "photographed", "preserved", "produced", "proposed",
    "published", "reconstructed", "refined", "remembered", "repeated",
    "resolved", "reviewed", "revised", "sampled", "sketched", "summarized",
    "supported", "tracked", "treated", "verified", "witnessed",
)

VERBS_PRESENT = (
    "describes", "measures", "records", "observes", "collects", "reports",
    "studies", "repairs", "documents", "evaluates", "confirms", "predicts",
    "examines", "compares", "analyzes", "reveals", "suggests", "develops",
    "establishes", "maintains", "explores", "captures", "organizes",
    "surveys", "transforms", "calculates", "classifies", "connects",
    "considers", "delivers", "designs", "explains", "extends", "gathers",
    "identifies", "illustrates", "improves", "inspects", "interprets",
    "introduces", "investigates", "monitors", "outlines", "performs",
    "preserves", "produces", "proposes", "publishes", "reconstructs",
    "refines", "repeats", "resolves", "reviews", "revises", "sketches",
    "summarizes", "supports", "verifies",
)

ADVERBS = (
    "quietly", "carefully", "gradually", "repeatedly", "ultimately",
    "briefly", "clearly", "closely", "commonly", "constantly", "curiously",
    "deliberately", "directly", "eagerly", "equally", "eventually",
    "exactly", "faithfully", "frequently", "honestly", "instantly",
    "largely", "loosely", "naturally", "patiently", "plainly", "precisely",
    "promptly", "readily", "regularly", "reliably", "roughly", "sharply",
    "silently", "smoothly", "steadily", "strangely", "strictly",
    "suddenly", "swiftly", "thoroughly", "usually", "vividly",
)

TEMPLATES = (
    "{adj} {nouns} {adv} {verb_past} {adj} {nouns}.",
    "{adj} {nouns} {verb_past} the {noun} of {adj} {nouns}.",
    "The {adj} {noun} {verb_past} the {noun} of the {adj} {noun}.",
    "{adj} {nouns} near the {noun} {verb_past} {adj} {nouns} {adv}.",
    "The {nouns} {adv} {verb_past} a {adj} {noun}.",
    "Every {noun} in the {noun} was {verb_past} {adv}.",
    "{nouns} of {adj} {nouns} {adv} {verb_past} the {adj} {noun}.",
    "Each {adj} {noun} {verb_pres} a {noun} of {adj} {nouns}.",
    "Some {nouns} {verb_past} the {noun}, and the {noun} was {verb_past} {adv}.",
    "The {adj} {nouns} {verb_past} a {adj} {noun} beyond the {noun}.",
    "When the {noun} was {verb_past}, a {adj} {noun} was {verb_past} too.",
    "{adj} {nouns} behind the {noun} were {verb_past} {adv} during the {noun}.",
    "Several {nouns} {verb_past} the {adj} {noun} with a {adj} {noun}.",
    "Between the {nouns}, the {adj} {noun} was {verb_past} {adv}.",
    "The {noun} {verb_pres} {adv}, and the {adj} {noun} {verb_pres} the {noun}.",
    "No {noun} {verb_past} the {noun} without a {adj} {noun}.",
    "That {adj} {noun} {adv} {verb_past} the {nouns} of the {noun}.",
    "Under a {adj} {noun}, the {nouns} {verb_past} the {noun} {adv}.",
    "{adj} {nouns} of the {noun} {verb_past} a {adj}, {adj} {noun}.",
    "One {noun} {adv} {verb_pres} the {noun} beside the {adj} {noun}.",
    "Though the {noun} was {adj}, the {nouns} {verb_past} it {adv}.",
    "{adv} {verb_past} {nouns} {adv} {verb_past} the {adj} {nouns}.",
)

REGISTERS = {
    # (fraction of each word list available, number of templates available)
    "human": (1.0, len(TEMPLATES)),
    "ai": (0.3, 6),
}


def pluralize(noun: str) -> str:
    if noun.endswith(("s", "x", "z", "ch", "sh")):
        return noun + "es"
    if noun.endswith("y") and noun[-2] not in "aeiou":
        return noun[:-1] + "ies"
    return noun + "s"


class _SentenceFiller(dict):
    """format_map helper drawing a fresh word for every placeholder."""

    def __init__(self, rng: SplitMix64, head_fraction: float):
        super().__init__()
        self.rng = rng
        self.head_fraction = head_fraction

    def _pick(self, words: tuple[str, ...]) -> str:
        limit = max(1, int(len(words) * self.head_fraction))
        u = self.rng.random()
        return words[int(u * u * limit)]  # quadratic skew toward the head

    def __missing__(self, key: str) -> str:
        if key == "noun":
            return self._pick(NOUNS)
        if key == "nouns":
            return pluralize(self._pick(NOUNS))
        if key == "adj":
            return self._pick(ADJECTIVES)
        if key == "verb_past":
            return self._pick(VERBS_PAST)
        if key == "verb_pres":
            return self._pick(VERBS_PRESENT)
        if key == "adv":
            return self._pick(ADVERBS)
        raise KeyError(key)


def _sentence(rng: SplitMix64, register: str) -> str:
    head_fraction, n_templates = REGISTERS[register]
    template = TEMPLATES[rng.randbelow(n_templates)]
    sentence = template.format_map(_SentenceFiller(rng, head_fraction))
    return sentence[0].upper() + sentence[1:]


def generate_text(min_chars: int, seed: int, register: str = "human") -> str:
    """At least ``min_chars`` of paragraph-structured text; deterministic
    in (min_chars, seed, register)."""
    if register not in REGISTERS:
        raise ValueError(f"unknown register {register!r}")
    rng = SplitMix64(derive_seed(seed, "corpus", register))
    paragraphs: list[str] = []
    total = 0
    while total < min_chars:
        sentences = [_sentence(rng, register) for _ in range(3 + rng.randbelow(5))]
        paragraph = " ".join(sentences)
        paragraphs.append(paragraph)
        total += len(paragraph) + 2
    return "\n\n".join(paragraphs)


def generate_samples(
    count: int,
    seed: int,
    register: str = "human",
    min_sentences: int = 2,
    max_sentences: int = 5,
) -> list[str]:
    """Independent short texts (one paragraph each) for held-out sets."""
    if register not in REGISTERS:
        raise ValueError(f"unknown register {register!r}")
    if not 1 <= min_sentences <= max_sentences:
        raise ValueError("need 1 <= min_sentences <= max_sentences")
    samples = []
    for i in range(count):
        rng = SplitMix64(derive_seed(seed, "sample", register, i))
        n = min_sentences + rng.randbelow(max_sentences - min_sentences + 1)
        samples.append(" ".join(_sentence(rng, register) for _ in range(n)))
    return samples


def top_words(
    text: str, max_words: int = 2000, min_len: int = 8
) -> list[tuple[str, int]]:
    """Most frequent lowercased words of at least ``min_len`` letters,
    ranked by count with lexicographic tie-break. Feeds the watermark
    base model's lexicon."""
    counts: Counter[str] = Counter()
    for raw in text.split():
        word = raw.strip(".,;:!?\"'()").lower()
        if len(word) >= min_len and word.isalpha():
            counts[word] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:max_words]

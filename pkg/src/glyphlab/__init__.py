"""Homoglyph substitution attacks on AI-generated-text detectors.

Build a homoglyph table from Unicode confusables data, rewrite text with
random/greedy/targeted substitution attacks, measure the effect on
built-in detector surrogates (an n-gram perplexity detector and a
green-list watermark z-test) or on external HTTP-served detectors, and
apply normalization defenses that cancel the attacks.
"""

__version__ = "0.1.0"

from .attacks import AttackOutcome, AttackSpec, greedy_attack, random_attack, targeted_attack
from .confusables import (
    HomoglyphTable,
    build_table,
    builtin_table,
    load_table,
    parse_confusables,
)
from .defenses import DefendedDetector, defend_then_detect, normalize, screen
from .detectors import (
    DetectorError,
    DetectorVerdict,
    ExternalDetector,
    ExternalDetectorEndpoint,
    detect,
    detect_batch,
)
from .evaluation import (
    ConfusionMatrix,
    MetricsReport,
    TextSample,
    load_dataset,
    mcc,
    run_grid,
    save_dataset,
    standard_metrics,
)
from .ngram_lm import (
    NGramModel,
    PerplexityDetector,
    PerplexityScore,
    calibrate_threshold,
    perplexity_detector,
    score,
    train,
)
from .tokenizer import TokenSeq, Vocab, build_vocab, decode, token_change_rate, tokenize
from .watermark import (
    WatermarkConfig,
    WatermarkTextDetector,
    ZTestResult,
    generate,
    green_list,
    watermark_detector,
    word_unigram_model,
    z_test,
)

__all__ = [
    "AttackOutcome",
    "AttackSpec",
    "ConfusionMatrix",
    "DefendedDetector",
    "DetectorError",
    "DetectorVerdict",
    "ExternalDetector",
    "ExternalDetectorEndpoint",
    "HomoglyphTable",
    "MetricsReport",
    "NGramModel",
    "PerplexityDetector",
    "PerplexityScore",
    "TextSample",
    "TokenSeq",
    "Vocab",
    "WatermarkConfig",
    "WatermarkTextDetector",
    "ZTestResult",
    "build_table",
    "build_vocab",
    "builtin_table",
    "calibrate_threshold",
    "decode",
    "defend_then_detect",
    "detect",
    "detect_batch",
    "generate",
    "greedy_attack",
    "green_list",
    "load_dataset",
    "load_table",
    "mcc",
    "normalize",
    "parse_confusables",
    "perplexity_detector",
    "random_attack",
    "run_grid",
    "save_dataset",
    "score",
    "screen",
    "standard_metrics",
    "targeted_attack",
    "token_change_rate",
    "tokenize",
    "train",
    "watermark_detector",
    "word_unigram_model",
    "z_test",
]

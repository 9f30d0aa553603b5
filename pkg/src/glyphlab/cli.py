"""Command-line surface: attack, defend, evaluate, and dataset tooling.

Subcommands
    attack                rewrite text with homoglyph substitutions
    defend                normalize text and screen for script anomalies
    build-vocab           frequency n-gram vocabulary from a corpus
    train-lm              n-gram language model from a corpus
    generate-watermarked  watermarked + plain sample dataset (JSONL)
    evaluate              attack grid x detectors -> CSV/JSON reports
    report                render report JSONs as a results table

Exit codes: 0 success, 1 usage error, 2 data error, 3 evaluation
finished with partial external-detector coverage.

Every command is deterministic under fixed seeds, and evaluation outputs
embed the tool version plus the full run configuration.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

from . import __version__, corpus
from ._rng import derive_seed
from .attacks import AttackSpec, apply_spec
from .confusables import HomoglyphTable, builtin_table, load_table
from .defenses import DefendedDetector, normalize, screen
from .detectors import Detector, ExternalDetector, ExternalDetectorEndpoint
from .evaluation import (
    DatasetError,
    load_dataset,
    report_to_json_dict,
    reports_to_csv,
    run_grid,
    save_dataset,
)
from .ngram_lm import NGramModel, PerplexityDetector, token_loglikelihood_scorer, train
from .tokenizer import Vocab, build_vocab, tokenize
from .watermark import (
    DEFAULT_HASH_KEY,
    DEFAULT_Z_THRESHOLD,
    WatermarkConfig,
    WatermarkTextDetector,
    generate_dataset,
    word_unigram_model,
)

USAGE_ERROR = 1
DATA_ERROR = 2
PARTIAL_COVERAGE = 3

DEFAULT_GRID = (
    {"kind": "none"},
    {"kind": "random", "percentage": 0.05},
    {"kind": "random", "percentage": 0.10},
    {"kind": "random", "percentage": 0.15},
    {"kind": "random", "percentage": 0.20},
    {"kind": "greedy"},
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Everything needed to reproduce an evaluation run."""

    dataset_paths: list[str] = field(default_factory=list)
    confusables_path: str | None = None
    attacks: list[dict] = field(default_factory=lambda: [dict(a) for a in DEFAULT_GRID])
    detectors: list[dict] = field(default_factory=list)
    master_seed: int = 0
    output_dir: str = "results"
    jobs: int = 1
    trace: bool = False

    @staticmethod
    def from_file(path: str) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        known = {f for f in RunConfig.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return RunConfig(**payload)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_table_arg(path: str | None) -> HomoglyphTable:
    return load_table(path) if path else builtin_table()


def _attack_spec_from_args(args) -> AttackSpec:
    chosen = [
        name
        for name, value in (
            ("greedy", args.greedy),
            ("random", args.random is not None),
            ("targeted", args.targeted is not None),
        )
        if value
    ]
    if len(chosen) != 1:
        raise SystemExit2("choose exactly one of --greedy / --random / --targeted")
    kind = chosen[0]
    percentage = args.random if kind == "random" else args.targeted if kind == "targeted" else None
    return AttackSpec(kind=kind, percentage=percentage, seed=args.seed)


class SystemExit2(Exception):
    """Data-level error that should exit with code 2."""


def cmd_attack(args) -> int:
    table = _load_table_arg(args.table)
    spec = _attack_spec_from_args(args)
    text = _read_text(args.input)
    scorer = None
    if spec.kind == "targeted":
        if not args.lm or not args.vocab:
            raise SystemExit2("--targeted requires --lm and --vocab")
        model = NGramModel.from_json(_read_text(args.lm))
        vocab = Vocab.from_json(_read_text(args.vocab))
        scorer = token_loglikelihood_scorer(model, vocab)
    outcome = apply_spec(table, text, spec, scorer=scorer)
    _write_text(args.output, outcome.attacked)
    if args.sidecar:
        sidecar = {
            "tool_version": __version__,
            "attack": {"kind": spec.kind, "percentage": spec.percentage, "seed": spec.seed},
            "table_source": table.diagnostics.source_name,
            "attackable_count": outcome.attackable_count,
            "target_count": outcome.target_count,
            "replacements": [
                {"index": i, "original": f"{old:04X}", "replacement": f"{new:04X}"}
                for i, old, new in outcome.replacements
            ],
        }
        _write_text(args.sidecar, json.dumps(sidecar, indent=2) + "\n")
    return 0


def cmd_defend(args) -> int:
    table = _load_table_arg(args.table)
    text = _read_text(args.input)
    normalized, replaced = normalize(table, text)
    _write_text(args.output, normalized)
    if args.report:
        scripts = set(args.screen.split(",")) if args.screen else {"latin"}
        screening = screen(text, scripts)
        report = {
            "tool_version": __version__,
            "allowed_scripts": sorted(scripts),
            "suspicious_fraction": screening.suspicious_fraction,
            "mixed_script_words": screening.mixed_script_words,
            "replaced_positions": list(replaced),
            "normalized_text": normalized,
        }
        _write_text(args.report, json.dumps(report, indent=2, ensure_ascii=True) + "\n")
    return 0


def cmd_build_vocab(args) -> int:
    texts = [_read_text(p) for p in args.corpus]
    vocab = build_vocab(texts, args.max_size)
    _write_text(args.output, vocab.to_json())
    return 0


def _paragraphs(text: str) -> list[str]:
    return [p for p in text.split("\n\n") if p.strip()]


def cmd_train_lm(args) -> int:
    vocab = Vocab.from_json(_read_text(args.vocab))
    sequences = []
    for path in args.corpus:
        sequences.extend(tokenize(vocab, p) for p in _paragraphs(_read_text(path)))
    model = train(sequences, args.order, args.smoothing_k, vocab.size)
    _write_text(args.output, model.to_json())
    return 0


def cmd_generate_watermarked(args) -> int:
    if args.corpus:
        text = _read_text(args.corpus)
    else:
        text = corpus.generate_text(args.corpus_chars, args.seed)
    lexicon = corpus.top_words(text, args.lexicon_size, args.min_word_len)
    if len(lexicon) < 2:
        raise SystemExit2("corpus yielded too few lexicon words")
    vocab, logits = word_unigram_model(lexicon)
    config = WatermarkConfig(
        gamma=args.gamma,
        delta=args.delta,
        vocab_size=vocab.size,
        z_threshold=args.z_threshold,
    )
    samples = generate_dataset(config, vocab, logits, args.length, args.count, args.seed)
    save_dataset(samples, args.output)
    if args.vocab_out:
        _write_text(args.vocab_out, vocab.to_json())
    meta = {
        "tool_version": __version__,
        "config": {
            "gamma": config.gamma,
            "delta": config.delta,
            "vocab_size": config.vocab_size,
            "hash_key": config.hash_key,
            "z_threshold": config.z_threshold,
            "length": args.length,
            "count": args.count,
            "seed": args.seed,
            "lexicon_size": len(lexicon),
            "min_word_len": args.min_word_len,
        },
    }
    _write_text(args.output + ".meta.json", json.dumps(meta, indent=2) + "\n")
    return 0


def _build_detector(spec: dict, table: HomoglyphTable) -> Detector:
    kind = spec.get("type")
    if kind == "watermark":
        vocab = Vocab.from_json(_read_text(spec["vocab"]))
        config = WatermarkConfig(
            gamma=spec.get("gamma", 0.25),
            delta=spec.get("delta", 2.0),
            vocab_size=vocab.size,
            hash_key=spec.get("hash_key", DEFAULT_HASH_KEY),
            z_threshold=spec.get("z_threshold", DEFAULT_Z_THRESHOLD),
        )
        detector: Detector = WatermarkTextDetector(config, vocab, spec.get("name", "watermark"))
    elif kind == "perplexity":
        vocab = Vocab.from_json(_read_text(spec["vocab"]))
        model = NGramModel.from_json(_read_text(spec["model"]))
        detector = PerplexityDetector(
            model, vocab, spec["threshold"], spec.get("name", "perplexity-ngram")
        )
    elif kind == "external":
        endpoint = ExternalDetectorEndpoint(
            base_url=spec["base_url"],
            name=spec.get("name", "external"),
            timeout=spec.get("timeout", 10.0),
            max_in_flight=spec.get("max_in_flight", 4),
        )
        detector = ExternalDetector(endpoint)
    else:
        raise SystemExit2(f"unknown detector type {kind!r}")
    if spec.get("defend"):
        detector = DefendedDetector(table, detector)
    return detector


def cmd_evaluate(args) -> int:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.dataset:
        config.dataset_paths = args.dataset
    if args.table:
        config.confusables_path = args.table
    if args.seed is not None:
        config.master_seed = args.seed
    if args.out:
        config.output_dir = args.out
    if args.jobs is not None:
        config.jobs = args.jobs
    if args.trace:
        config.trace = True
    if not config.dataset_paths:
        raise SystemExit2("no datasets given (flag --dataset or config dataset_paths)")
    if not config.detectors:
        raise SystemExit2("no detectors configured")
    if not config.attacks:
        raise SystemExit2("empty attack grid (the identity arm is required)")

    table = _load_table_arg(config.confusables_path)
    attacks = [AttackSpec(**a) for a in config.attacks]
    detectors = [_build_detector(spec, table) for spec in config.detectors]
    external_names = {
        spec.get("name", "external") for spec in config.detectors if spec.get("type") == "external"
    }

    os.makedirs(config.output_dir, exist_ok=True)
    trace_entries: list[dict] = []
    trace_hook = trace_entries.append if config.trace else None

    all_reports = []
    for path in config.dataset_paths:
        dataset = load_dataset(path)
        dataset_name = os.path.splitext(os.path.basename(path))[0]
        all_reports.extend(
            run_grid(
                dataset,
                table,
                attacks,
                detectors,
                seed=config.master_seed,
                dataset_name=dataset_name,
                jobs=config.jobs,
                trace=trace_hook,
            )
        )

    provenance = {
        "tool_version": __version__,
        "config": asdict(config),
        "table_source": table.diagnostics.source_name,
    }
    with open(os.path.join(config.output_dir, "run_config.json"), "w") as fh:
        json.dump(provenance, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(config.output_dir, "results.csv"), "w") as fh:
        fh.write(reports_to_csv(all_reports))
    for report in all_reports:
        payload = report_to_json_dict(report)
        payload.update(provenance)
        name = f"report_{report.dataset}_{report.detector}_{report.attack}.json".replace(
            "%", "pct"
        ).replace("/", "-")
        with open(os.path.join(config.output_dir, name), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    if config.trace:
        with open(os.path.join(config.output_dir, "trace.jsonl"), "w") as fh:
            for entry in trace_entries:
                fh.write(json.dumps(entry) + "\n")

    incomplete_builtin = any(
        r.coverage < 1.0 for r in all_reports if r.detector.split("+")[0] not in external_names
    )
    incomplete_external = any(
        r.coverage < 1.0 for r in all_reports if r.detector.split("+")[0] in external_names
    )
    if incomplete_builtin:
        raise SystemExit2("built-in detector failed on some samples")
    return PARTIAL_COVERAGE if incomplete_external else 0


def cmd_report(args) -> int:
    reports = []
    for name in sorted(os.listdir(args.results)):
        if name.startswith("report_") and name.endswith(".json"):
            with open(os.path.join(args.results, name)) as fh:
                reports.append(json.load(fh))
    if not reports:
        raise SystemExit2(f"no report_*.json files in {args.results}")
    attacks = list(dict.fromkeys(r["attack"] for r in reports))
    pairs = list(dict.fromkeys((r["dataset"], r["detector"]) for r in reports))
    lines = ["| Dataset | Detector | " + " | ".join(attacks) + " |"]
    lines.append("|" + "---|" * (len(attacks) + 2))
    by_key = {(r["dataset"], r["detector"], r["attack"]): r for r in reports}
    for dataset, detector in pairs:
        cells = []
        for attack in attacks:
            r = by_key.get((dataset, detector, attack))
            cells.append(f"{r['mcc']:.2f}" if r else "")
        lines.append(f"| {dataset} | {detector} | " + " | ".join(cells) + " |")
    body = "\n".join(lines) + "\n"
    matrices = []
    for r in reports:
        m = r["matrix"]
        matrices.append(
            f"{r['dataset']}/{r['detector']}/{r['attack']}: "
            f"tp={m['tp']} fp={m['fp']} tn={m['tn']} fn={m['fn']} "
            f"acc={r['accuracy']:.3f} f1={r['f1']:.3f} coverage={r['coverage']:.3f}"
        )
    _write_text(args.output, body + "\n" + "\n".join(matrices) + "\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="glyphlab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"glyphlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="rewrite text with homoglyph substitutions")
    p.add_argument("input", nargs="?", default="-", help="input file, or - for stdin")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--random", type=float, metavar="P")
    p.add_argument("--targeted", type=float, metavar="P")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--table", help="confusables file or serialized table JSON")
    p.add_argument("--sidecar", help="write replacement positions to this JSON file")
    p.add_argument("--lm", help="n-gram model JSON (targeted attack)")
    p.add_argument("--vocab", help="vocabulary JSON (targeted attack)")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("defend", help="normalize homoglyphs and screen scripts")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--table")
    p.add_argument("--screen", metavar="SCRIPTS", help="comma-separated allowed scripts")
    p.add_argument("--report", help="write a DefenseReport JSON here")
    p.set_defaults(func=cmd_defend)

    p = sub.add_parser("build-vocab", help="build a frequency n-gram vocabulary")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--max-size", type=int, default=4096)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train-lm", help="train the n-gram language model")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--smoothing-k", type=float, default=0.5)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser(
        "generate-watermarked", help="emit watermarked + plain samples as JSONL"
    )
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--z-threshold", type=float, default=DEFAULT_Z_THRESHOLD)
    p.add_argument("--length", type=int, default=200, help="tokens per sample")
    p.add_argument("--count", type=int, default=200, help="samples per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corpus", help="human corpus file for the base model lexicon")
    p.add_argument("--corpus-chars", type=int, default=1_000_000,
                   help="size of the bundled corpus when --corpus is not given")
    p.add_argument("--lexicon-size", type=int, default=2000)
    p.add_argument("--min-word-len", type=int, default=8)
    p.add_argument("--vocab-out", help="save the base-model vocabulary JSON here")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_generate_watermarked)

    p = sub.add_parser("evaluate", help="run the attack grid against detectors")
    p.add_argument("--config", help="RunConfig JSON file; flags override it")
    p.add_argument("--dataset", nargs="+")
    p.add_argument("--table")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render evaluation reports as a table")
    p.add_argument("--results", required=True, help="evaluation output directory")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"glyphlab: error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (DatasetError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"glyphlab: error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())

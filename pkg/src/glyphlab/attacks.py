"""Homoglyph substitution attacks: random, greedy, and targeted.

All attacks preserve the codepoint count of the input; they only swap
individual characters for members of their homoglyph class. The random
attack replaces ``floor(percentage * len(text))`` characters sampled
uniformly without replacement from the attackable positions; the greedy
attack replaces every attackable character; the targeted attack spends
the same character budget on the highest-loglikelihood tokens first.

Determinism contract: the random attack seeds a SplitMix64 stream, draws
the positions by partial Fisher-Yates, then draws one substitute per
replaced position in ascending position order. Equal inputs (including
the seed) therefore produce byte-identical attacked text.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from ._rng import SplitMix64
from .confusables import HomoglyphTable

ATTACK_KINDS = ("none", "random", "greedy", "targeted")

# A token scorer maps text to one (char_start, char_end, loglikelihood)
# triple per token of the tokenized text.
TokenScorer = Callable[[str], Sequence[tuple[int, int, float]]]


@dataclass(frozen=True)
class AttackSpec:
    """Configuration for one attack arm."""

    kind: str
    percentage: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        needs_pct = self.kind in ("random", "targeted")
        if needs_pct:
            if self.percentage is None:
                raise ValueError(f"{self.kind} attack requires a percentage")
            if not 0.0 <= self.percentage <= 1.0:
                raise ValueError(f"percentage must be in [0, 1], got {self.percentage}")
        elif self.percentage is not None:
            raise ValueError(f"{self.kind} attack takes no percentage")

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "original"
        if self.kind == "greedy":
            return "greedy"
        pct = self.percentage * 100.0
        text = f"{pct:g}%"
        return text if self.kind == "random" else f"targeted-{text}"


@dataclass(frozen=True)
class AttackOutcome:
    """An attacked text plus full replacement provenance.

    ``replacements`` holds (character index, original codepoint, new
    codepoint) triples; ``attackable_count`` is how many positions had at
    least one homoglyph and ``target_count`` the requested budget.
    """

    original: str
    attacked: str
    replacements: tuple[tuple[int, int, int], ...]
    attackable_count: int
    target_count: int


def attackable_positions(table: HomoglyphTable, text: str) -> list[int]:
    """Indices of characters that have at least one homoglyph."""
    alternatives = table.alternatives
    return [i for i, ch in enumerate(text) if ord(ch) in alternatives]


def _finish(
    table: HomoglyphTable,
    text: str,
    replacements: list[tuple[int, int, int]],
    target_count: int,
) -> AttackOutcome:
    chars = list(text)
    for index, _old, new in replacements:
        chars[index] = chr(new)
    return AttackOutcome(
        original=text,
        attacked="".join(chars),
        replacements=tuple(replacements),
        attackable_count=len(attackable_positions(table, text)),
        target_count=target_count,
    )


def random_attack(
    table: HomoglyphTable, text: str, percentage: float, seed: int
) -> AttackOutcome:
    """Replace floor(percentage * codepoint count) random attackable characters."""
    if not 0.0 <= percentage <= 1.0:
        raise ValueError(f"percentage must be in [0, 1], got {percentage}")
    positions = attackable_positions(table, text)
    target = math.floor(percentage * len(text))
    k = min(target, len(positions))
    rng = SplitMix64(seed)
    chosen = sorted(positions[i] for i in rng.sample_indices(len(positions), k))
    replacements = []
    for index in chosen:
        alts = table.homoglyphs_of(text[index])
        replacements.append((index, ord(text[index]), alts[rng.randbelow(len(alts))]))
    return _finish(table, text, replacements, target)


def greedy_attack(table: HomoglyphTable, text: str) -> AttackOutcome:
    """Replace every attackable character with its lowest-codepoint homoglyph."""
    replacements = []
    for index, ch in enumerate(text):
        alts = table.homoglyphs_of(ch)
        if alts:
            replacements.append((index, ord(ch), alts[0]))
    return _finish(table, text, replacements, len(replacements))


def targeted_attack(
    table: HomoglyphTable, text: str, percentage: float, scorer: TokenScorer
) -> AttackOutcome:
    """Spend the random-attack character budget on likely-AI tokens first.

    Tokens are ranked by descending loglikelihood (ties broken by lower
    start offset); within each token, attackable characters are replaced
    in index order by the greedy lowest-codepoint rule until the budget
    of floor(percentage * codepoint count) replacements is exhausted.
    """
    if not 0.0 <= percentage <= 1.0:
        raise ValueError(f"percentage must be in [0, 1], got {percentage}")
    target = math.floor(percentage * len(text))
    replacements: list[tuple[int, int, int]] = []
    if target > 0:
        ranked = sorted(scorer(text), key=lambda t: (-t[2], t[0]))
        for start, end, _loglik in ranked:
            for index in range(start, end):
                if len(replacements) == target:
                    break
                alts = table.homoglyphs_of(text[index])
                if alts:
                    replacements.append((index, ord(text[index]), alts[0]))
            if len(replacements) == target:
                break
        replacements.sort()
    return _finish(table, text, replacements, target)


def apply_spec(
    table: HomoglyphTable,
    text: str,
    spec: AttackSpec,
    seed: int | None = None,
    scorer: TokenScorer | None = None,
) -> AttackOutcome:
    """Run the attack described by ``spec``; ``seed`` overrides spec.seed."""
    if spec.kind == "none":
        return AttackOutcome(text, text, (), len(attackable_positions(table, text)), 0)
    if spec.kind == "random":
        return random_attack(
            table, text, spec.percentage, spec.seed if seed is None else seed
        )
    if spec.kind == "greedy":
        return greedy_attack(table, text)
    if scorer is None:
        raise ValueError("targeted attack requires a token scorer")
    return targeted_attack(table, text, spec.percentage, scorer)

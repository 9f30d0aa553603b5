"""Homoglyph equivalence tables built from Unicode confusables data.

Parses the standard ``confusables.txt`` line format (semicolon-separated
hex codepoint fields with ``#`` comments), keeps the single-codepoint to
single-codepoint mappings, and groups codepoints into equivalence classes
as connected components of the confusability graph. Each class has one
canonical representative used by the normalization defense; every other
member is an attack substitute for it.

A small built-in table of identical-looking Latin/Cyrillic/Greek letters
is bundled so the toolkit works without an external data file.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable

BASIC_LATIN_MAX = 0x7F


class ConfusablesParseError(ValueError):
    """Raised for a confusables line that cannot be parsed; carries the
    1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class ConfusablesSourceLine:
    """One data line of a confusables file."""

    source: tuple[int, ...]
    target: tuple[int, ...]
    kind: str
    raw_line: str
    line_number: int


@dataclass(frozen=True)
class LoadDiagnostics:
    """Provenance for a built table, embedded in reports."""

    source_name: str
    lines_used: int
    skipped_multichar: int


def _parse_hex_field(text: str, line_number: int) -> tuple[int, ...]:
    cps = []
    for token in text.split():
        try:
            cps.append(int(token, 16))
        except ValueError:
            raise ConfusablesParseError(
                line_number, f"bad codepoint field {token!r}"
            ) from None
    if not cps:
        raise ConfusablesParseError(line_number, "empty codepoint field")
    return tuple(cps)


def parse_confusables(stream: IO[str] | Iterable[str]) -> list[ConfusablesSourceLine]:
    """Parse a confusables-format text stream.

    Returns one entry per non-comment, non-blank line. Lines that are not
    of the form ``<hex...> ; <hex...> ; <tag>`` raise
    :class:`ConfusablesParseError` naming the offending line number.
    """
    entries: list[ConfusablesSourceLine] = []
    for line_number, raw in enumerate(stream, start=1):
        line = raw.lstrip("﻿")
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(";")]
        if len(fields) < 3:
            raise ConfusablesParseError(
                line_number, f"expected 3 semicolon-separated fields, got {len(fields)}"
            )
        source = _parse_hex_field(fields[0], line_number)
        target = _parse_hex_field(fields[1], line_number)
        entries.append(
            ConfusablesSourceLine(
                source=source,
                target=target,
                kind=fields[2],
                raw_line=raw.rstrip("\n"),
                line_number=line_number,
            )
        )
    return entries


def _canonical_of_class(members: tuple[int, ...]) -> int:
    latin = [c for c in members if c <= BASIC_LATIN_MAX]
    return min(latin) if latin else min(members)


@dataclass(frozen=True)
class HomoglyphTable:
    """Immutable homoglyph equivalence classes with canonical forms.

    ``classes`` holds each equivalence class as an ascending tuple of
    codepoints; ``canonical`` maps every member to its class
    representative (lowest Basic Latin member if the class has one, else
    lowest codepoint); ``alternatives`` maps every member to the other
    members of its class, ascending.
    """

    classes: tuple[tuple[int, ...], ...]
    canonical: dict[int, int] = field(repr=False)
    alternatives: dict[int, tuple[int, ...]] = field(repr=False)
    diagnostics: LoadDiagnostics = field(
        default=LoadDiagnostics("unspecified", 0, 0), compare=False, repr=False
    )

    @staticmethod
    def from_classes(
        classes: Iterable[Iterable[int]],
        diagnostics: LoadDiagnostics | None = None,
    ) -> "HomoglyphTable":
        normalized = sorted(tuple(sorted(set(cls))) for cls in classes if len(set(cls)) >= 2)
        canonical: dict[int, int] = {}
        alternatives: dict[int, tuple[int, ...]] = {}
        for cls in normalized:
            rep = _canonical_of_class(cls)
            for cp in cls:
                if cp in canonical:
                    raise ValueError(f"codepoint U+{cp:04X} appears in two classes")
                canonical[cp] = rep
                alternatives[cp] = tuple(c for c in cls if c != cp)
        return HomoglyphTable(
            classes=tuple(normalized),
            canonical=canonical,
            alternatives=alternatives,
            diagnostics=diagnostics or LoadDiagnostics("in-memory", len(normalized), 0),
        )

    def homoglyphs_of(self, cp: int | str) -> tuple[int, ...]:
        """Other members of cp's class, ascending; empty if cp is unknown."""
        if isinstance(cp, str):
            cp = ord(cp)
        return self.alternatives.get(cp, ())

    def canonical_of(self, cp: int | str) -> int:
        if isinstance(cp, str):
            cp = ord(cp)
        return self.canonical.get(cp, cp)

    def is_attackable(self, cp: int | str) -> bool:
        if isinstance(cp, str):
            cp = ord(cp)
        return cp in self.alternatives

    def to_json(self) -> str:
        payload = {"classes": [[f"{cp:04X}" for cp in cls] for cls in self.classes]}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str, source_name: str = "json") -> "HomoglyphTable":
        payload = json.loads(text)
        classes = [[int(cp, 16) for cp in cls] for cls in payload["classes"]]
        return HomoglyphTable.from_classes(
            classes, LoadDiagnostics(source_name, len(classes), 0)
        )


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        root = x
        while self.parent.setdefault(root, root) != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def build_table(
    lines: list[ConfusablesSourceLine], source_name: str = "confusables"
) -> HomoglyphTable:
    """Build a homoglyph table from parsed confusables lines.

    Only 1-codepoint to 1-codepoint mappings participate; multi-codepoint
    mappings are skipped and counted in the table diagnostics. Classes are
    the connected components of the undirected confusability graph, so
    confusability is transitive even where the source data lists only
    pairs.
    """
    uf = _UnionFind()
    used = 0
    skipped = 0
    for line in lines:
        if len(line.source) == 1 and len(line.target) == 1:
            used += 1
            uf.union(line.source[0], line.target[0])
        else:
            skipped += 1
    components: dict[int, list[int]] = {}
    for cp in list(uf.parent):
        components.setdefault(uf.find(cp), []).append(cp)
    return HomoglyphTable.from_classes(
        components.values(), LoadDiagnostics(source_name, used, skipped)
    )


def load_table(path: str) -> HomoglyphTable:
    """Load a table from a confusables-format file or a serialized JSON table."""
    with open(path, encoding="utf-8-sig") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return HomoglyphTable.from_json(text, source_name=path)
    return build_table(parse_confusables(text.splitlines()), source_name=path)


# Identical-looking Latin/Cyrillic/Greek letters. Each string is one
# equivalence class; first character is the Latin member.
_BUILTIN_CLASS_CHARS = (
    "aа",          # a | CYRILLIC А
    "AАΑ",    # A | CYRILLIC A  | GREEK ALPHA
    "BВΒ",    # B | CYRILLIC VE | GREEK BETA
    "cс",          # c | CYRILLIC ES
    "CС",          # C | CYRILLIC ES
    "eе",          # e | CYRILLIC IE
    "EЕΕ",    # E | CYRILLIC IE | GREEK EPSILON
    "HНΗ",    # H | CYRILLIC EN | GREEK ETA
    "iі",          # i | CYRILLIC BYELORUSSIAN-UKRAINIAN I
    "IΙІ",    # I | GREEK IOTA  | CYRILLIC I
    "jј",          # j | CYRILLIC JE
    "JЈ",          # J | CYRILLIC JE
    "KКΚ",    # K | CYRILLIC KA | GREEK KAPPA
    "MМΜ",    # M | CYRILLIC EM | GREEK MU
    "NΝ",          # N | GREEK NU
    "oоο",    # o | CYRILLIC O  | GREEK OMICRON
    "OОΟ",    # O | CYRILLIC O  | GREEK OMICRON
    "pр",          # p | CYRILLIC ER
    "PРΡ",    # P | CYRILLIC ER | GREEK RHO
    "sѕ",          # s | CYRILLIC DZE
    "SЅ",          # S | CYRILLIC DZE
    "TТΤ",    # T | CYRILLIC TE | GREEK TAU
    "xх",          # x | CYRILLIC HA
    "XХΧ",    # X | CYRILLIC HA | GREEK CHI
    "yу",          # y | CYRILLIC U
    "YΥ",          # Y | GREEK UPSILON
    "ZΖ",          # Z | GREEK ZETA
)

_builtin: HomoglyphTable | None = None


def builtin_table() -> HomoglyphTable:
    """The bundled fallback table of Latin/Cyrillic/Greek letter classes."""
    global _builtin
    if _builtin is None:
        _builtin = HomoglyphTable.from_classes(
            (tuple(ord(ch) for ch in cls) for cls in _BUILTIN_CLASS_CHARS),
            LoadDiagnostics("builtin", len(_BUILTIN_CLASS_CHARS), 0),
        )
    return _builtin

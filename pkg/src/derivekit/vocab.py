"""Symbol vocabulary: names, LaTeX forms, and role kinds.

The training vocabulary is a configurable JSON file; the packaged default
carries 155 physics-flavoured symbols. A symbol's ``name`` doubles as its
LaTeX form. Bare ``e`` and ``d`` are reserved by the grammar (Euler's number
and differential markers) and may not appear as vocabulary names, and the
out-of-distribution Greek pool used by variable renaming must stay disjoint
from the vocabulary.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

KINDS = ("variable", "function-name", "constant")

GREEK_POOL_DEFAULT = (
    "\\alpha", "\\beta", "\\gamma", "\\zeta", "\\iota", "\\kappa",
    "\\nu", "\\xi", "\\tau", "\\upsilon", "\\chi",
)

_RESERVED = ("e", "d")


class VocabularyError(Exception):
    pass


@dataclass(frozen=True)
class SymbolEntry:
    name: str
    latex: str
    kind: str


@dataclass(frozen=True)
class SymbolTable:
    entries: tuple[SymbolEntry, ...]
    by_name: dict = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        seen = {}
        for entry in self.entries:
            if entry.kind not in KINDS:
                raise VocabularyError(f"unknown kind {entry.kind!r} for {entry.name!r}")
            if entry.name in seen:
                raise VocabularyError(f"duplicate symbol name {entry.name!r}")
            if entry.name in _RESERVED:
                raise VocabularyError(f"{entry.name!r} is reserved by the LaTeX grammar")
            if "," in entry.name:
                raise VocabularyError(f"symbol name {entry.name!r} may not contain a comma")
            if entry.name in GREEK_POOL_DEFAULT:
                raise VocabularyError(
                    f"{entry.name!r} belongs to the out-of-distribution Greek pool"
                )
            seen[entry.name] = entry
        self.by_name.update(seen)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self.by_name

    def names(self, kind: Optional[str] = None) -> tuple[str, ...]:
        if kind is None:
            return tuple(e.name for e in self.entries)
        return tuple(e.name for e in self.entries if e.kind == kind)

    def resolve(self, name: str) -> SymbolEntry:
        try:
            return self.by_name[name]
        except KeyError:
            raise VocabularyError(f"unresolvable symbol name {name!r}") from None


@dataclass(frozen=True)
class GreekPool:
    """The 11 out-of-distribution letters used by variable renaming."""

    letters: tuple[str, ...] = GREEK_POOL_DEFAULT

    def __post_init__(self):
        if len(self.letters) != 11:
            raise VocabularyError(f"Greek pool must have exactly 11 letters, got {len(self.letters)}")
        if len(set(self.letters)) != 11:
            raise VocabularyError("Greek pool letters must be distinct")

    def check_disjoint(self, table: SymbolTable) -> None:
        clash = [x for x in self.letters if x in table]
        if clash:
            raise VocabularyError(f"Greek pool overlaps vocabulary: {clash}")


def load_symbol_table(path: Optional[str | Path] = None) -> SymbolTable:
    """Load a vocabulary JSON file; None loads the packaged default."""
    if path is None:
        text = resources.files("derivekit.data").joinpath("vocabulary.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    try:
        payload = json.loads(text)
        entries = tuple(
            SymbolEntry(item["name"], item.get("latex", item["name"]), item["kind"])
            for item in payload["symbols"]
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise VocabularyError(f"malformed vocabulary file: {exc}") from exc
    return SymbolTable(entries)

"""Data model and interchange format for syntactic valence lexicons.

A lexicon maps lemmas to entries.  Each entry carries a subcategorization
frame made of syntactic-function slots with their admissible surface
realizations, a set of licensed frame redistributions (passive,
impersonal, ...), a coded/uncoded flag, provenance and free-text examples.

The textual interchange format is line-based UTF-8.  One entry per line:

    lemma<TAB>category<TAB>entry_id<TAB>frame<TAB>redistributions<TAB>codedflag<TAB>provenance[<TAB>example ...]

* frame: ``;``-separated slots, each ``Function[?]:real|real|...`` where a
  trailing ``?`` on the function marks the slot optional and a
  prepositional realization is written ``PP(prep)``;
* redistributions: comma-separated tokens (``ACTIVE``, ``PASSIVE``, ...);
* codedflag: literal ``coded`` or ``uncoded``;
* provenance: comma-separated ``source:id`` pairs;
* remaining tab-separated fields, if any, are free-text examples.

Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import FormatError


class SyntacticFunction(Enum):
    """Closed inventory of syntactic functions a frame slot can bear."""

    SUJ = "Suj"
    OBJ = "Obj"
    OBJA = "Obja"
    OBJDE = "Objde"
    ATT = "Att"
    LOC = "Loc"
    DLOC = "Dloc"
    OBL = "Obl"
    OBL2 = "Obl2"

    @property
    def is_base(self) -> bool:
        return self in BASE_FUNCTIONS

    @property
    def is_oblique(self) -> bool:
        return self not in BASE_FUNCTIONS


# Total, disjoint classification: every function is base or oblique.
BASE_FUNCTIONS = frozenset(
    {SyntacticFunction.SUJ, SyntacticFunction.OBJ, SyntacticFunction.OBJA, SyntacticFunction.OBJDE}
)
OBLIQUE_FUNCTIONS = frozenset(SyntacticFunction) - BASE_FUNCTIONS


class Category(Enum):
    """Entry category: plain verb or predicative noun."""

    V = "V"
    N_PRED = "N-PRED"


class Redistribution(Enum):
    """Frame redistributions an entry may license."""

    ACTIVE = "ACTIVE"
    PASSIVE = "PASSIVE"
    IMPERSONAL = "IMPERSONAL"
    SE_MIDDLE = "SE-MIDDLE"
    OBJ_CLITICIZATION = "OBJ-CLITICIZATION"


class Marker(Enum):
    """Surface realization markers."""

    NP = "NP"
    CLITIC = "CLITIC"
    FINITE_CLAUSE = "FINITE-CLAUSE"
    INF_CLAUSE = "INF-CLAUSE"
    PP = "PP"


_PP_TOKEN = re.compile(r"^PP\((.+)\)$")


@dataclass(frozen=True)
class Realization:
    """One admissible surface realization; PP carries its preposition."""

    marker: Marker
    prep: str | None = None

    def __post_init__(self):
        if self.marker is Marker.PP:
            if not self.prep:
                raise ValueError("PP realization requires a preposition")
            if self.prep != self.prep.lower():
                raise ValueError(f"preposition must be lowercase: {self.prep!r}")
        elif self.prep is not None:
            raise ValueError(f"{self.marker.value} realization takes no preposition")

    def token(self) -> str:
        if self.marker is Marker.PP:
            return f"PP({self.prep})"
        return self.marker.value

    @classmethod
    def from_token(cls, token: str) -> "Realization":
        m = _PP_TOKEN.match(token)
        if m:
            return cls(Marker.PP, m.group(1))
        for marker in Marker:
            if marker is not Marker.PP and marker.value == token:
                return cls(marker)
        raise ValueError(f"unknown realization token: {token!r}")


NP = Realization(Marker.NP)
CLITIC = Realization(Marker.CLITIC)
FINITE_CLAUSE = Realization(Marker.FINITE_CLAUSE)
INF_CLAUSE = Realization(Marker.INF_CLAUSE)


def pp(prep: str) -> Realization:
    return Realization(Marker.PP, prep)


@dataclass(frozen=True)
class FunctionSlot:
    """One frame slot: a function, its realizations, and optionality."""

    function: SyntacticFunction
    realizations: frozenset[Realization]
    optional: bool = False

    def __post_init__(self):
        object.__setattr__(self, "realizations", frozenset(self.realizations))
        if not self.realizations:
            raise ValueError(f"slot {self.function.value} has an empty realization set")

    def token(self) -> str:
        reals = "|".join(sorted(r.token() for r in self.realizations))
        flag = "?" if self.optional else ""
        return f"{self.function.value}{flag}:{reals}"


@dataclass(frozen=True)
class LexicalEntry:
    """One lexicon entry: a lemma with one subcategorization frame.

    An uncoded entry stands for a source whose fine-grained coding is
    absent: its frame is the bare base construction and every slot is
    obligatory.  Coded entries always license at least ACTIVE.
    """

    lemma: str
    category: Category
    entry_id: str
    frame: tuple[FunctionSlot, ...]
    redistributions: frozenset[Redistribution]
    coded: bool
    provenance: tuple[tuple[str, str], ...]
    examples: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "frame", tuple(self.frame))
        object.__setattr__(self, "redistributions", frozenset(self.redistributions))
        object.__setattr__(self, "provenance", tuple((s, i) for s, i in self.provenance))
        object.__setattr__(self, "examples", tuple(self.examples))
        if not self.lemma:
            raise ValueError("empty lemma")
        if self.lemma != self.lemma.lower():
            raise ValueError(f"lemma must be lowercase: {self.lemma!r}")
        if not self.entry_id:
            raise ValueError("empty entry_id")
        functions = [slot.function for slot in self.frame]
        if len(set(functions)) != len(functions):
            raise ValueError(f"duplicate function in frame of {self.entry_id}")
        if not self.provenance:
            raise ValueError(f"entry {self.entry_id} has no provenance")
        if self.coded and Redistribution.ACTIVE not in self.redistributions:
            raise ValueError(f"coded entry {self.entry_id} must license ACTIVE")
        if not self.coded and any(slot.optional for slot in self.frame):
            raise ValueError(f"uncoded entry {self.entry_id} cannot have optional slots")


def base_signature(entry: LexicalEntry) -> frozenset[SyntacticFunction]:
    """Set of base functions subcategorized by the entry."""
    return frozenset(s.function for s in entry.frame if s.function in BASE_FUNCTIONS)


def oblique_signature(entry: LexicalEntry) -> frozenset[SyntacticFunction]:
    """Set of oblique functions subcategorized by the entry."""
    return frozenset(s.function for s in entry.frame if s.function not in BASE_FUNCTIONS)


@dataclass
class Lexicon:
    """A named collection of entries grouped by lemma.

    Construction canonicalizes the layout: lemmas in lexicographic order,
    entries of a lemma in entry_id order.  Entry ids are unique across the
    whole lexicon.  The name is a display label and does not take part in
    equality.
    """

    entries: dict[str, tuple[LexicalEntry, ...]]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        canonical: dict[str, tuple[LexicalEntry, ...]] = {}
        seen_ids: set[str] = set()
        for lemma in sorted(self.entries):
            group = tuple(sorted(self.entries[lemma], key=lambda e: e.entry_id))
            if not group:
                raise ValueError(f"lemma {lemma!r} has no entries")
            for entry in group:
                if entry.lemma != lemma:
                    raise ValueError(f"entry {entry.entry_id} filed under wrong lemma {lemma!r}")
                if entry.entry_id in seen_ids:
                    raise ValueError(f"duplicate entry_id: {entry.entry_id}")
                seen_ids.add(entry.entry_id)
            canonical[lemma] = group
        self.entries = canonical

    @classmethod
    def from_entries(cls, entries: Iterable[LexicalEntry], name: str = "") -> "Lexicon":
        grouped: dict[str, list[LexicalEntry]] = {}
        for entry in entries:
            grouped.setdefault(entry.lemma, []).append(entry)
        return cls({lemma: tuple(group) for lemma, group in grouped.items()}, name)

    def all_entries(self) -> Iterator[LexicalEntry]:
        for group in self.entries.values():
            yield from group


@dataclass(frozen=True)
class StatsReport:
    """Size figures for one lexicon."""

    lemma_count: int
    entry_count: int
    max_entries: int
    top: tuple[tuple[str, int], ...]


def _parse_slot(token: str, line: int) -> FunctionSlot:
    head, sep, tail = token.partition(":")
    if not sep:
        raise FormatError(f"malformed frame slot: {token!r}", line)
    optional = head.endswith("?")
    if optional:
        head = head[:-1]
    function = _FUNCTION_BY_TOKEN.get(head)
    if function is None:
        raise FormatError(f"unknown function token: {head!r}", line)
    if not tail:
        raise FormatError(f"empty realization set for {head}", line)
    try:
        realizations = frozenset(Realization.from_token(t) for t in tail.split("|"))
    except ValueError as exc:
        raise FormatError(str(exc), line) from exc
    return FunctionSlot(function, realizations, optional)


_FUNCTION_BY_TOKEN = {f.value: f for f in SyntacticFunction}
_CATEGORY_BY_TOKEN = {c.value: c for c in Category}
_REDISTRIBUTION_BY_TOKEN = {r.value: r for r in Redistribution}


def _parse_entry(line_text: str, line: int) -> LexicalEntry:
    fields = line_text.split("\t")
    if len(fields) < 7:
        raise FormatError(f"expected at least 7 tab-separated fields, got {len(fields)}", line)
    lemma, category_tok, entry_id, frame_tok, redist_tok, coded_tok = fields[:6]
    provenance_tok = fields[6]
    examples = tuple(fields[7:])

    category = _CATEGORY_BY_TOKEN.get(category_tok)
    if category is None:
        raise FormatError(f"unknown category: {category_tok!r}", line)

    frame = tuple(_parse_slot(tok, line) for tok in frame_tok.split(";")) if frame_tok else ()

    redistributions = set()
    if redist_tok:
        for tok in redist_tok.split(","):
            redistribution = _REDISTRIBUTION_BY_TOKEN.get(tok)
            if redistribution is None:
                raise FormatError(f"unknown redistribution: {tok!r}", line)
            redistributions.add(redistribution)

    if coded_tok == "coded":
        coded = True
    elif coded_tok == "uncoded":
        coded = False
    else:
        raise FormatError(f"coded flag must be 'coded' or 'uncoded', got {coded_tok!r}", line)

    provenance = []
    for tok in provenance_tok.split(","):
        source, sep, orig_id = tok.partition(":")
        if not sep or not source or not orig_id:
            raise FormatError(f"malformed provenance item: {tok!r}", line)
        provenance.append((source, orig_id))

    try:
        return LexicalEntry(
            lemma=lemma,
            category=category,
            entry_id=entry_id,
            frame=frame,
            redistributions=frozenset(redistributions),
            coded=coded,
            provenance=tuple(provenance),
            examples=examples,
        )
    except ValueError as exc:
        raise FormatError(str(exc), line) from exc


def parse_lexicon(text: str, name: str = "") -> Lexicon:
    """Parse an interchange-format document into a Lexicon.

    Raises FormatError with the offending line number on any syntax
    problem, unknown token, empty realization set or duplicate entry_id.
    """
    entries: list[LexicalEntry] = []
    seen_ids: dict[str, int] = {}
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        entry = _parse_entry(raw, line)
        if entry.entry_id in seen_ids:
            raise FormatError(
                f"duplicate entry_id {entry.entry_id!r} (first seen on line {seen_ids[entry.entry_id]})",
                line,
            )
        seen_ids[entry.entry_id] = line
        entries.append(entry)
    return Lexicon.from_entries(entries, name)


def _check_field(value: str, what: str) -> str:
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValueError(f"{what} contains a tab or newline and cannot be serialized: {value!r}")
    return value


def _serialize_entry(entry: LexicalEntry) -> str:
    frame = ";".join(slot.token() for slot in entry.frame)
    for slot in entry.frame:
        for r in slot.realizations:
            if r.marker is Marker.PP and (")" in r.prep or "|" in r.prep or ";" in r.prep):
                raise ValueError(f"preposition {r.prep!r} cannot be serialized")
    redistributions = ",".join(r.value for r in Redistribution if r in entry.redistributions)
    provenance_items = []
    for source, orig_id in entry.provenance:
        if ":" in source or "," in source or "," in orig_id:
            raise ValueError(f"provenance item {(source, orig_id)!r} cannot be serialized")
        provenance_items.append(f"{_check_field(source, 'provenance source')}:{_check_field(orig_id, 'provenance id')}")
    fields = [
        _check_field(entry.lemma, "lemma"),
        entry.category.value,
        _check_field(entry.entry_id, "entry_id"),
        frame,
        redistributions,
        "coded" if entry.coded else "uncoded",
        ",".join(provenance_items),
    ]
    fields.extend(_check_field(e, "example") for e in entry.examples)
    return "\t".join(fields)


def serialize_lexicon(lexicon: Lexicon) -> str:
    """Serialize to canonical form: lemmas sorted, entries in entry_id order."""
    lines = [_serialize_entry(entry) for entry in lexicon.all_entries()]
    return "".join(line + "\n" for line in lines)


def lexicon_stats(lexicon: Lexicon, top_k: int = 10) -> StatsReport:
    """Count lemmas and entries and list the most ambiguous lemmas.

    The top list holds up to top_k (lemma, entry count) pairs sorted by
    entry count descending, ties broken lexicographically.
    """
    if top_k < 0:
        raise ValueError("top_k must be non-negative")
    counts = {lemma: len(group) for lemma, group in lexicon.entries.items()}
    top = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:top_k]
    return StatsReport(
        lemma_count=len(counts),
        entry_count=sum(counts.values()),
        max_entries=max(counts.values(), default=0),
        top=tuple(top),
    )

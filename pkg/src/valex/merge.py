"""Heuristic fusion of two valence lexicons.

Entries of a shared lemma are matched on their function signatures: a
reference entry matches another entry when both subcategorize exactly the
same base functions and the reference's oblique functions are included in
the other's.  Matching is directional; the reference side is the one being
enriched.

Per lemma, the merge walks reference entries in order and fuses each with
every not-yet-consumed matching entry from the other side; leftovers on
either side are copied verbatim.  A lemma whose merged entry count exceeds
both input counts is flagged for manual validation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .lexicon import (
    FunctionSlot,
    LexicalEntry,
    Lexicon,
    base_signature,
    oblique_signature,
)


class MatchReason(Enum):
    BASE_MISMATCH = "BASE-MISMATCH"
    OBLIQUE_NOT_INCLUDED = "OBLIQUE-NOT-INCLUDED"
    MATCHED = "MATCHED"


@dataclass(frozen=True)
class MatchDecision:
    ref_entry_id: str
    other_entry_id: str
    matched: bool
    reason: MatchReason

    def __post_init__(self):
        if self.matched != (self.reason is MatchReason.MATCHED):
            raise ValueError("matched flag must agree with reason")


@dataclass(frozen=True)
class MergedLemmaResult:
    """Outcome of merging one lemma's entries from two lexicons."""

    lemma: str
    entries: tuple[LexicalEntry, ...]
    needs_validation: bool
    ref_count: int
    other_count: int
    merged_count: int

    def __post_init__(self):
        # One ref entry may absorb several other entries, so the merged
        # count can drop below the larger side; it never drops below the
        # smaller one, and flagging keys on strict excess over the larger.
        low = min(self.ref_count, self.other_count)
        high = self.ref_count + self.other_count
        if not (low <= self.merged_count <= high):
            raise ValueError(
                f"merged count {self.merged_count} outside [{low}, {high}] for {self.lemma}"
            )
        if self.needs_validation != (self.merged_count > max(self.ref_count, self.other_count)):
            raise ValueError(f"validation flag inconsistent for {self.lemma}")


@dataclass(frozen=True)
class MergeReport:
    """Per-lemma merge outcomes; totals are recomputed on demand."""

    results: tuple[MergedLemmaResult, ...]

    @property
    def total_lemmas(self) -> int:
        return len(self.results)

    @property
    def total_entries(self) -> int:
        return sum(r.merged_count for r in self.results)

    @property
    def flagged_lemmas(self) -> int:
        return sum(1 for r in self.results if r.needs_validation)

    @property
    def flagged_entries(self) -> int:
        return sum(r.merged_count for r in self.results if r.needs_validation)


def entry_matches(ref: LexicalEntry, other: LexicalEntry) -> MatchDecision:
    """Directional match test between two entries of the same lemma.

    Matches when base signatures are identical and the reference's oblique
    signature is included in the other's.  When the bases differ that is
    the reported reason, whatever the obliques do.
    """
    if ref.lemma != other.lemma:
        raise ValueError(f"lemma mismatch: {ref.lemma!r} vs {other.lemma!r}")
    if ref.category != other.category:
        raise ValueError(
            f"category mismatch for {ref.lemma!r}: {ref.category.value} vs {other.category.value}"
        )
    if base_signature(ref) != base_signature(other):
        reason = MatchReason.BASE_MISMATCH
    elif not oblique_signature(ref) <= oblique_signature(other):
        reason = MatchReason.OBLIQUE_NOT_INCLUDED
    else:
        reason = MatchReason.MATCHED
    return MatchDecision(ref.entry_id, other.entry_id, reason is MatchReason.MATCHED, reason)


def _fuse(ref: LexicalEntry, absorbed: list[LexicalEntry]) -> LexicalEntry:
    """Fuse a reference entry with the other-side entries it matched.

    The fused frame carries the union of slots, keeping the other side's
    slot order (it is the superset side); realizations are unioned and a
    slot is optional as soon as one source says so.
    """
    order: list = []
    realizations: dict = {}
    optional: dict = {}
    for source in [*absorbed, ref]:
        for slot in source.frame:
            if slot.function not in realizations:
                order.append(slot.function)
                realizations[slot.function] = set(slot.realizations)
                optional[slot.function] = slot.optional
            else:
                realizations[slot.function] |= slot.realizations
                optional[slot.function] |= slot.optional
    frame = tuple(
        FunctionSlot(f, frozenset(realizations[f]), optional[f]) for f in order
    )
    redistributions = frozenset(ref.redistributions).union(*(o.redistributions for o in absorbed))
    examples: list[str] = []
    for source in [ref, *absorbed]:
        for example in source.examples:
            if example not in examples:
                examples.append(example)
    provenance = ref.provenance + tuple(p for o in absorbed for p in o.provenance)
    return LexicalEntry(
        lemma=ref.lemma,
        category=ref.category,
        entry_id=ref.entry_id,
        frame=frame,
        redistributions=redistributions,
        coded=ref.coded or any(o.coded for o in absorbed),
        provenance=provenance,
        examples=tuple(examples),
    )


def merge_lemma(ref_entries, other_entries) -> MergedLemmaResult:
    """Merge the two entry lists of one lemma.

    Greedy in reference order: each reference entry absorbs every
    not-yet-consumed matching other entry; unmatched entries on either
    side are copied verbatim.
    """
    ref_entries = list(ref_entries)
    other_entries = list(other_entries)
    if not ref_entries and not other_entries:
        raise ValueError("no entries to merge")
    lemmas = {e.lemma for e in [*ref_entries, *other_entries]}
    categories = {e.category for e in [*ref_entries, *other_entries]}
    if len(lemmas) > 1 or len(categories) > 1:
        raise ValueError(f"mixed lemmas or categories: {sorted(l for l in lemmas)}")
    lemma = next(iter(lemmas))

    ref_sigs = [(base_signature(e), oblique_signature(e)) for e in ref_entries]
    other_sigs = [(base_signature(e), oblique_signature(e)) for e in other_entries]
    consumed = [False] * len(other_entries)
    merged: list[LexicalEntry] = []
    for ref, (rbase, robl) in zip(ref_entries, ref_sigs):
        absorbed = []
        for j, (other, (obase, oobl)) in enumerate(zip(other_entries, other_sigs)):
            if not consumed[j] and rbase == obase and robl <= oobl:
                consumed[j] = True
                absorbed.append(other)
        merged.append(_fuse(ref, absorbed) if absorbed else ref)
    merged.extend(o for j, o in enumerate(other_entries) if not consumed[j])

    ref_count, other_count = len(ref_entries), len(other_entries)
    merged_count = len(merged)
    return MergedLemmaResult(
        lemma=lemma,
        entries=tuple(merged),
        needs_validation=merged_count > max(ref_count, other_count),
        ref_count=ref_count,
        other_count=other_count,
        merged_count=merged_count,
    )


def _unique_id(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}~{k}" in taken:
        k += 1
    return f"{base}~{k}"


def merge_lexicons(ref: Lexicon, other: Lexicon) -> tuple[Lexicon, MergeReport]:
    """Merge every lemma of both lexicons; lemmas are the set union.

    Entry ids are kept where possible; an id from the other side that
    collides with one already in the result gets a ``~n`` suffix.
    """
    results = []
    taken: set[str] = set()
    for lemma in sorted(set(ref.entries) | set(other.entries)):
        result = merge_lemma(ref.entries.get(lemma, ()), other.entries.get(lemma, ()))
        entries = []
        for entry in result.entries:
            new_id = _unique_id(entry.entry_id, taken)
            taken.add(new_id)
            entries.append(entry if new_id == entry.entry_id else replace(entry, entry_id=new_id))
        results.append(replace(result, entries=tuple(entries)))
    name = f"{ref.name}+{other.name}" if ref.name or other.name else ""
    merged = Lexicon.from_entries((e for r in results for e in r.entries), name)
    return merged, MergeReport(tuple(results))


def validation_queue(report: MergeReport) -> list[str]:
    """Flagged lemmas, most entries first, ties lexicographic."""
    flagged = [r for r in report.results if r.needs_validation]
    flagged.sort(key=lambda r: (-r.merged_count, r.lemma))
    return [r.lemma for r in flagged]


def serialize_merge_report(report: MergeReport) -> str:
    """One row per lemma plus a trailing #TOTALS comment line."""
    lines = [
        f"{r.lemma}\t{r.ref_count}\t{r.other_count}\t{r.merged_count}\t"
        f"{'yes' if r.needs_validation else 'no'}"
        for r in report.results
    ]
    lines.append(
        f"#TOTALS lemmas={report.total_lemmas} entries={report.total_entries} "
        f"flagged_lemmas={report.flagged_lemmas} flagged_entries={report.flagged_entries}"
    )
    return "".join(line + "\n" for line in lines)

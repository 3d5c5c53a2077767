"""Checking observed subcategorization frames against a lexicon.

An observed frame records, for one predicate occurrence in a sentence,
the lemma, the set of realized (function, realization) slots, and the
redistribution context the surface form exhibits.  Observations use deep
functions: under PASSIVE the patient is still listed as Obj, which is why
the subject slot alone is exempt from the obligatoriness check in
PASSIVE/IMPERSONAL contexts.

The corpus annotation format is line-based UTF-8, one observed frame per
line, frames of a sentence sharing its id:

    sentence_id<TAB>lemma<TAB>redistribution<TAB>obs_slots

where obs_slots is a ``;``-separated list of ``Function:Realization``
pairs (possibly empty).  ``#`` comment lines and blank lines are ignored.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .errors import FormatError
from .lexicon import (
    LexicalEntry,
    Lexicon,
    Realization,
    Redistribution,
    SyntacticFunction,
)

_FUNCTION_BY_TOKEN = {f.value: f for f in SyntacticFunction}
_REDISTRIBUTION_BY_TOKEN = {r.value: r for r in Redistribution}

# Contexts in which an unexpressed deep subject is not a coding failure.
_SUBJECT_EXEMPT_CONTEXTS = frozenset({Redistribution.PASSIVE, Redistribution.IMPERSONAL})


class FailureReason(Enum):
    MISSING_LEMMA = "MISSING-LEMMA"
    UNCODED_ENTRY = "UNCODED-ENTRY"
    MISSING_REDISTRIBUTION = "MISSING-REDISTRIBUTION"
    MISSING_OBLIGATORY_COMPLEMENT = "MISSING-OBLIGATORY-COMPLEMENT"
    UNKNOWN_CONSTRUCTION = "UNKNOWN-CONSTRUCTION"


@dataclass(frozen=True)
class ObservedFrame:
    """One predicate occurrence: lemma, realized slots, context."""

    lemma: str
    slots: frozenset[tuple[SyntacticFunction, Realization]]
    redistribution_context: Redistribution = Redistribution.ACTIVE

    def __post_init__(self):
        object.__setattr__(self, "slots", frozenset(self.slots))
        functions = [f for f, _ in self.slots]
        if len(set(functions)) != len(functions):
            raise ValueError(f"duplicate function in observed frame for {self.lemma!r}")


@dataclass(frozen=True)
class AnalyzabilityVerdict:
    analyzable: bool
    witness_entry_ids: tuple[str, ...] = ()
    failure_reason: FailureReason | None = None

    def __post_init__(self):
        object.__setattr__(self, "witness_entry_ids", tuple(self.witness_entry_ids))
        if self.analyzable == (self.failure_reason is not None):
            raise ValueError("exactly one of witness or failure_reason applies")
        if self.analyzable != bool(self.witness_entry_ids):
            raise ValueError("witnesses must be present exactly when analyzable")


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: str
    forms: tuple[str, ...]
    analyzable: bool

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple(self.forms))
        if not self.forms:
            raise ValueError(f"sentence {self.sentence_id!r} has no forms")


def _clauses(entry: LexicalEntry, obs: ObservedFrame) -> tuple[bool, bool, bool]:
    """The three acceptance clauses, evaluated independently.

    (a) every observed slot exists in the frame with that realization;
    (b) every obligatory frame slot is observed, Suj exempt under
        PASSIVE/IMPERSONAL, all slots obligatory for uncoded entries;
    (c) the observed context is licensed by the entry.
    """
    slot_by_function = {slot.function: slot for slot in entry.frame}
    a = all(
        function in slot_by_function and realization in slot_by_function[function].realizations
        for function, realization in obs.slots
    )
    observed_functions = {function for function, _ in obs.slots}
    subject_exempt = obs.redistribution_context in _SUBJECT_EXEMPT_CONTEXTS
    b = all(
        slot.function in observed_functions
        for slot in entry.frame
        if (entry.coded is False or not slot.optional)
        and not (slot.function is SyntacticFunction.SUJ and subject_exempt)
    )
    c = obs.redistribution_context in entry.redistributions
    return a, b, c


def entry_accepts(entry: LexicalEntry, obs: ObservedFrame) -> bool:
    """Whether the entry licenses the observation."""
    if entry.lemma != obs.lemma:
        raise ValueError(f"lemma mismatch: entry {entry.lemma!r} vs observation {obs.lemma!r}")
    return all(_clauses(entry, obs))


def check_sentence(lexicon: Lexicon, obs: ObservedFrame) -> AnalyzabilityVerdict:
    """Check one observation against all entries of its lemma.

    On failure a single reason is reported, in precedence order:
    MISSING-LEMMA, UNCODED-ENTRY (every entry uncoded), then
    MISSING-REDISTRIBUTION over MISSING-OBLIGATORY-COMPLEMENT for
    near-miss entries, else UNKNOWN-CONSTRUCTION.
    """
    entries = lexicon.entries.get(obs.lemma)
    if not entries:
        return AnalyzabilityVerdict(False, (), FailureReason.MISSING_LEMMA)
    clauses = [(entry, _clauses(entry, obs)) for entry in entries]
    witnesses = tuple(entry.entry_id for entry, (a, b, c) in clauses if a and b and c)
    if witnesses:
        return AnalyzabilityVerdict(True, witnesses, None)
    if all(not entry.coded for entry in entries):
        reason = FailureReason.UNCODED_ENTRY
    elif any(a and b and not c for _, (a, b, c) in clauses):
        reason = FailureReason.MISSING_REDISTRIBUTION
    elif any(a and c and not b for _, (a, b, c) in clauses):
        reason = FailureReason.MISSING_OBLIGATORY_COMPLEMENT
    else:
        reason = FailureReason.UNKNOWN_CONSTRUCTION
    return AnalyzabilityVerdict(False, (), reason)


def diagnose_corpus(lexicon: Lexicon, corpus) -> tuple[list[SentenceRecord], Counter]:
    """Check every frame of every sentence.

    corpus: iterable of (sentence_id, list of ObservedFrame).  A sentence
    is analyzable only if all its frames are; the histogram counts one
    failure reason per failed frame.
    """
    records = []
    histogram: Counter = Counter()
    for sentence_id, frames in corpus:
        frames = list(frames)
        if not frames:
            raise ValueError(f"sentence {sentence_id!r} has no observed frames")
        analyzable = True
        for obs in frames:
            verdict = check_sentence(lexicon, obs)
            if not verdict.analyzable:
                analyzable = False
                histogram[verdict.failure_reason] += 1
        records.append(SentenceRecord(sentence_id, tuple(o.lemma for o in frames), analyzable))
    return records, histogram


def parse_corpus(text: str) -> list[tuple[str, list[ObservedFrame]]]:
    """Parse the corpus annotation format, grouping frames by sentence id
    in first-appearance order."""
    order: list[str] = []
    grouped: dict[str, list[ObservedFrame]] = {}
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) != 4:
            raise FormatError(f"expected 4 tab-separated fields, got {len(fields)}", line)
        sentence_id, lemma, redist_tok, slots_tok = fields
        if not sentence_id:
            raise FormatError("empty sentence id", line)
        context = _REDISTRIBUTION_BY_TOKEN.get(redist_tok)
        if context is None:
            raise FormatError(f"unknown redistribution: {redist_tok!r}", line)
        slots = set()
        if slots_tok:
            for pair in slots_tok.split(";"):
                function_tok, sep, realization_tok = pair.partition(":")
                if not sep:
                    raise FormatError(f"malformed observed slot: {pair!r}", line)
                function = _FUNCTION_BY_TOKEN.get(function_tok)
                if function is None:
                    raise FormatError(f"unknown function token: {function_tok!r}", line)
                try:
                    realization = Realization.from_token(realization_tok)
                except ValueError as exc:
                    raise FormatError(str(exc), line) from exc
                slots.add((function, realization))
        try:
            frame = ObservedFrame(lemma, frozenset(slots), context)
        except ValueError as exc:
            raise FormatError(str(exc), line) from exc
        if sentence_id not in grouped:
            order.append(sentence_id)
            grouped[sentence_id] = []
        grouped[sentence_id].append(frame)
    return [(sentence_id, grouped[sentence_id]) for sentence_id in order]


def serialize_corpus(corpus) -> str:
    """Inverse of parse_corpus for corpora with unique sentence ids."""
    lines = []
    for sentence_id, frames in corpus:
        if "\t" in sentence_id or "\n" in sentence_id:
            raise ValueError(f"sentence id {sentence_id!r} cannot be serialized")
        for obs in frames:
            if "\t" in obs.lemma or "\n" in obs.lemma:
                raise ValueError(f"lemma {obs.lemma!r} cannot be serialized")
            slots = ";".join(
                f"{function.value}:{realization.token()}"
                for function, realization in sorted(
                    obs.slots, key=lambda s: (s[0].value, s[1].token())
                )
            )
            lines.append(
                f"{sentence_id}\t{obs.lemma}\t{obs.redistribution_context.value}\t{slots}"
            )
    return "".join(line + "\n" for line in lines)

"""Comparative error mining over analyzability records.

Given per-sentence records from a reference run and a hypothesis run, the
mining corpus keeps the sentences the reference analyzes and marks as
failed those the hypothesis loses.  A fixed point then distributes each
failed sentence's unit of suspicion over the forms it contains: a form's
suspicion is the average, over its occurrences, of the share of blame it
takes inside each failed sentence, where shares are proportional to the
current suspicions and renormalized per sentence.

File formats, one sentence per line, ``#`` comments and blank lines
ignored:

    sentence_id<TAB>failed|ok<TAB>form1,form2,...

The same syntax serves two purposes: record files written by the checker
(``ok`` means analyzable) and mining-corpus files (``failed`` means lost
by the hypothesis while fine for the reference).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .checker import SentenceRecord
from .errors import FormatError


@dataclass(frozen=True)
class MiningSentence:
    sentence_id: str
    forms: tuple[str, ...]
    failed: bool

    def __post_init__(self):
        object.__setattr__(self, "forms", tuple(self.forms))
        if not self.sentence_id:
            raise ValueError("empty sentence id")
        if not self.forms:
            raise ValueError(f"sentence {self.sentence_id!r} has no forms")


@dataclass(frozen=True)
class MiningCorpus:
    """Sentences in canonical order (sorted by id, ids unique)."""

    sentences: tuple[MiningSentence, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.sentences, key=lambda s: s.sentence_id))
        ids = [s.sentence_id for s in ordered]
        if len(set(ids)) != len(ids):
            duplicate = next(i for k, i in enumerate(ids) if i in ids[:k])
            raise ValueError(f"duplicate sentence id: {duplicate!r}")
        object.__setattr__(self, "sentences", ordered)


@dataclass(frozen=True)
class MiningParams:
    epsilon: float = 1e-9
    max_iterations: int = 200

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class SuspicionScore:
    form: str
    score: float
    occurrences: int
    failed_sentences: int
    sample_sentence_id: str | None


class MiningResult(NamedTuple):
    scores: list[SuspicionScore]
    iterations_used: int
    converged: bool


def build_mining_corpus(
    ref_records: Sequence[SentenceRecord], hyp_records: Sequence[SentenceRecord]
) -> MiningCorpus:
    """Pair reference and hypothesis records into a mining corpus.

    Both sides must cover the same sentence ids with identical forms.
    Sentences the reference cannot analyze are excluded; a kept sentence
    is failed when the hypothesis alone loses it.
    """
    by_id: dict[str, SentenceRecord] = {}
    for record in hyp_records:
        if record.sentence_id in by_id:
            raise ValueError(f"duplicate sentence id in hypothesis records: {record.sentence_id!r}")
        by_id[record.sentence_id] = record
    sentences = []
    seen = set()
    for ref in ref_records:
        if ref.sentence_id in seen:
            raise ValueError(f"duplicate sentence id in reference records: {ref.sentence_id!r}")
        seen.add(ref.sentence_id)
        hyp = by_id.get(ref.sentence_id)
        if hyp is None:
            raise ValueError(f"sentence {ref.sentence_id!r} missing from hypothesis records")
        if hyp.forms != ref.forms:
            raise ValueError(f"form mismatch for sentence {ref.sentence_id!r}")
        if ref.analyzable:
            sentences.append(
                MiningSentence(ref.sentence_id, ref.forms, failed=not hyp.analyzable)
            )
    if len(seen) != len(by_id):
        extra = sorted(set(by_id) - seen)[0]
        raise ValueError(f"sentence {extra!r} missing from reference records")
    return MiningCorpus(tuple(sentences))


def compute_suspicion(
    corpus: MiningCorpus,
    params: MiningParams = MiningParams(),
    on_iteration: Callable[[int, dict[str, float]], None] | None = None,
) -> MiningResult:
    """Run the suspicion fixed point to convergence.

    Starts from each form's failure rate (failed occurrences over total
    occurrences).  One step redistributes, inside every failed sentence,
    one unit of blame proportionally to current scores (uniformly when
    they sum to zero), then averages per form over all its occurrences.
    Stops when the largest score change drops below epsilon, or after
    max_iterations steps.  on_iteration, if given, receives each new
    score vector; summation order is fixed (sentence id, then position).
    """
    if not corpus.sentences:
        raise ValueError("cannot mine an empty corpus")
    form_index: dict[str, int] = {}
    for sentence in corpus.sentences:
        for form in sentence.forms:
            form_index.setdefault(form, len(form_index))
    names = list(form_index)
    n = len(names)
    occurrences = [0] * n
    failed_occurrences = [0] * n
    sentences = [
        ([form_index[f] for f in s.forms], s.failed) for s in corpus.sentences
    ]
    for forms, failed in sentences:
        for fi in forms:
            occurrences[fi] += 1
            if failed:
                failed_occurrences[fi] += 1

    scores = [failed_occurrences[fi] / occurrences[fi] for fi in range(n)]
    iterations_used = 0
    converged = False
    for iteration in range(1, params.max_iterations + 1):
        blame = [0.0] * n
        for forms, failed in sentences:
            if not failed:
                continue
            denominator = math.fsum(scores[fi] for fi in forms)
            if denominator == 0.0:
                share = 1.0 / len(forms)
                locals_ = [share] * len(forms)
            else:
                locals_ = [scores[fi] / denominator for fi in forms]
            assert abs(math.fsum(locals_) - 1.0) <= 1e-12, "per-sentence blame must sum to 1"
            for fi, local in zip(forms, locals_):
                blame[fi] += local
        new_scores = [blame[fi] / occurrences[fi] for fi in range(n)]
        assert all(0.0 <= s <= 1.0 for s in new_scores), "scores must stay in [0, 1]"
        delta = max(
            (abs(a - b) for a, b in zip(new_scores, scores)), default=0.0
        )
        scores = new_scores
        iterations_used = iteration
        if on_iteration is not None:
            on_iteration(iteration, dict(zip(names, scores)))
        if delta < params.epsilon:
            converged = True
            break

    failed_sentence_count = [0] * n
    sample: list[str | None] = [None] * n
    for sentence in corpus.sentences:
        if not sentence.failed:
            continue
        for fi in sorted({form_index[f] for f in sentence.forms}):
            failed_sentence_count[fi] += 1
            if sample[fi] is None:
                sample[fi] = sentence.sentence_id
    results = [
        SuspicionScore(
            form=names[fi],
            score=scores[fi],
            occurrences=occurrences[fi],
            failed_sentences=failed_sentence_count[fi],
            sample_sentence_id=sample[fi],
        )
        for fi in range(n)
    ]
    return MiningResult(results, iterations_used, converged)


def rank_suspects(scores: Sequence[SuspicionScore], top_k: int) -> list[SuspicionScore]:
    """Top suspects: score descending, then failed-sentence count
    descending, then form ascending."""
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    ranked = sorted(scores, key=lambda s: (-s.score, -s.failed_sentences, s.form))
    return ranked[:top_k]


def format_suspects(ranked: Sequence[SuspicionScore]) -> str:
    """Report rows: rank, form, score (6 decimals), failed sentences,
    sample sentence id."""
    lines = [
        f"{rank}\t{s.form}\t{s.score:.6f}\t{s.failed_sentences}\t{s.sample_sentence_id or '-'}"
        for rank, s in enumerate(ranked, start=1)
    ]
    return "".join(line + "\n" for line in lines)


def _parse_lines(text: str) -> list[tuple[str, bool, tuple[str, ...]]]:
    rows = []
    seen: set[str] = set()
    for line, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) != 3:
            raise FormatError(f"expected 3 tab-separated fields, got {len(fields)}", line)
        sentence_id, tag, forms_tok = fields
        if tag not in ("failed", "ok"):
            raise FormatError(f"tag must be 'failed' or 'ok', got {tag!r}", line)
        if sentence_id in seen:
            raise FormatError(f"duplicate sentence id: {sentence_id!r}", line)
        seen.add(sentence_id)
        forms = tuple(forms_tok.split(",")) if forms_tok else ()
        if not forms or any(not f for f in forms):
            raise FormatError("empty form list or empty form", line)
        rows.append((sentence_id, tag == "failed", forms))
    return rows


def _serialize_lines(rows) -> str:
    lines = []
    for sentence_id, failed, forms in rows:
        if "\t" in sentence_id or "\n" in sentence_id:
            raise ValueError(f"sentence id {sentence_id!r} cannot be serialized")
        for form in forms:
            if "," in form or "\t" in form or "\n" in form:
                raise ValueError(f"form {form!r} cannot be serialized")
        lines.append(f"{sentence_id}\t{'failed' if failed else 'ok'}\t{','.join(forms)}")
    return "".join(line + "\n" for line in lines)


def parse_mining_corpus(text: str) -> MiningCorpus:
    return MiningCorpus(
        tuple(MiningSentence(i, forms, failed) for i, failed, forms in _parse_lines(text))
    )


def serialize_mining_corpus(corpus: MiningCorpus) -> str:
    return _serialize_lines((s.sentence_id, s.failed, s.forms) for s in corpus.sentences)


def parse_records(text: str) -> list[SentenceRecord]:
    """Read a record file: ``ok`` marks a sentence as analyzable."""
    return [
        SentenceRecord(sentence_id, forms, analyzable=not failed)
        for sentence_id, failed, forms in _parse_lines(text)
    ]


def serialize_records(records: Sequence[SentenceRecord]) -> str:
    return _serialize_lines((r.sentence_id, not r.analyzable, r.forms) for r in records)

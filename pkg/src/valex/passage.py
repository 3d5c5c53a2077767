"""Constituent and relation scoring for parser output.

Sentences are annotated with six constituent types over half-open token
spans and fourteen typed dependency relations between token positions.
The markup is a small XML dialect:

    <S id="E1" full="yes">
      <W ix="0">token</W> ...
      <G type="GN" start="0" end="2"/> ...
      <R type="SUJ-V" src="1" tgt="3"/> ...
    </S>

Scoring counts true positives per type.  Constituents are aligned
greedily under one of three relaxation modes (exact span, shared left
boundary, non-empty overlap); relations match on exact (type, src, tgt).
Precision, recall and f-measure are kept as exact rationals; display
formatting rounds half-up to two decimals, percentage style.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

from .errors import FormatError


class ConstituentType(Enum):
    GN = "GN"
    NV = "NV"
    GA = "GA"
    GR = "GR"
    GP = "GP"
    PV = "PV"


class RelationType(Enum):
    SUJ_V = "SUJ-V"
    AUX_V = "AUX-V"
    COD_V = "COD-V"
    CPL_V = "CPL-V"
    MOD_V = "MOD-V"
    COMP = "COMP"
    ATB_SO = "ATB-SO"
    MOD_N = "MOD-N"
    MOD_A = "MOD-A"
    MOD_R = "MOD-R"
    MOD_P = "MOD-P"
    COORD = "COORD"
    APPOS = "APPOS"
    JUXT = "JUXT"


class RelaxationMode(Enum):
    EXACT = "exact"
    LEFT = "left"
    OVERLAP = "overlap"


@dataclass(frozen=True)
class Constituent:
    """A typed, half-open token span [start, end)."""

    ctype: ConstituentType
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.start >= self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")


@dataclass(frozen=True)
class Relation:
    """A typed dependency between two distinct token positions."""

    rtype: RelationType
    source: int
    target: int

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"{self.rtype.value} relation with source == target")
        if self.source < 0 or self.target < 0:
            raise ValueError("negative token index")


@dataclass(frozen=True)
class SentenceAnnotation:
    sentence_id: str
    tokens: tuple[str, ...]
    constituents: tuple[Constituent, ...] = ()
    relations: tuple[Relation, ...] = ()
    full_parse: bool = True

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "constituents", tuple(self.constituents))
        object.__setattr__(self, "relations", tuple(self.relations))
        if not self.sentence_id:
            raise ValueError("empty sentence id")
        if not self.tokens:
            raise ValueError(f"sentence {self.sentence_id} has no tokens")
        n = len(self.tokens)
        for c in self.constituents:
            if c.end > n:
                raise ValueError(f"constituent span [{c.start}, {c.end}) exceeds {n} tokens")
        for r in self.relations:
            if r.source >= n or r.target >= n:
                raise ValueError(f"relation index out of range in {self.sentence_id}")


_CTYPE_BY_TOKEN = {c.value: c for c in ConstituentType}
_RTYPE_BY_TOKEN = {r.value: r for r in RelationType}


def _int_attr(element, name: str) -> int:
    value = element.get(name)
    if value is None:
        raise FormatError(f"<{element.tag}> missing {name!r} attribute")
    try:
        return int(value)
    except ValueError as exc:
        raise FormatError(f"attribute {name}={value!r} is not an integer") from exc


def parse_passage(text: str) -> list[SentenceAnnotation]:
    """Parse a sequence of <S> blocks into sentence annotations."""
    try:
        root = ET.fromstring(f"<document>{text}</document>")
    except ET.ParseError as exc:
        raise FormatError(f"malformed markup: {exc}", line=exc.position[0]) from exc
    annotations = []
    for block in root:
        if block.tag != "S":
            raise FormatError(f"unexpected element <{block.tag}> at top level")
        sentence_id = block.get("id")
        if sentence_id is None:
            raise FormatError("<S> missing 'id' attribute")
        full_tok = block.get("full", "yes")
        if full_tok not in ("yes", "no"):
            raise FormatError(f"full attribute must be yes or no, got {full_tok!r}")
        tokens: list[str] = []
        constituents: list[Constituent] = []
        relations: list[Relation] = []
        for element in block:
            if element.tag == "W":
                if _int_attr(element, "ix") != len(tokens):
                    raise FormatError(
                        f"token indices must be consecutive from 0 in {sentence_id!r}"
                    )
                tokens.append(element.text or "")
            elif element.tag == "G":
                ctype = _CTYPE_BY_TOKEN.get(element.get("type", ""))
                if ctype is None:
                    raise FormatError(f"unknown constituent type: {element.get('type')!r}")
                constituents.append(
                    Constituent(ctype, _int_attr(element, "start"), _int_attr(element, "end"))
                )
            elif element.tag == "R":
                rtype = _RTYPE_BY_TOKEN.get(element.get("type", ""))
                if rtype is None:
                    raise FormatError(f"unknown relation type: {element.get('type')!r}")
                relations.append(
                    Relation(rtype, _int_attr(element, "src"), _int_attr(element, "tgt"))
                )
            else:
                raise FormatError(f"unexpected element <{element.tag}> in {sentence_id!r}")
        try:
            annotations.append(
                SentenceAnnotation(
                    sentence_id, tuple(tokens), tuple(constituents), tuple(relations),
                    full_parse=(full_tok == "yes"),
                )
            )
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
    return annotations


def serialize_passage(annotations: Sequence[SentenceAnnotation]) -> str:
    lines = []
    for ann in annotations:
        full = "yes" if ann.full_parse else "no"
        lines.append(f"<S id={quoteattr(ann.sentence_id)} full=\"{full}\">")
        for ix, token in enumerate(ann.tokens):
            lines.append(f"  <W ix=\"{ix}\">{escape(token)}</W>")
        for c in ann.constituents:
            lines.append(f"  <G type=\"{c.ctype.value}\" start=\"{c.start}\" end=\"{c.end}\"/>")
        for r in ann.relations:
            lines.append(f"  <R type=\"{r.rtype.value}\" src=\"{r.source}\" tgt=\"{r.target}\"/>")
        lines.append("</S>")
    return "".join(line + "\n" for line in lines)


def _compatible(mode: RelaxationMode, gold: Constituent, hyp: Constituent) -> bool:
    if mode is RelaxationMode.EXACT:
        return gold.start == hyp.start and gold.end == hyp.end
    if mode is RelaxationMode.LEFT:
        return gold.start == hyp.start
    return max(gold.start, hyp.start) < min(gold.end, hyp.end)


def match_constituents(
    gold: SentenceAnnotation, hyp: SentenceAnnotation, mode: RelaxationMode
) -> Counter:
    """True positives per constituent type under the given relaxation.

    Gold constituents are visited in (start, end) order; each takes the
    unconsumed hypothesis constituent of the same type with the smallest
    boundary distance |start difference| + |end difference|, earliest
    hypothesis first on ties.
    """
    if gold.sentence_id != hyp.sentence_id:
        raise ValueError(f"sentence id mismatch: {gold.sentence_id!r} vs {hyp.sentence_id!r}")
    if len(gold.tokens) != len(hyp.tokens):
        raise ValueError(f"token count mismatch in {gold.sentence_id!r}")
    consumed = [False] * len(hyp.constituents)
    tp: Counter = Counter()
    for g in sorted(gold.constituents, key=lambda c: (c.start, c.end)):
        best = None
        for j, h in enumerate(hyp.constituents):
            if consumed[j] or h.ctype is not g.ctype or not _compatible(mode, g, h):
                continue
            distance = abs(g.start - h.start) + abs(g.end - h.end)
            if best is None or distance < best[0]:
                best = (distance, j)
        if best is not None:
            consumed[best[1]] = True
            tp[g.ctype] += 1
    return tp


def match_relations(gold: SentenceAnnotation, hyp: SentenceAnnotation) -> Counter:
    """True positives per relation type: multiset intersection on
    (type, src, tgt) triples."""
    if gold.sentence_id != hyp.sentence_id:
        raise ValueError(f"sentence id mismatch: {gold.sentence_id!r} vs {hyp.sentence_id!r}")
    common = Counter(gold.relations) & Counter(hyp.relations)
    tp: Counter = Counter()
    for relation, count in common.items():
        tp[relation.rtype] += count
    return tp


@dataclass(frozen=True)
class Scores:
    """tp/gold/hyp counts with exact rational precision, recall, f."""

    tp: int
    gold_count: int
    hyp_count: int

    def __post_init__(self):
        if self.tp > min(self.gold_count, self.hyp_count) or self.tp < 0:
            raise ValueError(
                f"tp {self.tp} exceeds gold {self.gold_count} / hyp {self.hyp_count}"
            )

    @property
    def precision(self) -> Fraction:
        return Fraction(self.tp, self.hyp_count) if self.hyp_count else Fraction(1)

    @property
    def recall(self) -> Fraction:
        return Fraction(self.tp, self.gold_count) if self.gold_count else Fraction(1)

    @property
    def f_measure(self) -> Fraction:
        p, r = self.precision, self.recall
        if p + r == 0:
            return Fraction(0)
        return 2 * p * r / (p + r)


@dataclass(frozen=True)
class EvalScores:
    constituents: Scores
    relations: Scores
    per_constituent: dict[ConstituentType, Scores]
    per_relation: dict[RelationType, Scores]


def score_corpus(
    gold: Sequence[SentenceAnnotation],
    hyp: Sequence[SentenceAnnotation],
    mode: RelaxationMode = RelaxationMode.EXACT,
) -> EvalScores:
    """Micro-averaged scores over aligned gold/hypothesis corpora."""
    if [g.sentence_id for g in gold] != [h.sentence_id for h in hyp]:
        raise ValueError("gold and hypothesis must list the same sentence ids in order")
    ctp: Counter = Counter()
    cgold: Counter = Counter()
    chyp: Counter = Counter()
    rtp: Counter = Counter()
    rgold: Counter = Counter()
    rhyp: Counter = Counter()
    for g, h in zip(gold, hyp):
        ctp += match_constituents(g, h, mode)
        rtp += match_relations(g, h)
        cgold.update(c.ctype for c in g.constituents)
        chyp.update(c.ctype for c in h.constituents)
        rgold.update(r.rtype for r in g.relations)
        rhyp.update(r.rtype for r in h.relations)
    per_constituent = {
        t: Scores(ctp[t], cgold[t], chyp[t]) for t in ConstituentType
    }
    per_relation = {t: Scores(rtp[t], rgold[t], rhyp[t]) for t in RelationType}
    return EvalScores(
        constituents=Scores(sum(ctp.values()), sum(cgold.values()), sum(chyp.values())),
        relations=Scores(sum(rtp.values()), sum(rgold.values()), sum(rhyp.values())),
        per_constituent=per_constituent,
        per_relation=per_relation,
    )


@dataclass(frozen=True)
class CoverageResult:
    """How many items carry a positive flag, with exact ratio."""

    covered: int
    total: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.covered, self.total)

    @property
    def percent_display(self) -> str:
        return format_percent(self.ratio)


def coverage(records: Sequence) -> CoverageResult:
    """Coverage over SentenceRecord.analyzable or
    SentenceAnnotation.full_parse flags."""
    if not records:
        raise ValueError("coverage of an empty record list is undefined")
    covered = 0
    for record in records:
        flag = getattr(record, "analyzable", None)
        if flag is None:
            flag = record.full_parse
        covered += bool(flag)
    return CoverageResult(covered, len(records))


def format_fixed(value, places: int = 2) -> str:
    """Decimal string with the given places, rounding half away from zero."""
    q = Fraction(value)
    scale = 10**places
    sign = "-" if q < 0 else ""
    n, d = abs(q * scale).numerator, abs(q * scale).denominator
    units = (2 * n + d) // (2 * d)
    whole, part = divmod(units, scale)
    return f"{sign}{whole}.{part:0{places}d}" if places else f"{sign}{whole}"


def format_percent(ratio) -> str:
    """Ratio in [0, 1] rendered as a percentage with two decimals."""
    return format_fixed(Fraction(ratio) * 100, 2)

"""Scoring for the clinical assessment battery.

Six instruments are scored here: an 8-item motor assessment summed out of
48 with a separately interpreted tonus item, a 30-point cognitive screen
with an education adjustment, a 7-item motivation scale (7 to 35), an
8-item user experience questionnaire (8 to 56), a three-dimension
pictorial emotion rating compared before and after a session, and a
four-domain quality-of-life form mapped to 0..100 per domain.

Study-level reporting aggregates Likert response tables into per-category
percentages. Percentages are kept exact; integer rendering rounds half
up. Combined categories are always computed from summed counts, never by
adding rounded percentages.

All scorers are pure functions over frozen response types; responses
validate their ranges on construction.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from statistics import fmean
from typing import Iterable, Sequence


class ScaleError(ValueError):
    """Base class for scoring errors."""


class OutOfRange(ScaleError):
    """An item score lies outside the instrument's declared range."""


class EmptyDomain(ScaleError):
    """A quality-of-life domain has no item scores."""


class InconsistentRow(ScaleError):
    """A Likert table row disagrees with the respondent count."""


class ParseError(ScaleError):
    """A response file cell could not be read."""


def _check_item(name: str, value: int, lo: int, hi: int) -> None:
    if not lo <= value <= hi:
        raise OutOfRange(f"{name}={value} outside {lo}..{hi}")


# -- motor assessment ---------------------------------------------------------

MAS_ITEM_COUNT = 8
MAS_ITEM_MAX = 6
MAS_TOTAL_MAX = MAS_ITEM_COUNT * MAS_ITEM_MAX
TONUS_NORMAL_VALUE = 4


class TonusClass(Enum):
    HYPERTONUS = "Hypertonus"
    NORMAL = "Normal"
    HYPOTONUS = "Hypotonus"


@dataclass(frozen=True)
class MasResponse:
    """Eight motor items scored 0..6 plus the general tonus observation.

    The tonus item shares the 0..6 granularity but is interpreted as a
    category, not summed into the total.
    """

    items: tuple[int, ...]
    general_tonus: int

    def __post_init__(self) -> None:
        if len(self.items) != MAS_ITEM_COUNT:
            raise OutOfRange(f"expected {MAS_ITEM_COUNT} items, got {len(self.items)}")
        for i, v in enumerate(self.items, start=1):
            _check_item(f"item{i}", v, 0, MAS_ITEM_MAX)
        _check_item("general_tonus", self.general_tonus, 0, MAS_ITEM_MAX)


@dataclass(frozen=True)
class MasScore:
    total: int
    tonus: TonusClass

    def to_dict(self) -> dict:
        return {"total": self.total, "tonus": self.tonus.value}


def mas_score(r: MasResponse) -> MasScore:
    """Sum the eight motor items; classify tonus around the normal point 4."""
    if r.general_tonus == TONUS_NORMAL_VALUE:
        tonus = TonusClass.NORMAL
    elif r.general_tonus < TONUS_NORMAL_VALUE:
        tonus = TonusClass.HYPERTONUS
    else:
        tonus = TonusClass.HYPOTONUS
    return MasScore(total=sum(r.items), tonus=tonus)


# -- cognitive screen ---------------------------------------------------------

MOCA_MAX = 30
MOCA_NORMAL_CUTOFF = 26
LOW_EDUCATION_YEARS = 12


class CognitiveClass(Enum):
    NORMAL = "Normal"
    BELOW_CUTOFF = "BelowCutoff"


@dataclass(frozen=True)
class MocaResponse:
    raw: int
    education_years: int

    def __post_init__(self) -> None:
        _check_item("raw", self.raw, 0, MOCA_MAX)
        if self.education_years < 0:
            raise OutOfRange(f"education_years={self.education_years} negative")


@dataclass(frozen=True)
class MocaScore:
    adjusted: int
    classification: CognitiveClass

    def to_dict(self) -> dict:
        return {"adjusted": self.adjusted, "classification": self.classification.value}


def moca_score(r: MocaResponse) -> MocaScore:
    """Add one point for 12 or fewer years of education, capped at 30."""
    bonus = 1 if r.education_years <= LOW_EDUCATION_YEARS else 0
    adjusted = min(MOCA_MAX, r.raw + bonus)
    cls = CognitiveClass.NORMAL if adjusted >= MOCA_NORMAL_CUTOFF else CognitiveClass.BELOW_CUTOFF
    return MocaScore(adjusted=adjusted, classification=cls)


# -- study eligibility --------------------------------------------------------

ELIGIBLE_AGE_MIN = 21
ELIGIBLE_AGE_MAX = 65
RCS_CUTOFF = 7


class Severity(Enum):
    LIGHT = "Light"
    MILD = "Mild"
    LIGHT_MILD = "LightMild"


_SEVERITY_VALUES = frozenset(s.value for s in Severity)


def eligibility(age_years: int, rcs_score: int, severity: Severity | str) -> bool:
    """Inclusion test: age 21..65, cognitive screen strictly above 7, and a
    recognized light-to-mild severity label. Never raises; unknown severity
    labels are simply ineligible."""
    if isinstance(severity, Severity):
        severity_ok = True
    else:
        severity_ok = severity in _SEVERITY_VALUES
    return (
        ELIGIBLE_AGE_MIN <= age_years <= ELIGIBLE_AGE_MAX
        and rcs_score > RCS_CUTOFF
        and severity_ok
    )


# -- motivation scale ---------------------------------------------------------

SRMS_ITEM_COUNT = 7
SRMS_SCALE_MAX = 5
SRMS_MIN = SRMS_ITEM_COUNT
SRMS_MAX = SRMS_ITEM_COUNT * SRMS_SCALE_MAX


@dataclass(frozen=True)
class SrmsResponse:
    items: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.items) != SRMS_ITEM_COUNT:
            raise OutOfRange(f"expected {SRMS_ITEM_COUNT} items, got {len(self.items)}")
        for i, v in enumerate(self.items, start=1):
            _check_item(f"q{i}", v, 1, SRMS_SCALE_MAX)


def srms_score(r: SrmsResponse) -> int:
    """Plain sum; higher means higher motivation."""
    return sum(r.items)


# -- user experience questionnaire --------------------------------------------

UEQ_ITEMS = (
    "supportive",
    "easy",
    "efficient",
    "clear",
    "exciting",
    "interesting",
    "inventive",
    "leading_edge",
)
UEQ_SCALE_MAX = 7
UEQ_MIN = len(UEQ_ITEMS)
UEQ_MAX = len(UEQ_ITEMS) * UEQ_SCALE_MAX


@dataclass(frozen=True)
class UeqResponse:
    items: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.items) != len(UEQ_ITEMS):
            raise OutOfRange(f"expected {len(UEQ_ITEMS)} items, got {len(self.items)}")
        for name, v in zip(UEQ_ITEMS, self.items):
            _check_item(name, v, 1, UEQ_SCALE_MAX)


def ueq_score(r: UeqResponse) -> int:
    return sum(r.items)


# -- emotion rating -----------------------------------------------------------

SAM_SCALE_MAX = 5


@dataclass(frozen=True)
class SamResponse:
    valence: int
    arousal: int
    dominance: int

    def __post_init__(self) -> None:
        _check_item("valence", self.valence, 1, SAM_SCALE_MAX)
        _check_item("arousal", self.arousal, 1, SAM_SCALE_MAX)
        _check_item("dominance", self.dominance, 1, SAM_SCALE_MAX)


@dataclass(frozen=True)
class SamDelta:
    """Post minus pre on each dimension, each in -4..+4."""

    valence: int
    arousal: int
    dominance: int

    def to_dict(self) -> dict:
        return {"valence": self.valence, "arousal": self.arousal, "dominance": self.dominance}


def sam_delta(pre: SamResponse, post: SamResponse) -> SamDelta:
    return SamDelta(
        valence=post.valence - pre.valence,
        arousal=post.arousal - pre.arousal,
        dominance=post.dominance - pre.dominance,
    )


# -- quality of life ----------------------------------------------------------

WHOQOL_DOMAINS = ("physical", "psychological", "social", "environment")
WHOQOL_SCALE_MAX = 5


@dataclass(frozen=True)
class WhoqolResponse:
    physical: tuple[int, ...]
    psychological: tuple[int, ...]
    social: tuple[int, ...]
    environment: tuple[int, ...]

    def __post_init__(self) -> None:
        for domain in WHOQOL_DOMAINS:
            items = getattr(self, domain)
            if not items:
                raise EmptyDomain(f"domain {domain} has no items")
            for i, v in enumerate(items, start=1):
                _check_item(f"{domain}[{i}]", v, 1, WHOQOL_SCALE_MAX)


@dataclass(frozen=True)
class WhoqolScore:
    physical: float
    psychological: float
    social: float
    environment: float

    def to_dict(self) -> dict:
        return {d: getattr(self, d) for d in WHOQOL_DOMAINS}


def _domain_transform(items: Sequence[int]) -> float:
    # Mean item score 1..5 mapped linearly onto 0..100.
    return (fmean(items) - 1.0) / 4.0 * 100.0


def whoqol_score(r: WhoqolResponse) -> WhoqolScore:
    return WhoqolScore(
        physical=_domain_transform(r.physical),
        psychological=_domain_transform(r.psychological),
        social=_domain_transform(r.social),
        environment=_domain_transform(r.environment),
    )


# -- Likert aggregation -------------------------------------------------------

SRMS_CATEGORIES = (
    "completely_disagree",
    "disagree",
    "neither",
    "somewhat_agree",
    "completely_agree",
)
UEQ_CATEGORIES = (
    "completely_disagree",
    "disagree",
    "slightly_disagree",
    "neither",
    "slightly_agree",
    "agree",
    "completely_agree",
)


def round_half_up(x: float) -> int:
    """Integer rendering used in reports; ties go up, never to even."""
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class LikertTable:
    """Per-question response counts over a fixed category scale."""

    categories: tuple[str, ...]
    rows: tuple[tuple[str, tuple[int, ...]], ...]
    n_respondents: int

    def __post_init__(self) -> None:
        if self.n_respondents <= 0:
            raise InconsistentRow(f"n_respondents={self.n_respondents} not positive")
        for label, counts in self.rows:
            if len(counts) != len(self.categories):
                raise InconsistentRow(
                    f"row {label}: {len(counts)} counts for {len(self.categories)} categories"
                )
            if any(c < 0 for c in counts):
                raise InconsistentRow(f"row {label}: negative count")
            if sum(counts) != self.n_respondents:
                raise InconsistentRow(
                    f"row {label}: counts sum {sum(counts)} != n_respondents {self.n_respondents}"
                )


@dataclass(frozen=True)
class LikertRowSummary:
    label: str
    counts: tuple[int, ...]
    exact_pct: tuple[float, ...]
    display_pct: tuple[int, ...]


@dataclass(frozen=True)
class LikertSummary:
    categories: tuple[str, ...]
    n_respondents: int
    rows: tuple[LikertRowSummary, ...]

    def row(self, label: str) -> LikertRowSummary:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def union_pct(self, label: str, categories: Iterable[str]) -> float:
        """Exact combined percentage over the named categories.

        Counts are summed before dividing; adding rounded percentages
        would drift by up to half a point per category.
        """
        row = self.row(label)
        total = 0
        for cat in categories:
            total += row.counts[self.categories.index(cat)]
        return total * 100.0 / self.n_respondents

    def to_dict(self) -> dict:
        return {
            "categories": list(self.categories),
            "n_respondents": self.n_respondents,
            "rows": [
                {
                    "label": r.label,
                    "counts": list(r.counts),
                    "exact_pct": list(r.exact_pct),
                    "display_pct": list(r.display_pct),
                }
                for r in self.rows
            ],
        }


def aggregate_likert(table: LikertTable) -> LikertSummary:
    """Percentage distribution per row, exact and display-rounded."""
    rows = []
    for label, counts in table.rows:
        exact = tuple(c * 100.0 / table.n_respondents for c in counts)
        rows.append(
            LikertRowSummary(
                label=label,
                counts=counts,
                exact_pct=exact,
                display_pct=tuple(round_half_up(p) for p in exact),
            )
        )
    return LikertSummary(
        categories=table.categories,
        n_respondents=table.n_respondents,
        rows=tuple(rows),
    )


def tally_likert(
    labels: Sequence[str],
    item_rows: Sequence[Sequence[int]],
    categories: Sequence[str],
) -> LikertTable:
    """Count item responses into a Likert table.

    Each row of item_rows is one respondent's scores, one per label, with
    value v falling into category v-1.
    """
    if not item_rows:
        raise InconsistentRow("no responses to tally")
    counts = [[0] * len(categories) for _ in labels]
    for items in item_rows:
        if len(items) != len(labels):
            raise InconsistentRow(f"{len(items)} answers for {len(labels)} questions")
        for j, v in enumerate(items):
            if not 1 <= v <= len(categories):
                raise OutOfRange(f"{labels[j]}={v} outside 1..{len(categories)}")
            counts[j][v - 1] += 1
    return LikertTable(
        categories=tuple(categories),
        rows=tuple((label, tuple(c)) for label, c in zip(labels, counts)),
        n_respondents=len(item_rows),
    )


def srms_likert_table(responses: Sequence[SrmsResponse]) -> LikertTable:
    labels = tuple(f"Q{i}" for i in range(1, SRMS_ITEM_COUNT + 1))
    return tally_likert(labels, [r.items for r in responses], SRMS_CATEGORIES)


def ueq_likert_table(responses: Sequence[UeqResponse]) -> LikertTable:
    return tally_likert(UEQ_ITEMS, [r.items for r in responses], UEQ_CATEGORIES)


# -- response files -----------------------------------------------------------
#
# One respondent per row. Column layouts:
#   mas:    subject,item1..item8,general_tonus
#   moca:   subject,raw,education_years
#   srms:   subject,session,q1..q7
#   ueq:    subject,session,supportive,easy,efficient,clear,exciting,
#           interesting,inventive,leading_edge
#   sam:    subject,session,phase,valence,arousal,dominance   (phase pre|post)
#   whoqol: subject,phys1..phys7,psych1..psych6,soc1..soc3,env1..env8

MAS_COLUMNS = ("subject",) + tuple(f"item{i}" for i in range(1, 9)) + ("general_tonus",)
MOCA_COLUMNS = ("subject", "raw", "education_years")
SRMS_COLUMNS = ("subject", "session") + tuple(f"q{i}" for i in range(1, 8))
UEQ_COLUMNS = ("subject", "session") + UEQ_ITEMS
SAM_COLUMNS = ("subject", "session", "phase", "valence", "arousal", "dominance")
WHOQOL_COLUMNS = (
    ("subject",)
    + tuple(f"phys{i}" for i in range(1, 8))
    + tuple(f"psych{i}" for i in range(1, 7))
    + tuple(f"soc{i}" for i in range(1, 4))
    + tuple(f"env{i}" for i in range(1, 9))
)


def _read_rows(text: str, columns: tuple[str, ...]) -> list[dict[str, str]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file") from None
    if tuple(header) != columns:
        raise ParseError(f"expected header {','.join(columns)}, got {','.join(header)}")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(columns):
            raise ParseError(f"row {line_no}: {len(row)} fields, expected {len(columns)}")
        rows.append(dict(zip(columns, row), _line=str(line_no)))
    if not rows:
        raise ParseError("no response rows")
    return rows


def _cell_int(row: dict[str, str], col: str) -> int:
    raw = row[col]
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"row {row['_line']} column {col}: not an integer: {raw!r}") from None


def _build(row: dict[str, str], ctor, *args):
    # Re-raise range errors with the offending row attached.
    try:
        return ctor(*args)
    except OutOfRange as e:
        raise OutOfRange(f"row {row['_line']}: {e}") from None


def read_mas_csv(text: str) -> list[tuple[str, MasResponse]]:
    out = []
    for row in _read_rows(text, MAS_COLUMNS):
        items = tuple(_cell_int(row, f"item{i}") for i in range(1, 9))
        resp = _build(row, MasResponse, items, _cell_int(row, "general_tonus"))
        out.append((row["subject"], resp))
    return out


def read_moca_csv(text: str) -> list[tuple[str, MocaResponse]]:
    out = []
    for row in _read_rows(text, MOCA_COLUMNS):
        resp = _build(row, MocaResponse, _cell_int(row, "raw"), _cell_int(row, "education_years"))
        out.append((row["subject"], resp))
    return out


def read_srms_csv(text: str) -> list[tuple[str, SrmsResponse]]:
    """Rows keyed subject/session; the key is returned as 'subject/session'."""
    out = []
    for row in _read_rows(text, SRMS_COLUMNS):
        items = tuple(_cell_int(row, f"q{i}") for i in range(1, 8))
        resp = _build(row, SrmsResponse, items)
        out.append((f"{row['subject']}/{row['session']}", resp))
    return out


def read_ueq_csv(text: str) -> list[tuple[str, UeqResponse]]:
    out = []
    for row in _read_rows(text, UEQ_COLUMNS):
        items = tuple(_cell_int(row, name) for name in UEQ_ITEMS)
        resp = _build(row, UeqResponse, items)
        out.append((f"{row['subject']}/{row['session']}", resp))
    return out


def read_sam_csv(text: str) -> list[tuple[str, str, SamResponse]]:
    """Returns (subject/session, phase, response) triples."""
    out = []
    for row in _read_rows(text, SAM_COLUMNS):
        phase = row["phase"]
        if phase not in ("pre", "post"):
            raise ParseError(f"row {row['_line']} column phase: expected pre or post, got {phase!r}")
        resp = _build(
            row,
            SamResponse,
            _cell_int(row, "valence"),
            _cell_int(row, "arousal"),
            _cell_int(row, "dominance"),
        )
        out.append((f"{row['subject']}/{row['session']}", phase, resp))
    return out


def read_whoqol_csv(text: str) -> list[tuple[str, WhoqolResponse]]:
    out = []
    for row in _read_rows(text, WHOQOL_COLUMNS):
        resp = _build(
            row,
            WhoqolResponse,
            tuple(_cell_int(row, f"phys{i}") for i in range(1, 8)),
            tuple(_cell_int(row, f"psych{i}") for i in range(1, 7)),
            tuple(_cell_int(row, f"soc{i}") for i in range(1, 4)),
            tuple(_cell_int(row, f"env{i}") for i in range(1, 9)),
        )
        out.append((row["subject"], resp))
    return out

"""Field-aware cleanup of recognizer output.

Numbers keep digits only, dates are canonicalized and calendar-checked,
Defined Label fields snap to the nearest allowed value by edit distance.
Free-text fields pass through untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .template import FieldType

WESTERN_TO_ARABIC_DIGITS = str.maketrans("0123456789", "٠١٢٣٤٥٦٧٨٩")
ARABIC_TO_WESTERN_DIGITS = str.maketrans("٠١٢٣٤٥٦٧٨٩", "0123456789")

_DIGITS = set("0123456789٠١٢٣٤٥٦٧٨٩")
_DATE_SPLIT = re.compile(r"[/\-.]")
_DAYS_IN_MONTH = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]


class EnhancementError(Exception):
    pass


class EmptyAfterFilter(EnhancementError):
    """Number field with no digits left after filtering."""


class DateRejected(EnhancementError):
    """Date field that cannot be parsed into a valid calendar date."""


# ---------------------------------------------------------------------------
# edit distance
# ---------------------------------------------------------------------------

def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert, delete, substitute), two-row DP."""
    if a == b:
        return 0
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    cur = [0] * (lb + 1)
    for i in range(1, la + 1):
        cur[0] = i
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == b[j - 1] else 1
            x = prev[j] + 1
            y = cur[j - 1] + 1
            z = prev[j - 1] + cost
            if y < x:
                x = y
            if z < x:
                x = z
            cur[j] = x
        prev, cur = cur, prev
    return prev[lb]


# ---------------------------------------------------------------------------
# per-field-type enhancement
# ---------------------------------------------------------------------------

def enhance_number(raw: str) -> str:
    """Keep digits only, mapped to Arabic-Indic."""
    kept = [c for c in raw if c in _DIGITS]
    if not kept:
        raise EmptyAfterFilter(f"no digits in {raw!r}")
    return "".join(kept).translate(WESTERN_TO_ARABIC_DIGITS)


def _is_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def _valid_date(day: int, month: int, year: int) -> bool:
    if not (1 <= month <= 12):
        return False
    days = _DAYS_IN_MONTH[month - 1]
    if month == 2 and _is_leap(year):
        days = 29
    return 1 <= day <= days


def enhance_date(raw: str) -> str:
    """Canonicalize a date to DD/MM/YYYY in Arabic-Indic digits.

    Accepts /, - or . separators and either day-first or year-first order
    (the year is the 4-digit part).  Anything that does not resolve to a
    valid Gregorian calendar date raises DateRejected.
    """
    text = raw.strip().translate(ARABIC_TO_WESTERN_DIGITS)
    parts = _DATE_SPLIT.split(text)
    if len(parts) != 3:
        raise DateRejected(f"expected three date components in {raw!r}")
    parts = [p.strip() for p in parts]
    if not all(p.isdigit() for p in parts):
        raise DateRejected(f"non-digit date component in {raw!r}")
    a, b, c = parts
    if len(c) == 4 and len(a) in (1, 2) and len(b) in (1, 2):
        day, month, year = int(a), int(b), int(c)
    elif len(a) == 4 and len(b) in (1, 2) and len(c) in (1, 2):
        year, month, day = int(a), int(b), int(c)
    else:
        raise DateRejected(f"cannot locate a 4-digit year in {raw!r}")
    if not _valid_date(day, month, year):
        raise DateRejected(f"not a valid calendar date: {raw!r}")
    return f"{day:02d}/{month:02d}/{year:04d}".translate(WESTERN_TO_ARABIC_DIGITS)


def enhance_defined(
    raw: str,
    possibilities: Sequence[str],
    normalizer: Callable[[str], str] | None = None,
) -> str:
    """Snap to the possibility at minimum edit distance.

    Distances are computed on normalized text when a normalizer is supplied
    (recognizer output is already normalized, hand-authored possibility lists
    may not be); the returned value is always the possibility as authored.
    Ties resolve to the earliest list position.
    """
    if not possibilities:
        raise EnhancementError("empty possibilities list")
    norm = normalizer if normalizer is not None else (lambda s: s)
    raw_n = norm(raw)
    best_i, best_d = 0, None
    for i, p in enumerate(possibilities):
        d = levenshtein(raw_n, norm(p))
        if best_d is None or d < best_d:
            best_i, best_d = i, d
    return possibilities[best_i]


# ---------------------------------------------------------------------------
# prediction record and dispatch
# ---------------------------------------------------------------------------

@dataclass
class Prediction:
    """One recognized field.  ``registration`` records how its quad was
    located ("homography" or "fallback")."""

    field_id: str
    raw_text: str
    enhanced_text: str
    field_type: FieldType
    registration: str = "homography"
    line_texts: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "field_id": self.field_id,
            "raw_text": self.raw_text,
            "enhanced_text": self.enhanced_text,
            "field_type": self.field_type.value,
            "registration": self.registration,
            "line_texts": list(self.line_texts),
            "flags": list(self.flags),
        }


def enhance(
    prediction: Prediction,
    possibilities: Sequence[str] | None = None,
    normalizer: Callable[[str], str] | None = None,
) -> Prediction:
    """Fill ``enhanced_text`` according to the field type.

    Failures never raise: the raw text is retained and a flag is recorded.
    Applying this twice is a no-op.
    """
    p = prediction
    ftype = p.field_type
    flags = [f for f in p.flags if f not in ("EmptyAfterFilter", "DateRejected")]
    enhanced = p.raw_text
    try:
        if ftype is FieldType.NUMBER:
            enhanced = enhance_number(p.raw_text)
        elif ftype is FieldType.DATE:
            enhanced = enhance_date(p.raw_text)
        elif ftype is FieldType.DEFINED_LABEL:
            enhanced = enhance_defined(p.raw_text, possibilities or [], normalizer)
    except EmptyAfterFilter:
        flags.append("EmptyAfterFilter")
    except DateRejected:
        flags.append("DateRejected")
    return Prediction(
        field_id=p.field_id,
        raw_text=p.raw_text,
        enhanced_text=enhanced,
        field_type=ftype,
        registration=p.registration,
        line_texts=list(p.line_texts),
        flags=flags,
    )

from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from invizo.enhancement import (
    levenshtein,
    enhance_number,
    enhance_date,
    enhance_defined,
    enhance,
    Prediction,
    EmptyAfterFilter,
    DateRejected,
    EnhancementError,
)
from invizo.template import FieldType


# ---------------------------------------------------------------------------
# levenshtein
# ---------------------------------------------------------------------------

def _lev_recursive(a: str, b: str) -> int:
    """Straight transcription of the recursive definition, memoized."""

    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        cost = 0 if a[i - 1] == b[j - 1] else 1
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + cost)

    return d(len(a), len(b))


@pytest.mark.parametrize(
    "a,b,expected",
    [
        ("kitten", "sitting", 3),
        ("", "abc", 3),
        ("abc", "", 3),
        ("same", "same", 0),
        ("flaw", "lawn", 2),
        ("٤٢", "٤٣", 1),
    ],
)
def test_levenshtein_examples(a, b, expected):
    assert levenshtein(a, b) == expected


@given(st.text(alphabet="abcd", max_size=7), st.text(alphabet="abcd", max_size=7))
@settings(max_examples=300)
def test_levenshtein_matches_recursive(a, b):
    assert levenshtein(a, b) == _lev_recursive(a, b)


@given(st.text(alphabet="abcd", max_size=8), st.text(alphabet="abcd", max_size=8))
def test_levenshtein_symmetry_and_bounds(a, b):
    d = levenshtein(a, b)
    assert d == levenshtein(b, a)
    assert (d == 0) == (a == b)
    assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


@given(
    st.text(alphabet="abc", max_size=6),
    st.text(alphabet="abc", max_size=6),
    st.text(alphabet="abc", max_size=6),
)
def test_levenshtein_triangle(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


# ---------------------------------------------------------------------------
# number fields
# ---------------------------------------------------------------------------

def test_number_keeps_digits_only():
    assert enhance_number("٤٢ ريال") == "٤٢"


def test_number_maps_western_digits():
    assert enhance_number("42") == "٤٢"
    assert enhance_number("4x2") == "٤٢"


def test_number_mixed():
    assert enhance_number("تليفون: 010-٥٥٥") == "٠١٠٥٥٥"


def test_number_empty_raises():
    with pytest.raises(EmptyAfterFilter):
        enhance_number("لا يوجد")


# ---------------------------------------------------------------------------
# date fields
# ---------------------------------------------------------------------------

def test_date_day_first():
    assert enhance_date("5/3/2020") == "٠٥/٠٣/٢٠٢٠"


def test_date_year_first():
    assert enhance_date("2020-03-05") == "٠٥/٠٣/٢٠٢٠"


def test_date_dots_and_arabic_digits():
    assert enhance_date("٥.٣.٢٠٢٠") == "٠٥/٠٣/٢٠٢٠"


def test_date_leap_day():
    assert enhance_date("29/2/2020") == "٢٩/٠٢/٢٠٢٠"
    with pytest.raises(DateRejected):
        enhance_date("29/2/2021")
    with pytest.raises(DateRejected):
        enhance_date("29/2/1900")  # century, not leap
    assert enhance_date("29/2/2000") == "٢٩/٠٢/٢٠٠٠"


@pytest.mark.parametrize(
    "raw",
    ["", "مارس", "5/3", "1/2/3/4", "32/1/2020", "0/1/2020", "1/13/2020", "5/3/20", "abc/3/2020"],
)
def test_date_rejections(raw):
    with pytest.raises(DateRejected):
        enhance_date(raw)


def test_date_idempotent_on_canonical():
    out = enhance_date("31/12/1999")
    assert enhance_date(out) == out


# ---------------------------------------------------------------------------
# defined label fields
# ---------------------------------------------------------------------------

def test_defined_exact_match():
    assert enhance_defined("ذكر", ["ذكر", "أنثى"]) == "ذكر"


def test_defined_one_edit():
    assert enhance_defined("ذكن", ["ذكر", "أنثى"]) == "ذكر"


def test_defined_tie_takes_first():
    assert enhance_defined("ab", ["ax", "ay"]) == "ax"


def test_defined_normalizer_applies_to_both_sides():
    # the normalizer strips spaces; authored value keeps its spacing
    out = enhance_defined("نعم", ["ن ع م", "لا"], normalizer=lambda s: s.replace(" ", ""))
    assert out == "ن ع م"


def test_defined_empty_list_raises():
    with pytest.raises(EnhancementError):
        enhance_defined("x", [])


def test_defined_output_always_in_list():
    opts = ["أحمر", "أخضر", "أزرق"]
    for raw in ["احمر", "خضر", "زرق", "", "xyz"]:
        assert enhance_defined(raw, opts) in opts


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _pred(ftype, raw, **kw):
    return Prediction(field_id="f1", raw_text=raw, enhanced_text=raw, field_type=ftype, **kw)


def test_enhance_single_line_passthrough():
    p = enhance(_pred(FieldType.SINGLE_LINE, "أي نص حر"))
    assert p.enhanced_text == "أي نص حر"
    assert p.flags == []


def test_enhance_multiple_lines_passthrough():
    p = enhance(_pred(FieldType.MULTIPLE_LINES, "سطر\nسطر آخر", line_texts=["سطر", "سطر آخر"]))
    assert p.enhanced_text == "سطر\nسطر آخر"
    assert p.line_texts == ["سطر", "سطر آخر"]


def test_enhance_number_failure_flags_and_retains_raw():
    p = enhance(_pred(FieldType.NUMBER, "---"))
    assert p.enhanced_text == "---"
    assert p.flags == ["EmptyAfterFilter"]


def test_enhance_date_failure_flags():
    p = enhance(_pred(FieldType.DATE, "31/2/2020"))
    assert p.enhanced_text == "31/2/2020"
    assert p.flags == ["DateRejected"]


def test_enhance_defined_uses_possibilities():
    p = enhance(_pred(FieldType.DEFINED_LABEL, "نعن"), possibilities=["نعم", "لا"])
    assert p.enhanced_text == "نعم"


def test_enhance_idempotent():
    cases = [
        (_pred(FieldType.NUMBER, "42أ"), None),
        (_pred(FieldType.NUMBER, "بدون"), None),
        (_pred(FieldType.DATE, "5-3-2020"), None),
        (_pred(FieldType.DATE, "99/99/9999"), None),
        (_pred(FieldType.DEFINED_LABEL, "لا"), ["نعم", "لا"]),
        (_pred(FieldType.SINGLE_LINE, "مرحبا"), None),
    ]
    for p, poss in cases:
        once = enhance(p, possibilities=poss)
        twice = enhance(once, possibilities=poss)
        assert once == twice


def test_prediction_to_dict_keys():
    d = _pred(FieldType.NUMBER, "42").to_dict()
    assert set(d) == {
        "field_id",
        "raw_text",
        "enhanced_text",
        "field_type",
        "registration",
        "line_texts",
        "flags",
    }
    assert d["field_type"] == "Number"

"""Minimal contextual shaping for Arabic text rendering.

Arabic letters change glyph depending on whether they connect to their
neighbours.  Generic raster backends draw each codepoint in isolation, so
before rendering we substitute every letter with its positional variant
from the Unicode Arabic Presentation Forms-B block (U+FE70..U+FEFC) and
reorder the line into left-to-right visual order.

Scope: positional forms only.  The optional lam-alef ligatures are not
substituted (the pair renders as two glyphs), and no tashkil placement is
performed; the corpus normalizer strips diacritics upstream.

Joining model:

* *Dual-joining* letters connect on both sides and have all four forms
  (isolated / final / initial / medial).
* *Right-joining* letters connect only to the preceding letter and have
  two forms (isolated / final).
* Hamza (U+0621) joins nothing.

A letter takes a connected-to-previous form (final or medial) when the
adjacent preceding character is a dual-joining letter, and a
connected-to-next form (initial or medial) when it is itself dual-joining
and the adjacent following character is any joinable letter.  Any
non-letter (digit, space, punctuation) breaks the connection.
"""

from __future__ import annotations

# letter -> (codepoint of isolated form, number of consecutive forms).
# Forms are laid out [isolated, final] or [isolated, final, initial,
# medial] at consecutive codepoints in Presentation Forms-B.
_FORMS: dict[str, tuple[int, int]] = {
    "ء": (0xFE80, 1),  # hamza
    "آ": (0xFE81, 2),  # alef madda
    "أ": (0xFE83, 2),  # alef hamza above
    "ؤ": (0xFE85, 2),  # waw hamza
    "إ": (0xFE87, 2),  # alef hamza below
    "ئ": (0xFE89, 4),  # yeh hamza
    "ا": (0xFE8D, 2),  # alef
    "ب": (0xFE8F, 4),  # beh
    "ة": (0xFE93, 2),  # teh marbuta
    "ت": (0xFE95, 4),  # teh
    "ث": (0xFE99, 4),  # theh
    "ج": (0xFE9D, 4),  # jeem
    "ح": (0xFEA1, 4),  # hah
    "خ": (0xFEA5, 4),  # khah
    "د": (0xFEA9, 2),  # dal
    "ذ": (0xFEAB, 2),  # thal
    "ر": (0xFEAD, 2),  # reh
    "ز": (0xFEAF, 2),  # zain
    "س": (0xFEB1, 4),  # seen
    "ش": (0xFEB5, 4),  # sheen
    "ص": (0xFEB9, 4),  # sad
    "ض": (0xFEBD, 4),  # dad
    "ط": (0xFEC1, 4),  # tah
    "ظ": (0xFEC5, 4),  # zah
    "ع": (0xFEC9, 4),  # ain
    "غ": (0xFECD, 4),  # ghain
    "ف": (0xFED1, 4),  # feh
    "ق": (0xFED5, 4),  # qaf
    "ك": (0xFED9, 4),  # kaf
    "ل": (0xFEDD, 4),  # lam
    "م": (0xFEE1, 4),  # meem
    "ن": (0xFEE5, 4),  # noon
    "ه": (0xFEE9, 4),  # heh
    "و": (0xFEED, 2),  # waw
    "ى": (0xFEEF, 2),  # alef maksura
    "ي": (0xFEF1, 4),  # yeh
}

# Offsets into the form run.
_ISOLATED, _FINAL, _INITIAL, _MEDIAL = 0, 1, 2, 3

_MIRROR = str.maketrans("()[]{}<>", ")(][}{><")

_DIGITS = set("0123456789٠١٢٣٤٥٦٧٨٩")


def _joins_next(c: str) -> bool:
    """True when ``c`` can connect to the following letter."""
    info = _FORMS.get(c)
    return info is not None and info[1] == 4


def _joins_prev(c: str) -> bool:
    """True when ``c`` can connect to the preceding letter."""
    info = _FORMS.get(c)
    return info is not None and info[1] >= 2


def shape_text(text: str) -> str:
    """Substitute positional presentation forms, keeping logical order."""
    out: list[str] = []
    n = len(text)
    for i, c in enumerate(text):
        info = _FORMS.get(c)
        if info is None:
            out.append(c)
            continue
        base, n_forms = info
        prev_connects = i > 0 and _joins_next(text[i - 1]) and _joins_prev(c)
        next_connects = (
            n_forms == 4 and i + 1 < n and _joins_prev(text[i + 1])
        )
        if prev_connects and next_connects:
            offset = _MEDIAL
        elif prev_connects:
            offset = _FINAL
        elif next_connects:
            offset = _INITIAL
        else:
            offset = _ISOLATED
        out.append(chr(base + offset))
    return "".join(out)


def visual_order(shaped: str) -> str:
    """Reorder a logical-order line for left-to-right rasterization.

    The line is reversed (Arabic reads right to left) and then each
    maximal run of digits is re-reversed so numbers keep their customary
    most-significant-digit-first appearance.  Mirrored punctuation pairs
    are swapped so brackets still open toward their content.
    """
    reversed_text = shaped[::-1].translate(_MIRROR)
    chars = list(reversed_text)
    i = 0
    while i < len(chars):
        if chars[i] in _DIGITS:
            j = i
            while j < len(chars) and chars[j] in _DIGITS:
                j += 1
            chars[i:j] = chars[i:j][::-1]
            i = j
        else:
            i += 1
    return "".join(chars)

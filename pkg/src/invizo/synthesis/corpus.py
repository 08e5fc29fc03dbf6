"""Corpus cleaning and dataset bookkeeping for synthetic line generation.

The recognizer is trained on a closed character inventory.  The inventory
is shipped as a data file (one character per line) so deployments can swap
it without code changes; ``DEFAULT_CHARSET`` is the packaged 64-character
set covering the Arabic letters, Arabic-Indic digits, space, and common
punctuation.

``normalize_corpus`` maps raw harvested text onto that inventory:

1. Western digits are transliterated to Arabic-Indic digits.
2. Latin letters are deleted.
3. The eight Arabic tashkil diacritics (U+064B..U+0652) are deleted.
4. Any remaining character outside the inventory is deleted.
5. Whitespace is collapsed to single spaces and trimmed.

The function is idempotent: normalizing already-normalized text is a
no-op.
"""

from __future__ import annotations

import random
import re
from importlib import resources
from pathlib import Path
from typing import Sequence

WESTERN_TO_ARABIC_DIGITS = str.maketrans("0123456789", "٠١٢٣٤٥٦٧٨٩")

# U+064B FATHATAN .. U+0652 SUKUN: the eight optional vowel marks.
_DIACRITICS = "".join(chr(c) for c in range(0x064B, 0x0653))
_DIACRITIC_RE = re.compile(f"[{_DIACRITICS}]")
_LATIN_RE = re.compile("[A-Za-z]")
_WHITESPACE_RE = re.compile(r"\s+")


def load_charset(path: str | Path) -> str:
    """Read a character inventory file: one character per line.

    Blank lines other than the single-space entry are ignored.  Raises
    ``ValueError`` on duplicate characters or lines longer than one
    character.
    """
    text = Path(path).read_text(encoding="utf-8")
    chars: list[str] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        entry = line.rstrip("\r")
        if entry == "":
            continue
        if len(entry) != 1:
            raise ValueError(
                f"charset line {lineno} has {len(entry)} characters, expected 1"
            )
        chars.append(entry)
    if len(set(chars)) != len(chars):
        raise ValueError("charset contains duplicate characters")
    return "".join(chars)


def _load_default_charset() -> str:
    ref = resources.files("invizo.data").joinpath("charset.txt")
    with resources.as_file(ref) as path:
        return load_charset(path)


DEFAULT_CHARSET: str = _load_default_charset()


def normalize_corpus(text: str, charset: str | None = None) -> str:
    """Clean raw text down to the recognizer's character inventory."""
    allowed = set(charset if charset is not None else DEFAULT_CHARSET)
    out = text.translate(WESTERN_TO_ARABIC_DIGITS)
    out = _LATIN_RE.sub("", out)
    out = _DIACRITIC_RE.sub("", out)
    # Preserve whitespace through the inventory filter so word boundaries
    # survive until the final collapse step.
    out = "".join(c for c in out if c in allowed or c.isspace())
    out = _WHITESPACE_RE.sub(" ", out).strip()
    return out


def split_dataset(
    items: Sequence, ratios: tuple[int, int, int] = (7, 2, 2), seed: int = 0
) -> tuple[list, list, list]:
    """Shuffle ``items`` and split into train/val/test by integer ratios.

    The first two splits get ``floor(n * r / sum)`` items and the test
    split takes the remainder, so for sizes divisible by the ratio total
    the split is exact (e.g. 110 items at 7:2:2 -> 70/20/20).  Splits are
    disjoint and together cover the input.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or sum(ratios) == 0:
        raise ValueError(f"invalid split ratios {ratios!r}")
    pool = list(items)
    random.Random(seed).shuffle(pool)
    total = sum(ratios)
    n = len(pool)
    n_train = n * ratios[0] // total
    n_val = n * ratios[1] // total
    train = pool[:n_train]
    val = pool[n_train : n_train + n_val]
    test = pool[n_train + n_val :]
    return train, val, test


def write_manifest(entries: Sequence[tuple[str, str]], path: str | Path) -> None:
    """Write ``(image_path, label)`` pairs as a tab-separated manifest."""
    lines = []
    for image_path, label in entries:
        if "\t" in label or "\n" in label:
            raise ValueError(f"label contains tab/newline: {label!r}")
        lines.append(f"{image_path}\t{label}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_manifest(path: str | Path) -> list[tuple[str, str]]:
    """Read a tab-separated ``image_path\\tlabel`` manifest."""
    entries: list[tuple[str, str]] = []
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"manifest line {lineno}: expected 2 tab-separated fields")
        entries.append((parts[0], parts[1]))
    return entries

"""Token vocabulary for the sequence decoder.

Three control tokens occupy fixed ids -- padding 0, start-of-sequence 1,
end-of-sequence 2 -- followed by one id per character of the inventory.
The on-disk format is one token per line (UTF-8): control tokens as their
angle-bracket names, characters literally.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

PAD_ID = 0
SOS_ID = 1
EOS_ID = 2

PAD_TOKEN = "<pad>"
SOS_TOKEN = "<sos>"
EOS_TOKEN = "<eos>"

_SPECIALS = (PAD_TOKEN, SOS_TOKEN, EOS_TOKEN)


class Vocabulary:
    """Bidirectional mapping between characters and token ids."""

    def __init__(self, characters: Iterable[str]):
        chars = list(characters)
        for c in chars:
            if len(c) != 1:
                raise ValueError(f"vocabulary entries must be single characters: {c!r}")
        if len(set(chars)) != len(chars):
            raise ValueError("vocabulary contains duplicate characters")
        if any(c in _SPECIALS for c in chars):
            raise ValueError("control token names cannot be characters")
        self._chars = chars
        self._char_to_id = {c: i + len(_SPECIALS) for i, c in enumerate(chars)}

    @property
    def size(self) -> int:
        return len(_SPECIALS) + len(self._chars)

    @property
    def characters(self) -> str:
        return "".join(self._chars)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, char: str) -> bool:
        return char in self._char_to_id

    def encode(self, text: str) -> list[int]:
        """Map characters to ids; unknown characters raise ``KeyError``."""
        try:
            return [self._char_to_id[c] for c in text]
        except KeyError as exc:
            raise KeyError(f"character not in vocabulary: {exc.args[0]!r}") from exc

    def decode(self, ids: Iterable[int]) -> str:
        """Map ids back to text, dropping all control tokens."""
        out: list[str] = []
        base = len(_SPECIALS)
        for i in ids:
            if i < 0 or i >= self.size:
                raise ValueError(f"token id out of range: {i}")
            if i >= base:
                out.append(self._chars[i - base])
        return "".join(out)

    def save(self, path: str | Path) -> None:
        lines = list(_SPECIALS) + self._chars
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines = lines[:-1]
        if tuple(lines[: len(_SPECIALS)]) != _SPECIALS:
            raise ValueError(
                "vocabulary file must start with "
                + ", ".join(_SPECIALS)
            )
        return cls(lines[len(_SPECIALS) :])

    @classmethod
    def from_charset(cls, charset: str) -> "Vocabulary":
        return cls(charset)

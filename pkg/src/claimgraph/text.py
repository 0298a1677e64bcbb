"""Shared text normalization: case/accent folding and letter-run tokenization."""

from __future__ import annotations

import re
import unicodedata

_LETTER_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)


def fold(text: str) -> str:
    """Accent-strip and casefold, e.g. 'ΔΑΝΊΑ' -> 'δανια'."""
    out: list[str] = []
    for ch in text:
        for decomposed in unicodedata.normalize("NFD", ch):
            if unicodedata.combining(decomposed):
                continue
            out.append(decomposed.casefold())
    return "".join(out)


def fold_with_offsets(text: str) -> tuple[str, list[int]]:
    """Fold `text`, returning the folded string and, per folded character,
    the index of the original character it came from.

    One original character may expand to several folded ones (e.g. 'ß' ->
    'ss'); all expansion characters map back to the same original index.
    """
    chars: list[str] = []
    origins: list[int] = []
    for i, ch in enumerate(text):
        for decomposed in unicodedata.normalize("NFD", ch):
            if unicodedata.combining(decomposed):
                continue
            for folded in decomposed.casefold():
                chars.append(folded)
                origins.append(i)
    return "".join(chars), origins


def tokenize(text: str) -> list[str]:
    """Folded letter-run tokens; digits and punctuation act as separators."""
    return _LETTER_RUN.findall(fold(text))

"""Character and extended-grapheme-cluster segmentation.

Devanagari words split very differently under the two views::

    >>> segment_characters("नेपाल")
    ['न', 'े', 'प', 'ा', 'ल']
    >>> [g.text for g in segment_graphemes("नेपाल")]
    ['ने', 'पा', 'ल']
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import regex

from ._unicode_rules import GCB_VALUES, INCB_VALUES

__all__ = [
    "GraphemeCluster",
    "SegmentationMode",
    "segment_characters",
    "segment_graphemes",
    "grapheme_texts",
    "segmenter_for",
]


class SegmentationMode(enum.Enum):
    CHARACTER = "char"
    GRAPHEME = "grapheme"

    @classmethod
    def parse(cls, value: "str | SegmentationMode") -> "SegmentationMode":
        if isinstance(value, cls):
            return value
        aliases = {"char": cls.CHARACTER, "character": cls.CHARACTER, "grapheme": cls.GRAPHEME}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown segmentation mode {value!r}") from None


@dataclass(frozen=True)
class GraphemeCluster:
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("grapheme cluster cannot be empty")

    @property
    def codepoints(self) -> tuple[int, ...]:
        return tuple(ord(ch) for ch in self.text)

    def __str__(self) -> str:
        return self.text


_GCB_RE = regex.compile(
    "|".join(rf"(?P<{name}>\p{{Grapheme_Cluster_Break={name}}})" for name in GCB_VALUES)
)
_INCB_RE = regex.compile(
    "|".join(rf"(?P<{name}>\p{{Indic_Conjunct_Break={name}}})" for name in INCB_VALUES)
)
_EXTPICT_RE = regex.compile(r"\p{Extended_Pictographic}")


@lru_cache(maxsize=None)
def _props(ch: str) -> tuple[str, str | None, bool]:
    m = _GCB_RE.match(ch)
    gcb = m.lastgroup if m else "Other"
    m = _INCB_RE.match(ch)
    incb = m.lastgroup if m else None
    return gcb, incb, _EXTPICT_RE.match(ch) is not None


_CONTROLS = frozenset({"Control", "CR", "LF"})
_HANGUL_AFTER_L = frozenset({"L", "V", "LV", "LVT"})


def segment_characters(text: str) -> list[str]:
    """One unit per Unicode scalar value."""
    return list(text)


def _boundaries(text: str) -> list[int]:
    """Offsets (exclusive of 0 and len) where a grapheme break occurs."""
    breaks = []
    prev_gcb = None
    ri_run = 0  # regional indicators immediately before the current char
    emoji = 0  # 1: ExtPict Extend*, 2: ExtPict Extend* ZWJ
    conjunct = 0  # 1: Consonant [Extend Linker]*, 2: same with >= 1 Linker
    for i, ch in enumerate(text):
        gcb, incb, pict = _props(ch)
        if i > 0:
            if prev_gcb == "CR" and gcb == "LF":
                brk = False
            elif prev_gcb in _CONTROLS or gcb in _CONTROLS:
                brk = True
            elif prev_gcb == "L" and gcb in _HANGUL_AFTER_L:
                brk = False
            elif prev_gcb in ("LV", "V") and gcb in ("V", "T"):
                brk = False
            elif prev_gcb in ("LVT", "T") and gcb == "T":
                brk = False
            elif gcb in ("Extend", "ZWJ", "SpacingMark") or prev_gcb == "Prepend":
                brk = False
            elif conjunct == 2 and incb == "Consonant":
                brk = False
            elif emoji == 2 and pict:
                brk = False
            elif gcb == "Regional_Indicator" and ri_run % 2 == 1:
                brk = False
            else:
                brk = True
            if brk:
                breaks.append(i)

        ri_run = ri_run + 1 if gcb == "Regional_Indicator" else 0
        if pict:
            emoji = 1
        elif emoji == 1 and gcb == "Extend":
            emoji = 1
        elif emoji == 1 and gcb == "ZWJ":
            emoji = 2
        else:
            emoji = 0
        if incb == "Consonant":
            conjunct = 1
        elif conjunct and incb == "Linker":
            conjunct = 2
        elif conjunct and incb == "Extend":
            pass
        else:
            conjunct = 0
        prev_gcb = gcb
    return breaks


def grapheme_texts(text: str) -> list[str]:
    """Extended grapheme clusters of ``text`` as plain strings."""
    if not text:
        return []
    cuts = [0, *_boundaries(text), len(text)]
    return [text[a:b] for a, b in zip(cuts, cuts[1:])]


def segment_graphemes(text: str) -> list[GraphemeCluster]:
    return [GraphemeCluster(t) for t in grapheme_texts(text)]


def segmenter_for(mode: "str | SegmentationMode") -> Callable[[str], list[str]]:
    """Return a ``str -> list[str]`` unit splitter for the given mode."""
    mode = SegmentationMode.parse(mode)
    if mode is SegmentationMode.CHARACTER:
        return segment_characters
    return grapheme_texts

"""Core types and the line tokenizer for interlinear glossed text (IGT)."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple, Optional

# Characters that separate morphemes within a word. "-" marks an affix
# boundary, "=" a clitic boundary. "." is never a boundary: it joins fused
# category labels inside a single gloss (e.g. "run.SG").
AFFIX_BOUNDARY = "-"
CLITIC_BOUNDARY = "="
BOUNDARY_CHARS = (AFFIX_BOUNDARY, CLITIC_BOUNDARY)

# The literal token "0" marks a zero-realized morpheme. It is a real
# morpheme for every metric and abstraction in this package.
NULL_MORPHEME = "0"


class Split(str, Enum):
    """Corpus split a record belongs to."""

    TRAIN = "train"
    EVAL = "eval"
    TEST = "test"


class Morpheme(NamedTuple):
    """One morpheme token plus the boundary that precedes it.

    ``boundary`` is the empty string for the first morpheme of a word,
    otherwise "-" or "=".
    """

    text: str
    boundary: str = ""


@dataclass(frozen=True)
class MorphStructure:
    """A parsed line: words, each a sequence of boundary-joined morphemes."""

    words: tuple[tuple[Morpheme, ...], ...]

    @property
    def word_count(self) -> int:
        return len(self.words)

    @property
    def morpheme_count(self) -> int:
        return sum(len(word) for word in self.words)

    def morpheme_texts(self) -> Iterator[str]:
        """All morpheme tokens in order, flattened across words."""
        for word in self.words:
            for morpheme in word:
                yield morpheme.text

    def word_strings(self) -> list[str]:
        """Each word detokenized back to its surface string."""
        return [_join_word(word) for word in self.words]

    def has_empty_morpheme(self) -> bool:
        """True if any morpheme token is empty (e.g. from "a--b" or "-x")."""
        return any(m.text == "" for word in self.words for m in word)


@dataclass(frozen=True)
class IgtRecord:
    """One IGT example: transcription, gloss line, and optional companions."""

    id: str
    transcription: str
    glosses: str
    source: str
    split: Split
    segmentation: Optional[str] = None
    translation: Optional[str] = None
    glottocode: Optional[str] = None
    metalang_glottocode: Optional[str] = None
    language_name: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.transcription or not self.transcription.strip():
            raise ValueError("transcription must be non-empty")
        if not self.glosses or not self.glosses.strip():
            raise ValueError("glosses must be non-empty")
        if not isinstance(self.split, Split):
            # Accept the plain string form; raises ValueError on anything
            # outside {train, eval, test}.
            object.__setattr__(self, "split", Split(self.split))
        # Optional text fields collapse to None when blank so "absent"
        # has a single representation.
        for name in ("segmentation", "translation", "glottocode",
                     "metalang_glottocode", "language_name"):
            value = getattr(self, name)
            if value is not None and not value.strip():
                object.__setattr__(self, name, None)


def parse_line(line: str) -> MorphStructure:
    """Tokenize a gloss or segmentation line into morphological structure.

    Words are split on runs of whitespace; within a word, "-" and "="
    split morphemes and the boundary kind is recorded. The input is NFC
    normalized first so later comparisons are not confounded by combining
    character encodings. This is a total function: a word made only of
    boundary characters yields empty morpheme tokens, which are kept and
    reported by the corpus audit rather than repaired here.
    """
    line = unicodedata.normalize("NFC", line)
    words = []
    for token in line.split():
        morphemes = []
        current: list[str] = []
        boundary = ""
        for ch in token:
            if ch in BOUNDARY_CHARS:
                morphemes.append(Morpheme("".join(current), boundary))
                current = []
                boundary = ch
            else:
                current.append(ch)
        morphemes.append(Morpheme("".join(current), boundary))
        words.append(tuple(morphemes))
    return MorphStructure(tuple(words))


def detokenize(structure: MorphStructure) -> str:
    """Inverse of parse_line, up to whitespace normalization."""
    return " ".join(_join_word(word) for word in structure.words)


def _join_word(word: tuple[Morpheme, ...]) -> str:
    return "".join(m.boundary + m.text for m in word)


def word_pattern(word: tuple[Morpheme, ...]) -> str:
    """Structure-only shape of one word: every morpheme becomes "x",
    boundary markers stay (e.g. ("cat", "") ("PL", "-") gives "x-x")."""
    return "".join(m.boundary + "x" for m in word)


def is_punctuation_token(token: str) -> bool:
    """True if every character of ``token`` is Unicode punctuation.

    The lone boundary markers "-" and "=" and the null morpheme "0" are
    never punctuation tokens, whatever their Unicode category says.
    """
    if not token or token in BOUNDARY_CHARS or token == NULL_MORPHEME:
        return False
    return all(unicodedata.category(ch).startswith("P") for ch in token)

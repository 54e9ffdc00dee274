"""Encoders and decoders for the three joint-task text formats.

Multitask examples target one line (glosses or segmentation), the
concatenated format targets the segmentation line followed by the gloss
line, and the interleaved format targets a single string of
"GLOSS(morpheme)" units that is aligned by construction. Decoders accept
untrusted model output: by default they recover what they can and report
problems through ``well_formed`` and ``diagnostics``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .core import (
    BOUNDARY_CHARS,
    IgtRecord,
    MorphStructure,
    is_punctuation_token,
    parse_line,
)
from .corpus import AlignmentStatus, detect_misalignment

_SEG_LABEL = "Segmentation:"
_GLOSS_LABEL = "Glosses:"
_OUTPUT_LABEL = "Output:"

# Language presumed when a record names neither language_name nor a
# glottocode; matches the ISO 639 "undetermined" convention.
_UNDETERMINED = "und"


class TaskFormat(Enum):
    MULTITASK_GLOSS = "multitask_gloss"
    MULTITASK_SEG = "multitask_seg"
    CONCATENATED = "concatenated"
    INTERLEAVED = "interleaved"


class EncodeError(ValueError):
    """The record cannot be rendered in the requested format."""


class DecodeError(ValueError):
    """Strict decoding rejected a malformed model output."""


@dataclass(frozen=True)
class DecodedPrediction:
    """Model output turned back into gloss and segmentation lines."""

    glosses: str
    segmentation: Optional[str]
    well_formed: bool
    diagnostics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "segmentation": self.segmentation,
            "glosses": self.glosses,
            "well_formed": self.well_formed,
            "diagnostics": list(self.diagnostics),
        }


@dataclass(frozen=True)
class EncodedExample:
    """A prompt/target pair; ``prompt + target`` is the full example text."""

    id: str
    format: TaskFormat
    prompt: str
    target: str

    @property
    def text(self) -> str:
        return self.prompt + self.target

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "format": self.format.value,
            "prompt": self.prompt,
            "target": self.target,
        }


_HEADERS = {
    TaskFormat.MULTITASK_GLOSS:
        "Predict the glosses for the following text in {lang}.",
    TaskFormat.MULTITASK_SEG:
        "Predict the segmentation for the following text in {lang}.",
    TaskFormat.CONCATENATED:
        "Predict the morphological segmentation and glosses for the "
        "following text in {lang}.",
    TaskFormat.INTERLEAVED:
        "Predict the glosses and morphological segmentation (in "
        "parentheses) for the following text in {lang}.",
}


def encode(record: IgtRecord, fmt: TaskFormat) -> str:
    """Render a record as one training example string."""
    example = encode_example(record, fmt)
    return example.text


def encode_example(record: IgtRecord, fmt: TaskFormat) -> EncodedExample:
    """Render a record as a prompt/target pair.

    The prompt carries the task header, the text line, and the
    translation line when a translation exists. For the multitask and
    interleaved formats the prompt ends with the answer label and the
    target is the bare answer; the concatenated target keeps its
    "Segmentation:" and "Glosses:" labels because the model is expected
    to produce both labeled lines.

    Raises EncodeError when the format needs a segmentation the record
    lacks, or a gloss/segmentation pair that is not aligned.
    """
    lang = record.language_name or record.glottocode or _UNDETERMINED
    lines = [
        _HEADERS[fmt].format(lang=lang),
        f"Text in {lang}: {record.transcription}",
    ]
    if record.translation is not None:
        metalang = record.metalang_glottocode or _UNDETERMINED
        lines.append(f"Translation in {metalang}: {record.translation}")
    context = "\n".join(lines)

    if fmt is TaskFormat.MULTITASK_GLOSS:
        prompt = f"{context}\n{_GLOSS_LABEL} "
        target = record.glosses
    elif fmt is TaskFormat.MULTITASK_SEG:
        _require_segmentation(record, fmt)
        prompt = f"{context}\n{_SEG_LABEL} "
        target = record.segmentation
    elif fmt is TaskFormat.CONCATENATED:
        _require_segmentation(record, fmt)
        _require_aligned(record, fmt)
        prompt = f"{context}\n"
        target = (
            f"{_SEG_LABEL} {record.segmentation}\n{_GLOSS_LABEL} {record.glosses}"
        )
    elif fmt is TaskFormat.INTERLEAVED:
        _require_segmentation(record, fmt)
        body = encode_interleaved_body(
            parse_line(record.segmentation), parse_line(record.glosses)
        )
        prompt = f"{context}\n{_OUTPUT_LABEL} "
        target = body
    else:
        raise EncodeError(f"unknown task format: {fmt!r}")
    return EncodedExample(id=record.id, format=fmt, prompt=prompt, target=target)


def _require_segmentation(record: IgtRecord, fmt: TaskFormat) -> None:
    if record.segmentation is None:
        raise EncodeError(
            f"record {record.id!r} has no segmentation, required by {fmt.value}"
        )


def _require_aligned(record: IgtRecord, fmt: TaskFormat) -> None:
    status = detect_misalignment(record)
    if status is not AlignmentStatus.ALIGNED:
        raise EncodeError(
            f"record {record.id!r} is not aligned ({status.value}), "
            f"required by {fmt.value}"
        )


def encode_interleaved_body(seg: MorphStructure, gloss: MorphStructure) -> str:
    """Weave a segmentation and a gloss structure into one aligned string.

    Each unit is "GLOSS(morpheme)"; units within a word are joined by the
    shared boundary character and words by single spaces. The two
    structures must agree exactly in word count, per-word morpheme count,
    and boundary kinds. Parentheses and backslashes inside tokens are
    backslash-escaped.
    """
    if seg.word_count != gloss.word_count:
        raise EncodeError(
            f"word count mismatch: segmentation has {seg.word_count}, "
            f"glosses have {gloss.word_count}"
        )
    words = []
    seg_strings = seg.word_strings()
    gloss_strings = gloss.word_strings()
    for index, (seg_word, gloss_word) in enumerate(zip(seg.words, gloss.words)):
        if len(seg_word) != len(gloss_word):
            raise EncodeError(
                f"word {index}: segmentation has {len(seg_word)} morphemes, "
                f"glosses have {len(gloss_word)}"
            )
        if _dropped_by_abstraction(seg_strings[index]) != _dropped_by_abstraction(
            gloss_strings[index]
        ):
            raise EncodeError(
                f"word {index}: punctuation-only on one side only, the "
                "decoded lines would not stay aligned"
            )
        parts = []
        for seg_m, gloss_m in zip(seg_word, gloss_word):
            if seg_m.boundary != gloss_m.boundary:
                raise EncodeError(
                    f"word {index}: boundary mismatch "
                    f"({seg_m.boundary!r} vs {gloss_m.boundary!r})"
                )
            parts.append(
                f"{seg_m.boundary}{_escape(gloss_m.text)}({_escape(seg_m.text)})"
            )
        words.append("".join(parts))
    return " ".join(words)


def _dropped_by_abstraction(word_string: str) -> bool:
    # Abstract sequences drop punctuation-only words; empty word strings
    # vanish when the line is re-tokenized. A word that one line keeps
    # and the other loses can never be represented in an aligned pair.
    return not word_string or is_punctuation_token(word_string)


def _escape(text: str) -> str:
    for ch in ("\\", "(", ")"):
        text = text.replace(ch, "\\" + ch)
    return text


def decode_interleaved(output: str, strict: bool = False) -> DecodedPrediction:
    """Parse interleaved model output back into the two lines.

    Grammar per whitespace-separated word: unit ((-|=) unit)*, where a
    unit is GLOSS(morpheme). The gloss may not contain an unescaped
    parenthesis, boundary character, or space; the morpheme may not
    contain an unescaped closing parenthesis, boundary character, or
    space (a boundary inside the parentheses would desynchronize the
    reconstructed lines). By default malformed material is dropped, each
    word keeps its parseable unit prefix, and ``well_formed`` goes false;
    with ``strict`` the first malformation raises DecodeError.
    """
    gloss_words = []
    seg_words = []
    diagnostics = []
    for chunk in output.split():
        units, error = _parse_interleaved_word(chunk)
        if units:
            gloss_word = "".join(boundary + gloss for boundary, gloss, _ in units)
            seg_word = "".join(boundary + morpheme for boundary, _, morpheme in units)
            if _dropped_by_abstraction(gloss_word) != _dropped_by_abstraction(
                seg_word
            ):
                units = []
                error = error or "punctuation-only on one side only"
        if error is not None:
            if strict:
                raise DecodeError(f"malformed word {chunk!r}: {error}")
            if units:
                diagnostics.append(f"truncated word {chunk!r}: {error}")
            else:
                diagnostics.append(f"dropped word {chunk!r}: {error}")
        if units:
            gloss_words.append(gloss_word)
            seg_words.append(seg_word)
    if not gloss_words:
        if strict:
            raise DecodeError("no parseable units in output")
        diagnostics.append("no parseable units in output")
    return DecodedPrediction(
        glosses=" ".join(gloss_words),
        segmentation=" ".join(seg_words),
        well_formed=not diagnostics,
        diagnostics=tuple(diagnostics),
    )


def _parse_interleaved_word(
    chunk: str,
) -> tuple[list[tuple[str, str, str]], Optional[str]]:
    """Parse one word chunk into (boundary, gloss, morpheme) units.

    Returns the parseable unit prefix and an error message, or None when
    the whole chunk parsed.
    """
    units: list[tuple[str, str, str]] = []
    boundary = ""
    i = 0
    n = len(chunk)
    while i < n:
        gloss_chars: list[str] = []
        while i < n and chunk[i] != "(":
            ch = chunk[i]
            if ch == "\\":
                if i + 1 >= n:
                    return units, "dangling escape"
                gloss_chars.append(chunk[i + 1])
                i += 2
                continue
            if ch == ")" or ch in BOUNDARY_CHARS:
                return units, f"unexpected {ch!r} before '('"
            gloss_chars.append(ch)
            i += 1
        if i >= n:
            return units, "unit is missing its parenthesized morpheme"
        i += 1  # consume "("
        morpheme_chars: list[str] = []
        closed = False
        while i < n:
            ch = chunk[i]
            if ch == "\\":
                if i + 1 >= n:
                    return units, "dangling escape"
                morpheme_chars.append(chunk[i + 1])
                i += 2
                continue
            if ch == ")":
                closed = True
                i += 1
                break
            if ch in BOUNDARY_CHARS:
                return units, f"morpheme contains unescaped {ch!r}"
            morpheme_chars.append(ch)
            i += 1
        if not closed:
            return units, "unclosed parenthesis"
        units.append((boundary, "".join(gloss_chars), "".join(morpheme_chars)))
        if i >= n:
            break
        ch = chunk[i]
        if ch not in BOUNDARY_CHARS:
            return units, f"expected a boundary or end after unit, got {ch!r}"
        boundary = ch
        i += 1
        if i >= n:
            return units, "trailing boundary"
    return units, None


def decode_concatenated(output: str, strict: bool = False) -> DecodedPrediction:
    """Extract labeled segmentation and gloss lines from model output.

    Looks for the first "Segmentation:" line, then the first "Glosses:"
    line after it (labels are case-sensitive, surrounding whitespace is
    tolerated). A missing label leaves the output not well formed while
    still returning whatever was found; ``strict`` raises instead.
    """
    lines = output.splitlines()
    seg_value: Optional[str] = None
    seg_index = -1
    for index, raw in enumerate(lines):
        stripped = raw.strip()
        if stripped.startswith(_SEG_LABEL):
            seg_value = stripped[len(_SEG_LABEL):].strip()
            seg_index = index
            break
    gloss_value: Optional[str] = None
    for index, raw in enumerate(lines):
        if index <= seg_index:
            continue
        stripped = raw.strip()
        if stripped.startswith(_GLOSS_LABEL):
            gloss_value = stripped[len(_GLOSS_LABEL):].strip()
            break
    diagnostics = []
    if seg_value is None:
        diagnostics.append(f'no "{_SEG_LABEL}" line found')
    if gloss_value is None:
        diagnostics.append(f'no "{_GLOSS_LABEL}" line found')
    if strict and diagnostics:
        raise DecodeError("; ".join(diagnostics))
    return DecodedPrediction(
        glosses=gloss_value or "",
        segmentation=seg_value,
        well_formed=not diagnostics,
        diagnostics=tuple(diagnostics),
    )

"""Corpus ingestion, normalization, repair, deduplication, and auditing.

The canonical corpus file is UTF-8, one JSON object per line, with keys
id, transcription, segmentation, glosses, translation, glottocode,
metalang_glottocode, language_name, source, and split. Optional fields
are null when absent.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Union

from .core import (
    BOUNDARY_CHARS,
    IgtRecord,
    Split,
    is_punctuation_token,
    parse_line,
    word_pattern,
)

_REQUIRED_KEYS = frozenset({"id", "transcription", "glosses", "source", "split"})
_OPTIONAL_KEYS = frozenset({
    "segmentation", "translation", "glottocode", "metalang_glottocode",
    "language_name",
})
_ALL_KEYS = _REQUIRED_KEYS | _OPTIONAL_KEYS

# JSON key order for canonical output.
_KEY_ORDER = (
    "id", "transcription", "segmentation", "glosses", "translation",
    "glottocode", "metalang_glottocode", "language_name", "source", "split",
)


class CorpusError(ValueError):
    """A corpus file violates the line-delimited JSON contract."""


class AlignmentStatus(Enum):
    ALIGNED = "aligned"
    WORD_COUNT_MISMATCH = "word_count_mismatch"
    SEGMENT_COUNT_MISMATCH = "segment_count_mismatch"
    NO_SEGMENTATION = "no_segmentation"


class RepairAction(Enum):
    KEPT = "kept"
    BLANKED_SEGMENTATION = "blanked_segmentation"
    FORCED_TO_TRAIN = "forced_to_train"


@dataclass(frozen=True)
class AuditReport:
    """Corpus statistics: totals, per-split counts, and defect counts.

    The repair and duplicate fields are predictive: they count what a
    cleaning pass over the same records would blank or remove.
    """

    total_examples: int
    unique_languages: int
    per_split_counts: dict[str, int]
    no_glottocode: int
    no_metalang_glottocode: int
    no_segmentation: int
    no_translation: int
    misaligned: int
    repaired_blanked_segmentation: int
    duplicates_removed: int

    def to_dict(self) -> dict:
        return {
            "total_examples": self.total_examples,
            "unique_languages": self.unique_languages,
            "per_split_counts": dict(self.per_split_counts),
            "no_glottocode": self.no_glottocode,
            "no_metalang_glottocode": self.no_metalang_glottocode,
            "no_segmentation": self.no_segmentation,
            "no_translation": self.no_translation,
            "misaligned": self.misaligned,
            "repaired_blanked_segmentation": self.repaired_blanked_segmentation,
            "duplicates_removed": self.duplicates_removed,
        }


def record_from_json(obj: dict) -> IgtRecord:
    """Build a record from one parsed JSON object, validating its keys."""
    if not isinstance(obj, dict):
        raise CorpusError("record must be a JSON object")
    unknown = set(obj) - _ALL_KEYS
    if unknown:
        raise CorpusError(f"unknown key(s): {', '.join(sorted(unknown))}")
    missing = _REQUIRED_KEYS - set(obj)
    if missing:
        raise CorpusError(f"missing key(s): {', '.join(sorted(missing))}")
    for key in _ALL_KEYS:
        value = obj.get(key)
        if value is not None and not isinstance(value, str):
            raise CorpusError(f"key {key!r} must be a string or null")
    try:
        return IgtRecord(
            id=obj["id"],
            transcription=obj["transcription"],
            glosses=obj["glosses"],
            source=obj["source"],
            split=Split(obj["split"]),
            segmentation=obj.get("segmentation"),
            translation=obj.get("translation"),
            glottocode=obj.get("glottocode"),
            metalang_glottocode=obj.get("metalang_glottocode"),
            language_name=obj.get("language_name"),
        )
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc


def record_to_json(record: IgtRecord) -> dict:
    obj = {
        "id": record.id,
        "transcription": record.transcription,
        "segmentation": record.segmentation,
        "glosses": record.glosses,
        "translation": record.translation,
        "glottocode": record.glottocode,
        "metalang_glottocode": record.metalang_glottocode,
        "language_name": record.language_name,
        "source": record.source,
        "split": record.split.value,
    }
    return {key: obj[key] for key in _KEY_ORDER}


def iter_corpus(source: Union[str, Path, IO[str]]) -> Iterator[IgtRecord]:
    """Stream records from a corpus file, one per line, in file order.

    Raises CorpusError naming the offending line number on malformed
    JSON, unknown or missing keys, an unknown split value, or an invalid
    record. Blank lines are skipped.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as handle:
            yield from _iter_lines(handle)
    else:
        yield from _iter_lines(source)


def _iter_lines(handle: IO[str]) -> Iterator[IgtRecord]:
    for line_number, line in enumerate(handle, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {line_number}: invalid JSON ({exc.msg})") from exc
        try:
            yield record_from_json(obj)
        except CorpusError as exc:
            raise CorpusError(f"line {line_number}: {exc}") from exc


def load_corpus(source: Union[str, Path, IO[str]]) -> list[IgtRecord]:
    return list(iter_corpus(source))


def write_corpus(records: Iterable[IgtRecord], sink: Union[str, Path, IO[str]]) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as handle:
            _write_lines(records, handle)
    else:
        _write_lines(records, sink)


def _write_lines(records: Iterable[IgtRecord], handle: IO[str]) -> None:
    for record in records:
        handle.write(json.dumps(record_to_json(record), ensure_ascii=False))
        handle.write("\n")


def apply_replacements(
    record: IgtRecord, replacements: Iterable[tuple[str, str]]
) -> IgtRecord:
    """Literal find/replace over the three annotation lines.

    The generic hook for source-specific formatting fixes (a stray ",."
    inside glosses, for example) that are not worth dedicated code.
    Replacements apply in order to transcription, segmentation, and gloss
    lines; the translation is left alone. Raises ValueError if a
    replacement empties a required line.
    """
    transcription = record.transcription
    segmentation = record.segmentation
    glosses = record.glosses
    for old, new in replacements:
        transcription = transcription.replace(old, new)
        glosses = glosses.replace(old, new)
        if segmentation is not None:
            segmentation = segmentation.replace(old, new)
    if (transcription == record.transcription and glosses == record.glosses
            and segmentation == record.segmentation):
        return record
    return replace(
        record,
        transcription=transcription,
        segmentation=segmentation,
        glosses=glosses,
    )


def normalize_punctuation(record: IgtRecord) -> IgtRecord:
    """Detach sentence-ending punctuation into standalone tokens.

    A run of punctuation attached to the end of the final word of the
    transcription, segmentation, or gloss line is split off so each
    punctuation character stands alone surrounded by spaces. Punctuation
    in any non-final position of a token (gloss-internal ".", for
    example) is untouched. Lines are NFC normalized and whitespace runs
    collapse to single spaces; the whole operation is idempotent.
    """
    transcription = _detach_trailing_punctuation(record.transcription)
    glosses = _detach_trailing_punctuation(record.glosses)
    segmentation = (
        None if record.segmentation is None
        else _detach_trailing_punctuation(record.segmentation)
    )
    translation = (
        None if record.translation is None else _normalize_text(record.translation)
    )
    if (transcription == record.transcription and glosses == record.glosses
            and segmentation == record.segmentation
            and translation == record.translation):
        return record
    return replace(
        record,
        transcription=transcription,
        glosses=glosses,
        segmentation=segmentation,
        translation=translation,
    )


def _normalize_text(text: str) -> str:
    return " ".join(unicodedata.normalize("NFC", text).split())


def _is_detachable(ch: str) -> bool:
    # Boundary markers are structural, never detached.
    return ch not in BOUNDARY_CHARS and unicodedata.category(ch).startswith("P")


def _detach_trailing_punctuation(line: str) -> str:
    tokens = unicodedata.normalize("NFC", line).split()
    if tokens:
        final = tokens[-1]
        head_end = len(final)
        while head_end > 0 and _is_detachable(final[head_end - 1]):
            head_end -= 1
        # Only detach when a word remains; a token that is pure
        # punctuation is already standalone.
        if 0 < head_end < len(final):
            tokens[-1:] = [final[:head_end], *final[head_end:]]
    return " ".join(tokens)


def detect_misalignment(record: IgtRecord) -> AlignmentStatus:
    """Compare segmentation and gloss line structure.

    Punctuation-only tokens are ignored on both sides, since punctuation
    normalization adds standalone tokens that gloss lines may not carry.
    Word pairs must agree in morpheme count and boundary kinds; "aligned"
    therefore guarantees an alignment score of exactly 1.0.
    """
    if record.segmentation is None:
        return AlignmentStatus.NO_SEGMENTATION
    seg_words = _content_words(record.segmentation)
    gloss_words = _content_words(record.glosses)
    if len(seg_words) != len(gloss_words):
        return AlignmentStatus.WORD_COUNT_MISMATCH
    for seg_word, gloss_word in zip(seg_words, gloss_words):
        if word_pattern(seg_word) != word_pattern(gloss_word):
            return AlignmentStatus.SEGMENT_COUNT_MISMATCH
    return AlignmentStatus.ALIGNED


def _content_words(line: str) -> list[tuple]:
    structure = parse_line(line)
    return [
        word
        for word, surface in zip(structure.words, structure.word_strings())
        if not is_punctuation_token(surface)
    ]


def repair(record: IgtRecord) -> tuple[IgtRecord, RepairAction]:
    """Resolve a misaligned record.

    A misaligned segmentation that carries no boundary markers while the
    gloss line does is treated as junk and blanked. Any other misaligned
    record keeps its segmentation but is moved to the training split so
    evaluation sets stay clean. Aligned and unsegmented records pass
    through unchanged.
    """
    status = detect_misalignment(record)
    if status in (AlignmentStatus.ALIGNED, AlignmentStatus.NO_SEGMENTATION):
        return record, RepairAction.KEPT
    if _would_blank(record):
        return replace(record, segmentation=None), RepairAction.BLANKED_SEGMENTATION
    if record.split is Split.TRAIN:
        return record, RepairAction.FORCED_TO_TRAIN
    return replace(record, split=Split.TRAIN), RepairAction.FORCED_TO_TRAIN


def _would_blank(record: IgtRecord) -> bool:
    assert record.segmentation is not None
    seg_has_markers = any(ch in record.segmentation for ch in BOUNDARY_CHARS)
    gloss_has_markers = any(ch in record.glosses for ch in BOUNDARY_CHARS)
    return not seg_has_markers and gloss_has_markers


def _dedup_key(record: IgtRecord) -> tuple[str, str, Optional[str]]:
    return (
        _normalize_text(record.transcription),
        _normalize_text(record.glosses),
        record.glottocode,
    )


def dedup(records: Iterable[IgtRecord]) -> list[IgtRecord]:
    """Drop later records whose (transcription, glosses, glottocode) key,
    after NFC and whitespace normalization, was already seen. Stable."""
    seen: set = set()
    kept = []
    for record in records:
        key = _dedup_key(record)
        if key in seen:
            continue
        seen.add(key)
        kept.append(record)
    return kept


def is_low_quality(record: IgtRecord) -> bool:
    """True when the gloss line carries no content (punctuation only)."""
    tokens = record.glosses.split()
    return not tokens or all(is_punctuation_token(t) for t in tokens)


def audit(records: Iterable[IgtRecord]) -> AuditReport:
    """Count corpus statistics in a single streaming pass."""
    total = 0
    languages: set = set()
    per_split = {split.value: 0 for split in Split}
    no_glottocode = 0
    no_metalang = 0
    no_segmentation = 0
    no_translation = 0
    misaligned = 0
    would_blank = 0
    duplicates = 0
    seen_keys: set = set()
    for record in records:
        total += 1
        per_split[record.split.value] += 1
        if record.glottocode is None:
            no_glottocode += 1
        else:
            languages.add(record.glottocode)
        if record.metalang_glottocode is None:
            no_metalang += 1
        if record.segmentation is None:
            no_segmentation += 1
        if record.translation is None:
            no_translation += 1
        status = detect_misalignment(record)
        if status in (AlignmentStatus.WORD_COUNT_MISMATCH,
                      AlignmentStatus.SEGMENT_COUNT_MISMATCH):
            misaligned += 1
            if _would_blank(record):
                would_blank += 1
        key = _dedup_key(record)
        if key in seen_keys:
            duplicates += 1
        else:
            seen_keys.add(key)
    return AuditReport(
        total_examples=total,
        unique_languages=len(languages),
        per_split_counts=per_split,
        no_glottocode=no_glottocode,
        no_metalang_glottocode=no_metalang,
        no_segmentation=no_segmentation,
        no_translation=no_translation,
        misaligned=misaligned,
        repaired_blanked_segmentation=would_blank,
        duplicates_removed=duplicates,
    )


def normalize_corpus(records: Iterable[IgtRecord]) -> Iterator[IgtRecord]:
    """Full cleaning pass: punctuation normalization, low-quality filter,
    misalignment repair, then deduplication. Streaming and idempotent; no
    record it yields is both misaligned and outside the training split.
    """
    seen: set = set()
    for record in records:
        record = normalize_punctuation(record)
        if is_low_quality(record):
            continue
        record, _ = repair(record)
        key = _dedup_key(record)
        if key in seen:
            continue
        seen.add(key)
        yield record


def find_empty_morphemes(record: IgtRecord) -> list[str]:
    """Names of line fields containing empty morpheme tokens (from inputs
    like "a--b"), which parse losslessly but usually indicate bad data."""
    flagged = []
    if parse_line(record.glosses).has_empty_morpheme():
        flagged.append("glosses")
    if record.segmentation is not None:
        if parse_line(record.segmentation).has_empty_morpheme():
            flagged.append("segmentation")
    return flagged

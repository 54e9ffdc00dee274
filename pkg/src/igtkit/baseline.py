"""Frequency-lexicon fallback glosser and segmenter.

Builds lookup tables from training records only: surface word to
segmentation, surface word to whole-word gloss group, and morpheme to
gloss. Prediction walks each transcription word through three tiers
(known segmentation, known whole-word gloss, unknown placeholder) and is
aligned by construction, so it is a safe fallback for languages where a
neural model's expected error rate is unacceptable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Optional, Union

from .core import (
    BOUNDARY_CHARS,
    IgtRecord,
    MorphStructure,
    Split,
    is_punctuation_token,
    parse_line,
)
from .corpus import AlignmentStatus, detect_misalignment
from .formats import DecodedPrediction

# Placeholder for an unknown gloss. It contains no boundary or separator
# character and is not punctuation-only, so downstream metrics still
# parse it and the alignment abstraction keeps the word on both lines.
UNKNOWN_GLOSS = "UNK"

# Bucket for records that carry no glottocode.
UNDETERMINED = "und"


@dataclass
class GlossLexicon:
    """Frequency tables learned from the training split.

    Each table maps glottocode, then lookup key, to a candidate
    frequency map: ``table[glottocode][key][candidate] -> count``.
    """

    morpheme_to_gloss: dict = field(default_factory=dict)
    word_to_seg: dict = field(default_factory=dict)
    word_to_gloss: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "morpheme_to_gloss": self.morpheme_to_gloss,
            "word_to_seg": self.word_to_seg,
            "word_to_gloss": self.word_to_gloss,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "GlossLexicon":
        return cls(
            morpheme_to_gloss=obj.get("morpheme_to_gloss", {}),
            word_to_seg=obj.get("word_to_seg", {}),
            word_to_gloss=obj.get("word_to_gloss", {}),
        )

    def save(self, sink: Union[str, Path, IO[str]]) -> None:
        payload = json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(payload + "\n", encoding="utf-8")
        else:
            sink.write(payload + "\n")

    @classmethod
    def load(cls, source: Union[str, Path, IO[str]]) -> "GlossLexicon":
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read()
        return cls.from_dict(json.loads(text))


def _bump(table: dict, lang: str, key: str, candidate: str) -> None:
    lang_table = table.setdefault(lang, {})
    candidates = lang_table.setdefault(key, {})
    candidates[candidate] = candidates.get(candidate, 0) + 1


def build_lexicon(records: Iterable[IgtRecord]) -> GlossLexicon:
    """Count lookup candidates from the training split.

    Word-level tables pair surface transcription words with segmentation
    or gloss words position-wise, skipping punctuation-only tokens, and
    only when the two lines then agree in word count. The morpheme table
    walks segmentation and gloss morphemes in parallel, which requires
    the record to be aligned. Eval and test records contribute nothing.
    """
    lexicon = GlossLexicon()
    for record in records:
        if record.split is not Split.TRAIN:
            continue
        lang = record.glottocode or UNDETERMINED
        surface_words = _content_word_strings(parse_line(record.transcription))
        gloss = parse_line(record.glosses)
        gloss_words = _content_words(gloss)
        if len(surface_words) == len(gloss_words):
            for word, gloss_word in zip(surface_words, gloss_words):
                _bump(lexicon.word_to_gloss, lang, word, _word_string(gloss_word))
        if record.segmentation is None:
            continue
        seg = parse_line(record.segmentation)
        seg_words = _content_words(seg)
        if len(surface_words) == len(seg_words):
            for word, seg_word in zip(surface_words, seg_words):
                _bump(lexicon.word_to_seg, lang, word, _word_string(seg_word))
        if detect_misalignment(record) is AlignmentStatus.ALIGNED:
            for seg_word, gloss_word in zip(seg_words, gloss_words):
                for seg_m, gloss_m in zip(seg_word, gloss_word):
                    _bump(lexicon.morpheme_to_gloss, lang, seg_m.text, gloss_m.text)
    return lexicon


def _content_words(structure: MorphStructure) -> list[tuple]:
    return [
        word
        for word, surface in zip(structure.words, structure.word_strings())
        if not is_punctuation_token(surface)
    ]


def _content_word_strings(structure: MorphStructure) -> list[str]:
    return [
        surface for surface in structure.word_strings()
        if not is_punctuation_token(surface)
    ]


def _word_string(word: tuple) -> str:
    return "".join(m.boundary + m.text for m in word)


def _best(table: dict, lang: str, key: str) -> Optional[str]:
    candidates = table.get(lang, {}).get(key)
    if not candidates:
        return None
    top = max(candidates.values())
    # Deterministic tie-break: lexicographically smallest candidate.
    return min(c for c, count in candidates.items() if count == top)


def predict(
    lexicon: GlossLexicon, glottocode: Optional[str], transcription: str
) -> DecodedPrediction:
    """Gloss and segment a transcription by lexicon lookup.

    Per word: a known segmentation is used and each of its morphemes
    glossed by its most frequent gloss (unknown morphemes get "UNK");
    otherwise a known whole-word gloss group is used with the word left
    unsegmented; otherwise the word is echoed unsegmented with gloss
    "UNK". Punctuation-only words are skipped, matching corpus lines
    which carry sentence punctuation only on the transcription. Every
    tie breaks to the lexicographically smallest candidate, and output
    glosses mirror output segmentation boundaries exactly, so prediction
    is deterministic and always perfectly aligned.
    """
    lang = glottocode or UNDETERMINED
    seg_words = []
    gloss_words = []
    diagnostics = []
    for word in _content_word_strings(parse_line(transcription)):
        segmentation = _best(lexicon.word_to_seg, lang, word)
        if segmentation is not None:
            parsed = parse_line(segmentation).words
            morphemes = parsed[0] if parsed else ()
            glosses = []
            for morpheme in morphemes:
                gloss = _best(lexicon.morpheme_to_gloss, lang, morpheme.text)
                if gloss is None:
                    gloss = UNKNOWN_GLOSS
                    diagnostics.append(f"unknown morpheme {morpheme.text!r}")
                glosses.append(morpheme.boundary + gloss)
            seg_words.append(segmentation)
            gloss_words.append("".join(glosses))
            continue
        gloss_group = _best(lexicon.word_to_gloss, lang, word)
        if gloss_group is not None:
            seg_words.append(word)
            gloss_words.append(_fuse_gloss_group(gloss_group))
            continue
        seg_words.append(word)
        gloss_words.append(UNKNOWN_GLOSS)
        diagnostics.append(f"unknown word {word!r}")
    return DecodedPrediction(
        glosses=" ".join(gloss_words),
        segmentation=" ".join(seg_words),
        well_formed=True,
        diagnostics=tuple(diagnostics),
    )


def _fuse_gloss_group(gloss_group: str) -> str:
    # A multi-morpheme gloss group attached to an unsegmented word keeps
    # its labels but joins them with ".", the convention for fused
    # categories, so the output stays aligned one word to one gloss.
    for boundary in BOUNDARY_CHARS:
        gloss_group = gloss_group.replace(boundary, ".")
    return gloss_group

"""Evaluation metrics for joint glossing and segmentation.

Glossing is scored by morpheme error rate (edit distance over morpheme
tokens with a word-separator sentinel inserted between words), word and
character error rates, position-wise accuracies, and BLEU at morpheme,
word, and character granularity. Segmentation is scored by a multiset
precision/recall F1, character error rate, and whole-word accuracy. The
alignment score measures structural agreement between a gloss line and a
segmentation line with no reference to any gold label.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .core import (
    MorphStructure,
    is_punctuation_token,
    parse_line,
    word_pattern,
)

# A line whose morphemes have all been replaced by "x", with boundary
# markers and word spaces preserved and punctuation-only words dropped.
AbstractSequence = str

BLEU_MAX_ORDER = 4


class _SepType:
    """Word-separator sentinel; never equal to any real gloss token."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "[SEP]"


SEP = _SepType()

Token = Union[str, _SepType]


def edit_distance(a: Sequence, b: Sequence) -> int:
    """Levenshtein distance with unit-cost insertions, deletions, and
    substitutions. Works on strings and on token lists alike."""
    if a == b:
        return 0
    len_a, len_b = len(a), len(b)
    if len_a == 0:
        return len_b
    if len_b == 0:
        return len_a
    if len_a > len_b:
        a, b = b, a
        len_a, len_b = len_b, len_a
    previous = list(range(len_a + 1))
    for i in range(1, len_b + 1):
        current = [i] + [0] * len_a
        b_item = b[i - 1]
        for j in range(1, len_a + 1):
            if a[j - 1] == b_item:
                current[j] = previous[j - 1]
            else:
                current[j] = 1 + min(
                    previous[j],      # deletion
                    current[j - 1],   # insertion
                    previous[j - 1],  # substitution
                )
        previous = current
    return previous[len_a]


def sep_tokens(structure: MorphStructure) -> list[Token]:
    """Morpheme tokens flattened with one SEP sentinel between words."""
    tokens: list[Token] = []
    for index, word in enumerate(structure.words):
        if index:
            tokens.append(SEP)
        tokens.extend(m.text for m in word)
    return tokens


def mer(gold_gloss_line: str, pred_gloss_line: str) -> float:
    """Morpheme error rate between two gloss lines.

    Both lines are parsed into morphemes, a separator sentinel is inserted
    between words, and the edit distance is normalized to the gold sequence
    length (separators included). Scores above 1 are possible when the
    prediction is much longer than the gold line.
    """
    numerator, denominator = _mer_counts(
        parse_line(gold_gloss_line), parse_line(pred_gloss_line)
    )
    if denominator == 0:
        raise ValueError("MER is undefined for an empty gold gloss line")
    return numerator / denominator


def _mer_counts(gold: MorphStructure, pred: MorphStructure) -> tuple[int, int]:
    gold_tokens = sep_tokens(gold)
    pred_tokens = sep_tokens(pred)
    return edit_distance(gold_tokens, pred_tokens), len(gold_tokens)


def wer(gold_line: str, pred_line: str) -> float:
    """Word error rate: edit distance over whitespace tokens."""
    gold_words = _normalize(gold_line).split()
    if not gold_words:
        raise ValueError("WER is undefined for an empty gold line")
    return edit_distance(gold_words, _normalize(pred_line).split()) / len(gold_words)


def cer(gold_line: str, pred_line: str) -> float:
    """Character error rate over NFC-normalized Unicode scalar values."""
    gold_chars = _normalize(gold_line)
    if not gold_chars:
        raise ValueError("CER is undefined for an empty gold line")
    return edit_distance(gold_chars, _normalize(pred_line)) / len(gold_chars)


def _normalize(line: str) -> str:
    # NFC plus whitespace-run collapse, same treatment parse_line applies.
    return " ".join(unicodedata.normalize("NFC", line).split())


def morpheme_accuracy(gold_gloss_line: str, pred_gloss_line: str) -> float:
    """Fraction of gold morphemes matched position-wise within each word.

    Surplus predicted words or morphemes contribute nothing; a prediction
    shifted by one word scores only its coincidental matches.
    """
    matches, total = _morpheme_accuracy_counts(
        parse_line(gold_gloss_line), parse_line(pred_gloss_line)
    )
    if total == 0:
        raise ValueError("morpheme accuracy is undefined for an empty gold line")
    return matches / total


def _morpheme_accuracy_counts(
    gold: MorphStructure, pred: MorphStructure
) -> tuple[int, int]:
    total = gold.morpheme_count
    matches = 0
    for gold_word, pred_word in zip(gold.words, pred.words):
        for gold_m, pred_m in zip(gold_word, pred_word):
            if gold_m.text == pred_m.text:
                matches += 1
    return matches, total


def word_accuracy(gold_line: str, pred_line: str) -> float:
    """Fraction of gold words whose predicted word is string-identical,
    boundaries included. Missing predicted words count as wrong."""
    matches, total = _word_accuracy_counts(
        parse_line(gold_line), parse_line(pred_line)
    )
    if total == 0:
        raise ValueError("word accuracy is undefined for an empty gold line")
    return matches / total


# Whole-word accuracy for segmentation lines is the same comparison.
seg_word_accuracy = word_accuracy


def _word_accuracy_counts(
    gold: MorphStructure, pred: MorphStructure
) -> tuple[int, int]:
    gold_words = gold.word_strings()
    pred_words = pred.word_strings()
    matches = sum(1 for g, p in zip(gold_words, pred_words) if g == p)
    return matches, len(gold_words)


def seg_f1(gold_seg_line: str, pred_seg_line: str) -> float:
    """Multiset F1 over morpheme tokens of two segmentation lines.

    Precision counts predicted morphemes also present in the gold line,
    recall the reverse; repeated morphemes are matched at most as often
    as they occur on the other side. Both lines empty scores 1, exactly
    one empty scores 0.
    """
    counts = _seg_f1_counts(parse_line(gold_seg_line), parse_line(pred_seg_line))
    if counts["gold"] == 0 and counts["pred"] == 0:
        return 1.0
    return _f1_from_counts(counts)


def _seg_f1_counts(gold: MorphStructure, pred: MorphStructure) -> dict[str, int]:
    gold_counter = Counter(gold.morpheme_texts())
    pred_counter = Counter(pred.morpheme_texts())
    overlap = sum((gold_counter & pred_counter).values())
    return {
        "overlap": overlap,
        "pred": sum(pred_counter.values()),
        "gold": sum(gold_counter.values()),
    }


def _f1_from_counts(counts: dict[str, int]) -> float:
    precision = counts["overlap"] / counts["pred"] if counts["pred"] else 0.0
    recall = counts["overlap"] / counts["gold"] if counts["gold"] else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def bleu(gold_line: str, pred_line: str, granularity: str = "word") -> float:
    """BLEU up to 4-grams with brevity penalty for a single line pair.

    ``granularity`` selects the unit sequence: "morpheme" (flattened
    morpheme tokens, no separators), "word" (whitespace tokens), or
    "char" (Unicode scalar values of the normalized line). Zero-match
    orders above unigram get add-one smoothing; no unigram match at all,
    or an empty input, scores 0.
    """
    stats = _bleu_counts(
        _bleu_units(gold_line, granularity), _bleu_units(pred_line, granularity)
    )
    return _bleu_from_counts(stats)


def _bleu_units(line: str, granularity: str) -> Sequence[str]:
    if granularity == "morpheme":
        return list(parse_line(line).morpheme_texts())
    if granularity == "word":
        return _normalize(line).split()
    if granularity == "char":
        return _normalize(line)
    raise ValueError(f"unknown BLEU granularity: {granularity!r}")


def _bleu_counts(gold: Sequence[str], pred: Sequence[str]) -> dict:
    matches = [0] * BLEU_MAX_ORDER
    totals = [0] * BLEU_MAX_ORDER
    for order in range(1, BLEU_MAX_ORDER + 1):
        pred_ngrams = _ngrams(pred, order)
        if not pred_ngrams:
            continue
        gold_ngrams = _ngrams(gold, order)
        totals[order - 1] = sum(pred_ngrams.values())
        matches[order - 1] = sum(
            min(count, gold_ngrams[ngram])
            for ngram, count in pred_ngrams.items()
            if ngram in gold_ngrams
        )
    return {
        "matches": matches,
        "totals": totals,
        "pred_len": len(pred),
        "gold_len": len(gold),
        "examples": 1,
    }


def _ngrams(units: Sequence[str], order: int) -> Counter:
    return Counter(
        tuple(units[i : i + order]) for i in range(len(units) - order + 1)
    )


def _bleu_from_counts(stats: dict) -> float:
    pred_len, gold_len = stats["pred_len"], stats["gold_len"]
    if pred_len == 0 or gold_len == 0:
        return 0.0
    matches, totals = stats["matches"], stats["totals"]
    if matches[0] == 0:
        return 0.0
    # Add-one smoothing per example on zero-match orders; when counts are
    # pooled across N examples the constant scales to N, so aggregating
    # identical reports is a fixed point.
    smoothing = stats.get("examples", 1)
    log_sum = 0.0
    for order in range(BLEU_MAX_ORDER):
        if matches[order] > 0:
            precision = matches[order] / totals[order]
        else:
            precision = smoothing / (totals[order] + smoothing)
        log_sum += math.log(precision)
    geometric_mean = math.exp(log_sum / BLEU_MAX_ORDER)
    if pred_len >= gold_len:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - gold_len / pred_len)
    return brevity_penalty * geometric_mean


def abstract(line: str) -> AbstractSequence:
    """Reduce a line to its morphological structure.

    Punctuation-only words are dropped, every remaining morpheme becomes
    a single "x", and boundary markers and word spaces survive unchanged.
    """
    structure = parse_line(line)
    patterns = []
    for word, surface in zip(structure.words, structure.word_strings()):
        if is_punctuation_token(surface):
            continue
        patterns.append(word_pattern(word))
    return " ".join(patterns)


def alignment_score(gloss_line: str, seg_line: str) -> float:
    """Structural agreement between a gloss line and a segmentation line.

    One minus the character edit distance between the two abstract
    sequences, normalized by the longer one. Needs no gold reference: a
    prediction can score 1.0 while being entirely wrong, as long as its
    glosses and segmentation agree morpheme for morpheme. Two empty
    abstractions are vacuously aligned (1.0).
    """
    numerator, denominator = _alignment_counts(abstract(gloss_line), abstract(seg_line))
    if denominator == 0:
        return 1.0
    return 1.0 - numerator / denominator


def _alignment_counts(gloss_abstract: str, seg_abstract: str) -> tuple[int, int]:
    return (
        edit_distance(gloss_abstract, seg_abstract),
        max(len(gloss_abstract), len(seg_abstract)),
    )


_RATIO_KEYS = ("mer", "wer", "cer", "morpheme_accuracy", "word_accuracy",
               "seg_cer", "seg_word_accuracy")
_BLEU_KEYS = ("bleu_morpheme", "bleu_word", "bleu_char")


@dataclass(frozen=True)
class MetricReport:
    """Per-example or aggregated metric values plus their raw counts.

    Every ratio is recomputable from ``counts``; undefined metrics (for
    example segmentation scores when the gold record has no segmentation)
    are None and carry no counts entry.
    """

    mer: Optional[float]
    wer: Optional[float]
    cer: Optional[float]
    morpheme_accuracy: Optional[float]
    word_accuracy: Optional[float]
    bleu_morpheme: Optional[float]
    bleu_word: Optional[float]
    bleu_char: Optional[float]
    seg_f1: Optional[float]
    seg_cer: Optional[float]
    seg_word_accuracy: Optional[float]
    alignment: Optional[float]
    counts: dict

    @classmethod
    def from_counts(cls, counts: dict) -> "MetricReport":
        values: dict[str, Optional[float]] = {}
        for key in _RATIO_KEYS:
            entry = counts.get(key)
            if entry is None or entry["den"] == 0:
                values[key] = None
            else:
                values[key] = entry["num"] / entry["den"]
        for key in _BLEU_KEYS:
            entry = counts.get(key)
            values[key] = None if entry is None else _bleu_from_counts(entry)
        f1_entry = counts.get("seg_f1")
        if f1_entry is None or (f1_entry["gold"] == 0 and f1_entry["pred"] == 0):
            values["seg_f1"] = None
        else:
            values["seg_f1"] = _f1_from_counts(f1_entry)
        alignment_entry = counts.get("alignment")
        if alignment_entry is None:
            values["alignment"] = None
        elif alignment_entry["den"] == 0:
            values["alignment"] = 1.0
        else:
            values["alignment"] = 1.0 - alignment_entry["num"] / alignment_entry["den"]
        return cls(counts=counts, **values)

    def to_dict(self) -> dict:
        return {
            "mer": self.mer,
            "wer": self.wer,
            "cer": self.cer,
            "morpheme_accuracy": self.morpheme_accuracy,
            "word_accuracy": self.word_accuracy,
            "bleu_morpheme": self.bleu_morpheme,
            "bleu_word": self.bleu_word,
            "bleu_char": self.bleu_char,
            "seg_f1": self.seg_f1,
            "seg_cer": self.seg_cer,
            "seg_word_accuracy": self.seg_word_accuracy,
            "alignment": self.alignment,
            "counts": self.counts,
        }


def score_pair(
    gold_glosses: str,
    pred_glosses: str,
    gold_segmentation: Optional[str] = None,
    pred_segmentation: Optional[str] = None,
) -> MetricReport:
    """Score one prediction against one gold record.

    Gloss metrics always apply (the gold gloss line must be non-empty).
    Segmentation metrics apply only when the gold record carries a
    segmentation; a missing predicted segmentation then counts as empty.
    The alignment score is computed from the prediction alone and is None
    when the prediction has no segmentation line.
    """
    gold_gloss = parse_line(gold_glosses)
    pred_gloss = parse_line(pred_glosses)
    if gold_gloss.word_count == 0:
        raise ValueError("cannot score against an empty gold gloss line")

    gold_words = gold_gloss.word_strings()
    pred_words = pred_gloss.word_strings()
    gold_line = " ".join(gold_words)
    pred_line = " ".join(pred_words)
    gold_morphemes = list(gold_gloss.morpheme_texts())
    pred_morphemes = list(pred_gloss.morpheme_texts())

    mer_num, mer_den = _mer_counts(gold_gloss, pred_gloss)
    acc_num, acc_den = _morpheme_accuracy_counts(gold_gloss, pred_gloss)
    wacc_num, wacc_den = _word_accuracy_counts(gold_gloss, pred_gloss)
    counts: dict = {
        "mer": {"num": mer_num, "den": mer_den},
        "wer": {"num": edit_distance(gold_words, pred_words), "den": len(gold_words)},
        "cer": {"num": edit_distance(gold_line, pred_line), "den": len(gold_line)},
        "morpheme_accuracy": {"num": acc_num, "den": acc_den},
        "word_accuracy": {"num": wacc_num, "den": wacc_den},
        "bleu_morpheme": _bleu_counts(gold_morphemes, pred_morphemes),
        "bleu_word": _bleu_counts(gold_words, pred_words),
        "bleu_char": _bleu_counts(gold_line, pred_line),
    }

    if gold_segmentation is not None:
        gold_seg = parse_line(gold_segmentation)
        pred_seg = parse_line(pred_segmentation or "")
        gold_seg_words = gold_seg.word_strings()
        gold_seg_line = " ".join(gold_seg_words)
        pred_seg_line = " ".join(pred_seg.word_strings())
        seg_wacc_num, seg_wacc_den = _word_accuracy_counts(gold_seg, pred_seg)
        counts["seg_f1"] = _seg_f1_counts(gold_seg, pred_seg)
        counts["seg_cer"] = {
            "num": edit_distance(gold_seg_line, pred_seg_line),
            "den": len(gold_seg_line),
        }
        counts["seg_word_accuracy"] = {"num": seg_wacc_num, "den": seg_wacc_den}

    if pred_segmentation is not None:
        numerator, denominator = _alignment_counts(
            abstract(pred_glosses), abstract(pred_segmentation)
        )
        counts["alignment"] = {"num": numerator, "den": denominator}

    return MetricReport.from_counts(counts)


def merge_counts(total: dict, counts: dict) -> None:
    """Accumulate one report's raw counts into a running total, in place."""
    for key, entry in counts.items():
        if key not in total:
            total[key] = {
                name: list(value) if isinstance(value, list) else value
                for name, value in entry.items()
            }
            continue
        target = total[key]
        for name, value in entry.items():
            if isinstance(value, list):
                target[name] = [a + b for a, b in zip(target[name], value)]
            else:
                target[name] += value


def aggregate(reports: Iterable[MetricReport]) -> MetricReport:
    """Micro-average: ratios are recomputed from summed counts.

    Aggregation is associative and order-independent; group reports by
    any key (such as glottocode) before calling to get per-group scores.
    """
    summed: dict = {}
    total = 0
    for report in reports:
        total += 1
        merge_counts(summed, report.counts)
    if total == 0:
        raise ValueError("cannot aggregate zero metric reports")
    return MetricReport.from_counts(summed)

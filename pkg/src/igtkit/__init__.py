"""igtkit: parsing, auditing, scoring, and format codecs for interlinear
glossed text corpora, plus a frequency-lexicon fallback glosser."""

from .analytics import GateDecision, RegressionFit, fit, gate, reward
from .baseline import GlossLexicon, build_lexicon, predict
from .core import (
    IgtRecord,
    Morpheme,
    MorphStructure,
    Split,
    detokenize,
    is_punctuation_token,
    parse_line,
)
from .corpus import (
    AlignmentStatus,
    AuditReport,
    CorpusError,
    RepairAction,
    apply_replacements,
    audit,
    dedup,
    detect_misalignment,
    iter_corpus,
    load_corpus,
    normalize_corpus,
    normalize_punctuation,
    repair,
    write_corpus,
)
from .formats import (
    DecodedPrediction,
    DecodeError,
    EncodedExample,
    EncodeError,
    TaskFormat,
    decode_concatenated,
    decode_interleaved,
    encode,
    encode_example,
    encode_interleaved_body,
)
from .metrics import (
    SEP,
    MetricReport,
    abstract,
    aggregate,
    alignment_score,
    bleu,
    cer,
    edit_distance,
    mer,
    morpheme_accuracy,
    score_pair,
    seg_f1,
    seg_word_accuracy,
    wer,
    word_accuracy,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentStatus",
    "AuditReport",
    "CorpusError",
    "DecodeError",
    "DecodedPrediction",
    "EncodeError",
    "EncodedExample",
    "GateDecision",
    "GlossLexicon",
    "IgtRecord",
    "MetricReport",
    "Morpheme",
    "MorphStructure",
    "RegressionFit",
    "RepairAction",
    "SEP",
    "Split",
    "TaskFormat",
    "abstract",
    "aggregate",
    "alignment_score",
    "apply_replacements",
    "audit",
    "bleu",
    "build_lexicon",
    "cer",
    "decode_concatenated",
    "decode_interleaved",
    "dedup",
    "detect_misalignment",
    "detokenize",
    "edit_distance",
    "encode",
    "encode_example",
    "encode_interleaved_body",
    "fit",
    "gate",
    "is_punctuation_token",
    "iter_corpus",
    "load_corpus",
    "mer",
    "morpheme_accuracy",
    "normalize_corpus",
    "normalize_punctuation",
    "parse_line",
    "predict",
    "repair",
    "reward",
    "score_pair",
    "seg_f1",
    "seg_word_accuracy",
    "wer",
    "word_accuracy",
    "write_corpus",
]

from __future__ import annotations

import io
import json

import pytest
from hypothesis import given, strategies as st

from igtkit import (
    AlignmentStatus,
    CorpusError,
    RepairAction,
    Split,
    audit,
    dedup,
    detect_misalignment,
    load_corpus,
    normalize_corpus,
    normalize_punctuation,
    repair,
    write_corpus,
)
from igtkit.corpus import is_low_quality, record_to_json


def corpus_file(tmp_path, rows, name="corpus.jsonl"):
    path = tmp_path / name
    lines = [json.dumps(row, ensure_ascii=False) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def row(**overrides):
    base = {
        "id": "r1",
        "transcription": "kurno lel",
        "segmentation": "kur-n lel",
        "glosses": "throw-PFV.CVB wing",
        "translation": None,
        "glottocode": "dido1241",
        "metalang_glottocode": None,
        "language_name": None,
        "source": "unit-test",
        "split": "train",
    }
    base.update(overrides)
    return base


class TestLoadCorpus:
    def test_three_valid_lines(self, tmp_path):
        path = corpus_file(tmp_path, [row(id=f"r{i}") for i in range(3)])
        records = load_corpus(path)
        assert [r.id for r in records] == ["r0", "r1", "r2"]

    def test_missing_glosses_names_line(self, tmp_path):
        bad = row()
        del bad["glosses"]
        path = corpus_file(tmp_path, [row(id="ok"), bad])
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path)

    def test_duplicate_ids_load_fine(self, tmp_path):
        path = corpus_file(tmp_path, [row(id="same"), row(id="same")])
        assert len(load_corpus(path)) == 2

    def test_unknown_split_rejected(self, tmp_path):
        path = corpus_file(tmp_path, [row(split="validation")])
        with pytest.raises(CorpusError, match="line 1"):
            load_corpus(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = corpus_file(tmp_path, [dict(row(), gloss="typo")])
        with pytest.raises(CorpusError, match="gloss"):
            load_corpus(path)

    def test_invalid_json_names_line(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text(
            json.dumps(row()) + "\n{not json}\n", encoding="utf-8"
        )
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path)

    def test_optional_keys_may_be_absent(self, tmp_path):
        minimal = {k: v for k, v in row().items()
                   if k in {"id", "transcription", "glosses", "source", "split"}}
        path = corpus_file(tmp_path, [minimal])
        record = load_corpus(path)[0]
        assert record.segmentation is None
        assert record.glottocode is None

    def test_round_trip_write_read(self, tmp_path, make_record):
        records = [make_record(), make_record(translation=None, glottocode=None)]
        path = tmp_path / "out.jsonl"
        write_corpus(records, path)
        assert load_corpus(path) == records

    def test_canonical_key_order(self, make_record):
        keys = list(record_to_json(make_record()))
        assert keys == [
            "id", "transcription", "segmentation", "glosses", "translation",
            "glottocode", "metalang_glottocode", "language_name", "source",
            "split",
        ]


class TestNormalizePunctuation:
    def test_sentence_final_period_detached(self, make_record):
        record = make_record(
            transcription="Žeda kidbeqor kurno lel yayrno.",
            segmentation=None,
        )
        assert normalize_punctuation(record).transcription == (
            "Žeda kidbeqor kurno lel yayrno ."
        )

    def test_already_clean_unchanged(self, make_record):
        record = make_record(transcription="already clean .", segmentation=None,
                             glosses="X Y .")
        assert normalize_punctuation(record) is record

    def test_gloss_internal_punctuation_untouched(self, make_record):
        record = make_record(glosses="DEM1.IIPL.OBL-ERG girl-POSS.LAT")
        assert normalize_punctuation(record).glosses == (
            "DEM1.IIPL.OBL-ERG girl-POSS.LAT"
        )

    def test_punctuation_run_splits_per_character(self, make_record):
        record = make_record(transcription="really?!", segmentation=None)
        assert normalize_punctuation(record).transcription == "really ? !"

    def test_boundary_characters_never_detached(self, make_record):
        record = make_record(segmentation="kur-n lel-", glosses="X-Y Z-")
        normalized = normalize_punctuation(record)
        assert normalized.segmentation == "kur-n lel-"
        assert normalized.glosses == "X-Y Z-"

    def test_all_three_lines_normalized(self, make_record):
        record = make_record(
            transcription="abc.", segmentation="ab-c.", glosses="X-Y.",
        )
        normalized = normalize_punctuation(record)
        assert normalized.transcription == "abc ."
        assert normalized.segmentation == "ab-c ."
        assert normalized.glosses == "X-Y ."

    @given(st.text(max_size=40).filter(lambda s: s.strip()))
    def test_idempotent(self, line):
        from igtkit import IgtRecord

        record = IgtRecord(id="p", transcription=line, glosses="GLOSS",
                           source="prop", split=Split.TRAIN)
        once = normalize_punctuation(record)
        assert normalize_punctuation(once) == once


class TestDetectMisalignment:
    def test_segment_count_mismatch(self, make_record):
        record = make_record(
            segmentation="vũnɔ gagãlĩ gɛ e-nu bu-dzyuɖí yɛ",
            glosses="beverage well-well REL 3SG-be CM-strength 3SG",
        )
        assert detect_misalignment(record) is AlignmentStatus.SEGMENT_COUNT_MISMATCH

    def test_aligned(self, make_record):
        record = make_record(
            segmentation="žeda-a kid-qor",
            glosses="DEM1.IIPL.OBL-ERG girl-POSS.LAT",
        )
        assert detect_misalignment(record) is AlignmentStatus.ALIGNED

    def test_no_segmentation(self, make_record):
        record = make_record(segmentation=None)
        assert detect_misalignment(record) is AlignmentStatus.NO_SEGMENTATION

    def test_word_count_mismatch(self, make_record):
        record = make_record(segmentation="a b c", glosses="X Y")
        assert detect_misalignment(record) is AlignmentStatus.WORD_COUNT_MISMATCH

    def test_punctuation_tokens_ignored(self, make_record):
        record = make_record(segmentation="kur-n .", glosses="throw-PFV")
        assert detect_misalignment(record) is AlignmentStatus.ALIGNED

    def test_boundary_kind_mismatch_is_misaligned(self, make_record):
        # "aligned" must guarantee a perfect alignment score, so a clitic
        # against an affix boundary counts as a segment mismatch.
        record = make_record(segmentation="a=b", glosses="X-Y")
        assert detect_misalignment(record) is AlignmentStatus.SEGMENT_COUNT_MISMATCH

    @given(
        st.lists(st.sampled_from(["a", "b-c", "d=e", ".", "f-g-h", "?!", "0"]),
                 min_size=1, max_size=5),
        st.lists(st.sampled_from(["X", "Y-Z", "W=V", ".", "Q-R-S", "?!", "0"]),
                 min_size=1, max_size=5),
    )
    def test_aligned_implies_perfect_alignment_score(self, seg_words, gloss_words):
        from igtkit import IgtRecord, alignment_score

        record = IgtRecord(
            id="p", transcription="t", glosses=" ".join(gloss_words),
            segmentation=" ".join(seg_words), source="prop", split=Split.TRAIN,
        )
        if detect_misalignment(record) is AlignmentStatus.ALIGNED:
            assert alignment_score(record.glosses, record.segmentation) == 1.0


class TestRepair:
    def test_markerless_segmentation_blanked(self, make_record):
        record = make_record(segmentation="kurno lel", glosses="throw-PFV wing x")
        repaired, action = repair(record)
        assert action is RepairAction.BLANKED_SEGMENTATION
        assert repaired.segmentation is None

    def test_misaligned_with_markers_forced_to_train(self, make_record):
        record = make_record(
            segmentation="kur-n", glosses="throw-PFV wing", split=Split.TEST
        )
        repaired, action = repair(record)
        assert action is RepairAction.FORCED_TO_TRAIN
        assert repaired.split is Split.TRAIN
        assert repaired.segmentation == "kur-n"

    def test_aligned_record_kept(self, make_record):
        record = make_record()
        repaired, action = repair(record)
        assert action is RepairAction.KEPT
        assert repaired == record

    def test_idempotent(self, make_record):
        for record in (
            make_record(segmentation="kurno lel", glosses="throw-PFV wing x"),
            make_record(segmentation="kur-n", glosses="throw-PFV wing",
                        split=Split.TEST),
            make_record(),
        ):
            once, _ = repair(record)
            twice, _ = repair(once)
            assert twice == once


class TestDedup:
    def test_identical_key_fields_collapse(self, make_record):
        first = make_record(id="a")
        second = make_record(id="b")
        assert dedup([first, second]) == [first]

    def test_different_glottocode_kept(self, make_record):
        first = make_record(id="a", glottocode="dido1241")
        second = make_record(id="b", glottocode="lezg1247")
        assert dedup([first, second]) == [first, second]

    def test_idempotent(self, make_record):
        records = [make_record(id="a"), make_record(id="b"),
                   make_record(id="c", transcription="other text")]
        once = dedup(records)
        assert dedup(once) == once

    def test_whitespace_and_nfc_normalized_keys(self, make_record):
        first = make_record(id="a", transcription="café x")
        second = make_record(id="b", transcription="café  x")
        assert dedup([first, second]) == [first]


class TestAudit:
    def test_empty_corpus(self):
        report = audit([])
        assert report.total_examples == 0
        assert report.unique_languages == 0
        assert report.misaligned == 0
        assert report.per_split_counts == {"train": 0, "eval": 0, "test": 0}

    def test_hand_counted_fixture(self, make_record):
        # 5 records: 2 without translation, 1 misaligned, 1 without
        # glottocode; every count below is a hand tally over these five.
        records = [
            make_record(translation=None),
            make_record(translation=None, segmentation=None),
            make_record(segmentation="kur-n", glosses="throw-PFV wing"),
            make_record(glottocode=None),
            make_record(),
        ]
        report = audit(records)
        assert report.total_examples == 5
        assert report.no_translation == 2
        assert report.misaligned == 1
        assert report.no_glottocode == 1
        assert report.no_segmentation == 1
        assert report.unique_languages == 1
        assert report.per_split_counts["train"] == 5

    def test_unique_languages(self, make_record):
        records = [
            make_record(glottocode="dido1241"),
            make_record(glottocode="lezg1247", transcription="b"),
            make_record(glottocode="arap1274", transcription="c"),
        ]
        assert audit(records).unique_languages == 3

    def test_duplicates_and_blanked_counts(self, make_record):
        records = [
            make_record(id="a"),
            make_record(id="b"),  # duplicate of a
            make_record(id="c", segmentation="kurno lel",
                        glosses="throw-PFV wing x"),
        ]
        report = audit(records)
        assert report.duplicates_removed == 1
        assert report.repaired_blanked_segmentation == 1
        assert report.misaligned == 1

    def test_dedup_totals_relationship(self, make_record):
        records = [make_record(id="a"), make_record(id="b"),
                   make_record(id="c", transcription="distinct")]
        before = audit(records)
        after = audit(dedup(records))
        assert after.total_examples == (
            before.total_examples - before.duplicates_removed
        )


class TestPipeline:
    def test_low_quality_filter(self, make_record):
        assert is_low_quality(make_record(glosses=". . ."))
        assert is_low_quality(make_record(glosses="?!"))
        assert not is_low_quality(make_record())

    def test_no_misaligned_eval_or_test_after_pass(self, make_record):
        records = [
            make_record(id="a", split=Split.TEST, segmentation="kur-n",
                        glosses="throw-PFV wing"),
            make_record(id="b", split=Split.EVAL),
            make_record(id="c"),
        ]
        cleaned = list(normalize_corpus(records))
        for record in cleaned:
            if record.split in (Split.EVAL, Split.TEST):
                assert detect_misalignment(record) in (
                    AlignmentStatus.ALIGNED, AlignmentStatus.NO_SEGMENTATION
                )

    def test_second_pass_is_noop(self, make_record):
        records = [
            make_record(id="a", transcription="kurno lel yayrno."),
            make_record(id="b", split=Split.TEST, segmentation="kurno lel",
                        glosses="throw-PFV wing x"),
            make_record(id="c", glosses=". ."),
            make_record(id="d"),
            make_record(id="e"),  # duplicate of d
        ]
        once = list(normalize_corpus(records))
        twice = list(normalize_corpus(once))
        assert twice == once

    def test_streams_in_order(self, make_record):
        records = [make_record(id=f"r{i}", transcription=f"tok{i}")
                   for i in range(10)]
        cleaned = list(normalize_corpus(iter(records)))
        assert [r.id for r in cleaned] == [f"r{i}" for i in range(10)]


def test_load_from_file_object():
    payload = io.StringIO(json.dumps(row()) + "\n")
    records = load_corpus(payload)
    assert records[0].glottocode == "dido1241"

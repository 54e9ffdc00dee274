"""Command-line interface for the IGT toolkit.

Subcommands: audit, normalize, stats, encode, decode, score, gloss,
regress, reward. All I/O is line-at-a-time JSON (UTF-8, strictly
decoded), diagnostics go to stderr, and repeated runs over the same
inputs produce byte-identical output. Exit codes: 0 success, 1 input
error, 2 invariant violation in strict mode.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager
from typing import IO, Iterator, Optional

from .analytics import fit, reward
from .baseline import GlossLexicon, build_lexicon, predict
from .corpus import (
    CorpusError,
    apply_replacements,
    audit,
    find_empty_morphemes,
    iter_corpus,
    normalize_corpus,
    record_to_json,
)
from .formats import (
    DecodeError,
    EncodeError,
    TaskFormat,
    decode_concatenated,
    decode_interleaved,
    encode_example,
)
from .metrics import MetricReport, merge_counts, score_pair

_ENCODE_FORMATS = {
    "multitask-gloss": TaskFormat.MULTITASK_GLOSS,
    "multitask-seg": TaskFormat.MULTITASK_SEG,
    "concat": TaskFormat.CONCATENATED,
    "interleaved": TaskFormat.INTERLEAVED,
}
_DECODE_FORMATS = {
    "concat": TaskFormat.CONCATENATED,
    "interleaved": TaskFormat.INTERLEAVED,
}


class CliInputError(ValueError):
    """Bad input data; exits with status 1."""


class StrictViolation(ValueError):
    """Invariant violated under --strict; exits with status 2."""


@contextmanager
def _output_handle(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as handle:
            yield handle


def _emit(handle: IO[str], obj: dict) -> None:
    handle.write(json.dumps(obj, ensure_ascii=False))
    handle.write("\n")


def _iter_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CliInputError(
                    f"{path}: line {line_number}: invalid JSON ({exc.msg})"
                ) from exc
            if not isinstance(obj, dict):
                raise CliInputError(
                    f"{path}: line {line_number}: expected a JSON object"
                )
            yield line_number, obj


def cmd_audit(args: argparse.Namespace) -> int:
    empty_morpheme_records = 0

    def stream():
        nonlocal empty_morpheme_records
        for record in iter_corpus(args.input):
            if find_empty_morphemes(record):
                empty_morpheme_records += 1
            yield record

    report = audit(stream())
    with _output_handle(args.output) as out:
        out.write(json.dumps(report.to_dict(), ensure_ascii=False, indent=2))
        out.write("\n")
    if empty_morpheme_records:
        print(
            f"warning: {empty_morpheme_records} record(s) contain empty "
            "morpheme tokens",
            file=sys.stderr,
        )
    return 0


def cmd_normalize(args: argparse.Namespace) -> int:
    read = written = 0
    replacements = [tuple(pair) for pair in (args.replace or [])]

    def stream():
        nonlocal read
        for record in iter_corpus(args.input):
            read += 1
            if replacements:
                try:
                    record = apply_replacements(record, replacements)
                except ValueError as exc:
                    raise CliInputError(f"record {record.id!r}: {exc}") from exc
            yield record

    with _output_handle(args.output) as out:
        for record in normalize_corpus(stream()):
            written += 1
            _emit(out, record_to_json(record))
    print(f"normalize: kept {written} of {read} records", file=sys.stderr)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    counts: dict[str, dict[str, int]] = {}
    names: dict[str, str] = {}
    for record in iter_corpus(args.input):
        code = record.glottocode or "und"
        per_split = counts.setdefault(code, {"train": 0, "eval": 0, "test": 0})
        per_split[record.split.value] += 1
        if record.language_name and code not in names:
            names[code] = record.language_name
    with _output_handle(args.output) as out:
        out.write("language\tglottocode\ttrain\teval\ttest\n")
        for code in sorted(counts):
            row = counts[code]
            out.write(
                f"{names.get(code, '')}\t{code}\t"
                f"{row['train']}\t{row['eval']}\t{row['test']}\n"
            )
    return 0


def cmd_encode(args: argparse.Namespace) -> int:
    fmt = _ENCODE_FORMATS[args.format]
    with _output_handle(args.output) as out:
        for record in iter_corpus(args.input):
            try:
                example = encode_example(record, fmt)
            except EncodeError as exc:
                if args.strict:
                    raise StrictViolation(str(exc)) from exc
                print(f"skipped: {exc}", file=sys.stderr)
                continue
            _emit(out, example.to_dict())
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    fmt = _DECODE_FORMATS[args.format]
    decoder = (
        decode_interleaved if fmt is TaskFormat.INTERLEAVED else decode_concatenated
    )
    with _output_handle(args.output) as out:
        for line_number, obj in _iter_jsonl(args.input):
            if "output" not in obj:
                raise CliInputError(
                    f"{args.input}: line {line_number}: missing 'output' key"
                )
            try:
                decoded = decoder(str(obj["output"]), strict=args.strict)
            except DecodeError as exc:
                identifier = obj.get("id", f"line {line_number}")
                raise StrictViolation(f"{identifier}: {exc}") from exc
            row = {"id": obj.get("id")}
            row.update(decoded.to_dict())
            _emit(out, row)
    return 0


def _load_predictions(path: str) -> dict[str, dict]:
    predictions: dict[str, dict] = {}
    for line_number, obj in _iter_jsonl(path):
        if "id" not in obj or "glosses" not in obj:
            raise CliInputError(
                f"{path}: line {line_number}: prediction needs 'id' and 'glosses'"
            )
        identifier = str(obj["id"])
        if identifier in predictions:
            raise CliInputError(
                f"{path}: line {line_number}: duplicate prediction id {identifier!r}"
            )
        predictions[identifier] = obj
    return predictions


def cmd_score(args: argparse.Namespace) -> int:
    predictions = _load_predictions(args.pred)
    corpus_counts: dict = {}
    language_counts: dict[str, dict] = {}
    scored = 0
    with _output_handle(args.output) as out:
        for record in iter_corpus(args.gold):
            prediction = predictions.get(record.id)
            if prediction is None:
                raise CliInputError(f"no prediction for gold record {record.id!r}")
            report = score_pair(
                gold_glosses=record.glosses,
                pred_glosses=str(prediction.get("glosses") or ""),
                gold_segmentation=record.segmentation,
                pred_segmentation=(
                    None if prediction.get("segmentation") is None
                    else str(prediction["segmentation"])
                ),
            )
            scored += 1
            merge_counts(corpus_counts, report.counts)
            if args.group_by == "language":
                code = record.glottocode or "und"
                merge_counts(
                    language_counts.setdefault(code, {}), report.counts
                )
            row = {"id": record.id, "glottocode": record.glottocode}
            row.update(report.to_dict())
            _emit(out, row)
        if scored == 0:
            raise CliInputError("gold corpus is empty")
        final: dict = {"aggregate": MetricReport.from_counts(corpus_counts).to_dict()}
        if args.group_by == "language":
            final["languages"] = {
                code: MetricReport.from_counts(language_counts[code]).to_dict()
                for code in sorted(language_counts)
            }
        _emit(out, final)
    return 0


def cmd_gloss(args: argparse.Namespace) -> int:
    if args.build_lexicon is not None:
        lexicon = build_lexicon(iter_corpus(args.build_lexicon))
        with _output_handle(args.output) as out:
            lexicon.save(out)
        return 0
    if args.lexicon is None or args.input is None:
        raise CliInputError(
            "gloss needs either --build-lexicon <train>, or --lexicon <file> "
            "and an input corpus"
        )
    lexicon = GlossLexicon.load(args.lexicon)
    with _output_handle(args.output) as out:
        for record in iter_corpus(args.input):
            decoded = predict(lexicon, record.glottocode, record.transcription)
            row = {"id": record.id}
            row.update(decoded.to_dict())
            _emit(out, row)
    return 0


def cmd_regress(args: argparse.Namespace) -> int:
    points = []
    with open(args.input, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise CliInputError(f"{args.input}: empty CSV")
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2:
                raise CliInputError(
                    f"{args.input}: line {line_number}: expected 2 columns"
                )
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError as exc:
                raise CliInputError(
                    f"{args.input}: line {line_number}: non-numeric value"
                ) from exc
            if args.log_x:
                if x <= 0:
                    raise CliInputError(
                        f"{args.input}: line {line_number}: perplexity must be "
                        "positive for a log-scale fit"
                    )
                x = math.log(x)
            points.append((x, y))
    try:
        fitted = fit(points)
    except ValueError as exc:
        raise CliInputError(str(exc)) from exc
    with _output_handle(args.output) as out:
        _emit(out, fitted.to_dict())
    return 0


def cmd_reward(args: argparse.Namespace) -> int:
    fmt = _DECODE_FORMATS[args.format]
    with _output_handle(args.output) as out:
        for line_number, obj in _iter_jsonl(args.input):
            if "output" not in obj:
                raise CliInputError(
                    f"{args.input}: line {line_number}: missing 'output' key"
                )
            _emit(out, {"reward": reward(str(obj["output"]), fmt)})
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igtkit",
        description="Audit, normalize, encode, score, and gloss IGT corpora.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("audit", help="corpus statistics as a JSON report")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser(
        "normalize",
        help="punctuation normalization, low-quality filter, repair, dedup",
    )
    p.add_argument("input")
    p.add_argument("--replace", nargs=2, action="append", metavar=("OLD", "NEW"),
                   help="literal find/replace on annotation lines before "
                        "normalizing; repeatable")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("stats", help="per-language split counts as TSV")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("encode", help="render records as prompt/target pairs")
    p.add_argument("input")
    p.add_argument("--format", required=True, choices=sorted(_ENCODE_FORMATS))
    p.add_argument("--strict", action="store_true",
                   help="fail (exit 2) instead of skipping unencodable records")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="parse model outputs back into lines")
    p.add_argument("input", help="JSONL with 'id' and 'output' keys")
    p.add_argument("--format", required=True, choices=sorted(_DECODE_FORMATS))
    p.add_argument("--strict", action="store_true",
                   help="fail (exit 2) on malformed output instead of recovering")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("score", help="per-example metrics plus aggregates")
    p.add_argument("--gold", required=True, help="gold corpus JSONL")
    p.add_argument("--pred", required=True,
                   help="predictions JSONL with 'id', 'glosses', 'segmentation'")
    p.add_argument("--group-by", choices=["corpus", "language"], default="corpus")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("gloss", help="frequency-lexicon baseline glosser")
    p.add_argument("input", nargs="?", help="corpus to gloss")
    p.add_argument("--lexicon", help="lexicon JSON produced by --build-lexicon")
    p.add_argument("--build-lexicon", metavar="TRAIN",
                   help="build a lexicon from this training corpus instead")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gloss)

    p = sub.add_parser("regress", help="least squares fit of error on perplexity")
    p.add_argument("input", help="CSV with header and perplexity,error columns")
    p.add_argument("--log-x", action="store_true",
                   help="fit against log(perplexity)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("reward", help="alignment-score reward for model outputs")
    p.add_argument("input", help="JSONL with an 'output' key per line")
    p.add_argument("--format", required=True, choices=sorted(_DECODE_FORMATS))
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reward)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StrictViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CliInputError, CorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UnicodeDecodeError as exc:
        print(f"error: input is not valid UTF-8 ({exc})", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

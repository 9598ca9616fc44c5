"""Dataset/emissions/prediction files, model persistence, report rendering.

All record files are newline-delimited JSON, one object per line.
Loaders are total: malformed input produces a ``ValidationError`` that
names every offending line, never a crash.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .crf import CrfParams, EmissionMatrix, N_LABELS
from .errors import ValidationError
from .featurizer import EmitterWeights, split_words
from .metrics import EvalResult
from .trainer import MODEL_FORMAT_VERSION, BoundaryPrediction, Model, TrainConfig

FIRST_MACHINE = "first-machine"
LAST_HUMAN = "last-human"
LABEL_CONVENTIONS = (FIRST_MACHINE, LAST_HUMAN)

_MODEL_MAGIC = b"TXTSEAM\x00"
_CHECKSUM_BYTES = 32


@dataclass
class TextRecord:
    """One dataset item: text plus the gold boundary word index."""

    id: str
    text: str
    label: int
    pos_tags: list[str] | None = None
    source: str | None = None
    generator: str | None = None

    @property
    def word_count(self) -> int:
        return len(split_words(self.text))


@dataclass
class EmissionRecord:
    """Externally computed per-token scores with word alignment."""

    id: str
    word_index: np.ndarray
    scores: np.ndarray

    def to_matrix(self) -> EmissionMatrix:
        return EmissionMatrix(scores=self.scores, word_index=self.word_index)


def _iter_json_lines(path: str | Path):
    """Yield (line_number, parsed_object_or_error_message) for each line."""
    raw = Path(path).read_bytes()
    for number, line in enumerate(raw.split(b"\n"), start=1):
        if not line.strip():
            continue
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            yield number, None, f"not valid UTF-8 ({exc.reason})"
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            yield number, None, f"not valid JSON ({exc.msg})"
            continue
        if not isinstance(obj, dict):
            yield number, None, "line is not a JSON object"
            continue
        yield number, obj, None


def _raise_line_errors(path: str | Path, errors: list[str], count: int) -> None:
    if errors:
        detail = "\n".join(errors)
        raise ValidationError(f"{path}: {len(errors)} invalid line(s)\n{detail}")
    if count == 0:
        raise ValidationError(f"{path}: file contains no records")


def _as_id(value) -> str | None:
    if isinstance(value, str) and value:
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return None


def load_dataset(path: str | Path, label_convention: str = FIRST_MACHINE) -> list[TextRecord]:
    """Load and validate boundary-labeled texts.

    With ``label_convention="last-human"`` stored labels index the last
    human word and are shifted by +1 on ingestion.
    """
    if label_convention not in LABEL_CONVENTIONS:
        raise ValidationError(f"unknown label convention {label_convention!r}")
    records: list[TextRecord] = []
    errors: list[str] = []
    seen: set[str] = set()
    for number, obj, err in _iter_json_lines(path):
        if err is not None:
            errors.append(f"line {number}: {err}")
            continue
        problems = []
        record_id = _as_id(obj.get("id"))
        if record_id is None:
            problems.append("missing or invalid 'id'")
        text = obj.get("text")
        if not isinstance(text, str) or not text.strip():
            problems.append("missing or empty 'text'")
        label = obj.get("label")
        if not isinstance(label, int) or isinstance(label, bool):
            problems.append("missing or non-integer 'label'")
        if not problems:
            word_count = len(text.split())
            if label_convention == LAST_HUMAN:
                label = label + 1
            if not 0 <= label <= word_count:
                problems.append(
                    f"label {label} out of range [0, {word_count}] for a {word_count}-word text"
                )
        pos_tags = obj.get("pos_tags")
        if pos_tags is not None:
            if not isinstance(pos_tags, list) or not all(isinstance(t, str) for t in pos_tags):
                problems.append("'pos_tags' must be a list of strings")
            elif not problems and len(pos_tags) != word_count:
                problems.append(
                    f"'pos_tags' length {len(pos_tags)} does not match word count {word_count}"
                )
        if not problems and record_id in seen:
            problems.append(f"duplicate id {record_id!r}")
        if problems:
            errors.append(f"line {number}: " + "; ".join(problems))
            continue
        seen.add(record_id)
        records.append(
            TextRecord(
                id=record_id,
                text=text,
                label=label,
                pos_tags=pos_tags,
                source=obj.get("source") if isinstance(obj.get("source"), str) else None,
                generator=obj.get("generator") if isinstance(obj.get("generator"), str) else None,
            )
        )
    _raise_line_errors(path, errors, len(records))
    return records


def save_dataset(path: str | Path, records: Sequence[TextRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            obj = {"id": record.id, "text": record.text, "label": record.label}
            if record.pos_tags is not None:
                obj["pos_tags"] = record.pos_tags
            if record.source is not None:
                obj["source"] = record.source
            if record.generator is not None:
                obj["generator"] = record.generator
            handle.write(json.dumps(obj, sort_keys=True) + "\n")


def load_emissions(path: str | Path) -> dict[str, EmissionRecord]:
    """Load externally computed emissions keyed by record id."""
    out: dict[str, EmissionRecord] = {}
    errors: list[str] = []
    for number, obj, err in _iter_json_lines(path):
        if err is not None:
            errors.append(f"line {number}: {err}")
            continue
        problems = []
        record_id = _as_id(obj.get("id"))
        if record_id is None:
            problems.append("missing or invalid 'id'")
        elif record_id in out:
            problems.append(f"duplicate id {record_id!r}")
        tokens = obj.get("tokens")
        word_index: list[int] = []
        scores: list[list[float]] = []
        if not isinstance(tokens, list) or not tokens:
            problems.append("missing or empty 'tokens'")
        else:
            for position, token in enumerate(tokens):
                if (
                    not isinstance(token, dict)
                    or not isinstance(token.get("word_index"), int)
                    or isinstance(token.get("word_index"), bool)
                    or not isinstance(token.get("scores"), list)
                    or len(token["scores"]) != N_LABELS
                    or not all(isinstance(s, (int, float)) for s in token["scores"])
                ):
                    problems.append(f"token {position} malformed")
                    break
                word_index.append(token["word_index"])
                scores.append([float(s) for s in token["scores"]])
            else:
                if word_index[0] != 0:
                    problems.append("word_index must start at 0")
                elif any(b - a not in (0, 1) for a, b in zip(word_index, word_index[1:])):
                    problems.append("word_index must be non-decreasing with steps of 0 or 1")
                elif not all(np.isfinite(s) for row in scores for s in row):
                    problems.append("non-finite score")
        if problems:
            errors.append(f"line {number}: " + "; ".join(problems))
            continue
        out[record_id] = EmissionRecord(
            id=record_id,
            word_index=np.asarray(word_index, dtype=np.int64),
            scores=np.asarray(scores, dtype=np.float64),
        )
    _raise_line_errors(path, errors, len(out))
    return out


def save_emissions(path: str | Path, records: Sequence[EmissionRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            obj = {
                "id": record.id,
                "tokens": [
                    {"word_index": int(w), "scores": [float(a), float(b)]}
                    for w, (a, b) in zip(record.word_index, record.scores)
                ],
            }
            handle.write(json.dumps(obj, sort_keys=True) + "\n")


def load_predictions(path: str | Path) -> dict[str, int]:
    """Load {id, boundary} prediction lines."""
    out: dict[str, int] = {}
    errors: list[str] = []
    for number, obj, err in _iter_json_lines(path):
        if err is not None:
            errors.append(f"line {number}: {err}")
            continue
        record_id = _as_id(obj.get("id"))
        boundary = obj.get("boundary")
        problems = []
        if record_id is None:
            problems.append("missing or invalid 'id'")
        elif record_id in out:
            problems.append(f"duplicate id {record_id!r}")
        if not isinstance(boundary, int) or isinstance(boundary, bool) or boundary < 0:
            problems.append("missing or invalid 'boundary'")
        if problems:
            errors.append(f"line {number}: " + "; ".join(problems))
            continue
        out[record_id] = boundary
    _raise_line_errors(path, errors, len(out))
    return out


def save_predictions(path: str | Path, predictions: Sequence[BoundaryPrediction]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for pred in predictions:
            handle.write(json.dumps({"boundary": pred.boundary, "id": pred.id}, sort_keys=True) + "\n")


# --- model container ---------------------------------------------------------
#
# Layout (all integers little-endian, documented in docs/model_format.md):
#   8 bytes   magic "TXTSEAM\0"
#   u32       format version
#   u32       header length H
#   H bytes   UTF-8 JSON header: config snapshot, hash seed, dim,
#             array manifest [[name, shape], ...], dtype "<f8"
#   payload   arrays concatenated as little-endian float64, C order
#   32 bytes  SHA-256 of every preceding byte


def save_model(path: str | Path, model: Model) -> None:
    model.emitter_weights.validate()
    model.crf_params.validate()
    arrays = [
        ("emitter_weights", model.emitter_weights.weights),
        ("start", model.crf_params.start),
        ("transition", model.crf_params.transition),
        ("end", model.crf_params.end),
    ]
    header = {
        "config": asdict(model.config),
        "hash_seed": model.emitter_weights.hash_seed,
        "dim": model.emitter_weights.dim,
        "arrays": [[name, list(arr.shape)] for name, arr in arrays],
        "dtype": "<f8",
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    buffer = io.BytesIO()
    buffer.write(_MODEL_MAGIC)
    buffer.write(struct.pack("<II", model.version, len(header_bytes)))
    buffer.write(header_bytes)
    for _, arr in arrays:
        buffer.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    payload = buffer.getvalue()
    digest = hashlib.sha256(payload).digest()
    Path(path).write_bytes(payload + digest)


def load_model(path: str | Path) -> Model:
    data = Path(path).read_bytes()
    if len(data) < len(_MODEL_MAGIC) + 8 + _CHECKSUM_BYTES:
        raise ValidationError(f"{path}: truncated model file")
    if data[: len(_MODEL_MAGIC)] != _MODEL_MAGIC:
        raise ValidationError(f"{path}: not a model file (bad magic)")
    body, checksum = data[:-_CHECKSUM_BYTES], data[-_CHECKSUM_BYTES:]
    if hashlib.sha256(body).digest() != checksum:
        raise ValidationError(f"{path}: checksum mismatch, file is corrupted")
    version, header_len = struct.unpack_from("<II", body, len(_MODEL_MAGIC))
    if version != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported model format version {version} "
            f"(this build reads version {MODEL_FORMAT_VERSION})"
        )
    offset = len(_MODEL_MAGIC) + 8
    try:
        header = json.loads(body[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"{path}: malformed model header ({exc})") from exc
    offset += header_len

    try:
        arrays: dict[str, np.ndarray] = {}
        for name, shape in header["arrays"]:
            count = int(np.prod(shape))
            nbytes = count * 8
            chunk = body[offset : offset + nbytes]
            if len(chunk) != nbytes:
                raise ValidationError(f"{path}: truncated model file (array {name!r})")
            arrays[name] = np.frombuffer(chunk, dtype="<f8").astype(np.float64).reshape(shape)
            offset += nbytes
        if offset != len(body):
            raise ValidationError(f"{path}: trailing bytes after model payload")
        config = TrainConfig(**header["config"])
        missing = {"emitter_weights", "start", "transition", "end"} - set(arrays)
        if missing:
            raise ValidationError(f"{path}: model header missing arrays {sorted(missing)}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"{path}: malformed model header ({exc})") from exc
    return Model(
        emitter_weights=EmitterWeights(
            weights=arrays["emitter_weights"], hash_seed=header["hash_seed"], dim=header["dim"]
        ),
        crf_params=CrfParams(arrays["start"], arrays["transition"], arrays["end"]),
        config=config,
        version=version,
    )


# --- report rendering --------------------------------------------------------

REPORT_FORMATS = ("json", "csv", "markdown")

_SUMMARY_FIELDS = (
    "mae",
    "mare",
    "overall_sentence_accuracy",
    "average_sentence_accuracy",
    "mid_sentence_accuracy",
    "end_of_sentence_accuracy",
)


def _summary_dict(result: EvalResult) -> dict[str, float | None]:
    return {name: getattr(result, name) for name in _SUMMARY_FIELDS}


def _fmt(value: float | int | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_report(result: EvalResult, format: str) -> bytes:
    """Serialize an evaluation result deterministically."""
    if format not in REPORT_FORMATS:
        raise ValidationError(f"unknown report format {format!r}")
    if format == "json":
        payload = {
            "summary": _summary_dict(result),
            "record_count": len(result.records),
            "records": [
                {
                    "id": r.id,
                    "word_count": r.word_count,
                    "gold": r.gold,
                    "pred": r.pred,
                    "abs_error": r.abs_error,
                    "sentences_included": r.included,
                    "sentences_correct": r.correct,
                    "placement": r.placement,
                }
                for r in result.records
            ],
        }
        return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode("utf-8")

    if format == "csv":
        lines = ["kind,id,field,value"]
        for name, value in _summary_dict(result).items():
            lines.append(f"summary,,{name},{_fmt(value)}")
        for r in result.records:
            for name, value in (
                ("word_count", r.word_count),
                ("gold", r.gold),
                ("pred", r.pred),
                ("abs_error", r.abs_error),
                ("sentences_included", r.included),
                ("sentences_correct", r.correct),
                ("placement", r.placement),
            ):
                lines.append(f"record,{r.id},{name},{_fmt(value)}")
        return ("\n".join(lines) + "\n").encode("utf-8")

    def cell(value: float | None) -> str:
        return "-" if value is None else f"{value:.4f}"

    lines = [
        "# Boundary evaluation report",
        "",
        f"Records evaluated: {len(result.records)}",
        "",
        "## Boundary error",
        "",
        "| MAE | MARE |",
        "| --- | --- |",
        f"| {result.mae:.4f} | {result.mare:.4f} |",
        "",
        "## Sentence-level accuracy",
        "",
        "| Accuracy | Avg. accuracy |",
        "| --- | --- |",
        f"| {cell(result.overall_sentence_accuracy)} | {cell(result.average_sentence_accuracy)} |",
        "",
        "## Accuracy by boundary placement",
        "",
        "| Mid-sentence | End of sentence |",
        "| --- | --- |",
        f"| {cell(result.mid_sentence_accuracy)} | {cell(result.end_of_sentence_accuracy)} |",
    ]
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- format documentation (export-format command) ----------------------------

FORMAT_SPECS = {
    "dataset": """\
Dataset file: newline-delimited JSON, one record per line.

Required fields
  id     string (unique per file; integers are accepted and coerced)
  text   non-empty string; words are obtained by splitting on Unicode
         whitespace
  label  integer boundary: the word index of the first machine-generated
         word. label == word count means fully human, 0 fully machine.
         Datasets indexing the last human word instead load with
         --label-convention last-human (a +1 shift).

Optional fields
  pos_tags   list of per-word tag strings (same length as the word count);
             overrides the built-in tagger during analysis
  source     string, provenance of the human text
  generator  string, name of the generating model
""",
    "emissions": """\
Emissions file: newline-delimited JSON, one record per line.

Fields
  id      string matching a dataset record id
  tokens  non-empty list of {"word_index": int, "scores": [float, float]}
          entries. word_index starts at 0 and is non-decreasing with
          steps of 0 or 1 (tokens cover a prefix of the words; several
          tokens may share one word). scores[0] is the human score,
          scores[1] the machine score; both must be finite.

Words past the last covered word inherit the last covered word's label
during decoding, which makes truncated (max-length) exports safe.
""",
    "model": """\
Model file: binary container, integers little-endian.

  offset 0   8 bytes  magic "TXTSEAM\\x00"
  offset 8   uint32   format version (current: 1)
  offset 12  uint32   header length H
  offset 16  H bytes  UTF-8 JSON header with keys:
                        config   training-config snapshot
                        hash_seed  emitter hash seed (uint64 range)
                        dim      hashed feature dimension D
                        arrays   [[name, shape], ...] in payload order:
                                 emitter_weights [D, 2], start [2],
                                 transition [2, 2], end [2]
                        dtype    "<f8"
  payload    arrays concatenated as little-endian float64, C order
  final 32 bytes      SHA-256 of every preceding byte

Round-trips are bit-exact. Unknown versions and checksum failures are
rejected with explicit errors.
""",
    "predictions": """\
Predictions file: newline-delimited JSON, one record per line.

Fields
  id        string matching a dataset record id
  boundary  non-negative integer: predicted word index of the first
            machine-generated word
""",
}

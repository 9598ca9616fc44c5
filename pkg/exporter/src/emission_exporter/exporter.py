"""Run a transformer token classifier and emit word-aligned logits.

The output is the toolkit's emissions wire format: one JSON object per
line with ``{"id": ..., "tokens": [{"word_index": int, "scores": [h, m]},
...]}``. Word indices refer to the whitespace word split, matching the
dataset format, so the decoder's token-to-word aggregation applies
directly. Only inference happens here; fine-tuning the encoder is out of
scope and the wire format is the contract either way.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch

log = logging.getLogger(__name__)

HEAD_INIT_SEED = 0  # fixed so freshly initialized classifier heads are reproducible


class ExportError(ValueError):
    """Raised when the dataset, model, or alignment is unusable."""


@dataclass(frozen=True)
class ExportConfig:
    model_id: str = "microsoft/deberta-v3-base"
    max_length: int = 512
    batch_size: int = 8
    device: str = "cpu"

    def validate(self) -> None:
        if self.max_length < 8:
            raise ExportError("max_length must be >= 8")
        if self.batch_size < 1:
            raise ExportError("batch_size must be >= 1")


@dataclass
class ExportSummary:
    records: int = 0
    skipped: int = 0
    tokens: int = 0


def _load_dataset_words(path: str | Path) -> list[tuple[str, list[str]]]:
    """Read the dataset wire format; returns (id, words) pairs in file order."""
    items: list[tuple[str, list[str]]] = []
    errors: list[str] = []
    seen: set[str] = set()
    raw = Path(path).read_bytes()
    for number, line in enumerate(raw.split(b"\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            errors.append(f"line {number}: malformed ({exc})")
            continue
        record_id = obj.get("id") if isinstance(obj, dict) else None
        if isinstance(record_id, int) and not isinstance(record_id, bool):
            record_id = str(record_id)
        text = obj.get("text") if isinstance(obj, dict) else None
        label = obj.get("label") if isinstance(obj, dict) else None
        if not isinstance(record_id, str) or not record_id:
            errors.append(f"line {number}: missing or invalid 'id'")
            continue
        if record_id in seen:
            errors.append(f"line {number}: duplicate id {record_id!r}")
            continue
        if not isinstance(text, str) or not text.split():
            errors.append(f"line {number}: missing or empty 'text'")
            continue
        words = text.split()
        if not isinstance(label, int) or isinstance(label, bool) or not 0 <= label <= len(words):
            errors.append(f"line {number}: missing or out-of-range 'label'")
            continue
        seen.add(record_id)
        items.append((record_id, words))
    if errors:
        raise ExportError(f"{path}: invalid dataset\n" + "\n".join(errors))
    if not items:
        raise ExportError(f"{path}: file contains no records")
    return items


def _load_model(config: ExportConfig):
    from transformers import AutoModelForTokenClassification, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model_id)
        if not tokenizer.is_fast:
            raise ExportError(
                f"tokenizer for {config.model_id!r} has no word-alignment support "
                "(a fast tokenizer is required)"
            )
        # seed so a freshly created classification head is the same on every run
        torch.manual_seed(HEAD_INIT_SEED)
        model = AutoModelForTokenClassification.from_pretrained(
            config.model_id, num_labels=2, ignore_mismatched_sizes=True
        )
    except ExportError:
        raise
    except (OSError, ValueError, KeyError) as exc:
        raise ExportError(f"cannot load model {config.model_id!r}: {exc}") from exc
    model.to(config.device)
    model.eval()
    return tokenizer, model


def _aligned_tokens(word_ids, logits) -> list[tuple[int, float, float]] | None:
    """Word-aligned (word_index, human, machine) rows, or None on bad alignment."""
    rows = []
    for position, word_id in enumerate(word_ids):
        if word_id is None:  # special or padding token
            continue
        rows.append((int(word_id), float(logits[position, 0]), float(logits[position, 1])))
    if not rows:
        return None
    if rows[0][0] != 0:
        return None
    for (prev, _, _), (cur, _, _) in zip(rows, rows[1:]):
        if cur - prev not in (0, 1):
            return None
    return rows


def export_emissions(
    config: ExportConfig, dataset_path: str | Path, out_path: str | Path
) -> ExportSummary:
    """Score every dataset record and write the emissions file.

    Records whose tokenization cannot be aligned to a gapless word prefix
    are skipped with a warning; the counts land in the summary.
    """
    config.validate()
    items = _load_dataset_words(dataset_path)
    tokenizer, model = _load_model(config)

    summary = ExportSummary()
    with open(out_path, "w", encoding="utf-8") as handle:
        for offset in range(0, len(items), config.batch_size):
            batch = items[offset : offset + config.batch_size]
            encoding = tokenizer(
                [words for _, words in batch],
                is_split_into_words=True,
                truncation=True,
                max_length=config.max_length,
                padding=True,
                return_tensors="pt",
            ).to(config.device)
            with torch.no_grad():
                logits = model(**encoding).logits.cpu()
            for i, (record_id, _) in enumerate(batch):
                rows = _aligned_tokens(encoding.word_ids(i), logits[i])
                if rows is None:
                    log.warning("skipping record %r: tokenizer alignment failure", record_id)
                    summary.skipped += 1
                    continue
                obj = {
                    "id": record_id,
                    "tokens": [
                        {"word_index": w, "scores": [h, m]} for w, h, m in rows
                    ],
                }
                handle.write(json.dumps(obj, sort_keys=True) + "\n")
                summary.records += 1
                summary.tokens += len(rows)
    return summary

"""CLI: export transformer logits as a textseam emissions file."""

from __future__ import annotations

import argparse
import logging
import sys

from .exporter import ExportConfig, ExportError, export_emissions


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emission-exporter",
        description="Run a pretrained token classifier over a dataset and write "
        "word-aligned per-token logits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="score a dataset and write emissions")
    p.add_argument("--model-id", default="microsoft/deberta-v3-base",
                   help="Hugging Face model id or local model directory")
    p.add_argument("--data", required=True, help="dataset file (JSON lines)")
    p.add_argument("--out", required=True, help="emissions file to write")
    p.add_argument("--max-length", type=int, default=512)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    config = ExportConfig(
        model_id=args.model_id,
        max_length=args.max_length,
        batch_size=args.batch_size,
        device=args.device,
    )
    try:
        summary = export_emissions(config, args.data, args.out)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(
        f"exported {summary.records} records ({summary.tokens} tokens) to {args.out}; "
        f"skipped {summary.skipped}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())

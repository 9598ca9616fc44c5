"""Command-line surface tying the pipeline together.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from . import analysis, dataio, figures, metrics, synth, trainer
from .errors import ValidationError
from .featurizer import DEFAULT_DIM, split_words

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    # usage problems are validation failures (exit 1), not argparse's default 2
    def error(self, message):
        raise ValidationError(message)


def _add_label_convention(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--label-convention",
        choices=dataio.LABEL_CONVENTIONS,
        default=dataio.FIRST_MACHINE,
        help="how stored labels index the boundary; 'last-human' shifts by +1 on load",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="textseam",
        description="Detect the word-level boundary between a human-written prefix "
        "and a machine-generated suffix.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the built-in emitter + CRF")
    p_train.add_argument("--data", required=True, help="training dataset (JSON lines)")
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument(
        "--lr", type=float, default=0.1,
        help="learning rate (default tuned for the linear emitter)",
    )
    p_train.add_argument("--weight-decay", type=float, default=1e-2)
    p_train.add_argument("--dropout", type=float, default=75e-4)
    p_train.add_argument("--epochs", type=int, default=30)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--max-tokens", type=int, default=512, help="0 = unlimited")
    p_train.add_argument("--hash-dim", type=int, default=DEFAULT_DIM)
    _add_label_convention(p_train)

    p_predict = sub.add_parser("predict", help="predict boundaries for a dataset")
    p_predict.add_argument("--model", required=True)
    p_predict.add_argument("--data", required=True)
    p_predict.add_argument("--emissions", help="externally computed emissions (JSON lines)")
    p_predict.add_argument("--approach", type=int, choices=(1, 2), required=True)
    p_predict.add_argument("--out", required=True, help="predictions file to write")
    _add_label_convention(p_predict)

    p_eval = sub.add_parser("evaluate", help="score predictions against gold boundaries")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--predictions", required=True)
    p_eval.add_argument("--out", required=True, help="report file to write")
    p_eval.add_argument("--format", choices=dataio.REPORT_FORMATS, default="markdown")
    p_eval.add_argument("--figures", metavar="DIR", help="also render report figures into DIR")
    _add_label_convention(p_eval)

    p_analyze = sub.add_parser("analyze", help="tag-pair, tag-usage and location analyses")
    p_analyze.add_argument("--data", required=True)
    p_analyze.add_argument("--predictions", help="adds median-error columns when given")
    p_analyze.add_argument("--out-dir", required=True)
    p_analyze.add_argument("--bins", type=int, default=20, help="histogram bins")
    p_analyze.add_argument(
        "--no-figures", action="store_true", help="emit CSV tables only, skip the PNGs"
    )
    _add_label_convention(p_analyze)

    p_fmt = sub.add_parser("export-format", help="print a file-format specification")
    p_fmt.add_argument("--which", choices=sorted(dataio.FORMAT_SPECS), required=True)

    p_synth = sub.add_parser("make-synthetic", help="write a synthetic demo corpus")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--count", type=int, default=1000)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--min-words", type=int, default=40)
    p_synth.add_argument("--max-words", type=int, default=120)

    return parser


def _cmd_train(args) -> int:
    records = dataio.load_dataset(args.data, args.label_convention)
    config = trainer.TrainConfig(
        learning_rate=args.lr,
        weight_decay=args.weight_decay,
        dropout_rate=args.dropout,
        epochs=args.epochs,
        seed=args.seed,
        max_tokens=args.max_tokens,
        hash_dim=args.hash_dim,
    )
    model = trainer.train(records, config)
    dataio.save_model(args.out, model)
    print(f"trained on {len(records)} records; final mean NLL {model.epoch_nll[-1]:.6f}")
    print(f"model written to {args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = dataio.load_model(args.model)
    records = dataio.load_dataset(args.data, args.label_convention)
    emissions = dataio.load_emissions(args.emissions) if args.emissions else None
    predictions = trainer.predict_dataset(model, records, args.approach, emissions)
    dataio.save_predictions(args.out, predictions)
    print(f"wrote {len(predictions)} predictions to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    records = dataio.load_dataset(args.data, args.label_convention)
    predictions = dataio.load_predictions(args.predictions)
    result = metrics.evaluate_dataset(records, predictions)
    Path(args.out).write_bytes(dataio.render_report(result, args.format))
    print(f"report ({args.format}) written to {args.out}")
    if args.figures:
        figure_dir = Path(args.figures)
        figure_dir.mkdir(parents=True, exist_ok=True)
        figures.save_error_histogram(
            [r.abs_error for r in result.records], figure_dir / "error_histogram.png"
        )
        print(f"figures written to {figure_dir}")
    print(
        f"MAE {result.mae:.4f}  MARE {result.mare:.4f}  "
        f"sentence accuracy {result.overall_sentence_accuracy:.4f} "
        f"(avg {result.average_sentence_accuracy:.4f})"
    )
    return 0


def _record_tags(record: dataio.TextRecord, words: list[str]) -> list[str]:
    if record.pos_tags is not None:
        return record.pos_tags
    return analysis.pos_tag(words)


def _cmd_analyze(args) -> int:
    records = dataio.load_dataset(args.data, args.label_convention)
    predictions = dataio.load_predictions(args.predictions) if args.predictions else None
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    pair_records = []
    human_tags: Counter[str] = Counter()
    machine_tags: Counter[str] = Counter()
    locations = []
    for record in records:
        words = split_words(record.text)
        tags = _record_tags(record, words)
        pre, post = analysis.boundary_pos_pair(words, tags, record.label)
        error = None
        if predictions is not None:
            if record.id not in predictions:
                raise ValidationError(f"no prediction for record {record.id!r}")
            error = abs(predictions[record.id] - record.label)
        pair_records.append((pre, post, error))
        human_tags.update(tags[: record.label])
        machine_tags.update(tags[record.label :])
        locations.append((record.label, len(words)))

    pair_rows = analysis.pos_pair_table(pair_records)
    pair_path = out_dir / "pos_pairs.csv"
    with open(pair_path, "w", encoding="utf-8") as handle:
        handle.write("pre,post,count,median_abs_error\n")
        for row in pair_rows:
            median = "" if row.median_mae is None else repr(row.median_mae)
            handle.write(f"{row.pre},{row.post},{row.count},{median}\n")

    all_tags = sorted(set(analysis.TAGS) | set(human_tags) | set(machine_tags))
    human_total = sum(human_tags.values())
    machine_total = sum(machine_tags.values())
    shares = {
        tag: (
            human_tags[tag] / human_total if human_total else None,
            machine_tags[tag] / machine_total if machine_total else None,
        )
        for tag in all_tags
    }
    dist_path = out_dir / "pos_distribution.csv"
    with open(dist_path, "w", encoding="utf-8") as handle:
        handle.write("tag,human_share,machine_share\n")
        for tag in all_tags:
            human_share, machine_share = shares[tag]
            handle.write(
                f"{tag},{'' if human_share is None else repr(human_share)},"
                f"{'' if machine_share is None else repr(machine_share)}\n"
            )

    counts = analysis.boundary_location_histogram(locations, args.bins)
    hist_path = out_dir / "boundary_histogram.csv"
    with open(hist_path, "w", encoding="utf-8") as handle:
        handle.write("bin,low,high,count\n")
        for i, count in enumerate(counts):
            handle.write(f"{i},{i / args.bins},{(i + 1) / args.bins},{count}\n")

    written = [pair_path, dist_path, hist_path]
    if not args.no_figures:
        figures.save_pos_pair_heatmap(
            pair_rows, "count", "Boundary tag pairs: record counts", out_dir / "pos_pair_counts.png"
        )
        written.append(out_dir / "pos_pair_counts.png")
        if predictions is not None:
            figures.save_pos_pair_heatmap(
                pair_rows,
                "median_mae",
                "Boundary tag pairs: median absolute error",
                out_dir / "pos_pair_median_abs_error.png",
            )
            written.append(out_dir / "pos_pair_median_abs_error.png")
        figures.save_pos_distribution_figure(shares, out_dir / "pos_distribution.png")
        figures.save_boundary_histogram_figure(counts, out_dir / "boundary_histogram.png")
        written += [out_dir / "pos_distribution.png", out_dir / "boundary_histogram.png"]
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_export_format(args) -> int:
    print(dataio.FORMAT_SPECS[args.which], end="")
    return 0


def _cmd_make_synthetic(args) -> int:
    if args.count < 1:
        raise ValidationError("--count must be >= 1")
    if not 1 <= args.min_words <= args.max_words:
        raise ValidationError("need 1 <= --min-words <= --max-words")
    records = synth.make_synthetic_records(
        args.count, args.seed, args.min_words, args.max_words
    )
    dataio.save_dataset(args.out, records)
    print(f"wrote {len(records)} synthetic records to {args.out}")
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "analyze": _cmd_analyze,
    "export-format": _cmd_export_format,
    "make-synthetic": _cmd_make_synthetic,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

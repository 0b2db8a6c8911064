"""Command-line entry point: ``recvariants split | evaluate | fingerprint``.

Exit codes: 0 success, 1 data error, 2 usage error. Output files are
written atomically, so a failed run leaves none behind.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .core import EvaluationError
from .harness import (
    DEFAULT_TOLERANCE,
    EvaluationReport,
    evaluate_matrix,
    fingerprint,
    load_registry,
    registry_default,
    render_fingerprint,
    render_per_user,
    render_report,
    select_variants,
)
from .ingest import (
    SplitConfig,
    detect_delimiter,
    extract_ground_truth,
    format_interactions,
    parse_interactions,
    parse_predictions,
    split_protocol,
)


@dataclass
class RunConfig:
    subcommand: str
    inputs: Dict[str, str] = field(default_factory=dict)
    k: int = 20
    test_fraction: float = 0.2
    positive_threshold: float = 4.5
    variants: str = "all"
    output: Optional[str] = None
    format: str = "json"
    tolerance: float = DEFAULT_TOLERANCE
    threads: int = 1

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cmd = args.command
        if cmd == "split":
            inputs = {"input": args.input}
        elif cmd == "evaluate":
            inputs = {"predictions": args.predictions, "test": args.test, "train": args.train}
        else:
            inputs = {"observed": args.observed, "report": args.report}
        return cls(
            subcommand=cmd,
            inputs=inputs,
            k=getattr(args, "k", 20),
            test_fraction=getattr(args, "test_fraction", 0.2),
            positive_threshold=getattr(args, "threshold", 4.5),
            variants=getattr(args, "variants", "all"),
            output=getattr(args, "out", None),
            format=getattr(args, "format", "json"),
            tolerance=getattr(args, "tolerance", DEFAULT_TOLERANCE),
            threads=getattr(args, "threads", 1),
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="recvariants", description="Variant-explicit recommender evaluation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("split", help="threshold filter + global timestamp split + cold-start removal")
    p.add_argument("--input", required=True)
    p.add_argument("--threshold", type=float, default=4.5)
    p.add_argument("--test-fraction", type=_fraction, default=0.2)
    p.add_argument("--out-train", required=True)
    p.add_argument("--out-test", required=True)

    p = sub.add_parser("evaluate", help="evaluate predictions under every registered variant")
    p.add_argument("--predictions", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--k", type=_positive_int, default=20)
    p.add_argument("--variants", default="all", help='comma-separated canonical names or "all"')
    p.add_argument("--registry", help="JSON list of extra variant definitions")
    p.add_argument("--format", choices=["json", "markdown", "csv"], default="json")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--per-user", help="also write per-user values as CSV")
    p.add_argument("--dataset", help="dataset label (default: predictions file stem)")
    p.add_argument("--threads", type=_positive_int, default=1)

    p = sub.add_parser("fingerprint", help="match reported metric values to variants")
    p.add_argument("--observed", required=True, help="JSON map of metric label -> value")
    p.add_argument("--report", required=True, help="JSON report produced by evaluate")
    p.add_argument("--tolerance", type=_positive_float, default=DEFAULT_TOLERANCE)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out", help="output path (default: stdout)")
    return parser


def _write_outputs(outputs: Dict[Optional[str], bytes]) -> None:
    """Write all outputs or none: stage to temp files, then rename."""
    staged: List[tuple] = []
    try:
        for path, data in outputs.items():
            if path is None or path == "-":
                continue
            target = Path(path)
            fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            staged.append((tmp, target))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, target in staged:
        os.replace(tmp, target)
    for path, data in outputs.items():
        if path is None or path == "-":
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()


def _cmd_split(cfg: RunConfig, args) -> None:
    raw = Path(cfg.inputs["input"]).read_bytes()
    header = raw.decode("utf-8-sig").split("\n", 1)[0]
    delimiter = detect_delimiter(header)
    log = parse_interactions(raw, delimiter)
    train, test = split_protocol(log, SplitConfig(cfg.positive_threshold, cfg.test_fraction))
    _write_outputs(
        {
            args.out_train: format_interactions(train, delimiter),
            args.out_test: format_interactions(test, delimiter),
        }
    )
    print(f"train={len(train)} test={len(test)}", file=sys.stderr)


def _cmd_evaluate(cfg: RunConfig, args) -> None:
    preds = parse_predictions(Path(cfg.inputs["predictions"]).read_bytes())
    test = parse_interactions(Path(cfg.inputs["test"]).read_bytes())
    train = parse_interactions(Path(cfg.inputs["train"]).read_bytes())
    registry = registry_default()
    if args.registry:
        registry = registry + load_registry(Path(args.registry).read_text(encoding="utf-8"))
    registry = select_variants(registry, cfg.variants)
    report = evaluate_matrix(
        preds,
        extract_ground_truth(test),
        train,
        registry,
        cfg.k,
        workers=cfg.threads,
        dataset=args.dataset if args.dataset is not None else Path(cfg.inputs["predictions"]).stem,
        keep_per_user=bool(args.per_user),
    )
    outputs = {cfg.output: render_report(report, cfg.format)}
    if args.per_user:
        outputs[args.per_user] = render_per_user(report)
    _write_outputs(outputs)


def _cmd_fingerprint(cfg: RunConfig, args) -> None:
    observed = json.loads(Path(cfg.inputs["observed"]).read_text(encoding="utf-8"))
    if not isinstance(observed, dict):
        raise EvaluationError("observed values must be a JSON object of label -> number")
    report = EvaluationReport.from_dict(json.loads(Path(cfg.inputs["report"]).read_text(encoding="utf-8")))
    result = fingerprint(observed, report, cfg.tolerance)
    _write_outputs({cfg.output: render_fingerprint(result, cfg.format)})


_COMMANDS = {"split": _cmd_split, "evaluate": _cmd_evaluate, "fingerprint": _cmd_fingerprint}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _COMMANDS[args.command](RunConfig.from_args(args), args)
    except (EvaluationError, OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"recvariants: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line entry point: ``kernelcat run|example|verify``."""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from .errors import KernelcatError, ParseError, UnknownExample, ValidationError
from .examples import EXAMPLES, load_example
from .modelfile import load_model
from .runner import DEFAULT_SEED, render, render_json, run_model
from .verify import verify_model

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kernelcat", description="Categorical Bayesian inference engine.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                        help="seed for randomized invariant checks (default 42)")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="execute the queries of a model file")
    run.add_argument("path", type=Path)
    ex = sub.add_parser("example", parents=[common], help="run a bundled example")
    ex.add_argument("name", help=f"one of {', '.join(EXAMPLES)}")
    ver = sub.add_parser("verify", parents=[common], help="run invariant checks on a model")
    ver.add_argument("target", help="model file path or bundled example name")
    return parser


def _style(text: str, ok: bool, stream) -> str:
    if os.environ.get("KERNELCAT_NO_COLOR") or not stream.isatty():
        return text
    return f"\033[{32 if ok else 31}m{text}\033[0m"


def _emit(text: str, output: Path | None):
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text, encoding="utf-8")


def _verify_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "passed", "detail"])
    for c in report["checks"]:
        writer.writerow([c["name"], "pass" if c["passed"] else "fail", c["detail"]])
    return buf.getvalue()


def _verify_summary(report: dict) -> str:
    checks = report["checks"]
    passed = sum(c["passed"] for c in checks)
    failed = ", ".join(c["name"] for c in checks if not c["passed"])
    text = f"verify: {passed}/{len(checks)} checks passed"
    if failed:
        text += f" (failed: {failed})"
    return _style(text, report["passed"], sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            report = run_model(load_model(args.path), seed=args.seed)
            _emit(render(report, args.format), args.output)
            return EXIT_OK
        if args.command == "example":
            report = run_model(load_example(args.name), seed=args.seed, name=args.name)
            _emit(render(report, args.format), args.output)
            return EXIT_OK
        if args.target in EXAMPLES and not Path(args.target).exists():
            model, name = load_example(args.target), args.target
        else:
            model, name = load_model(args.target), None
        report = verify_model(model, seed=args.seed, name=name)
        if args.format == "json":
            _emit(render_json(report), args.output)
        else:
            _emit(_verify_csv(report), args.output)
        print(_verify_summary(report), file=sys.stderr)
        return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED
    except (ParseError, ValidationError, UnknownExample) as exc:
        print(f"kernelcat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except KernelcatError as exc:
        print(f"kernelcat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED if args.command == "verify" else EXIT_INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())

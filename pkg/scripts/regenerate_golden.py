"""Rewrite the golden reports of the bundled examples.

Run after an intentional change to report content, then review the diff:

    python scripts/regenerate_golden.py
"""
from pathlib import Path

from kernelcat.examples import EXAMPLES, run_example
from kernelcat.runner import render

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for name in EXAMPLES:
        report = run_example(name)
        (GOLDEN / f"{name}.json").write_text(render(report, "json"), encoding="utf-8")
        if name == "gp-demo":
            (GOLDEN / f"{name}.csv").write_text(render(report, "csv"), encoding="utf-8")
        print(f"wrote {name}")


if __name__ == "__main__":
    main()

"""Bundled example models, runnable by name."""
from __future__ import annotations

from importlib import resources

from .errors import UnknownExample
from .modelfile import Model, build_model, parse_text
from .runner import DEFAULT_SEED, run_model

EXAMPLES = ("urn", "cards", "monty", "gp-demo", "kalman-demo")


def example_text(name: str) -> str:
    if name not in EXAMPLES:
        raise UnknownExample(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")
    return resources.files("kernelcat").joinpath("models", f"{name}.model").read_text("utf-8")


def load_example(name: str) -> Model:
    return build_model(parse_text(example_text(name), f"{name}.model"))


def run_example(name: str, seed: int = DEFAULT_SEED) -> dict:
    return run_model(load_example(name), seed=seed, name=name)

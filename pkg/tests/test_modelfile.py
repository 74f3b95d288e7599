import copy
import json
from fractions import Fraction
from pathlib import Path

import pytest

from kernelcat.errors import ParseError, ValidationError
from kernelcat.examples import example_text, load_example
from kernelcat.finite import Dist, FiniteSpace
from kernelcat.modelfile import build_model, complete_kernel, load_model, parse_text, to_jsonable
from kernelcat.runner import run_model

URN = json.loads(example_text("urn"))
MODELS = Path(__file__).parent / "models"


def mutate(doc, path, value):
    doc = copy.deepcopy(doc)
    node = doc
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    return doc


@pytest.mark.parametrize(
    "path,value,field",
    [
        (("prior", "weights", "u1"), "1/0", "prior.weights.u1"),
        (("prior", "weights", "u1"), 0.5, "prior.weights.u1"),
        (("prior", "weights", "u1"), "one half", "prior.weights.u1"),
        (("prior", "weights", "u3"), "0", "prior.weights.u3"),
        (("prior", "weights"), {"u1": "1/2", "u2": "1/3"}, "prior.weights"),
        (("sampling", "rows", "u1"), {"b": "1/2"}, "sampling.rows.u1"),
        (("sampling", "codomain"), "B9", "sampling.codomain"),
        (("kind",), "quantum", "kind"),
        (("version",), 2, "version"),
        (("fallback",), "optimistic", "fallback"),
    ],
)
def test_validation_names_the_field(path, value, field):
    with pytest.raises(ValidationError) as err:
        build_model(mutate(URN, path, value))
    assert err.value.field == field


def test_missing_positive_mass_row_is_rejected():
    doc = copy.deepcopy(URN)
    del doc["sampling"]["rows"]["u2"]
    with pytest.raises(ValidationError) as err:
        build_model(doc)
    assert err.value.field == "sampling.rows"


def test_unknown_extension_and_factor_are_validation_errors():
    doc = mutate(URN, ("queries",), [{"id": "q", "type": "joint_mass", "extend": ["nope"], "event": {}}])
    with pytest.raises(ValidationError) as err:
        run_model(build_model(doc))
    assert err.value.field == "queries[0].extend[0]"
    doc = mutate(URN, ("queries",), [{"id": "q", "type": "joint_mass", "event": {"B7": "b"}}])
    with pytest.raises(ValidationError):
        run_model(build_model(doc))


def test_parse_error_reports_position(tmp_path):
    with pytest.raises(ParseError, match=r":2:"):
        parse_text('{"version": 1,\n oops}')
    with pytest.raises(ParseError):
        load_model(tmp_path / "absent.model")


def test_complete_kernel_policies():
    a = FiniteSpace("A", ("x", "y", "z"))
    b = FiniteSpace("B", ("0", "1"))
    w = Dist.from_mapping(a, {"x": "1/4", "y": "3/4"})
    given = {"x": Dist.from_mapping(b, {"0": 1}), "y": Dist.from_mapping(b, {"1": 1})}
    uni = complete_kernel(a, b, given, w, "uniform")
    pri = complete_kernel(a, b, given, w, "prior")
    assert uni.row("z").as_dict() == {"0": Fraction(1, 2), "1": Fraction(1, 2)}
    assert pri.row("z").as_dict() == {"0": Fraction(1, 4), "1": Fraction(3, 4)}


def test_digest_is_stable_and_content_sensitive():
    a, b = load_example("urn"), load_example("urn")
    assert a.digest == b.digest
    changed = build_model(mutate(URN, ("queries",), []))
    assert changed.digest != a.digest


def test_to_jsonable_formats():
    assert to_jsonable(Fraction(8, 23)) == "8/23"
    assert to_jsonable(1 / 3) == 0.333333333333
    assert to_jsonable(-0.0) == 0.0
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_execution_errors_are_carried_per_query():
    report = run_model(load_model(MODELS / "noise_free_gp.model"))
    by_id = {r["id"]: r for r in report["results"]}
    assert by_id["duplicates"]["error"]["kind"] == "DegenerateGram"
    assert by_id["at_inputs"]["value"]["mean"] == [1.0, -1.0, 0.5]

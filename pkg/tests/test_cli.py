import json
from pathlib import Path

import pytest

from kernelcat.cli import main
from kernelcat.examples import EXAMPLES

HERE = Path(__file__).parent
GOLDEN = HERE / "golden"
MODELS = HERE / "models"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", EXAMPLES)
def test_example_matches_golden(capsys, name):
    code, out, _ = run(capsys, "example", name)
    assert code == 0
    assert out == (GOLDEN / f"{name}.json").read_text(encoding="utf-8")


def test_gp_demo_csv_matches_golden(capsys):
    code, out, _ = run(capsys, "example", "gp-demo", "--format", "csv")
    assert code == 0
    assert out == (GOLDEN / "gp-demo.csv").read_text(encoding="utf-8")
    header, first = out.splitlines()[:2]
    assert header == "panel,z,mean,lower,upper"
    assert first.startswith("prior,0.0,")


def test_reports_are_byte_identical(capsys):
    _, first, _ = run(capsys, "run", str(MODELS / "weather.model"))
    _, second, _ = run(capsys, "run", str(MODELS / "weather.model"))
    assert first == second


def test_output_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "urn.json"
    code, out, _ = run(capsys, "example", "urn", "--output", str(target), "--seed", "7")
    assert code == 0 and out == ""
    report = json.loads(target.read_text())
    assert report["seed"] == 7
    assert report["results"][0]["value"]["b"]["u1"] == "8/23"


def test_run_reports_urn_and_cards_values(capsys):
    _, out, _ = run(capsys, "run", str(HERE.parent / "src/kernelcat/models/cards.model"))
    values = {r["id"]: r["value"] for r in json.loads(out)["results"]}
    assert values["other_side_red"] == "2/3"


@pytest.mark.parametrize(
    "argv",
    [
        ("run", str(MODELS / "bad_rational.model")),
        ("run", str(MODELS / "malformed.model")),
        ("run", str(MODELS / "does-not-exist.model")),
        ("example", "roulette"),
        ("verify", "roulette"),
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("kernelcat: ")


def test_bad_rational_names_field(capsys):
    _, _, err = run(capsys, "run", str(MODELS / "bad_rational.model"))
    assert "prior.weights.u1" in err


@pytest.mark.parametrize("target", EXAMPLES)
def test_verify_examples_pass(capsys, target):
    code, out, _ = run(capsys, "verify", target)
    assert code == 0
    assert json.loads(out)["passed"] is True


@pytest.mark.parametrize("fixture", ["weather.model", "line.model", "noise_free_gp.model", "claimed_urn.model"])
def test_verify_fixtures_pass(capsys, fixture):
    code, _, _ = run(capsys, "verify", str(MODELS / fixture))
    assert code == 0


def test_verify_corrupted_inference_fails(capsys, monkeypatch):
    monkeypatch.setenv("KERNELCAT_NO_COLOR", "1")
    code, out, err = run(capsys, "verify", str(MODELS / "corrupted_urn.model"), "--format", "csv")
    assert code == 1
    assert "product_rule,fail,max residual 7/40" in out
    assert "\033[" not in err


def test_verify_gp_demo_recursion_check(capsys):
    code, out, _ = run(capsys, "verify", "gp-demo")
    checks = {c["name"]: c for c in json.loads(out)["checks"]}
    assert code == 0
    assert checks["recursion_vs_batch"]["passed"]


def test_seed_must_be_unsigned(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "urn", "--seed", "-1"])
    assert exc.value.code == 2

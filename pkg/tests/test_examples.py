import numpy as np
import pytest

from kernelcat.errors import UnknownExample
from kernelcat.examples import EXAMPLES, load_example, run_example
from kernelcat.gaussian import gp_posterior_batch


def values(report):
    return {r["id"]: r["value"] for r in report["results"]}


def test_unknown_example():
    with pytest.raises(UnknownExample):
        run_example("roulette")


def test_every_example_runs_without_query_errors():
    for name in EXAMPLES:
        report = run_example(name)
        assert report["model"] == name and report["seed"] == 42
        assert all("error" not in r for r in report["results"])


def test_urn_values():
    v = values(run_example("urn"))
    assert v["inference"] == {"b": {"u1": "8/23", "u2": "15/23"}, "r": {"u1": "12/17", "u2": "5/17"}}
    assert v["evidence"] == {"b": "23/40", "r": "17/40"}
    assert v["joint_blue_blue"] == "3/10"


def test_cards_values():
    v = values(run_example("cards"))
    assert v["red_then_red"] == "1/3" and v["red_then_green"] == "1/6"
    assert v["other_side_red"] == v["other_side_red_uniform_fill"] == v["other_side_red_prior_fill"] == "2/3"


def test_monty_reports_zero_evidence_for_chosen_door():
    report = run_example("monty")
    assert report["diagnostics"]["zero_mass_atoms"]["inference"] == ["1"]


def test_gp_demo_band_at_measurements():
    model = load_example("gp-demo")
    gp = model.objects["gp"]
    sigma = np.sqrt(gp.noise_var)
    post = gp_posterior_batch(gp, gp.inputs)
    half_width = 2 * np.sqrt(post.var)
    assert np.all(half_width <= 2 * sigma * 1.05)
    v = values(run_example("gp-demo"))
    posterior_rows = v["posterior_curve"]["curve"]
    prior_rows = v["prior_curve"]["curve"]
    assert len(prior_rows) == len(posterior_rows) == 101
    assert prior_rows[0]["z"] == 0.0 and prior_rows[-1]["z"] == 10.0
    assert all(r["lower"] == -2.0 and r["upper"] == 2.0 for r in prior_rows)
    np.testing.assert_allclose(v["posterior_at_inputs"]["mean"], post.mean, atol=1e-11)


def test_kalman_demo_trace():
    trace = values(run_example("kalman-demo"))["trace"]
    assert [step["step"] for step in trace] == list(range(1, 21))
    variances = [step["cov"][0][0] for step in trace]
    assert all(b <= a + 1e-12 for a, b in zip(variances, variances[1:]))

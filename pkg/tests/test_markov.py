from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from kernelcat.errors import BadInterval, DomainMismatch, OutOfOrder
from kernelcat.finite import Dist, FiniteSpace, Kernel, deterministic_kernel, identity_kernel
from kernelcat.gaussian import Gaussian, gaussian_condition
from kernelcat.markov import (
    HmmSpec,
    LinearGaussianModel,
    MarkovChain,
    chain_compose,
    hmm_filter_step,
    is_natural,
    kalman_joint,
    kalman_predict,
    kalman_step,
    run_filter,
)

from oracles import hmm_filter_by_paths, textbook_kalman
from strategies import chains

S = FiniteSpace("S", ("rain", "sun"))
Y = FiniteSpace("Y", ("umbrella", "none"))
T = Kernel.from_mapping(S, S, {"rain": {"rain": "7/10", "sun": "3/10"}, "sun": {"rain": "1/5", "sun": "4/5"}})
O = Kernel.from_mapping(S, Y, {"rain": {"umbrella": "9/10", "none": "1/10"}, "sun": {"umbrella": "1/5", "none": "4/5"}})


def weather_spec():
    chain = MarkovChain(("t1", "t2", "t3"), (S, S, S), (T, T))
    return HmmSpec(chain, (O, O, O), Dist.from_mapping(S, {"rain": "1/2", "sun": "1/2"}))


def test_chain_validation_and_intervals():
    with pytest.raises(DomainMismatch):
        MarkovChain(("a", "b"), (S, Y), (T,))
    chain = weather_spec().chain
    with pytest.raises(BadInterval):
        chain_compose(chain, 2, 1)
    with pytest.raises(BadInterval):
        chain_compose(chain, 0, 1, split=2)
    assert chain_compose(chain, "t2", "t2") == identity_kernel(S)


def test_hmm_filter_matches_path_enumeration():
    spec = weather_spec()
    obs = ["umbrella", "umbrella", "none"]
    got = run_filter(spec, obs)
    to_dict = lambda k: {a: {b: k.prob(b, a) for b in k.codomain.atoms} for a in k.domain.atoms}
    want = hmm_filter_by_paths(
        {"rain": Fraction(1, 2), "sun": Fraction(1, 2)}, [to_dict(T)] * 2, [to_dict(O)] * 3, obs
    )
    assert [g.as_dict() for g in got] == want


def test_filter_step_and_ordering():
    spec = weather_spec()
    post, nxt = hmm_filter_step(spec.initial, O, "umbrella", T)
    assert post["rain"] == Fraction(9, 11)
    assert nxt["rain"] == Fraction(9, 11) * Fraction(7, 10) + Fraction(2, 11) * Fraction(1, 5)
    with pytest.raises(OutOfOrder):
        run_filter(spec, [("t2", "none"), ("t1", "none")])
    timed = run_filter(spec, [("t1", "umbrella"), ("t2", "none")])
    assert timed == run_filter(spec, ["umbrella", "none"])


def test_naturality():
    chain = weather_spec().chain
    eta = [identity_kernel(S)] * 3
    assert is_natural(eta, chain, chain)
    swap = deterministic_kernel(S, S, {"rain": "sun", "sun": "rain"})
    assert not is_natural([swap] * 3, chain, chain)


@settings(max_examples=100, deadline=None)
@given(chains())
def test_every_bracketing_agrees(parts):
    spaces, transitions = parts
    chain = MarkovChain(tuple(f"t{i}" for i in range(len(spaces))), spaces, transitions)
    n = len(spaces)
    for i in range(n):
        assert chain_compose(chain, i, i) == identity_kernel(spaces[i])
        for j in range(i, n):
            fold = chain_compose(chain, i, j)
            for k in range(i, j + 1):
                assert chain_compose(chain, i, j, split=k) == fold


def random_lgm(rng, n, m):
    a = rng.normal(size=(n, n))
    A = 0.9 * a / np.max(np.abs(np.linalg.eigvals(a)))
    q = rng.normal(size=(n, n))
    r = rng.normal(size=(m, m))
    return LinearGaussianModel(
        A, q @ q.T + 0.1 * np.eye(n), rng.normal(size=(m, n)), r @ r.T + 0.1 * np.eye(m),
        Gaussian(rng.normal(size=n), np.eye(n)),
    )


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (2, 2)])
def test_kalman_matches_textbook(n, m):
    rng = np.random.default_rng(10 * n + m)
    model = random_lgm(rng, n, m)
    ys = [rng.normal(size=m) for _ in range(20)]
    got = run_filter(model, ys)
    want = textbook_kalman(model.A, model.Q, model.H, model.R, model.initial.mean, model.initial.cov, ys)
    state = model.initial
    for g, (mean, cov), y in zip(got, want, ys):
        np.testing.assert_allclose(g.mean, mean, atol=1e-10)
        np.testing.assert_allclose(g.cov, cov, atol=1e-10)
        direct = gaussian_condition(kalman_joint(kalman_predict(state, model), model), y)
        step = kalman_step(state, model, y)
        np.testing.assert_allclose(step.mean, direct.mean, atol=1e-10)
        state = step


def test_kalman_dimension_checks():
    with pytest.raises(DomainMismatch):
        LinearGaussianModel(np.eye(2), np.eye(2), np.eye(1), np.eye(1), Gaussian([0.0], [[1.0]]))

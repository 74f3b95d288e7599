"""Markov transformations on finite chains, HMM filtering, and the Kalman filter."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .bayes import BayesModel, infer, posterior
from .errors import BadInterval, DomainMismatch, OutOfOrder
from .finite import Dist, Kernel, compose, dirac, identity_kernel, pushforward
from .gaussian import Gaussian, gaussian_condition


@dataclass(frozen=True)
class MarkovChain:
    """A functor from a finite totally ordered set of times into kernels.

    ``transitions[i]`` maps ``spaces[i]`` to ``spaces[i + 1]``; the spaces
    may differ from one time to the next.
    """

    times: tuple
    spaces: tuple
    transitions: tuple

    def __post_init__(self):
        for name in ("times", "spaces", "transitions"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(set(self.times)) != len(self.times):
            raise BadInterval("time labels must be distinct")
        if len(self.spaces) != len(self.times):
            raise DomainMismatch("one space per time is required")
        if len(self.transitions) != len(self.times) - 1:
            raise DomainMismatch("one transition per adjacent pair of times is required")
        for i, t in enumerate(self.transitions):
            if t.domain != self.spaces[i] or t.codomain != self.spaces[i + 1]:
                raise DomainMismatch(f"transition {i} does not connect spaces {i} and {i + 1}")

    def index(self, time) -> int:
        if isinstance(time, int) and not isinstance(time, bool):
            return time
        return self.times.index(time)


def chain_compose(chain: MarkovChain, i, j, split=None) -> Kernel:
    """``F(t_i -> t_j)``.

    Without ``split`` this is the left fold over adjacent transitions; with
    ``split = k`` it is ``F(t_k -> t_j) o F(t_i -> t_k)``.
    """
    i, j = chain.index(i), chain.index(j)
    if not 0 <= i <= j < len(chain.times):
        raise BadInterval(f"need 0 <= i <= j < {len(chain.times)}, got ({i}, {j})")
    if split is not None:
        k = chain.index(split)
        if not i <= k <= j:
            raise BadInterval(f"split {k} outside [{i}, {j}]")
        return compose(chain_compose(chain, k, j), chain_compose(chain, i, k))
    out = identity_kernel(chain.spaces[i])
    for t in chain.transitions[i:j]:
        out = compose(t, out)
    return out


def is_natural(eta: Sequence[Kernel], source: MarkovChain, target: MarkovChain) -> bool:
    """Whether per-time kernels ``eta`` commute with both chains' transitions."""
    if len(eta) != len(source.times) or len(eta) != len(target.times):
        return False
    for i, k in enumerate(eta):
        if k.domain != source.spaces[i] or k.codomain != target.spaces[i]:
            return False
    for i in range(len(eta) - 1):
        if compose(target.transitions[i], eta[i]) != compose(eta[i + 1], source.transitions[i]):
            return False
    return True


@dataclass(frozen=True)
class HmmSpec:
    chain: MarkovChain
    sensors: tuple
    initial: Dist

    def __post_init__(self):
        object.__setattr__(self, "sensors", tuple(self.sensors))
        if len(self.sensors) != len(self.chain.times):
            raise DomainMismatch("one sensor per time is required")
        for i, s in enumerate(self.sensors):
            if s.domain != self.chain.spaces[i]:
                raise DomainMismatch(f"sensor {i} does not read space {i}")
        if self.initial.space != self.chain.spaces[0]:
            raise DomainMismatch("initial distribution must live on the first space")


def hmm_filter_step(
    prior: Dist,
    sensor: Kernel,
    measurement: Union[Dist, str],
    transition: Optional[Kernel] = None,
):
    """One measure-then-predict cycle; returns ``(posterior, next_prior)``."""
    if isinstance(measurement, str):
        measurement = dirac(sensor.codomain, measurement)
    post = posterior(infer(BayesModel(prior, sensor)), measurement)
    nxt = pushforward(post, transition) if transition is not None else None
    return post, nxt


@dataclass(frozen=True, eq=False)
class LinearGaussianModel:
    """``x' = A x + N(0, Q)``, ``y = H x + N(0, R)``; ``initial`` is the state law
    before the first transition."""

    A: np.ndarray
    Q: np.ndarray
    H: np.ndarray
    R: np.ndarray
    initial: Gaussian

    def __post_init__(self):
        A, Q, H, R = (np.atleast_2d(np.asarray(getattr(self, k), dtype=float)) for k in "AQHR")
        n, m = A.shape[0], H.shape[0]
        if A.shape != (n, n) or Q.shape != (n, n) or H.shape != (m, n) or R.shape != (m, m):
            raise DomainMismatch("inconsistent state-space dimensions")
        if self.initial.dim != n:
            raise DomainMismatch("initial state has the wrong dimension")
        # reuse the symmetric/PSD validation of Gaussian
        Gaussian(np.zeros(n), Q)
        Gaussian(np.zeros(m), R)
        for k, v in zip("AQHR", (A, Q, H, R)):
            v.setflags(write=False)
            object.__setattr__(self, k, v)


def kalman_joint(predicted: Gaussian, model: LinearGaussianModel) -> Gaussian:
    """Joint law of ``(observation, state)`` under the predicted state."""
    m, P = predicted.mean, predicted.cov
    H, R = model.H, model.R
    HP = H @ P
    mean = np.concatenate([H @ m, m])
    cov = np.block([[HP @ H.T + R, HP], [HP.T, P]])
    return Gaussian(mean, 0.5 * (cov + cov.T))


def kalman_predict(state: Gaussian, model: LinearGaussianModel) -> Gaussian:
    A = model.A
    cov = A @ state.cov @ A.T + model.Q
    return Gaussian(A @ state.mean, 0.5 * (cov + cov.T))


def kalman_step(state: Gaussian, model: LinearGaussianModel, y) -> Gaussian:
    """Predict through the dynamics, then condition on the observation ``y``."""
    predicted = kalman_predict(state, model)
    return gaussian_condition(kalman_joint(predicted, model), np.atleast_1d(y))


def _check_order(chain_times, measurements):
    """Split ``(time, value)`` pairs and check they advance strictly."""
    if not measurements or not isinstance(measurements[0], tuple):
        return list(measurements)
    last = -1
    values = []
    for k, (t, v) in enumerate(measurements):
        idx = chain_times.index(t) if chain_times is not None else t
        if idx <= last or (chain_times is not None and idx != k):
            raise OutOfOrder(f"measurement for {t!r} arrives out of order")
        last = idx
        values.append(v)
    return values


def run_filter(spec: Union[HmmSpec, LinearGaussianModel], measurements: Sequence) -> list:
    """Fold the filter over ``measurements`` and return per-step posteriors.

    For an :class:`HmmSpec` the initial distribution is the prior at the first
    time; each measurement updates the current prior, which is then pushed
    through the next transition.  For a :class:`LinearGaussianModel` every
    measurement is preceded by a prediction step.
    """
    measurements = list(measurements)
    if isinstance(spec, HmmSpec):
        values = _check_order(list(spec.chain.times), measurements)
        n = len(spec.chain.times)
        if len(values) > n:
            raise BadInterval(f"{len(values)} measurements for {n} times")
        out = []
        prior = spec.initial
        for i, d in enumerate(values):
            trans = spec.chain.transitions[i] if i + 1 < n else None
            post, prior = hmm_filter_step(prior, spec.sensors[i], d, trans)
            out.append(post)
        return out
    values = _check_order(None, measurements)
    out = []
    state = spec.initial
    for y in values:
        state = kalman_step(state, spec, y)
        out.append(state)
    return out


"""Bayesian inversion of finite models and queries on iterated joints."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import DomainMismatch, NotAbsolutelyContinuous, ZeroMassEvent
from .finite import (
    ZERO,
    Dist,
    FiniteSpace,
    Kernel,
    joint_from_prior_and_kernel,
    pushforward,
)

FALLBACK_POLICIES = ("uniform", "prior")

# An event on a (product) space: factor index -> admissible labels of that factor.
Event = Mapping[int, Iterable[str]]


@dataclass(frozen=True)
class BayesModel:
    prior: Dist
    sampling: Kernel

    def __post_init__(self):
        if self.prior.space != self.sampling.domain:
            raise DomainMismatch(
                f"prior on {self.prior.space.name!r}, sampling from "
                f"{self.sampling.domain.name!r}"
            )

    @property
    def hypothesis(self) -> FiniteSpace:
        return self.prior.space

    @property
    def data(self) -> FiniteSpace:
        return self.sampling.codomain


@dataclass(frozen=True)
class InferenceResult:
    inference: Kernel
    evidence: Dist
    zero_mass_atoms: tuple
    policy: str = "uniform"


def infer(model: BayesModel, fallback: str = "uniform") -> InferenceResult:
    """Bayesian inverse of ``model.sampling`` with respect to ``model.prior``.

    Rows at data atoms of zero evidence are not determined by the product
    rule; they are filled by ``fallback`` (``"uniform"`` or ``"prior"``) and
    listed in ``zero_mass_atoms``.
    """
    if fallback not in FALLBACK_POLICIES:
        raise ValueError(f"unknown fallback policy {fallback!r}")
    prior, S = model.prior, model.sampling
    evidence = pushforward(prior, S)
    H = model.hypothesis
    rows, zero = [], []
    for j, b in enumerate(model.data.atoms):
        pd = evidence.weights[j]
        if pd == 0:
            zero.append(b)
            if fallback == "uniform":
                rows.append((Fraction(1, len(H)),) * len(H))
            else:
                rows.append(prior.weights)
            continue
        rows.append(tuple(S.rows[i][j] * prior.weights[i] / pd for i in range(len(H))))
    inference = Kernel(model.data, H, tuple(rows))
    return InferenceResult(inference, evidence, tuple(zero), fallback)


def posterior(result: InferenceResult, measurement: Dist) -> Dist:
    if measurement.space != result.evidence.space:
        raise DomainMismatch(
            f"measurement on {measurement.space.name!r}, data space is "
            f"{result.evidence.space.name!r}"
        )
    bad = [a for a in result.zero_mass_atoms if measurement[a] != 0]
    if bad:
        raise NotAbsolutelyContinuous(bad)
    return pushforward(measurement, result.inference)


def extend_joint(joint: Dist, next_kernel: Kernel) -> Dist:
    """Append a new coordinate drawn from ``next_kernel`` given the current atom."""
    return joint_from_prior_and_kernel(joint, next_kernel)


def event_mass(joint: Dist, event: Event) -> Fraction:
    space = joint.space
    n = len(space.factors)
    allowed = {}
    for i, labels in event.items():
        if not 0 <= i < n:
            raise DomainMismatch(f"factor {i} out of range for {space.name!r}")
        labels = set(labels)
        for a in labels:
            space.factors[i].index(a)
        allowed[i] = labels
    total = ZERO
    for atom, w in joint.items():
        if w and all(space.coords(atom)[i] in ok for i, ok in allowed.items()):
            total += w
    return total


def conditional_query(joint: Dist, given: Event, target: Event) -> Fraction:
    """``Pr(target | given)`` under ``joint``."""
    denom = event_mass(joint, given)
    if denom == 0:
        raise ZeroMassEvent("conditioning event has zero mass")
    both = {i: set(v) for i, v in given.items()}
    for i, v in target.items():
        both[i] = both[i] & set(v) if i in both else set(v)
    return event_mass(joint, both) / denom


def verify_product_rule(model: BayesModel, inference: Kernel) -> Fraction:
    """Largest ``|I(a|b) P_D(b) - S(b|a) P_H(a)|`` over all atom pairs."""
    if inference.domain != model.data or inference.codomain != model.hypothesis:
        raise DomainMismatch("inference kernel must map data to hypotheses")
    evidence = pushforward(model.prior, model.sampling)
    worst = ZERO
    for i in range(len(model.hypothesis)):
        for j in range(len(model.data)):
            lhs = inference.rows[j][i] * evidence.weights[j]
            rhs = model.sampling.rows[i][j] * model.prior.weights[i]
            worst = max(worst, abs(lhs - rhs))
    return worst


def factor_event(space: FiniteSpace, labels: Mapping[str, Union[str, Iterable[str]]]) -> dict:
    """Build an :data:`Event` keyed by factor *names* instead of positions."""
    names = [f.name for f in space.factors]
    event = {}
    for name, value in labels.items():
        if names.count(name) != 1:
            raise DomainMismatch(f"factor name {name!r} is missing or ambiguous in {space.name!r}")
        event[names.index(name)] = {value} if isinstance(value, str) else set(value)
    return event

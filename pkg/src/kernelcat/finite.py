"""Exact probability over finite spaces.

Spaces carry ordered text atoms, distributions are exact rational vectors and
kernels are row-stochastic rational matrices.  Every value is immutable; every
operation returns a new value.
"""
from __future__ import annotations

import itertools
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import (
    BadFactor,
    DomainMismatch,
    DuplicateAtom,
    EmptySpace,
    IncompleteMap,
    InvalidDistribution,
    ReservedCharacter,
    UnknownAtom,
)

SEP = "|"

Rational = Union[int, Fraction, str]

ZERO = Fraction(0)
ONE = Fraction(1)


def to_fraction(value) -> Fraction:
    """Coerce ``value`` to an exact rational.

    Integers, Fractions and strings such as ``"3/5"`` are accepted.  Floats are
    refused because they would silently smuggle rounding into exact results.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidDistribution(f"not a rational: {value!r}") from exc
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@dataclass(frozen=True)
class FiniteSpace:
    name: str
    atoms: tuple

    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise EmptySpace(f"space {self.name!r} has no atoms")
        self._check_labels(atoms)
        index = {}
        for i, a in enumerate(atoms):
            if a in index:
                raise DuplicateAtom(f"atom {a!r} repeated in space {self.name!r}")
            index[a] = i
        object.__setattr__(self, "_index", index)

    def _check_labels(self, atoms):
        for a in atoms:
            if not isinstance(a, str):
                raise TypeError(f"atom labels must be text, got {a!r}")
            if SEP in a:
                raise ReservedCharacter(f"atom {a!r} contains reserved {SEP!r}")

    def __len__(self):
        return len(self.atoms)

    def __contains__(self, atom):
        return atom in self._index

    def __iter__(self):
        return iter(self.atoms)

    def index(self, atom: str) -> int:
        try:
            return self._index[atom]
        except KeyError:
            raise UnknownAtom(f"{atom!r} is not an atom of {self.name!r}") from None

    @property
    def factors(self) -> tuple:
        return (self,)

    def coords(self, atom: str) -> tuple:
        self.index(atom)
        return (atom,)


@dataclass(frozen=True)
class ProductSpace(FiniteSpace):
    """Cartesian product with atoms ``a|b|...`` in lexicographic factor order.

    Factors are always flat: ``(U x B1) x B2`` and ``U x B1 x B2`` are the
    same object.
    """

    factors: tuple = ()

    _coords: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        super().__post_init__()
        if not self.factors:
            raise BadFactor("a product space needs at least one factor")
        combos = list(itertools.product(*(f.atoms for f in self.factors)))
        if len(combos) != len(self.atoms):
            raise BadFactor("atom count does not match the factor sizes")
        coords = {}
        for atom, combo in zip(self.atoms, combos):
            if atom != SEP.join(combo):
                raise BadFactor(f"atom {atom!r} out of lexicographic order")
            coords[atom] = combo
        object.__setattr__(self, "_coords", coords)

    def _check_labels(self, atoms):
        pass

    def coords(self, atom: str) -> tuple:
        self.index(atom)
        return self._coords[atom]

    def atom_of(self, coords: Sequence[str]) -> str:
        atom = SEP.join(coords)
        self.index(atom)
        return atom


def make_space(name: str, atoms: Iterable[str]) -> FiniteSpace:
    return FiniteSpace(name, tuple(atoms))


def product_space(*spaces: FiniteSpace) -> ProductSpace:
    factors = tuple(f for s in spaces for f in s.factors)
    if not factors:
        raise BadFactor("a product space needs at least one factor")
    atoms = tuple(SEP.join(c) for c in itertools.product(*(f.atoms for f in factors)))
    name = "*".join(f.name for f in factors)
    return ProductSpace(name, atoms, factors)


def _check_stochastic(weights: tuple, what: str):
    for w in weights:
        if w < 0:
            raise InvalidDistribution(f"{what}: negative weight {w}")
    total = sum(weights, ZERO)
    if total != 1:
        raise InvalidDistribution(f"{what}: weights sum to {total}, not 1")


@dataclass(frozen=True)
class Dist:
    """Exact probability vector over the atoms of ``space``."""

    space: FiniteSpace
    weights: tuple

    def __post_init__(self):
        weights = tuple(to_fraction(w) for w in self.weights)
        if len(weights) != len(self.space):
            raise InvalidDistribution(
                f"{len(weights)} weights for {len(self.space)} atoms of {self.space.name!r}"
            )
        _check_stochastic(weights, f"distribution on {self.space.name!r}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_mapping(cls, space: FiniteSpace, mapping: Mapping[str, Rational]) -> "Dist":
        for a in mapping:
            space.index(a)
        return cls(space, tuple(to_fraction(mapping.get(a, 0)) for a in space.atoms))

    @classmethod
    def uniform(cls, space: FiniteSpace) -> "Dist":
        return cls(space, (Fraction(1, len(space)),) * len(space))

    def __getitem__(self, atom: str) -> Fraction:
        return self.weights[self.space.index(atom)]

    def prob(self, event: Iterable[str]) -> Fraction:
        return sum((self[a] for a in set(event)), ZERO)

    def items(self):
        return zip(self.space.atoms, self.weights)

    def support(self) -> tuple:
        return tuple(a for a, w in self.items() if w != 0)

    def as_dict(self) -> dict:
        return dict(self.items())


@dataclass(frozen=True)
class Kernel:
    """Markov kernel ``domain -> codomain`` stored as dense rational rows."""

    domain: FiniteSpace
    codomain: FiniteSpace
    rows: tuple

    def __post_init__(self):
        if len(self.rows) != len(self.domain):
            raise InvalidDistribution(
                f"{len(self.rows)} rows for {len(self.domain)} domain atoms"
            )
        rows = []
        for atom, row in zip(self.domain.atoms, self.rows):
            row = tuple(to_fraction(w) for w in row)
            if len(row) != len(self.codomain):
                raise InvalidDistribution(f"row {atom!r} has wrong length")
            _check_stochastic(row, f"kernel row {atom!r}")
            rows.append(row)
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def from_mapping(cls, domain, codomain, mapping: Mapping[str, Mapping[str, Rational]]):
        rows = []
        for a in domain.atoms:
            if a not in mapping:
                raise IncompleteMap(f"no row given for {a!r}")
            rows.append(Dist.from_mapping(codomain, mapping[a]).weights)
        for a in mapping:
            domain.index(a)
        return cls(domain, codomain, tuple(rows))

    def row(self, atom: str) -> Dist:
        return Dist(self.codomain, self.rows[self.domain.index(atom)])

    def prob(self, target: str, given: str) -> Fraction:
        """``K({target} | given)``."""
        return self.rows[self.domain.index(given)][self.codomain.index(target)]

    def as_dict(self) -> dict:
        return {x: dict(zip(self.codomain.atoms, r)) for x, r in zip(self.domain.atoms, self.rows)}


def dirac(space: FiniteSpace, atom: str) -> Dist:
    i = space.index(atom)
    return Dist(space, tuple(ONE if j == i else ZERO for j in range(len(space))))


def deterministic_kernel(
    domain: FiniteSpace,
    codomain: FiniteSpace,
    mapping: Union[Mapping[str, str], Callable[[str], str]],
) -> Kernel:
    """Kernel of a function between atom sets: row ``x`` is ``dirac(mapping(x))``."""
    rows = []
    for a in domain.atoms:
        if callable(mapping):
            b = mapping(a)
        else:
            if a not in mapping:
                raise IncompleteMap(f"map is undefined at {a!r}")
            b = mapping[a]
        rows.append(dirac(codomain, b).weights)
    return Kernel(domain, codomain, tuple(rows))


def identity_kernel(space: FiniteSpace) -> Kernel:
    return deterministic_kernel(space, space, lambda a: a)


def constant_kernel(domain: FiniteSpace, dist: Dist) -> Kernel:
    """Kernel that ignores its input, i.e. factors through the one-point space."""
    return Kernel(domain, dist.space, (dist.weights,) * len(domain))


def compose(second: Kernel, first: Kernel) -> Kernel:
    """``second o first``: marginalize over the shared middle space."""
    if first.codomain != second.domain:
        raise DomainMismatch(
            f"cannot compose {first.codomain.name!r} into {second.domain.name!r}"
        )
    n_out = len(second.codomain)
    rows = []
    for frow in first.rows:
        out = [ZERO] * n_out
        for w, srow in zip(frow, second.rows):
            if w:
                for k, v in enumerate(srow):
                    out[k] += w * v
        rows.append(tuple(out))
    return Kernel(first.domain, second.codomain, tuple(rows))


def pushforward(dist: Dist, kernel: Kernel) -> Dist:
    if dist.space != kernel.domain:
        raise DomainMismatch(
            f"distribution on {dist.space.name!r}, kernel from {kernel.domain.name!r}"
        )
    out = [ZERO] * len(kernel.codomain)
    for w, row in zip(dist.weights, kernel.rows):
        if w:
            for k, v in enumerate(row):
                out[k] += w * v
    return Dist(kernel.codomain, tuple(out))


def joint_from_prior_and_kernel(prior: Dist, h: Kernel) -> Dist:
    """``J(x, y) = prior(x) * h(y | x)`` on ``X x Y``."""
    if prior.space != h.domain:
        raise DomainMismatch(
            f"prior on {prior.space.name!r}, kernel from {h.domain.name!r}"
        )
    space = product_space(prior.space, h.codomain)
    weights = tuple(p * v for p, row in zip(prior.weights, h.rows) for v in row)
    return Dist(space, weights)


def tensor_independent(p: Dist, q: Dist) -> Dist:
    space = product_space(p.space, q.space)
    return Dist(space, tuple(a * b for a in p.weights for b in q.weights))


def _factor_indices(space: FiniteSpace, factor_index) -> tuple:
    n = len(space.factors)
    idx = (factor_index,) if isinstance(factor_index, int) else tuple(factor_index)
    if not idx:
        raise BadFactor("no factor selected")
    for i in idx:
        if not isinstance(i, int) or isinstance(i, bool) or not 0 <= i < n:
            raise BadFactor(f"factor index {i!r} out of range for {n} factors")
    return idx


def _sub_space(space: FiniteSpace, idx: tuple) -> FiniteSpace:
    if len(idx) == 1:
        return space.factors[idx[0]]
    return product_space(*(space.factors[i] for i in idx))


def marginal(joint: Dist, factor_index: Union[int, Sequence[int]]) -> Dist:
    """Marginal onto one factor, or onto several (in the order given)."""
    space = joint.space
    idx = _factor_indices(space, factor_index)
    target = _sub_space(space, idx)
    acc = dict.fromkeys(target.atoms, ZERO)
    for atom, w in joint.items():
        c = space.coords(atom)
        acc[SEP.join(c[i] for i in idx)] += w
    return Dist(target, tuple(acc[a] for a in target.atoms))


def projection_kernel(space: FiniteSpace, factor_index: Union[int, Sequence[int]]) -> Kernel:
    """The deterministic kernel of the coordinate projection."""
    idx = _factor_indices(space, factor_index)
    target = _sub_space(space, idx)
    return deterministic_kernel(
        space, target, lambda a: SEP.join(space.coords(a)[i] for i in idx)
    )


def permute_factors(dist: Dist, order: Sequence[int]) -> Dist:
    """Transport ``dist`` across a reordering of its product factors."""
    space = dist.space
    order = tuple(order)
    if sorted(order) != list(range(len(space.factors))):
        raise BadFactor(f"{order!r} is not a permutation of the factors")
    target = product_space(*(space.factors[i] for i in order))
    acc = dict.fromkeys(target.atoms, ZERO)
    for atom, w in dist.items():
        c = space.coords(atom)
        acc[SEP.join(c[i] for i in order)] += w
    return Dist(target, tuple(acc[a] for a in target.atoms))


def graph_kernel(q: Kernel) -> Kernel:
    """``Gamma_q : X -> X x Y`` putting ``q(y|x)`` on ``(x, y)``."""
    space = product_space(q.domain, q.codomain)
    rows = []
    n_y = len(q.codomain)
    for i, row in enumerate(q.rows):
        out = [ZERO] * len(space)
        out[i * n_y:(i + 1) * n_y] = row
        rows.append(tuple(out))
    return Kernel(q.domain, space, tuple(rows))


def tensor_kernels(k1: Kernel, k2: Kernel) -> Kernel:
    """Independent product of kernels ``X1 x X2 -> Y1 x Y2``."""
    domain = product_space(k1.domain, k2.domain)
    codomain = product_space(k1.codomain, k2.codomain)
    rows = tuple(
        tuple(a * b for a in r1 for b in r2) for r1 in k1.rows for r2 in k2.rows
    )
    return Kernel(domain, codomain, rows)


def expectation(dist: Dist, phi: Union[Mapping[str, Rational], Callable[[str], Rational]]) -> Fraction:
    get = phi if callable(phi) else phi.__getitem__
    return sum((w * to_fraction(get(a)) for a, w in dist.items() if w), ZERO)

"""Finite function spaces Y^X, evaluation kernels and process/conditional maps."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import SpaceTooLarge
from .finite import ONE, ZERO, Dist, FiniteSpace, Kernel, deterministic_kernel, pushforward

DEFAULT_CAP = 10**6


def function_label(values) -> str:
    return "(" + ",".join(values) + ")"


@dataclass(frozen=True)
class FunctionSpace(FiniteSpace):
    """All total maps ``base -> target``; atom ``(b,c)`` sends the i-th base atom
    to the i-th listed value."""

    base: FiniteSpace = None
    target: FiniteSpace = None

    _tables: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        super().__post_init__()
        tables = {}
        combos = itertools.product(self.target.atoms, repeat=len(self.base))
        for atom, values in zip(self.atoms, combos):
            tables[atom] = dict(zip(self.base.atoms, values))
        object.__setattr__(self, "_tables", tables)

    def _check_labels(self, atoms):
        pass

    def table(self, f: str) -> dict:
        self.index(f)
        return self._tables[f]

    def apply(self, f: str, x: str) -> str:
        self.base.index(x)
        return self.table(f)[x]

    def atom_for(self, table) -> str:
        """Atom label of the function given as a mapping or a value sequence."""
        if isinstance(table, dict):
            table = [table[x] for x in self.base.atoms]
        atom = function_label(table)
        self.index(atom)
        return atom


def function_space(x: FiniteSpace, y: FiniteSpace, cap: int = DEFAULT_CAP) -> FunctionSpace:
    size = len(y) ** len(x)
    if size > cap:
        raise SpaceTooLarge(f"|{y.name}|^|{x.name}| = {size} exceeds cap {cap}")
    atoms = tuple(function_label(v) for v in itertools.product(y.atoms, repeat=len(x)))
    return FunctionSpace(f"{y.name}^{x.name}", atoms, base=x, target=y)


def eval_kernel(fs: FunctionSpace, x: str) -> Kernel:
    fs.base.index(x)
    return deterministic_kernel(fs, fs.target, lambda f: fs.table(f)[x])


def process_to_conditional(p: Dist) -> Kernel:
    """Collapse a distribution on ``Y^X`` to the kernel ``x |-> P(ev_x^-1(.))``."""
    fs = p.space
    rows = tuple(pushforward(p, eval_kernel(fs, x)).weights for x in fs.base.atoms)
    return Kernel(fs.base, fs.target, rows)


def independent_process_from_conditional(c: Kernel, cap: int = DEFAULT_CAP) -> Dist:
    """Product measure ``P(f) = prod_x c(f(x) | x)``; its conditional is ``c``."""
    fs = function_space(c.domain, c.codomain, cap)
    weights = []
    for f in fs.atoms:
        w = ONE
        for i, x in enumerate(fs.base.atoms):
            w *= c.rows[i][c.codomain.index(fs.table(f)[x])]
            if w == ZERO:
                break
        weights.append(w)
    return Dist(fs, tuple(weights))


def weak_closedness_witness():
    """The two distinct processes on ``{a,b,c}^{1,2}`` sharing one conditional.

    ``P`` splits its mass over ``(b,c)`` and ``(c,b)``, ``Q`` over ``(b,b)`` and
    ``(c,c)``.
    """
    x = FiniteSpace("X", ("1", "2"))
    y = FiniteSpace("Y", ("a", "b", "c"))
    fs = function_space(x, y)
    half = Fraction(1, 2)
    p = Dist.from_mapping(fs, {"(b,c)": half, "(c,b)": half})
    q = Dist.from_mapping(fs, {"(b,b)": half, "(c,c)": half})
    return fs, p, q

"""Hypothesis strategies producing exact finite models."""
from fractions import Fraction

from hypothesis import strategies as st

from kernelcat.finite import Dist, FiniteSpace, Kernel


def space(name, size):
    return FiniteSpace(name, tuple(f"{name.lower()}{i}" for i in range(size)))


@st.composite
def weights(draw, size, allow_zero=True):
    lo = 0 if allow_zero else 1
    raw = draw(st.lists(st.integers(lo, 6), min_size=size, max_size=size))
    if sum(raw) == 0:
        raw[draw(st.integers(0, size - 1))] = 1
    total = sum(raw)
    return tuple(Fraction(r, total) for r in raw)


@st.composite
def dists(draw, sp, allow_zero=True):
    return Dist(sp, draw(weights(len(sp), allow_zero)))


@st.composite
def kernels(draw, dom, cod, allow_zero=True):
    rows = tuple(draw(weights(len(cod), allow_zero)) for _ in dom.atoms)
    return Kernel(dom, cod, rows)


@st.composite
def finite_models(draw, max_size=5):
    """``(prior, sampling)`` on spaces of at most ``max_size`` atoms."""
    h = space("H", draw(st.integers(1, max_size)))
    d = space("D", draw(st.integers(1, max_size)))
    return draw(dists(h)), draw(kernels(h, d))


@st.composite
def chains(draw, max_len=5, max_size=4):
    """Spaces and adjacent transitions of a random finite chain."""
    n = draw(st.integers(1, max_len))
    spaces = [space(f"S{i}", draw(st.integers(1, max_size))) for i in range(n)]
    transitions = [draw(kernels(spaces[i], spaces[i + 1])) for i in range(n - 1)]
    return spaces, transitions

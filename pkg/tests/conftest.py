import numpy as np
import pytest

from probarg import BAF, Atom, And, Not, Or, Labelling, WorldDistribution


@pytest.fixture
def fig1():
    """The four-argument example graph: A and B attack each other, D attacks B,
    C supports A, D supports C."""
    return BAF(["A", "B", "C", "D"],
               attacks=[("A", "B"), ("B", "A"), ("D", "B")],
               supports=[("C", "A"), ("D", "C")])


@pytest.fixture
def ab_attack():
    return BAF(["A", "B"], attacks=[("A", "B")])


def random_labelling(rng, baf):
    return Labelling(baf, {a: float(v) for a, v in zip(baf.args, rng.random(baf.n))})


def random_distribution(rng, baf):
    w = rng.random(1 << baf.n) + 1e-12
    return WorldDistribution(baf, w / w.sum())


def random_formula(rng, names, depth=3):
    if depth == 0 or rng.random() < 0.3:
        return Atom(names[int(rng.integers(0, len(names)))])
    kind = int(rng.integers(0, 3))
    if kind == 0:
        return Not(random_formula(rng, names, depth - 1))
    parts = [random_formula(rng, names, depth - 1) for _ in range(int(rng.integers(2, 4)))]
    return And(*parts) if kind == 1 else Or(*parts)

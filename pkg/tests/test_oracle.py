import numpy as np
import pytest

from conftest import af_triangle, chain2, random_model
from refsolvers import enumerate_map

from mplpx import (
    GeneratorSpec,
    PairwiseModel,
    StateSpaceTooLargeError,
    brute_force_map,
    generate,
)


def test_two_var_chain():
    res = brute_force_map(chain2())
    assert res.energy == 6.0
    assert res.assignment == (1, 1)
    assert res.num_optima == 1


def test_af_triangle_optima_count():
    res = brute_force_map(af_triangle())
    assert res.energy == 2.0
    assert res.num_optima == 6
    assert res.assignment == (0, 0, 1)  # lexicographically first optimum


def test_too_large():
    m = generate(GeneratorSpec(kind="tree", n=30, states=2, seed=0))
    with pytest.raises(StateSpaceTooLargeError):
        brute_force_map(m)


def test_limit_is_adjustable():
    m = generate(GeneratorSpec(kind="tree", n=5, states=2, seed=0))
    with pytest.raises(StateSpaceTooLargeError):
        brute_force_map(m, limit=16)
    assert brute_force_map(m, limit=32).energy == enumerate_map(m)[1]


@pytest.mark.parametrize("seed", range(8))
def test_dominates_every_assignment(seed):
    m = random_model(seed, n_lo=3, n_hi=6)
    res = brute_force_map(m)
    rng = np.random.default_rng(seed)
    for _ in range(30):
        a = [int(rng.integers(0, k)) for k in m.cardinalities]
        assert res.energy >= m.energy(a) - 1e-12
    assert res.energy == pytest.approx(m.energy(list(res.assignment)), abs=1e-12)


def test_invariant_under_edge_permutation_and_chord():
    m = random_model(4, kind="random_complete")
    res = brute_force_map(m)
    order = list(range(m.num_edges))[::-1]
    m2 = PairwiseModel(
        m.cardinalities,
        m.node_potentials,
        [m.edges[e] for e in order],
        [m.edge_potentials[e] for e in order],
    )
    res2 = brute_force_map(m2)
    assert res2.energy == res.energy
    assert res2.assignment == res.assignment

    t = generate(GeneratorSpec(kind="tree", n=6, states=3, seed=1))
    i, j = next(
        (i, j)
        for i in range(t.num_vars)
        for j in range(i + 1, t.num_vars)
        if not t.has_edge(i, j)
    )
    r1 = brute_force_map(t)
    r2 = brute_force_map(t.with_zero_chord(i, j))
    assert r1.energy == r2.energy
    assert r1.assignment == r2.assignment

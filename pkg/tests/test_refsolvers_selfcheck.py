"""Cross-validate the test-side exact references against each other and the
package oracle before anything else trusts them."""

import pytest

from conftest import random_model
from refsolvers import enumerate_map, grid_map_energy, tree_map_energy

from mplpx import GeneratorSpec, brute_force_map, generate


@pytest.mark.parametrize("seed", range(10))
def test_enumeration_agrees_with_package_oracle(seed):
    model = random_model(seed, n_lo=3, n_hi=7)
    a, energy = enumerate_map(model)
    res = brute_force_map(model)
    assert res.energy == pytest.approx(energy, abs=1e-12)
    assert res.assignment == a  # both take the lexicographically first optimum


@pytest.mark.parametrize("seed", range(8))
def test_tree_dp_agrees_with_enumeration(seed):
    model = generate(GeneratorSpec(kind="tree", n=9, states=(2, 4), seed=seed))
    _, energy = enumerate_map(model)
    assert tree_map_energy(model) == pytest.approx(energy, abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("rows,cols,states", [(3, 4, 2), (2, 3, 3)])
def test_grid_dp_agrees_with_enumeration(seed, rows, cols, states):
    model = generate(
        GeneratorSpec(
            kind="spin_glass_grid", rows=rows, cols=cols, states=states,
            coupling=(0.3, 1.0), field=(-0.3, 0.3), seed=seed,
        )
    )
    _, energy = enumerate_map(model)
    assert grid_map_energy(model, rows, cols) == pytest.approx(energy, abs=1e-9)

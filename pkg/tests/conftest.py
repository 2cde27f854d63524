import numpy as np
import pytest

from mplpx import PairwiseModel, _backend

BACKENDS = ["python"] + (["compiled"] if _backend.compiled_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def chain2():
    """Two binary variables, one edge; MAP is 6.0 at (1, 1)."""
    return PairwiseModel(
        [2, 2], [[0.0, 1.0], [0.0, 2.0]], [(0, 1)], [[[0.0, 0.0], [0.0, 3.0]]]
    )


def af_triangle(fields=0.0):
    """Binary antiferromagnetic triangle; MAP is 2.0 with 6 optima at zero field."""
    af = np.array([[0.0, 1.0], [1.0, 0.0]])
    if np.isscalar(fields):
        node = [np.array([0.0, fields])] * 3
    else:
        node = [np.array([0.0, f]) for f in fields]
    return PairwiseModel([2, 2, 2], node, [(0, 1), (0, 2), (1, 2)], [af] * 3)


def frustrated_square(perturb=0.0):
    """4-cycle with three disagreement edges and one agreement edge (odd
    frustration); MAP is 3.0 at zero perturbation."""
    af = np.array([[0.0, 1.0], [1.0, 0.0]])
    fe = np.array([[1.0, 0.0], [0.0, 1.0]])
    rng = np.random.default_rng(0)
    node = [rng.uniform(-perturb, perturb, 2) if perturb else np.zeros(2)
            for _ in range(4)]
    return PairwiseModel(
        [2, 2, 2, 2], node, [(0, 1), (1, 2), (2, 3), (0, 3)], [af, af, af, fe]
    )


def random_model(seed, n_lo=3, n_hi=9, k_lo=2, k_hi=3, kind=None):
    """Small random instance of a seed-chosen kind, oracle checkable."""
    from mplpx import GeneratorSpec, generate

    rng = np.random.default_rng(seed)
    kind = kind or ("tree", "random_complete", "spin_glass_grid", "grid_potts")[
        int(rng.integers(0, 4))
    ]
    n = int(rng.integers(n_lo, n_hi + 1))
    if kind in ("tree", "random_complete"):
        spec = GeneratorSpec(kind=kind, n=n, states=(k_lo, k_hi), seed=seed)
    else:
        rows = int(rng.integers(2, 4))
        cols = int(rng.integers(2, 4))
        coupling = (0.2, 1.0) if kind == "spin_glass_grid" else (-1.0, 1.0)
        spec = GeneratorSpec(
            kind=kind, rows=rows, cols=cols, states=(k_lo, k_hi),
            coupling=coupling, field=(-0.5, 0.5), seed=seed,
        )
    return generate(spec)

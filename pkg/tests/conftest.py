import numpy as np
import pytest

from fermat_eq.elliptic import compute_lattice, nearest_lattice_point


@pytest.fixture(scope="session")
def lattice():
    return compute_lattice()


def random_points(lattice, n, seed=0, span=3.0, min_pole_distance=0.1):
    """n points in a box of `span` periods, at least min_pole_distance*|omega1| from poles."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        z = complex(rng.uniform(-span, span), rng.uniform(-span, span)) * lattice.scale
        if nearest_lattice_point(z, lattice)[1] >= min_pole_distance * lattice.scale:
            out.append(z)
    return np.array(out)

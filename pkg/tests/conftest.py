import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ldpc_instanton.code import TannerGraph, build_tanner_155, build_toy


@pytest.fixture(scope="session")
def toy():
    return build_toy()


@pytest.fixture(scope="session")
def tanner():
    return build_tanner_155()


# Noise vector that makes the toy decoder cycle forever; weight 24/7.
TOY_INSTANTON = np.array([10.0, 6.0, 4.0, 4.0]) / 7.0


def random_graph(rng, n_bits=None, n_checks=None):
    """Random sparse graph with all check degrees >= 2, for property tests."""
    n = n_bits if n_bits is not None else int(rng.integers(2, 12))
    m = n_checks if n_checks is not None else int(rng.integers(1, 10))
    checks = []
    for _ in range(m):
        deg = int(rng.integers(2, min(n, 4) + 1))
        checks.append(sorted(rng.choice(n, size=deg, replace=False).tolist()))
    return TannerGraph(n, m, checks)

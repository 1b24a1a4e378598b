"""Shared builders for the test suite."""

import numpy as np
import pytest

from qbnet import network


KAPPA = 0.003
DRIVE = 0.01


def heterogeneous_nonreciprocal(kind: str, n: int, rng: np.random.Generator,
                                drive: float = DRIVE) -> network.NetworkSpec:
    """Random unidirectional spec with pairwise-distinct mode dampings."""
    for _ in range(200):
        gammas = KAPPA * rng.uniform(0.4, 3.0, size=n)
        kappa_a = KAPPA * rng.uniform(0.4, 2.0)
        kappa_b = KAPPA * rng.uniform(0.4, 2.0, size=n)
        spec = network.build_spec(
            kind, n, gammas / 2.0, np.pi / 2, gammas, kappa_a, kappa_b, drive,
        )
        lam = spec.effective_rates().damping
        gaps = np.abs(lam[:, None] - lam[None, :])[np.triu_indices(n + 1, 1)]
        if np.min(gaps) > 1e-3 * np.max(lam):
            return spec
    raise RuntimeError("could not draw a nondegenerate spec")


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)

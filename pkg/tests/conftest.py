"""Shared fixtures and independent numerical oracles used across the suite.

The oracles (fixed-step RK4 integration of master equations, dense
eigensolves) deliberately avoid the code paths under test so that
agreement is meaningful.
"""

import numpy as np
import pytest

from sispair import graph as graphmod


def rk4_stationary(Q: np.ndarray, t_end: float = 1000.0,
                   h: float = 0.05) -> np.ndarray:
    """Long-time RK4 integration of dP/dt = P @ Q from uniform start.

    The stationary vector is a fixed point of the RK4 step map, so the
    result converges to it exactly as the transient decays.
    """
    L = Q.shape[0]
    p = np.full(L, 1.0 / L)
    steps = int(round(t_end / h))
    for _ in range(steps):
        k1 = p @ Q
        k2 = (p + 0.5 * h * k1) @ Q
        k3 = (p + 0.5 * h * k2) @ Q
        k4 = (p + h * k3) @ Q
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


def rk4_transient(R: np.ndarray, p0: np.ndarray, t_end: float,
                  h: float = 2.5e-4) -> np.ndarray:
    """Fixed-step RK4 solution of dp/dt = p @ R at time t_end."""
    steps = max(1, int(round(t_end / h)))
    h = t_end / steps
    p = p0.astype(float).copy()
    for _ in range(steps):
        k1 = p @ R
        k2 = (p + 0.5 * h * k1) @ R
        k3 = (p + 0.5 * h * k2) @ R
        k4 = (p + h * k3) @ R
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


@pytest.fixture(scope="session")
def single_edge():
    """Two nodes joined by one edge."""
    return graphmod.from_edges([(0, 1)], n=2)


@pytest.fixture(scope="session")
def path3():
    """Path 0 - 1 - 2."""
    return graphmod.from_edges([(0, 1), (1, 2)], n=3)


@pytest.fixture(scope="session")
def k4():
    """Complete graph on 4 nodes (the unique simple 3-regular graph)."""
    return graphmod.from_edges(
        [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], n=4)


@pytest.fixture(scope="session")
def ring8():
    """Cycle on 8 nodes (vertex-transitive, 2-regular)."""
    return graphmod.from_edges([(i, (i + 1) % 8) for i in range(8)], n=8)


@pytest.fixture(scope="session")
def reg3_2000():
    """3-regular random graph on 2000 nodes (threshold-ladder scale)."""
    return graphmod.generate_random_regular(2000, 3, seed=42)

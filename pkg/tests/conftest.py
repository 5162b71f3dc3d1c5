import numpy as np
import pytest

from combustion1d.grid import BoundaryCondition, Mesh, State
from combustion1d.model import FluidParams, ReactionRate


@pytest.fixture
def mesh16():
    return Mesh(half_length=8.0, n=16)  # dx = 1, cell edges on integers


@pytest.fixture
def mesh64():
    return Mesh(half_length=10.0, n=64)


@pytest.fixture
def params():
    return FluidParams()


@pytest.fixture
def rate():
    return ReactionRate()


@pytest.fixture
def bc():
    return BoundaryCondition()


def equilibrium_state(mesh: Mesh) -> State:
    return State(t=0.0, u=np.ones(mesh.n), v=np.zeros(mesh.n + 1),
                 theta=np.ones(mesh.n), z=np.zeros(mesh.n))


def random_valid_state(mesh: Mesh, rng: np.random.Generator,
                       compact: bool = True) -> State:
    """A state satisfying the invariants, optionally far-field compatible."""
    n = mesh.n
    u = 1.0 + 0.5 * rng.uniform(-1.0, 1.0, n) * 0.8
    theta = 1.0 + rng.uniform(-0.5, 1.5, n)
    z = rng.uniform(0.0, 1.0, n)
    v = 0.5 * rng.standard_normal(n + 1)
    if compact:
        xc = mesh.cells
        xn = mesh.nodes
        mask_c = np.exp(-((xc - xc.mean()) / (0.25 * (mesh.x_hi - mesh.x_lo))) ** 2)
        mask_n = np.exp(-((xn - xn.mean()) / (0.25 * (mesh.x_hi - mesh.x_lo))) ** 2)
        u = 1.0 + (u - 1.0) * mask_c
        theta = 1.0 + (theta - 1.0) * mask_c
        z = z * mask_c
        v = v * mask_n
    v[0] = v[-1] = 0.0
    return State(t=0.0, u=u, v=v, theta=theta, z=z)

import numpy as np
import pytest

from timegrit import materials, sources
from timegrit.eddy import DiscreteSystem
from timegrit.mesh import generate_coax_mesh

R0, R1, R2 = 1.0e-3, 2.0e-3, 3.0e-3


@pytest.fixture(scope="session")
def desk_mesh():
    return generate_coax_mesh(R0, R1, R2, radial_layers=(4, 4, 4), angular_divisions=24)


@pytest.fixture(scope="session")
def tiny_mesh():
    return generate_coax_mesh(R0, R1, R2, radial_layers=(1, 1, 1), angular_divisions=8)


@pytest.fixture(scope="session")
def linear_system(desk_mesh):
    return DiscreteSystem(desk_mesh, materials.linear_materials(),
                          sources.PwmSource(), wire_radius=R0)


@pytest.fixture(scope="session")
def tiny_linear_system(tiny_mesh):
    return DiscreteSystem(tiny_mesh, materials.linear_materials(),
                          sources.SineSource(period=0.02), wire_radius=R0)


@pytest.fixture(scope="session")
def tiny_nonlinear_system(tiny_mesh):
    return DiscreteSystem(tiny_mesh, materials.nonlinear_materials(),
                          sources.PwmSource(), wire_radius=R0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)

import numpy as np
import pytest

from timegrit.mesh import MeshError, generate_coax_mesh, load_mesh, save_mesh

R0, R1, R2 = 1.0e-3, 2.0e-3, 3.0e-3


def test_region_areas_close_to_annulus_formulas():
    mesh = generate_coax_mesh(R0, R1, R2, radial_layers=(2, 2, 2), angular_divisions=16)
    exact = [np.pi * R0 ** 2,
             np.pi * (R1 ** 2 - R0 ** 2),
             np.pi * (R2 ** 2 - R1 ** 2)]
    for region in (0, 1, 2):
        assert mesh.region_area(region) == pytest.approx(exact[region], rel=0.05)


def test_euler_characteristic_is_one(desk_mesh, tiny_mesh):
    assert desk_mesh.euler_characteristic() == 1
    assert tiny_mesh.euler_characteristic() == 1


def test_boundary_node_count_equals_angular_divisions():
    for a in (8, 12, 24):
        mesh = generate_coax_mesh(R0, R1, R2, radial_layers=(1, 1, 2), angular_divisions=a)
        assert mesh.boundary_nodes.size == a
        radii = np.hypot(mesh.nodes[mesh.boundary_nodes, 0],
                         mesh.nodes[mesh.boundary_nodes, 1])
        np.testing.assert_allclose(radii, R2, rtol=1e-12)


def test_triangles_positively_oriented(desk_mesh):
    assert np.all(desk_mesh.triangle_areas() > 0.0)


def test_region_tags_partition_triangles(desk_mesh):
    assert set(np.unique(desk_mesh.regions)) == {0, 1, 2}


def test_invalid_radii_rejected():
    with pytest.raises(MeshError):
        generate_coax_mesh(2e-3, 1e-3, 3e-3)
    with pytest.raises(MeshError):
        generate_coax_mesh(0.0, 1e-3, 2e-3)
    with pytest.raises(MeshError):
        generate_coax_mesh(R0, R1, R2, angular_divisions=4)


def test_mesh_io_roundtrip(tmp_path, tiny_mesh):
    path = tmp_path / "cable.mesh"
    save_mesh(tiny_mesh, path)
    back = load_mesh(path)
    np.testing.assert_allclose(back.nodes, tiny_mesh.nodes, rtol=0, atol=0)
    np.testing.assert_array_equal(back.triangles, tiny_mesh.triangles)
    np.testing.assert_array_equal(back.regions, tiny_mesh.regions)
    np.testing.assert_array_equal(back.boundary_nodes, tiny_mesh.boundary_nodes)

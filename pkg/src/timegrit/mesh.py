"""Structured triangular mesh of a coaxial-cable cross section.

Three concentric regions: wire (region 0, radius r0), insulator (region 1,
r0..r1) and conducting shield (region 2, r1..r2).  The homogeneous Dirichlet
boundary is the outer circle at r2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

WIRE, INSULATOR, SHIELD = 0, 1, 2


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Mesh2D:
    """Triangulation with per-triangle region tags and boundary node set."""

    nodes: np.ndarray          # (n_nodes, 2) coordinates [m]
    triangles: np.ndarray      # (n_tri, 3) node indices, positively oriented
    regions: np.ndarray        # (n_tri,) region tag in {0, 1, 2}
    boundary_nodes: np.ndarray  # node indices on the outer circle

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        v1 = p[:, 1] - p[:, 0]
        v2 = p[:, 2] - p[:, 0]
        return 0.5 * (v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0])

    def region_area(self, region: int) -> float:
        areas = self.triangle_areas()
        return float(np.sum(areas[self.regions == region]))

    def euler_characteristic(self) -> int:
        edges = np.vstack([self.triangles[:, [0, 1]],
                           self.triangles[:, [1, 2]],
                           self.triangles[:, [2, 0]]])
        edges = np.sort(edges, axis=1)
        n_edges = np.unique(edges, axis=0).shape[0]
        return self.num_nodes - n_edges + self.num_triangles


def generate_coax_mesh(r0: float, r1: float, r2: float,
                       radial_layers=(4, 4, 4),
                       angular_divisions: int = 24) -> Mesh2D:
    """Concentric triangulation: one node ring per radial layer, a centre node,
    region tags assigned by centroid radius.

    radial_layers gives the layer counts inside the wire, insulator and shield.
    """
    if not (0.0 < r0 < r1 < r2):
        raise MeshError(f"radii must satisfy 0 < r0 < r1 < r2, got {(r0, r1, r2)}")
    if angular_divisions < 8:
        raise MeshError(f"angular_divisions must be >= 8, got {angular_divisions}")
    if len(radial_layers) != 3 or any(int(n) < 1 for n in radial_layers):
        raise MeshError(f"radial_layers must be three positive counts, got {radial_layers}")

    n0, n1, n2 = (int(n) for n in radial_layers)
    ring_radii = np.concatenate([
        np.linspace(0.0, r0, n0 + 1)[1:],
        np.linspace(r0, r1, n1 + 1)[1:],
        np.linspace(r1, r2, n2 + 1)[1:],
    ])
    a = int(angular_divisions)
    theta = 2.0 * np.pi * np.arange(a) / a

    nodes = [np.zeros((1, 2))]
    for radius in ring_radii:
        nodes.append(np.column_stack([radius * np.cos(theta), radius * np.sin(theta)]))
    nodes = np.vstack(nodes)

    def ring_index(ring: int, k: int) -> int:
        return 1 + ring * a + (k % a)

    triangles = []
    for k in range(a):  # centre fan
        triangles.append((0, ring_index(0, k), ring_index(0, k + 1)))
    for ring in range(len(ring_radii) - 1):
        for k in range(a):
            inner_a = ring_index(ring, k)
            inner_b = ring_index(ring, k + 1)
            outer_a = ring_index(ring + 1, k)
            outer_b = ring_index(ring + 1, k + 1)
            triangles.append((inner_a, outer_a, outer_b))
            triangles.append((inner_a, outer_b, inner_b))
    triangles = np.array(triangles, dtype=np.int64)

    centroids = nodes[triangles].mean(axis=1)
    radius_c = np.hypot(centroids[:, 0], centroids[:, 1])
    regions = np.full(triangles.shape[0], SHIELD, dtype=np.int64)
    regions[radius_c < r1] = INSULATOR
    regions[radius_c < r0] = WIRE

    last_ring = len(ring_radii) - 1
    boundary = np.array([ring_index(last_ring, k) for k in range(a)], dtype=np.int64)

    mesh = Mesh2D(nodes=nodes, triangles=triangles, regions=regions,
                  boundary_nodes=boundary)
    if np.any(mesh.triangle_areas() <= 0.0):
        raise MeshError("mesh construction produced non-positive triangle areas")
    return mesh


MESH_HEADER = "# timegrit mesh: nodes / triangles+region / boundary nodes"


def save_mesh(mesh: Mesh2D, path) -> None:
    """Plain-text format: header, counts, then one entity per line."""
    with open(path, "w") as fh:
        fh.write(MESH_HEADER + "\n")
        fh.write(f"{mesh.num_nodes} {mesh.num_triangles} {mesh.boundary_nodes.size}\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for (i, j, k), reg in zip(mesh.triangles, mesh.regions):
            fh.write(f"{i} {j} {k} {reg}\n")
        for i in mesh.boundary_nodes:
            fh.write(f"{i}\n")


def load_mesh(path) -> Mesh2D:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise MeshError("missing mesh header line")
        n_nodes, n_tri, n_bd = (int(v) for v in fh.readline().split())
        nodes = np.array([[float(v) for v in fh.readline().split()] for _ in range(n_nodes)])
        tri_rows = [[int(v) for v in fh.readline().split()] for _ in range(n_tri)]
        boundary = np.array([int(fh.readline()) for _ in range(n_bd)], dtype=np.int64)
    tri_rows = np.asarray(tri_rows, dtype=np.int64)
    mesh = Mesh2D(nodes=nodes, triangles=tri_rows[:, :3], regions=tri_rows[:, 3],
                  boundary_nodes=boundary)
    if np.any(mesh.triangle_areas() <= 0.0):
        raise MeshError("loaded mesh has non-positive triangle areas")
    return mesh

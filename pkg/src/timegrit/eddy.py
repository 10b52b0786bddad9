"""2D magnetoquasistatic model problem on the coaxial-cable mesh.

Space discretization: lowest-order nodal elements for the z-component of the
magnetic vector potential (per unit length lz), giving the index-1 DAE

    M_sigma u' + K_nu(u) u = j_s(t),   u = 0 on the outer boundary,

where the conductivity mass matrix vanishes on all rows without support in
the shield.  Time stepping is backward Euler with a Newton iteration whose
Jacobian carries the differential-reluctivity term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from . import sparse
from .hierarchy import TemporalHierarchy
from .materials import MaterialMap
from .mesh import Mesh2D, WIRE
from .propagators import Propagator

_MASS_LOCAL = np.array([[2.0, 1.0, 1.0],
                        [1.0, 2.0, 1.0],
                        [1.0, 1.0, 2.0]]) / 12.0


class NewtonConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float, tol: float):
        super().__init__(
            f"Newton did not converge in {iterations} iterations "
            f"(residual {residual:.3e}, tol {tol:.3e})")
        self.iterations = iterations
        self.residual = residual


@dataclass
class NewtonOptions:
    tol: float = 1e-10
    max_iters: int = 20
    method: str = "newton"  # "newton" or "picard" (chord iteration, frozen nu)

    def __post_init__(self):
        if self.method not in ("newton", "picard"):
            raise ValueError(f"method must be 'newton' or 'picard', got {self.method!r}")


class _Assembly:
    """Per-mesh geometry: constant element gradients, areas, scatter pattern."""

    def __init__(self, mesh: Mesh2D):
        self.tri = mesh.triangles
        p = mesh.nodes[self.tri]  # (m, 3, 2)
        v1 = p[:, 1] - p[:, 0]
        v2 = p[:, 2] - p[:, 0]
        det = v1[:, 0] * v2[:, 1] - v1[:, 1] * v2[:, 0]
        self.areas = 0.5 * det
        # gradients of the three nodal functions, shape (m, 2, 3)
        grads = np.empty((self.tri.shape[0], 2, 3))
        grads[:, 0, 0] = p[:, 1, 1] - p[:, 2, 1]
        grads[:, 0, 1] = p[:, 2, 1] - p[:, 0, 1]
        grads[:, 0, 2] = p[:, 0, 1] - p[:, 1, 1]
        grads[:, 1, 0] = p[:, 2, 0] - p[:, 1, 0]
        grads[:, 1, 1] = p[:, 0, 0] - p[:, 2, 0]
        grads[:, 1, 2] = p[:, 1, 0] - p[:, 0, 0]
        self.grads = grads / det[:, None, None]
        self.rows = np.repeat(self.tri, 3, axis=1).ravel()
        self.cols = np.tile(self.tri, (1, 3)).ravel()
        self.stiff_ref = np.einsum("eki,ekj->eij", self.grads, self.grads) \
            * self.areas[:, None, None]

    def scatter(self, local: np.ndarray, n: int, element_mask=None) -> scipy.sparse.csr_matrix:
        if element_mask is None:
            rows, cols, vals = self.rows, self.cols, local.ravel()
        else:
            rows = np.repeat(self.tri[element_mask], 3, axis=1).ravel()
            cols = np.tile(self.tri[element_mask], (1, 3)).ravel()
            vals = local[element_mask].ravel()
        return scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def assemble_mass(mesh: Mesh2D, materials: MaterialMap, lz: float = 1.0) -> sparse.SparseMatrix:
    """Conductivity mass matrix; rows of nodes outside the shield stay exactly zero."""
    asm = _Assembly(mesh)
    sigma_e = np.asarray(materials.sigma, dtype=float)[mesh.regions]
    coef = sigma_e * asm.areas / (lz * lz)
    local = coef[:, None, None] * _MASS_LOCAL[None, :, :]
    mask = sigma_e != 0.0
    return sparse.SparseMatrix(asm.scatter(local, mesh.num_nodes, element_mask=mask))


def element_flux_magnitude(mesh: Mesh2D, u, lz: float = 1.0,
                           asm: _Assembly | None = None) -> np.ndarray:
    """Per-element |curl A|: constant on each element for nodal coefficients u."""
    asm = asm or _Assembly(mesh)
    if u is None:
        return np.zeros(mesh.num_triangles)
    q = np.einsum("eij,ej->ei", asm.grads, np.asarray(u, dtype=float)[asm.tri])
    return np.hypot(q[:, 0], q[:, 1]) / lz


def _element_reluctivity(mesh: Mesh2D, materials: MaterialMap, b_mag: np.ndarray) -> np.ndarray:
    nu_e = np.empty(mesh.num_triangles)
    for region, model in enumerate(materials.reluctivity):
        mask = mesh.regions == region
        if np.any(mask):
            nu_e[mask] = model.nu(b_mag[mask])
    return nu_e


def assemble_stiffness(mesh: Mesh2D, materials: MaterialMap, u=None,
                       lz: float = 1.0) -> sparse.SparseMatrix:
    """Curl-curl stiffness with reluctivity evaluated at the element flux of u."""
    asm = _Assembly(mesh)
    b_mag = element_flux_magnitude(mesh, u, lz, asm)
    nu_e = _element_reluctivity(mesh, materials, b_mag)
    local = (nu_e / (lz * lz))[:, None, None] * asm.stiff_ref
    return sparse.SparseMatrix(asm.scatter(local, mesh.num_nodes))


def wire_radius_of(mesh: Mesh2D) -> float:
    """Outer radius of the wire region, read off the wire-element nodes."""
    wire_nodes = np.unique(mesh.triangles[mesh.regions == WIRE])
    return float(np.max(np.hypot(mesh.nodes[wire_nodes, 0], mesh.nodes[wire_nodes, 1])))


def assemble_source(mesh: Mesh2D, source, t: float, lz: float = 1.0,
                    wire_radius: float | None = None) -> np.ndarray:
    """Load vector of the wire current density: uniform over the wire region."""
    profile = source_profile(mesh, lz, wire_radius=wire_radius)
    return profile * float(source(t))


def source_profile(mesh: Mesh2D, lz: float = 1.0, asm: _Assembly | None = None,
                   wire_radius: float | None = None) -> np.ndarray:
    """Unit load vector: entry i = (integral of basis i over the wire) / (pi r0^2 lz)."""
    asm = asm or _Assembly(mesh)
    if wire_radius is None:
        wire_radius = wire_radius_of(mesh)
    wire = mesh.regions == WIRE
    profile = np.zeros(mesh.num_nodes)
    np.add.at(profile, asm.tri[wire].ravel(),
              np.repeat(asm.areas[wire] / 3.0, 3))
    return profile / (np.pi * wire_radius ** 2 * lz)


class DiscreteSystem:
    """Assembled spatial operators plus Dirichlet data for one mesh/material pair."""

    def __init__(self, mesh: Mesh2D, materials: MaterialMap, source, lz: float = 1.0,
                 wire_radius: float | None = None):
        self.mesh = mesh
        self.materials = materials
        self.signal = source
        self.lz = float(lz)
        self._asm = _Assembly(mesh)
        self.mass = assemble_mass(mesh, materials, lz)
        self._profile = source_profile(mesh, lz, self._asm, wire_radius=wire_radius)
        self.dirichlet_nodes = np.asarray(mesh.boundary_nodes, dtype=np.int64)
        free = np.ones(mesh.num_nodes, dtype=bool)
        free[self.dirichlet_nodes] = False
        self.free = np.flatnonzero(free)
        self.n_dof = mesh.num_nodes
        self.linear_solve_count = 0
        self._factor_cache: dict[float, sparse.Factorization] = {}

    @property
    def is_linear(self) -> bool:
        return self.materials.is_linear

    def stiffness(self, u=None) -> sparse.SparseMatrix:
        asm = self._asm
        b_mag = element_flux_magnitude(self.mesh, u, self.lz, asm)
        nu_e = _element_reluctivity(self.mesh, self.materials, b_mag)
        local = (nu_e / (self.lz * self.lz))[:, None, None] * asm.stiff_ref
        return sparse.SparseMatrix(asm.scatter(local, self.n_dof))

    def source(self, t: float) -> np.ndarray:
        return self._profile * float(self.signal(t))

    def differential_stiffness(self, u) -> scipy.sparse.csr_matrix:
        """Chain-rule Jacobian contribution of nu(|curl A|); zero for constant laws."""
        asm = self._asm
        u = np.asarray(u, dtype=float)
        q = np.einsum("eij,ej->ei", asm.grads, u[asm.tri])
        q_norm = np.hypot(q[:, 0], q[:, 1])
        b_mag = q_norm / self.lz
        weight = np.zeros(self.mesh.num_triangles)
        for region, model in enumerate(self.materials.reluctivity):
            if model.is_linear:
                continue
            mask = (self.mesh.regions == region) & (q_norm > 1e-300)
            if np.any(mask):
                weight[mask] = model.dnu_db(b_mag[mask]) * asm.areas[mask] \
                    / (self.lz ** 3 * q_norm[mask])
        active = weight != 0.0
        if not np.any(active):
            return scipy.sparse.csr_matrix((self.n_dof, self.n_dof))
        p = np.einsum("eki,ek->ei", asm.grads[active], q[active])  # (na, 3)
        local = weight[active, None, None] * p[:, :, None] * p[:, None, :]
        rows = np.repeat(asm.tri[active], 3, axis=1).ravel()
        cols = np.tile(asm.tri[active], (1, 3)).ravel()
        return scipy.sparse.coo_matrix((local.ravel(), (rows, cols)),
                                       shape=(self.n_dof, self.n_dof)).tocsr()

    def _reduced(self, mat: scipy.sparse.csr_matrix) -> scipy.sparse.csr_matrix:
        return mat[self.free][:, self.free]

    def _linear_factor(self, dt: float) -> sparse.Factorization:
        key = float(dt)
        factor = self._factor_cache.get(key)
        if factor is None:
            a = self.mass.csr / dt + self.stiffness(None).csr
            factor = sparse.factorize(sparse.SparseMatrix(self._reduced(a.tocsr())))
            self._factor_cache[key] = factor
        return factor


def backward_euler_step(system: DiscreteSystem, dt: float, t_new: float, u_prev,
                        newton: NewtonOptions | None = None) -> np.ndarray:
    """One implicit step: solve (M/dt + K(u)) u = M u_prev / dt + j_s(t_new).

    Homogeneous Dirichlet values are eliminated; the Newton Jacobian is
    M/dt + K(u) + dK(u) with the differential-reluctivity term dK.  Raises
    NewtonConvergenceError when the relative residual stays above tolerance.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    newton = newton or NewtonOptions()
    u_prev = np.asarray(u_prev, dtype=float)
    b = system.mass.csr @ u_prev / dt + system.source(t_new)
    b[system.dirichlet_nodes] = 0.0
    b_free = b[system.free]
    scale = max(float(np.linalg.norm(b_free)), 1e-300)

    u = u_prev.copy()
    u[system.dirichlet_nodes] = 0.0

    if system.is_linear:
        factor = system._linear_factor(dt)
        u[system.free] = sparse.solve(factor, b_free)
        system.linear_solve_count += 1
        return u

    mass_dt = system.mass.csr / dt
    for it in range(newton.max_iters + 1):
        k_mat = system.stiffness(u).csr
        res = (mass_dt @ u + k_mat @ u - b)[system.free]
        res_norm = float(np.linalg.norm(res))
        if res_norm <= newton.tol * scale:
            return u
        if it == newton.max_iters:
            raise NewtonConvergenceError(it, res_norm, newton.tol * scale)
        jac = mass_dt + k_mat
        if newton.method == "newton":
            jac = jac + system.differential_stiffness(u)
        factor = sparse.factorize(sparse.SparseMatrix(system._reduced(jac.tocsr())))
        delta = sparse.solve(factor, -res)
        system.linear_solve_count += 1
        u[system.free] += delta
    raise AssertionError("unreachable")


class EddyPropagator(Propagator):
    """Backward-Euler map of the spatial DAE for one hierarchy level."""

    def __init__(self, system: DiscreteSystem, level: int,
                 newton: NewtonOptions | None = None):
        self.system = system
        self.level = level
        self.newton = newton or NewtonOptions()
        self.state_dim = system.n_dof
        self.is_linear = system.is_linear

    def step(self, t_from, dt, u):
        return backward_euler_step(self.system, dt, t_from + dt, u, self.newton)


def make_propagators(system: DiscreteSystem, hierarchy: TemporalHierarchy,
                     newton: NewtonOptions | None = None) -> list[EddyPropagator]:
    """One rediscretized propagator per level: a single implicit step of that
    level's step size, never a composition of finer steps."""
    return [EddyPropagator(system, level, newton) for level in range(hierarchy.num_levels)]

"""Assembly of the plane-strain elasticity stiffness and mass matrices.

Element stiffness entries follow from the energy ``2 mu Def(u):Def(v) + lam div u div v``:

    K[(a,i),(b,j)] = mu d_ij grad N_a . grad N_b + mu dN_a/dx_j dN_b/dx_i + lam dN_a/dx_i dN_b/dx_j

Degrees of freedom are interleaved, ``2 * node + component``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..errors import AssemblyError
from ..moduli import DIRICHLET, ElasticModuli, check_bc
from .mesh import LINEAR, Mesh

# degree-4 six-point rule on the reference triangle (weights sum to 1/2)
_A, _WA = 0.445948490915965, 0.223381589678011
_B, _WB = 0.091576213509771, 0.109951743655322
QUAD_POINTS = np.array([
    [_A, _A], [1 - 2 * _A, _A], [_A, 1 - 2 * _A],
    [_B, _B], [1 - 2 * _B, _B], [_B, 1 - 2 * _B],
])
QUAD_WEIGHTS = 0.5 * np.array([_WA] * 3 + [_WB] * 3)


def shape_functions(order: str, pts: np.ndarray):
    """Values ``(Q, nb)`` and reference gradients ``(Q, nb, 2)`` at ``pts``."""
    xi, eta = pts[:, 0], pts[:, 1]
    l1, l2, l3 = 1 - xi - eta, xi, eta
    one = np.ones_like(xi)
    if order == LINEAR:
        N = np.column_stack([l1, l2, l3])
        dN = np.stack([np.column_stack([-one, -one]), np.column_stack([one, 0 * one]),
                       np.column_stack([0 * one, one])], axis=1)
        return N, dN
    N = np.column_stack([l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), l3 * (2 * l3 - 1),
                         4 * l1 * l2, 4 * l2 * l3, 4 * l3 * l1])
    d1 = np.column_stack([-one, -one])
    d2 = np.column_stack([one, 0 * one])
    d3 = np.column_stack([0 * one, one])
    L1, L2, L3 = l1[:, None], l2[:, None], l3[:, None]
    dN = np.stack([
        (4 * L1 - 1) * d1, (4 * L2 - 1) * d2, (4 * L3 - 1) * d3,
        4 * (L1 * d2 + L2 * d1), 4 * (L2 * d3 + L3 * d2), 4 * (L3 * d1 + L1 * d3),
    ], axis=1)
    return N, dN


def _geometry(mesh: Mesh, check: bool = False):
    """Physical gradients ``(E, Q, nb, 2)``, Jacobian determinants ``(E, Q)``, weights."""
    N, dN = shape_functions(mesh.element_order, QUAD_POINTS)
    X = mesh.nodes[mesh.triangles]  # (E, nb, 2)
    J = np.einsum("eak,qal->eqkl", X, dN)  # dx_k / dxi_l
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if check:
        tol = 1e-14 * mesh.bounding_box_area()
        bad = np.nonzero(np.min(det, axis=1) <= tol)[0]
        if bad.size:
            t = int(bad[0])
            raise AssemblyError(f"degenerate element: triangle {t} has non-positive Jacobian", triangle=t)
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] / det
    inv[..., 1, 1] = J[..., 0, 0] / det
    inv[..., 0, 1] = -J[..., 0, 1] / det
    inv[..., 1, 0] = -J[..., 1, 0] / det
    grads = np.einsum("qal,eqlk->eqak", dN, inv)
    return grads, det, QUAD_WEIGHTS


@dataclass
class DiscreteEigenproblem:
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    dof_map: np.ndarray  # (n_nodes, 2) -> matrix index, -1 if eliminated
    constrained: np.ndarray  # eliminated global dofs 2*node+comp
    bc: str
    mesh: Mesh
    moduli: ElasticModuli

    @property
    def dimension(self) -> int:
        return self.stiffness.shape[0]

    def interpolate(self, field) -> np.ndarray:
        """Coefficient vector of a displacement field ``field(x, y) -> (ux, uy)``."""
        ux, uy = field(self.mesh.nodes[:, 0], self.mesh.nodes[:, 1])
        full = np.column_stack([np.broadcast_to(ux, len(self.mesh.nodes)),
                                np.broadcast_to(uy, len(self.mesh.nodes))]).ravel()
        keep = self.dof_map.ravel() >= 0
        return full[keep]


def element_matrices(moduli: ElasticModuli, mesh: Mesh):
    """Element stiffness and mass blocks, shape ``(E, 2nb, 2nb)``."""
    grads, det, w = _geometry(mesh, check=True)
    N, _ = shape_functions(mesh.element_order, QUAD_POINTS)
    mu, lam = moduli.mu, moduli.lam
    wd = det * w[None, :]
    G = np.einsum("eq,eqak,eqbk->eab", wd, grads, grads)
    C = np.einsum("eq,eqai,eqbj->eaibj", wd, grads, grads)  # dN_a/dx_i dN_b/dx_j
    E, nb = G.shape[:2]
    eye = np.eye(2)
    K = (mu * np.einsum("eab,ij->eaibj", G, eye)
         + mu * np.einsum("eajbi->eaibj", C)
         + lam * C).reshape(E, 2 * nb, 2 * nb)
    iu = np.triu_indices(2 * nb, 1)
    K[:, iu[1], iu[0]] = K[:, iu[0], iu[1]]
    Ms = np.einsum("eq,qa,qb->eab", wd, N, N)
    M = np.einsum("eab,ij->eaibj", Ms, eye).reshape(E, 2 * nb, 2 * nb)
    M[:, iu[1], iu[0]] = M[:, iu[0], iu[1]]
    return K, M


def _symmetric_from_upper(vals, rows, cols, ndof):
    # only entries with row <= col are summed; the mirror image is a transpose,
    # so (i, j) and (j, i) receive bit-identical values
    up = rows <= cols
    U = sp.coo_matrix((vals[up], (rows[up], cols[up])), shape=(ndof, ndof)).tocsr()
    U.sum_duplicates()
    return (U + sp.triu(U, 1, format="csr").T).tocsr()


def assemble(moduli: ElasticModuli, mesh: Mesh, bc: str) -> DiscreteEigenproblem:
    """Global stiffness / mass for the Lamé system; clamped dofs are eliminated.

    Traction-free boundaries are natural for this weak form and need no term.
    """
    bc = check_bc(bc)
    Ke, Me = element_matrices(moduli, mesh)
    tri = mesh.triangles
    dofs = np.stack([2 * tri, 2 * tri + 1], axis=2).reshape(len(tri), -1)
    rows = np.repeat(dofs, dofs.shape[1], axis=1).ravel()
    cols = np.tile(dofs, (1, dofs.shape[1])).ravel()
    ndof = 2 * mesh.n_nodes
    K = _symmetric_from_upper(Ke.ravel(), rows, cols, ndof)
    M = _symmetric_from_upper(Me.ravel(), rows, cols, ndof)
    constrained = np.zeros(0, dtype=np.int64)
    if bc == DIRICHLET:
        bn = mesh.boundary_nodes()
        constrained = np.sort(np.concatenate([2 * bn, 2 * bn + 1]))
    free = np.setdiff1d(np.arange(ndof), constrained)
    dof_map = -np.ones(ndof, dtype=np.int64)
    dof_map[free] = np.arange(free.size)
    K = K[free][:, free].tocsr()
    M = M[free][:, free].tocsr()
    return DiscreteEigenproblem(K, M, dof_map.reshape(-1, 2), constrained, bc, mesh, moduli)

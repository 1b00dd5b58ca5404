"""Finite-element oracle for the plane-strain Lamé eigenproblem."""
from .assemble import DiscreteEigenproblem, assemble, element_matrices
from .mesh import LINEAR, QUADRATIC, Mesh, generate_disk_mesh, generate_square_mesh, read_mesh, refine, write_mesh
from .solve import ConvergenceReport, convergence_study, generalized_eigen, solve_eigen

__all__ = [
    "LINEAR", "QUADRATIC", "Mesh", "DiscreteEigenproblem", "ConvergenceReport",
    "generate_disk_mesh", "generate_square_mesh", "refine", "read_mesh", "write_mesh",
    "assemble", "element_matrices", "generalized_eigen", "solve_eigen", "convergence_study",
]

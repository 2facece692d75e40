"""Exact diagonalization of the anisotropic Dicke model."""

__version__ = "0.1.0"

from .basis import Basis, BasisState, ModelParams, build_basis, parity_of, parity_sector
from .eigensolve import Spectrum, eigh
from .hamiltonian import build_decoupled, build_hamiltonian, build_spinspace_hamiltonian

__all__ = [
    "Basis",
    "BasisState",
    "ModelParams",
    "Spectrum",
    "build_basis",
    "build_decoupled",
    "build_hamiltonian",
    "build_spinspace_hamiltonian",
    "eigh",
    "parity_of",
    "parity_sector",
]

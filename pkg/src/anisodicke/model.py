"""Convenience entry points combining basis, Hamiltonian and eigensolver."""
from __future__ import annotations

import numpy as np

from .basis import Basis, ModelParams, build_basis, parity_sector
from .eigensolve import Spectrum, eigh_sectors, lowest_eigenpair
from .hamiltonian import build_hamiltonian


def ground_state(params: ModelParams, basis: Basis | None = None, sign: int = 1) -> tuple[float, np.ndarray]:
    """Lowest state of the given parity sector, embedded in the full basis.

    In the super-radiant phase the two parity ground states are
    exponentially close, so a full-space solve returns an arbitrary
    mixture; fixing the sector keeps the state well defined.
    """
    basis = basis or build_basis(params)
    idx = parity_sector(basis, sign)
    H = build_hamiltonian(params, basis)
    e, v = lowest_eigenpair(H[np.ix_(idx, idx)])
    psi = np.zeros(basis.dim)
    psi[idx] = v
    return e, psi


def ground_energy(params: ModelParams, basis: Basis | None = None) -> float:
    return ground_state(params, basis)[0]


def spectrum(params: ModelParams, basis: Basis | None = None, values_only: bool = False) -> Spectrum:
    """Full spectrum, diagonalized parity block by parity block."""
    basis = basis or build_basis(params)
    return eigh_sectors(build_hamiltonian(params, basis), basis.parities, values_only=values_only)

"""Truncated Fock x Dicke product basis and its parity decomposition.

States are |n> (x) |j, m> with n = 0..n_max bosons and m = -j..j, j = N/2.
Ordering is n-major with m ascending inside each boson block, so a
coefficient vector reshapes directly to an (n_max + 1, N + 1) matrix
with rows labelled by n and columns by m.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np


class BasisError(ValueError):
    """Raised for model parameters that do not define a valid basis."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings and truncation of the anisotropic Dicke model.

    Energies are measured in units of ``omega0``. ``g1`` multiplies the
    rotating terms (a^dag J- + a J+), ``g2`` the counter-rotating ones.
    """

    omega: float = 1.0
    omega0: float = 1.0
    g1: float = 0.0
    g2: float = 0.0
    N: int = 2
    n_max: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2 or self.N % 2:
            raise BasisError(f"N must be an even integer >= 2, got {self.N}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise BasisError(f"n_max must be an integer >= 0, got {self.n_max}")
        if not (self.omega > 0 and self.omega0 > 0):
            raise BasisError("omega and omega0 must be positive")
        if not (self.g1 >= 0 and self.g2 >= 0):
            raise BasisError("couplings g1, g2 must be non-negative")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def j(self) -> float:
        return self.N / 2

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * (self.N + 1)

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


class BasisState(NamedTuple):
    n: int
    m: int


def parity_of(state: BasisState, j: float) -> int:
    """Eigenvalue of exp(i pi [a^dag a + Jz + j]) on a product state.

    (-1)**(n + m + j) is evaluated as (-1)**(n + (m + j)); m + j is the
    non-negative integer offset of m, so no half-integers are involved.
    """
    offset = state.m + j
    if offset != int(offset):
        raise BasisError(f"m={state.m} is not a valid projection for j={j}")
    return -1 if (state.n + int(offset)) % 2 else 1


@dataclass(frozen=True, eq=False)
class Basis:
    params: ModelParams

    @property
    def n_spin(self) -> int:
        """Number of Dicke states per boson block (N + 1)."""
        return self.params.N + 1

    @property
    def dim(self) -> int:
        return self.params.dim

    @cached_property
    def n_values(self) -> np.ndarray:
        n = np.repeat(np.arange(self.params.n_max + 1), self.n_spin)
        n.flags.writeable = False
        return n

    @cached_property
    def m_offsets(self) -> np.ndarray:
        """m + j for every state, as integers 0..N."""
        k = np.tile(np.arange(self.n_spin), self.params.n_max + 1)
        k.flags.writeable = False
        return k

    @cached_property
    def m_values(self) -> np.ndarray:
        m = self.m_offsets - self.params.N // 2
        m.flags.writeable = False
        return m

    @cached_property
    def parities(self) -> np.ndarray:
        p = np.where((self.n_values + self.m_offsets) % 2, -1, 1)
        p.flags.writeable = False
        return p

    @cached_property
    def states(self) -> tuple[BasisState, ...]:
        return tuple(BasisState(int(n), int(m)) for n, m in zip(self.n_values, self.m_values))

    def __len__(self) -> int:
        return self.dim

    def state_at(self, k: int) -> BasisState:
        if not 0 <= k < self.dim:
            raise IndexError(f"basis index {k} out of range for dimension {self.dim}")
        n, off = divmod(int(k), self.n_spin)
        return BasisState(n, off - self.params.N // 2)

    def index(self, state: BasisState) -> int:
        n, m = state
        off = m + self.params.N // 2
        if off != int(off) or n != int(n):
            raise KeyError(f"{state} is not a lattice point of the basis")
        n, off = int(n), int(off)
        if not (0 <= n <= self.params.n_max and 0 <= off <= self.params.N):
            raise KeyError(f"{state} is not in the truncated basis")
        return n * self.n_spin + off

    def reshape(self, v: np.ndarray) -> np.ndarray:
        """View a coefficient vector as an (n_max + 1, N + 1) matrix."""
        return np.asarray(v).reshape(self.params.n_max + 1, self.n_spin)


def build_basis(params: ModelParams) -> Basis:
    if not isinstance(params, ModelParams):
        raise BasisError("build_basis expects ModelParams")
    return Basis(params)


def parity_sector(basis: Basis, sign: int) -> np.ndarray:
    """Indices (in basis order) of the states with parity ``sign``."""
    if sign not in (1, -1):
        raise ValueError("parity sign must be +1 or -1")
    return np.flatnonzero(basis.parities == sign)

"""Matrix assembly for the anisotropic Dicke Hamiltonian.

    H = w a^dag a + w0 Jz + g1/sqrt(2j) (a^dag J- + a J+)
                          + g2/sqrt(2j) (a^dag J+ + a J-)

Only the a^dag terms are enumerated (they map (n, m) to (n+1, m-1) and
(n+1, m+1)); their Hermitian partners come from mirroring, which keeps the
dense result bit-exactly symmetric.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .basis import Basis, ModelParams, build_basis

#: refuse spin product spaces larger than this
SPINSPACE_MAX_DIM = 2**16


class HamiltonianError(ValueError):
    pass


def ladder_coefficient(j: float, m: float, direction: str) -> float:
    """<j, m+-1| J+- |j, m> = sqrt(j(j+1) - m(m+-1)); exactly 0 at the edges."""
    if abs(m) > j:
        raise ValueError(f"|m|={abs(m)} exceeds j={j}")
    if direction == "raise":
        if m == j:
            return 0.0
        return math.sqrt(j * (j + 1) - m * (m + 1))
    if direction == "lower":
        if m == -j:
            return 0.0
        return math.sqrt(j * (j + 1) - m * (m - 1))
    raise ValueError(f"direction must be 'raise' or 'lower', got {direction!r}")


def _check_basis(params: ModelParams, basis: Basis | None) -> Basis:
    if basis is None:
        return build_basis(params)
    if basis.params.N != params.N or basis.params.n_max != params.n_max:
        raise HamiltonianError(
            f"basis (N={basis.params.N}, n_max={basis.params.n_max}) does not match "
            f"params (N={params.N}, n_max={params.n_max})"
        )
    return basis


def hamiltonian_triplets(params: ModelParams, basis: Basis | None = None):
    """Diagonal plus upper-triangle (row < col) coupling entries.

    Returns ``(diag, rows, cols, vals)``; rows index the source state
    (n, m) and cols the target (n+1, m-+1), which always lies later in the
    n-major ordering.
    """
    basis = _check_basis(params, basis)
    j = params.j
    n = basis.n_values
    m = basis.m_values.astype(float)
    diag = params.omega * n + params.omega0 * m

    src = np.flatnonzero(n < params.n_max)
    ns, ms = n[src], m[src]
    boson = np.sqrt(ns + 1.0) / math.sqrt(2 * j)
    width = basis.n_spin
    rows, cols, vals = [], [], []
    if params.g1:
        # a^dag J- : (n, m) -> (n+1, m-1)
        ok = ms > -j
        lower = np.sqrt(j * (j + 1) - ms[ok] * (ms[ok] - 1))
        rows.append(src[ok])
        cols.append(src[ok] + width - 1)
        vals.append(params.g1 * boson[ok] * lower)
    if params.g2:
        # a^dag J+ : (n, m) -> (n+1, m+1)
        ok = ms < j
        raise_ = np.sqrt(j * (j + 1) - ms[ok] * (ms[ok] + 1))
        rows.append(src[ok])
        cols.append(src[ok] + width + 1)
        vals.append(params.g2 * boson[ok] * raise_)
    if rows:
        rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        rows = cols = np.zeros(0, dtype=int)
        vals = np.zeros(0)
    return diag, rows, cols, vals


def build_hamiltonian(params: ModelParams, basis: Basis | None = None) -> np.ndarray:
    """Dense real symmetric Hamiltonian in the n-major product basis."""
    diag, rows, cols, vals = hamiltonian_triplets(params, basis)
    H = np.diag(diag)
    H[rows, cols] = vals
    H[cols, rows] = vals
    return H


def build_hamiltonian_sparse(params: ModelParams, basis: Basis | None = None) -> sp.csr_matrix:
    diag, rows, cols, vals = hamiltonian_triplets(params, basis)
    d = len(diag)
    idx = np.arange(d)
    return sp.csr_matrix(
        (np.concatenate([diag, vals, vals]),
         (np.concatenate([idx, rows, cols]), np.concatenate([idx, cols, rows]))),
        shape=(d, d),
    )


def build_decoupled(params: ModelParams, basis: Basis | None = None) -> np.ndarray:
    """H0 = w a^dag a + w0 Jz, i.e. the Hamiltonian with g1 = g2 = 0."""
    return build_hamiltonian(params.replace(g1=0.0, g2=0.0), basis)


def spinspace_dim(params: ModelParams) -> int:
    return (params.n_max + 1) * 2**params.N


def spinspace_parities(params: ModelParams) -> np.ndarray:
    """(-1)**(n + #up) for every state of the spin product space."""
    n_up = np.array([bin(s).count("1") for s in range(2**params.N)])
    n = np.arange(params.n_max + 1)
    return np.where((n[:, None] + n_up[None, :]) % 2, -1, 1).ravel()


def build_spinspace_hamiltonian(params: ModelParams, max_dim: int = SPINSPACE_MAX_DIM) -> np.ndarray:
    """Hamiltonian on |n> (x) |s_1 ... s_N> with distinguishable spin-1/2 atoms.

    Spin i is bit ``N - 1 - i`` of the spin index (spin 1 is the most
    significant bit); a set bit means spin up. Index = n * 2**N + s.
    Collective operators are J+- = sum_i sigma+-^(i), Jz = sum_i sigma_z^(i) / 2.
    """
    dim = spinspace_dim(params)
    if dim > max_dim:
        raise HamiltonianError(
            f"spin product space dimension {dim} exceeds the limit {max_dim}; "
            "reduce N or n_max"
        )
    N, n_max = params.N, params.n_max
    ns = 2**N
    spins = np.arange(ns)
    n_up = np.array([bin(s).count("1") for s in spins])
    n = np.repeat(np.arange(n_max + 1), ns)
    s = np.tile(spins, n_max + 1)
    H = np.diag(params.omega * n + params.omega0 * (np.tile(n_up, n_max + 1) - N / 2))

    scale = 1.0 / math.sqrt(N)
    src = np.flatnonzero(n < n_max)
    amp = np.sqrt(n[src] + 1.0) * scale
    for bit in range(N):
        mask = 1 << bit
        up = (s[src] & mask) != 0
        # a^dag sigma-_i flips up -> down; a^dag sigma+_i flips down -> up
        for g, sel, flip in ((params.g1, up, -mask), (params.g2, ~up, mask)):
            if not g:
                continue
            r = src[sel]
            c = r + ns + flip
            H[r, c] = g * amp[sel]
            H[c, r] = g * amp[sel]
    return H

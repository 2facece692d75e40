"""Per-eigenvector diagnostics in the product basis."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import Basis

NORM_TOL = 1e-10
#: Schmidt weights below this are dropped before the entropy sum
SCHMIDT_CUTOFF = 1e-14
#: |psi_j|^2 below this contributes nothing to the Shannon entropy
SHANNON_CUTOFF = 1e-300


def _probabilities(v) -> np.ndarray:
    v = np.asarray(v)
    p = (v.real**2 + v.imag**2) if np.iscomplexobj(v) else v * v
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"vector is not normalized (norm^2 = {total!r})")
    return p


def participation_ratio(v) -> float:
    """1 / sum_j |v_j|^4 for a normalized vector."""
    p = _probabilities(v)
    return float(1.0 / np.dot(p, p))


def inverse_participation_ratio(v) -> float:
    p = _probabilities(v)
    return float(np.dot(p, p))


def participation_entropy(v, q: float) -> float:
    """S_q = ln(sum |v_j|^(2q)) / (1 - q); the q -> 1 limit is Shannon's."""
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    p = _probabilities(v)
    if q == 1:
        p = p[p >= SHANNON_CUTOFF]
        return float(-np.sum(p * np.log(p)))
    p = p[p > 0]
    return float(np.log(np.sum(p**q)) / (1.0 - q))


def multifractal_dimension(v, q: float, dim: int | None = None) -> float:
    """D_q = S_q / ln(dim), with dim defaulting to len(v)."""
    dim = len(v) if dim is None else dim
    if dim < 2:
        raise ValueError("multifractal dimension needs dim >= 2")
    return participation_entropy(v, q) / math.log(dim)


def mean_photon_number(v, basis: Basis) -> float:
    """<a^dag a> / j for a state over ``basis``."""
    p = _probabilities(v)
    return float(np.dot(basis.n_values, p) / basis.params.j)


def schmidt_weights(v, basis: Basis) -> np.ndarray:
    """Squared singular values of the (boson x spin) coefficient matrix."""
    _probabilities(v)
    sv = np.linalg.svd(basis.reshape(v), compute_uv=False)
    return sv * sv


def _entropy_of_weights(p: np.ndarray) -> np.ndarray:
    p = np.where(p > SCHMIDT_CUTOFF, p, 1.0)
    return -np.sum(p * np.log(p), axis=-1)


def vnee_spins(v, basis: Basis) -> float:
    """Spin-boson entanglement entropy -Tr rho_spins ln rho_spins (nats)."""
    return float(_entropy_of_weights(schmidt_weights(v, basis)))


def vnee_many(vectors: np.ndarray, basis: Basis) -> np.ndarray:
    """Entanglement entropy of every column of ``vectors`` at once."""
    norms = np.einsum("ij,ij->j", vectors, vectors)
    if np.any(np.abs(norms - 1.0) > NORM_TOL):
        raise ValueError("columns are not normalized")
    n_max1, width = basis.params.n_max + 1, basis.n_spin
    stack = np.ascontiguousarray(vectors.T).reshape(-1, n_max1, width)
    sv = np.linalg.svd(stack, compute_uv=False)
    return _entropy_of_weights(sv * sv)


def reduced_density_spins(v, basis: Basis) -> np.ndarray:
    psi = basis.reshape(v)
    return psi.T @ psi


def reduced_density_boson(v, basis: Basis) -> np.ndarray:
    psi = basis.reshape(v)
    return psi @ psi.T


def density_entropy(rho: np.ndarray) -> float:
    """von Neumann entropy of a (real symmetric or Hermitian) density matrix."""
    w = np.linalg.eigvalsh(rho)
    return float(_entropy_of_weights(np.clip(w, 0.0, None)))


@dataclass(frozen=True)
class EigenstateMetrics:
    pr: float
    ipr: float
    photon_density: float
    vnee: float
    d_q: dict[float, float] = field(default_factory=dict)


def eigenstate_metrics(v, basis: Basis, qs=(0.5, 1.0, 2.0, 3.0)) -> EigenstateMetrics:
    ipr = inverse_participation_ratio(v)
    return EigenstateMetrics(
        pr=1.0 / ipr,
        ipr=ipr,
        photon_density=mean_photon_number(v, basis),
        vnee=vnee_spins(v, basis),
        d_q={q: multifractal_dimension(v, q, basis.dim) for q in qs},
    )

"""Dense symmetric eigendecomposition.

Two kernels share one contract:

* ``method="lapack"`` delegates to LAPACK's divide-and-conquer driver
  (``scipy.linalg.eigh``); this is what every other module uses.
* ``method="householder"`` is a self-contained Householder
  tridiagonalization followed by implicitly shifted QL iterations. It is
  slow (Python loops over rotations) and exists as an independent
  cross-check and for environments without a LAPACK build.

Eigenvector signs are fixed so that the first component whose magnitude
exceeds ``SIGN_TOL`` is positive, which makes output reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

SIGN_TOL = 1e-10
QL_MAX_ITER = 60


class EigensolverError(RuntimeError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with eigenvectors stored as columns.

    ``sectors`` holds the parity (+1/-1) of every eigenvector when the
    spectrum was obtained block by block, otherwise ``None``.
    """

    energies: np.ndarray
    vectors: np.ndarray
    sectors: np.ndarray | None = None

    @property
    def basis_dim(self) -> int:
        return self.vectors.shape[0]

    def __len__(self) -> int:
        return len(self.energies)

    def sector(self, sign: int) -> "Spectrum":
        if self.sectors is None:
            raise ValueError("spectrum carries no parity labels")
        keep = self.sectors == sign
        return Spectrum(self.energies[keep], self.vectors[:, keep], self.sectors[keep])


def fix_signs(vectors: np.ndarray, tol: float = SIGN_TOL) -> np.ndarray:
    """Flip columns in place so the first significant entry is positive."""
    big = np.abs(vectors) > tol
    first = np.argmax(big, axis=0)
    lead = vectors[first, np.arange(vectors.shape[1])]
    vectors *= np.where(lead < 0, -1.0, 1.0)
    return vectors


def _validate(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    return a


def eigh(matrix, method: str = "lapack") -> Spectrum:
    """Full eigendecomposition of a real symmetric matrix."""
    a = _validate(matrix)
    if a.shape[0] == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)))
    if method == "lapack":
        try:
            w, v = sla.eigh(a, driver="evd", check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(f"LAPACK eigensolver failed: {exc}") from exc
    elif method == "householder":
        w, v = householder_ql(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Spectrum(w, fix_signs(np.ascontiguousarray(v)))


def eigvalsh(matrix) -> np.ndarray:
    a = _validate(matrix)
    return sla.eigh(a, eigvals_only=True, driver="evd", check_finite=False)


def eigh_sectors(matrix, labels: np.ndarray, values_only: bool = False) -> Spectrum:
    """Diagonalize a block-diagonal matrix one symmetry sector at a time.

    ``labels`` assigns each basis index to a sector (+1/-1). The merged
    spectrum is sorted by energy with a stable tie-break (+1 block first),
    and every eigenvector is supported on a single sector.
    """
    a = _validate(matrix)
    labels = np.asarray(labels)
    energies, vectors, sectors = [], [], []
    for sign in (1, -1):
        idx = np.flatnonzero(labels == sign)
        if not len(idx):
            continue
        block = a[np.ix_(idx, idx)]
        if values_only:
            w = sla.eigh(block, eigvals_only=True, driver="evd", check_finite=False)
            energies.append(w)
        else:
            sub = eigh(block)
            full = np.zeros((a.shape[0], len(idx)))
            full[idx] = sub.vectors
            energies.append(sub.energies)
            vectors.append(full)
        sectors.append(np.full(len(idx), sign))
    w = np.concatenate(energies)
    order = np.argsort(w, kind="stable")
    s = np.concatenate(sectors)[order]
    if values_only:
        return Spectrum(w[order], np.zeros((a.shape[0], 0)), s)
    return Spectrum(w[order], np.hstack(vectors)[:, order], s)


def lowest_eigenpair(matrix) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and eigenvector, exploiting a narrow band if present.

    The anisotropic Dicke Hamiltonian is banded in the n-major ordering
    (bandwidth ~ N + 2), so the banded LAPACK path is far cheaper than a
    dense tridiagonalization for large boson cutoffs.
    """
    a = _validate(matrix)
    d = a.shape[0]
    rows, cols = np.nonzero(np.triu(a, 1))
    bw = int(np.max(cols - rows)) if len(rows) else 0
    if bw < d // 4:
        ab = np.zeros((bw + 1, d))
        for k in range(bw + 1):
            ab[bw - k, k:] = np.diagonal(a, k)
        w, v = sla.eig_banded(ab, lower=False, select="i", select_range=(0, 0), check_finite=False)
    else:
        w, v = sla.eigh(a, subset_by_index=[0, 0], check_finite=False)
    return float(w[0]), fix_signs(v.copy())[:, 0]


# --- native kernel ---------------------------------------------------------


def tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Householder reduction A = Q T Q^T.

    Returns the diagonal ``d``, the sub-diagonal ``e`` (length n-1) and the
    orthogonal ``Q``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    q = np.eye(n)
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        u = x.copy()
        u[0] -= alpha
        unorm2 = u @ u
        if unorm2 == 0.0:
            continue
        # A <- P A P with P = I - 2 u u^T / (u^T u) on the trailing block
        sub = a[k + 1:, k + 1:]
        p = sub @ u * (2.0 / unorm2)
        kcoef = (u @ p) / unorm2
        w = p - kcoef * u
        sub -= np.outer(u, w) + np.outer(w, u)
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
        q[:, k + 1:] -= np.outer(q[:, k + 1:] @ u, u) * (2.0 / unorm2)
    d = np.diagonal(a).copy()
    e = np.diagonal(a, -1).copy()
    return d, e, q


def tridiagonal_ql(d: np.ndarray, e: np.ndarray, z: np.ndarray,
                   max_iter: int = QL_MAX_ITER) -> tuple[np.ndarray, np.ndarray]:
    """Implicitly shifted QL on a symmetric tridiagonal matrix.

    ``z`` accumulates the rotations (pass Q from the reduction, or I).
    """
    d = np.array(d, dtype=float)
    n = len(d)
    e = np.append(np.asarray(e, dtype=float), 0.0)
    z = np.array(z, dtype=float)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise EigensolverError(f"QL iteration did not converge for eigenvalue {l}", index=l)
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * zi1
                z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d, kind="stable")
    return d[order], z[:, order]


def householder_ql(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d, e, q = tridiagonalize(a)
    return tridiagonal_ql(d, e, q)

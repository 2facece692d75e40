"""Thermal phase transition: analytic critical temperature, the saddle-point
function behind it, Gibbs states on the spin product space and the mutual
information between two atoms.

Saddle-point quantities use the rescaled model H / w, so inverse
temperatures there are in units of 1/w and

    eps = w0 / w,   lam = (g1 + g2) / w,
    eta(y) = sqrt(1 + 4 lam^2 y / eps^2),
    phi(y) = -beta y + ln(2 cosh(beta eps eta / 2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .basis import ModelParams
from .eigensolve import Spectrum, eigh, lowest_eigenpair
from .hamiltonian import build_spinspace_hamiltonian, spinspace_parities
from .observables import density_entropy

#: largest atom number accepted for product-space calculations
MAX_THERMAL_N = 12
COARSE_GRID_SPACING = 0.1


class ThermalError(ValueError):
    pass


def analytic_tc(params: ModelParams) -> float | None:
    """Critical temperature (w0 / 2w) / artanh(w w0 / (g1 + g2)^2).

    ``None`` when (g1 + g2)^2 <= w w0: no super-radiant saddle exists.
    """
    lam2 = (params.g1 + params.g2) ** 2
    x = params.omega * params.omega0 / lam2 if lam2 > 0 else math.inf
    if x >= 1.0:
        return None
    return (params.omega0 / (2.0 * params.omega)) / math.atanh(x)


def critical_beta(epsilon: float, lam: float) -> float | None:
    """beta_c = (2 / eps) artanh(eps / lam^2) in units of 1/w."""
    x = epsilon / lam**2 if lam > 0 else math.inf
    if x >= 1.0:
        return None
    return 2.0 / epsilon * math.atanh(x)


@dataclass(frozen=True)
class SaddleState:
    epsilon: float
    lambda1: float
    lambda2: float
    beta: float
    y: float = 0.0

    @classmethod
    def from_params(cls, params: ModelParams, beta: float, y: float = 0.0) -> "SaddleState":
        w = params.omega
        return cls(params.omega0 / w, params.g1 / w, params.g2 / w, beta, y)

    @property
    def lam(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def eta(self) -> float:
        return saddle_eta(self.y, self.epsilon, self.lam)


def saddle_eta(y: float, epsilon: float, lam: float) -> float:
    return math.sqrt(1.0 + 4.0 * lam**2 * y / epsilon**2)


def _log2cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x))


def saddle_function(y: float, beta: float, epsilon: float, lam: float) -> float:
    if y < 0 or beta <= 0:
        raise ValueError("need y >= 0 and beta > 0")
    eta = saddle_eta(y, epsilon, lam)
    return -beta * y + _log2cosh(beta * epsilon * eta / 2.0)


def saddle_derivative(y: float, beta: float, epsilon: float, lam: float) -> float:
    """phi'(y) = -beta + beta lam^2 / (eps eta) tanh(beta eps eta / 2)."""
    eta = saddle_eta(y, epsilon, lam)
    return -beta + beta * lam**2 / (epsilon * eta) * math.tanh(beta * epsilon * eta / 2.0)


def saddle_condition(eta: float, beta: float, epsilon: float, lam: float) -> float:
    """eps eta / lam^2 - tanh(beta eps eta / 2); zero at a stationary point."""
    return epsilon * eta / lam**2 - math.tanh(beta * epsilon * eta / 2.0)


def bisect(f, lo: float, hi: float, xtol: float = 1e-15, max_iter: int = 200) -> float:
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("root is not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= xtol * max(1.0, abs(mid)):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_saddle_eta(beta: float, epsilon: float, lam: float) -> float:
    """Largest eta >= 1 solving the stationarity condition.

    Returns 1.0 (the trivial saddle y = 0) when no eta > 1 solves it, i.e.
    in the normal phase or for beta <= beta_c.
    """
    f = lambda eta: saddle_condition(eta, beta, epsilon, lam)
    if f(1.0) >= 0.0:
        return 1.0
    # tanh <= 1, so the condition is positive beyond eta = lam^2 / eps
    return bisect(f, 1.0, lam**2 / epsilon + 1.0)


def critical_beta_bisect(epsilon: float, lam: float) -> float | None:
    """beta at which the super-radiant saddle merges with eta = 1."""
    x = epsilon / lam**2
    if x >= 1.0:
        return None
    f = lambda beta: math.tanh(beta * epsilon / 2.0) - x
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    return bisect(f, 0.0, hi)


# --- density matrices ------------------------------------------------------


def gibbs_state(H, T: float, spectrum: Spectrum | None = None) -> np.ndarray:
    """exp(-H/T) / Z, built from the eigendecomposition with E_min shifted out."""
    if not T > 0:
        raise ThermalError(f"temperature must be positive, got {T}")
    spectrum = spectrum or eigh(H)
    w = boltzmann_weights(spectrum.energies, T)
    V = spectrum.vectors
    return (V * w) @ V.T


def boltzmann_weights(energies, T: float) -> np.ndarray:
    e = np.asarray(energies, dtype=float)
    w = np.exp(-(e - e.min()) / T)
    return w / w.sum()


def partial_trace(rho: np.ndarray, dims, keep) -> np.ndarray:
    """Reduced density matrix on the factors listed in ``keep``.

    ``dims`` are the tensor factor dimensions in the order they appear in
    the (row-major) state index.
    """
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one factor")
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError("keep index out of range")
    rho = np.asarray(rho)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"rho has shape {rho.shape}, factor dims give {total}")
    n = len(dims)
    t = rho.reshape(dims + dims)
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    red = np.einsum(t, row + col, out)
    d = int(np.prod([dims[k] for k in keep]))
    return red.reshape(d, d)


def spin_factor_dims(params: ModelParams) -> list[int]:
    return [params.n_max + 1] + [2] * params.N


def mutual_information(rho12: np.ndarray) -> tuple[float, float, float]:
    """(I12, S1, S2) for a 4x4 two-qubit density matrix."""
    t = rho12.reshape(2, 2, 2, 2)
    rho1 = np.einsum("abcb->ac", t)
    rho2 = np.einsum("abad->bd", t)
    s1, s2 = density_entropy(rho1), density_entropy(rho2)
    return s1 + s2 - density_entropy(rho12), s1, s2


def mutual_information_two_spins(rho_full: np.ndarray, params: ModelParams) -> float:
    """I12 = S1 + S2 - S12 between atoms 1 and 2 of a product-space state."""
    if params.N < 2:
        raise ThermalError("need at least two atoms")
    rho12 = partial_trace(rho_full, spin_factor_dims(params), keep=(1, 2))
    return mutual_information(rho12)[0]


def two_spin_blocks(vectors: np.ndarray, params: ModelParams) -> np.ndarray:
    """rho_12 of every column state, shape (k, 4, 4)."""
    N = params.N
    v = vectors.reshape(params.n_max + 1, 2, 2, 2 ** (N - 2), -1)
    blocks = np.einsum("nabrk,ncdrk->kabcd", v, v, optimize=True)
    return blocks.reshape(-1, 4, 4)


def _check_thermal(params: ModelParams):
    if params.N > MAX_THERMAL_N:
        raise ThermalError(f"product-space calculations are limited to N <= {MAX_THERMAL_N}")


class ThermalSpectrum(NamedTuple):
    spectrum: Spectrum
    blocks: np.ndarray
    ground_block: np.ndarray


def thermal_spectrum(params: ModelParams) -> ThermalSpectrum:
    """Product-space spectrum with every eigenstate's two-spin reduced state.

    The zero-temperature state is the +1 parity ground state, which stays
    well defined where the two parity ground states are nearly degenerate.
    """
    _check_thermal(params)
    H = build_spinspace_hamiltonian(params)
    spec = eigh(H)
    blocks = two_spin_blocks(spec.vectors, params)
    idx = np.flatnonzero(spinspace_parities(params) == 1)
    _, v = lowest_eigenpair(H[np.ix_(idx, idx)])
    gs = np.zeros(H.shape[0])
    gs[idx] = v
    return ThermalSpectrum(spec, blocks, two_spin_blocks(gs[:, None], params)[0])


def rho12_at(ts: ThermalSpectrum, T: float) -> np.ndarray:
    if T == 0:
        return ts.ground_block
    w = boltzmann_weights(ts.spectrum.energies, T)
    return np.tensordot(w, ts.blocks, axes=1)


def mi_curve(params: ModelParams, temps, ts: ThermalSpectrum | None = None) -> np.ndarray:
    """I12 at every temperature in ``temps`` (T = 0 uses the ground state)."""
    temps = np.atleast_1d(np.asarray(temps, dtype=float))
    if ts is None and np.all(temps == 0):
        return np.full(len(temps), ground_state_mutual_information(params)[0])
    ts = ts or thermal_spectrum(params)
    return np.array([mutual_information(rho12_at(ts, float(T)))[0] for T in temps])


def ground_state_mutual_information(params: ModelParams) -> tuple[float, float, float]:
    """(I12, S1, S2) for the zero-temperature state."""
    _check_thermal(params)
    H = build_spinspace_hamiltonian(params)
    idx = np.flatnonzero(spinspace_parities(params) == 1)
    _, v = lowest_eigenpair(H[np.ix_(idx, idx)])
    gs = np.zeros(H.shape[0])
    gs[idx] = v
    return mutual_information(two_spin_blocks(gs[:, None], params)[0])


class MITransition(NamedTuple):
    t_min: float
    temps: np.ndarray
    mi: np.ndarray
    dmi_dt: np.ndarray
    analytic_tc: float | None
    coarse: bool
    prominence: float
    depth: float
    n_minima: int


#: local minima of dI12/dT shallower than this fraction of the deepest are noise
MINIMUM_RELATIVE_DEPTH = 0.2


def mi_transition_temperature(params: ModelParams, temps, ts: ThermalSpectrum | None = None) -> MITransition:
    """Temperature of steepest MI decrease, from central differences.

    ``depth`` is |dI12/dT| at the minimum and ``prominence`` the same
    relative to the mean |dI12/dT| over the grid. ``n_minima`` counts the
    interior local minima at least ``MINIMUM_RELATIVE_DEPTH`` times as
    deep as the global one.
    """
    temps = np.asarray(temps, dtype=float)
    if len(temps) < 3 or np.any(np.diff(temps) <= 0):
        raise ValueError("temperature grid must be strictly increasing with >= 3 points")
    mi = mi_curve(params, temps, ts)
    d = np.gradient(mi, temps)
    k = int(np.argmin(d))
    scale = float(np.mean(np.abs(d)))
    prominence = abs(d[k]) / scale if scale > 0 else 0.0
    coarse = bool(np.min(np.diff(temps)) > COARSE_GRID_SPACING)
    depth = max(0.0, -float(d[k]))
    ends = np.r_[np.inf, d, np.inf]
    local = (d < ends[:-2]) & (d <= ends[2:]) & (-d >= MINIMUM_RELATIVE_DEPTH * depth)
    n_minima = int(np.count_nonzero(local)) if depth > 0 else 0
    return MITransition(float(temps[k]), temps, mi, d, analytic_tc(params), coarse, prominence,
                        depth, n_minima)

"""Quench from the middle eigenstate of the decoupled Hamiltonian.

The initial state is a single product basis vector; it is evolved under the
full Hamiltonian spectrally, psi(t) = V exp(-i E t) V^T psi_in, and the
participation ratio is measured in the product basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import Basis, ModelParams, build_basis
from .eigensolve import Spectrum
from .model import spectrum as full_spectrum

#: sample times used for the static-vs-dynamic comparison maps
FIGURE_TIMES = (0.01, 0.2, 1.0, 1000.0)
TIE_BREAK = "canonical (n ascending, then m ascending)"


@dataclass(frozen=True)
class QuenchResult:
    times: np.ndarray
    pr_t: np.ndarray
    initial_index: int
    norms: np.ndarray
    metadata: dict = field(default_factory=dict)


def decoupled_energies(basis: Basis, params: ModelParams | None = None) -> np.ndarray:
    p = params or basis.params
    return p.omega * basis.n_values + p.omega0 * basis.m_values


def middle_decoupled_state(basis: Basis, params: ModelParams | None = None) -> int:
    """Basis index of the state at rank floor(N_D / 2) in the H0 spectrum.

    Ties in w n + w0 m are broken by canonical basis order.
    """
    if params is not None and (params.N, params.n_max) != (basis.params.N, basis.params.n_max):
        raise ValueError("params do not match the basis")
    order = np.argsort(decoupled_energies(basis, params), kind="stable")
    return int(order[basis.dim // 2])


def evolve(spectrum: Spectrum, psi_in, times) -> np.ndarray:
    """Evolved states as rows of a complex array, one per time."""
    psi = np.asarray(psi_in)
    if not np.iscomplexobj(psi):
        psi = psi.astype(float)
    if abs(np.vdot(psi, psi).real - 1.0) > 1e-10:
        raise ValueError("initial state is not normalized")
    V = spectrum.vectors
    c = V.T @ psi
    t = np.atleast_1d(np.asarray(times, dtype=float))
    phases = np.exp(-1j * np.outer(t, spectrum.energies))
    out = (phases * c) @ V.T
    # t = 0 is the initial state itself, not V V^T psi up to rounding
    out[t == 0] = psi
    return out


def evolve_pr(spectrum: Spectrum, psi_in, times, initial_index: int = -1) -> QuenchResult:
    states = evolve(spectrum, psi_in, times)
    prob = states.real**2 + states.imag**2
    return QuenchResult(
        times=np.atleast_1d(np.asarray(times, dtype=float)),
        pr_t=1.0 / np.sum(prob * prob, axis=1),
        initial_index=initial_index,
        norms=np.sqrt(prob.sum(axis=1)),
        metadata={"tie_break": TIE_BREAK},
    )


def diagonal_ensemble_pr(spectrum: Spectrum, psi_in) -> float:
    """PR of the infinite-time-averaged basis occupation.

    sum_k |<alpha|k>|^2 |<k|psi_in>|^2 is the time average of |C_alpha(t)|^2
    when the spectrum has no degeneracies.
    """
    c = spectrum.vectors.T @ np.asarray(psi_in, dtype=float)
    avg = (spectrum.vectors**2) @ (c * c)
    return float(1.0 / np.dot(avg, avg))


def long_time_ipr(spectrum: Spectrum, psi_in) -> float:
    """Infinite-time average of sum_alpha |C_alpha(t)|^4.

    With a_ak = <alpha|k><k|psi_in> and no degenerate energy gaps the
    average is sum_alpha [2 (sum_k a_ak^2)^2 - sum_k a_ak^4]. Its inverse
    estimates the long-time mean of PR(t); it exceeds the inverse of
    :func:`diagonal_ensemble_pr` because temporal fluctuations of each
    |C_alpha|^2 add to the fourth moment.
    """
    c = spectrum.vectors.T @ np.asarray(psi_in, dtype=float)
    a2 = (spectrum.vectors * c) ** 2
    return float(np.sum(2.0 * a2.sum(axis=1) ** 2 - np.sum(a2 * a2, axis=1)))


def quench(params: ModelParams, times=FIGURE_TIMES, basis: Basis | None = None,
           spectrum: Spectrum | None = None) -> QuenchResult:
    basis = basis or build_basis(params)
    spectrum = spectrum or full_spectrum(params, basis)
    k = middle_decoupled_state(basis)
    psi = np.zeros(basis.dim)
    psi[k] = 1.0
    result = evolve_pr(spectrum, psi, times, initial_index=k)
    state = basis.state_at(k)
    result.metadata.update(initial_n=state.n, initial_m=state.m)
    return result

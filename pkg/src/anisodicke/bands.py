"""Whole-spectrum diagnostics: entanglement profile, characteristic
energies, chi ratios and central-band level statistics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .basis import Basis, ModelParams, build_basis, parity_sector
from .eigensolve import Spectrum
from .model import ground_energy, spectrum as full_spectrum
from .observables import vnee_many

#: gaps below this fraction of the spectral span count as exact degeneracies
DEGENERACY_RTOL = 1e-12
MIN_BAND_LEVELS = 50


class Profile(NamedTuple):
    energies: np.ndarray
    entropies: np.ndarray


class RStatistic(NamedTuple):
    mean: float
    count: int
    degenerate: int


class CentralBand(NamedTuple):
    r_mean: float | None
    n_levels: int
    degenerate: int
    low_statistics: bool


def vnee_profile(spectrum: Spectrum, basis: Basis, sector: int | None = None) -> Profile:
    """(E_n, S_n) in energy order; all levels, or one parity ``sector``."""
    energies, vectors = np.asarray(spectrum.energies), spectrum.vectors
    if sector is not None:
        keep = parity_labels(spectrum, basis) == sector
        energies, vectors = energies[keep], vectors[:, keep]
    return Profile(energies, vnee_many(vectors, basis))


def characteristic_energies(profile: Profile) -> tuple[float | None, float | None]:
    """Jump-weighted mean energies of the lower and upper halves.

    With dS_n = S_{n+1} - S_n and h = floor(N_D / 2), the lower energy
    sums over n = 0..h and the upper one over n = h..N_D-2; both limits are
    inclusive, so the jump at n = h weighs into both. A half with no
    entropy jumps at all gives ``None``.
    """
    e, s = np.asarray(profile.energies), np.asarray(profile.entropies)
    if len(e) < 4 or len(e) != len(s):
        raise ValueError("profile needs at least 4 points with matching lengths")
    jumps = np.abs(np.diff(s))
    half = len(e) // 2
    out = []
    for sl in (slice(0, half + 1), slice(half, len(e) - 1)):
        w = jumps[sl]
        total = w.sum()
        out.append(float(np.dot(e[sl], w) / total) if total > 0 else None)
    return out[0], out[1]


def projected_couplings(g1: float, g2: float) -> tuple[float, float]:
    """Radial projection of (g1, g2) onto g1 + g2 = 1, kept as-is inside it."""
    total = g1 + g2
    if total == 0:
        return 0.5, 0.5
    if total <= 1:
        return g1, g2
    return g1 / total, g2 / total


def reference_cutoffs(
    params: ModelParams,
    basis: Basis | None = None,
    ground: Callable[[ModelParams], float] | None = None,
) -> tuple[float, float]:
    """(e_normal0, e_max_decoupled) bounding the central band.

    e_max_decoupled = w n_max + w0 j is the top of the decoupled spectrum;
    e_normal0 is the ground energy at the critical-line projection of the
    couplings (see :func:`projected_couplings`).
    """
    ground = ground or ground_energy
    g1, g2 = projected_couplings(params.g1, params.g2)
    e_normal0 = ground(params.replace(g1=g1, g2=g2))
    e_max = params.omega * params.n_max + params.omega0 * params.j
    return float(e_normal0), float(e_max)


def chi_values(e_lower, e_upper, e_normal0, e_max_decoupled) -> tuple[float | None, float | None]:
    lower = None if e_lower is None else e_lower / e_normal0
    upper = None if e_upper is None else e_upper / e_max_decoupled
    return lower, upper


def r_statistic(energies) -> RStatistic:
    """Mean ratio of consecutive level spacings, min(s_{n-1}, s_n)/max(...).

    Exactly degenerate pairs of gaps give r_n = 0; the number of zero gaps
    is returned alongside the mean.
    """
    e = np.sort(np.asarray(energies, dtype=float))
    if len(e) < 3:
        raise ValueError("r statistic needs at least 3 levels")
    s = np.diff(e)
    span = e[-1] - e[0]
    s = np.where(s <= DEGENERACY_RTOL * span, 0.0, s)
    lo = np.minimum(s[:-1], s[1:])
    hi = np.maximum(s[:-1], s[1:])
    r = np.divide(lo, hi, out=np.zeros_like(lo), where=hi > 0)
    return RStatistic(float(r.mean()), len(r), int(np.count_nonzero(s == 0)))


def parity_labels(spectrum: Spectrum, basis: Basis) -> np.ndarray:
    """Parity of each eigenvector, by dominant support.

    Inside a numerically degenerate multiplet the vectors may mix sectors;
    there the number of +1 members is the rank of the +1 projection
    (the rounded total +1 weight), assigned to the most +1-heavy members.
    """
    if spectrum.sectors is not None:
        return spectrum.sectors
    plus = parity_sector(basis, 1)
    w = np.sum(spectrum.vectors[plus] ** 2, axis=0)
    labels = np.where(w > 0.5, 1, -1)
    e = spectrum.energies
    tol = 1e-10 * max(1.0, float(np.max(np.abs(e))))
    breaks = np.flatnonzero(np.diff(e) > tol) + 1
    for group in np.split(np.arange(len(e)), breaks):
        if len(group) < 2:
            continue
        n_plus = int(round(w[group].sum()))
        ranked = group[np.argsort(-w[group], kind="stable")]
        labels[ranked[:n_plus]] = 1
        labels[ranked[n_plus:]] = -1
    return labels


def central_band_r(
    spectrum: Spectrum,
    basis: Basis,
    params: ModelParams,
    cutoffs: tuple[float, float] | None = None,
) -> CentralBand:
    """<r> of the +1-parity levels inside [e_normal0, e_max_decoupled]."""
    e_lo, e_hi = cutoffs or reference_cutoffs(params, basis)
    e = spectrum.energies[parity_labels(spectrum, basis) == 1]
    band = e[(e >= e_lo) & (e <= e_hi)]
    if len(band) < 3:
        return CentralBand(None, len(band), 0, True)
    r = r_statistic(band)
    return CentralBand(r.mean, len(band), r.degenerate, len(band) < MIN_BAND_LEVELS)


@dataclass(frozen=True)
class BandAnalysis:
    profile: Profile
    e_lower: float | None
    e_upper: float | None
    chi_lower: float | None
    chi_upper: float | None
    e_normal0: float
    e_max_decoupled: float
    r_mean: float | None
    band_levels: int
    low_statistics: bool


def analyze_bands(
    params: ModelParams,
    basis: Basis | None = None,
    spectrum: Spectrum | None = None,
    profile_sector: int | None = None,
) -> BandAnalysis:
    """Profile, characteristic energies, chi ratios and central-band <r>.

    The profile covers the full spectrum unless ``profile_sector`` picks a
    parity block; <r> always uses the +1 block.
    """
    basis = basis or build_basis(params)
    spectrum = spectrum or full_spectrum(params, basis)
    profile = vnee_profile(spectrum, basis, profile_sector)
    e_lower, e_upper = characteristic_energies(profile)
    e_normal0, e_max = reference_cutoffs(params, basis)
    chi_lower, chi_upper = chi_values(e_lower, e_upper, e_normal0, e_max)
    band = central_band_r(spectrum, basis, params, (e_normal0, e_max))
    return BandAnalysis(
        profile=profile,
        e_lower=e_lower,
        e_upper=e_upper,
        chi_lower=chi_lower,
        chi_upper=chi_upper,
        e_normal0=e_normal0,
        e_max_decoupled=e_max,
        r_mean=band.r_mean,
        band_levels=band.n_levels,
        low_statistics=band.low_statistics,
    )

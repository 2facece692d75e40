"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
repeated in the terminal summary. The whole file takes several minutes on
one core (criterion 4 dominates).
"""
import itertools
import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from anisodicke.bands import (
    Profile,
    analyze_bands,
    central_band_r,
    characteristic_energies,
    r_statistic,
    vnee_profile,
)
from anisodicke.basis import ModelParams, build_basis
from anisodicke.dynamics import diagonal_ensemble_pr, evolve_pr, long_time_ipr, middle_decoupled_state
from anisodicke.eigensolve import eigh
from anisodicke.hamiltonian import build_hamiltonian, build_spinspace_hamiltonian
from anisodicke.model import ground_state, spectrum
from anisodicke.observables import inverse_participation_ratio, mean_photon_number, participation_ratio
from anisodicke.sweep import RunConfig, run_scan
from anisodicke.thermal import (
    analytic_tc,
    critical_beta,
    critical_beta_bisect,
    gibbs_state,
    ground_state_mutual_information,
    mi_transition_temperature,
    partial_trace,
    saddle_condition,
    solve_saddle_eta,
    spin_factor_dims,
    thermal_spectrum,
)

pytestmark = pytest.mark.acceptance


def summarize(checks: dict) -> tuple[bool, str]:
    ok = all(v[0] for v in checks.values())
    detail = "; ".join(f"{k} {'ok' if v[0] else 'FAILED'} ({v[1]})" for k, v in checks.items())
    return ok, detail


# --- 1 ----------------------------------------------------------------------

def test_criterion_1_qpt_markers(verdict):
    N, n_max = 20, 100
    checks = {}
    p = ModelParams(g1=0.2, g2=0.2, N=N, n_max=n_max)
    b = build_basis(p)
    _, gs = ground_state(p, b)
    ipr = inverse_participation_ratio(gs)
    nph = mean_photon_number(gs, b)
    checks["IPR(0.2,0.2)>0.95"] = (ipr > 0.95, f"{ipr:.4f}")
    checks["photon(0.2,0.2)<0.05"] = (nph < 0.05, f"{nph:.2e}")
    p = ModelParams(g1=1.2, g2=0.8, N=N, n_max=n_max)
    nph = mean_photon_number(ground_state(p)[1], build_basis(p))
    checks["photon(1.2,0.8)>0.1"] = (nph > 0.1, f"{nph:.4f}")
    dens = []
    for g1, g2 in itertools.product(np.linspace(0, 1, 11), repeat=2):
        if g1 + g2 < 1 - 1e-9:
            q = ModelParams(g1=g1, g2=g2, N=N, n_max=n_max)
            dens.append(ground_state(q)[0] / N)
    lo, hi = min(dens), max(dens)
    checks["E/N in [-0.55,-0.45] on NP"] = (-0.55 <= lo and hi <= -0.45, f"{len(dens)} points, [{lo:.4f}, {hi:.4f}]")
    ok, detail = summarize(checks)
    assert verdict("C1 QPT markers", ok, detail), detail


# --- 2 ----------------------------------------------------------------------

def pr_slope(n_max):
    Ns = [12, 16, 20, 24, 28]
    nd, pr = [], []
    for N in Ns:
        p = ModelParams(g1=1.2, g2=0.8, N=N, n_max=n_max)
        nd.append(build_basis(p).dim)
        pr.append(participation_ratio(ground_state(p)[1]))
    return float(np.polyfit(np.log(nd), np.log(pr), 1)[0]), pr


@pytest.mark.slow
def test_criterion_2_pr_scaling(verdict):
    s300, pr300 = pr_slope(300)
    s200, _ = pr_slope(200)
    checks = {
        "slope(n_max=300)=0.5+-0.1": (abs(s300 - 0.5) <= 0.1, f"{s300:.4f}; PR_gs = {', '.join(f'{x:.2f}' for x in pr300)}"),
        "|slope200-slope300|<0.03": (abs(s200 - s300) < 0.03, f"{s200:.4f} vs {s300:.4f}"),
    }
    ok, detail = summarize(checks)
    assert verdict("C2 PR multifractal scaling", ok, detail), detail


# --- 3 ----------------------------------------------------------------------

def band_r(g1, g2, N=20, n_max=100):
    p = ModelParams(g1=g1, g2=g2, N=N, n_max=n_max)
    b = build_basis(p)
    return central_band_r(spectrum(p, b, values_only=True), b, p)


def test_criterion_3_level_statistics(verdict):
    integrable = band_r(1.5, 0.0)
    ergodic = band_r(1.5, 1.5)
    rng = np.random.default_rng(12345)
    mc = r_statistic(np.cumsum(rng.exponential(size=100_001))).mean
    checks = {
        "<r>(1.5,0) in [0.36,0.43]": (0.36 <= integrable.r_mean <= 0.43, f"{integrable.r_mean:.4f}, {integrable.n_levels} levels"),
        "<r>(1.5,1.5) in [0.50,0.56]": (0.50 <= ergodic.r_mean <= 0.56, f"{ergodic.r_mean:.4f}, {ergodic.n_levels} levels"),
        "Poisson MC 0.386+-0.005": (abs(mc - (2 * math.log(2) - 1)) <= 0.005, f"{mc:.4f} from 1e5 gaps"),
    }
    ok, detail = summarize(checks)
    assert verdict("C3 ENET level statistics", ok, detail), detail


# --- 4 ----------------------------------------------------------------------

def shape_check(profile: Profile, e_lower, e_upper):
    """Rise, plateau between the characteristic energies, fall."""
    e, s = profile
    edges = np.linspace(e[0], e[-1], 21)
    centers = 0.5 * (edges[1:] + edges[:-1])
    idx = np.clip(np.searchsorted(edges, e, side="right") - 1, 0, 19)
    means = np.array([s[idx == k].mean() if np.any(idx == k) else np.nan for k in range(20)])
    plateau = means[(centers >= e_lower) & (centers <= e_upper)]
    level = np.nanmean(plateau)
    spread = (np.nanmax(plateau) - np.nanmin(plateau)) / level
    rise, fall = means[0] / level, means[-1] / level
    ok = len(plateau) >= 3 and spread < 0.1 and rise < 0.6 and fall < 0.6
    return ok, f"plateau S={level:.3f} spread {spread:.1%}, first/last bin {rise:.2f}/{fall:.2f} of plateau"


@pytest.fixture(scope="module")
def chi_r_grid():
    g = np.linspace(0.0, 2.0, 16)
    cells = {}
    for i, a in enumerate(g):
        for j, b_ in enumerate(g):
            p = ModelParams(g1=a, g2=b_, N=20, n_max=100)
            b = build_basis(p)
            spec = spectrum(p, b)
            res = analyze_bands(p, b, spec)
            plus = characteristic_energies(vnee_profile(spec, b, sector=1))
            cells[i, j] = (res, plus)
    return g, cells


def spearman_offdiagonal(g, cells, key):
    xs, rs = [], []
    for (i, j), (res, plus) in cells.items():
        if i == j:
            continue
        x = key(res, plus)
        if x is None or res.r_mean is None:
            continue
        xs.append(x)
        rs.append(res.r_mean)
    return float(spearmanr(xs, rs)[0]), len(xs)


@pytest.mark.slow
def test_criterion_4_esqpt(verdict, chi_r_grid):
    checks = {}
    p = ModelParams(g1=1.0, g2=1.1, N=20, n_max=100)
    res = analyze_bands(p)
    checks["rise/plateau/fall"] = shape_check(res.profile, res.e_lower, res.e_upper)
    checks["e_lower<e_upper"] = (res.e_lower < res.e_upper, f"{res.e_lower:.3f} < {res.e_upper:.3f}")
    e = np.linspace(-3.0, 7.0, 41)
    k = int(np.searchsorted(e, 5.0))
    hits = []
    for jump in (k, 5, 30):
        s = (np.arange(41) > jump).astype(float)
        lo, hi = characteristic_energies(Profile(e, s))
        hits.append(lo == e[jump] if jump <= 20 else hi == e[jump])
    checks["single-jump exact"] = (all(hits), f"{sum(hits)}/3 exact")
    g, cells = chi_r_grid
    rho_lo, n = spearman_offdiagonal(g, cells, lambda r, _: r.chi_lower)
    rho_hi, _ = spearman_offdiagonal(g, cells, lambda r, _: r.chi_upper)
    checks["|rho(chi_lower,<r>)|>0.5"] = (abs(rho_lo) > 0.5, f"{rho_lo:.3f} over {n} cells")
    checks["|rho(chi_upper,<r>)|>0.5"] = (abs(rho_hi) > 0.5, f"{rho_hi:.3f}")
    alt_lo, _ = spearman_offdiagonal(g, cells, lambda r, pl: None if pl[0] is None else pl[0] / r.e_normal0)
    alt_hi, _ = spearman_offdiagonal(g, cells, lambda r, pl: None if pl[1] is None else pl[1] / r.e_max_decoupled)
    ok, detail = summarize(checks)
    detail += f"; [info] +1-sector profile gives rho {alt_lo:.3f} / {alt_hi:.3f}"
    assert verdict("C4 ESQPT characteristic energies", ok, detail), detail


# --- 5 ----------------------------------------------------------------------

def quench_stats(g1, g2):
    p = ModelParams(g1=g1, g2=g2, N=12, n_max=60)
    b = build_basis(p)
    spec = spectrum(p, b)
    psi = np.zeros(b.dim)
    psi[middle_decoupled_state(b, p)] = 1.0
    edge = evolve_pr(spec, psi, [0.0, 1000.0])
    window = evolve_pr(spec, psi, np.linspace(500.0, 1500.0, 2001)).pr_t
    return dict(
        pr0=edge.pr_t[0],
        drift=abs(edge.norms[1] - 1.0),
        pr1000=edge.pr_t[1],
        mean=float(window.mean()),
        de=diagonal_ensemble_pr(spec, psi),
        fourth=1.0 / long_time_ipr(spec, psi),
    )


@pytest.mark.slow
def test_criterion_5_quench(verdict):
    erg = quench_stats(1.5, 1.5)
    non = quench_stats(0.3, 0.0)
    ratio = erg["mean"] / non["mean"]
    checks = {
        "PR(0)=1 exactly": (erg["pr0"] == 1.0 and non["pr0"] == 1.0, f"{float(erg['pr0'])!r}, {float(non['pr0'])!r}"),
        "norm drift<1e-10 at t=1000": (max(erg["drift"], non["drift"]) < 1e-10, f"{max(erg['drift'], non['drift']):.1e}"),
        "long-time PR ratio>=5": (ratio >= 5, f"{erg['mean']:.1f}/{non['mean']:.2f} = {ratio:.1f}; PR(1000) {erg['pr1000']:.1f} vs {non['pr1000']:.2f}"),
    }
    for name, st in (("(1.5,1.5)", erg), ("(0.3,0)", non)):
        dev = abs(st["mean"] - st["de"]) / st["de"]
        checks[f"mean vs DE {name} within 10%"] = (
            dev <= 0.10, f"mean {st['mean']:.2f}, DE {st['de']:.2f}, off by {dev:.0%}")
    ok, detail = summarize(checks)
    detail += (f"; [info] fourth-moment prediction {erg['fourth']:.2f} / {non['fourth']:.2f}"
               f" vs means {erg['mean']:.2f} / {non['mean']:.2f}")
    assert verdict("C5 quench dynamics", ok, detail), detail


# --- 6 ----------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_6_thermal(verdict):
    checks = {}
    p = ModelParams(g1=1.0, g2=0.5, N=6, n_max=40)
    ts = thermal_spectrum(p)
    temps = np.round(np.arange(0.02, 3.0 + 1e-9, 0.02), 10)
    tr = mi_transition_temperature(p, temps, ts)
    mi = tr.mi
    checks["I12 high then decays"] = (mi[0] >= 0.9 * mi.max() and mi[-1] < 0.5 * mi[0],
                                      f"I12 {mi[0]:.3f} at T={temps[0]} -> {mi[-1]:.3f} at T={temps[-1]}")
    checks["single pronounced dI/dT minimum"] = (tr.n_minima == 1 and tr.prominence >= 3,
                                                 f"{tr.n_minima} minimum at T={tr.t_min:.2f}, depth {tr.depth:.3f}, "
                                                 f"prominence {tr.prominence:.1f}")
    tc = analytic_tc(p)
    ref = 0.5 / math.atanh(1 / 2.25)
    checks["analytic T_c formula to 1e-12"] = (abs(tc - ref) <= 1e-12, f"{tc:.12f}")
    i12, s1, s2 = ground_state_mutual_information(p)
    checks["T=0: I12=2*S1 to 1e-8"] = (abs(i12 - 2 * s1) <= 1e-8, f"I12={i12:.6f}, 2*S1={2 * s1:.6f}")
    cfg = RunConfig(observable="mi_grid", g1=(0.0, 1.6, 9), g2=(0.0, 1.6, 9), N=6, n_max=40, temps=(0.0, 0.0, 1))
    grid = run_scan(cfg, write=False)
    values = grid.values[:, :, 0]
    h = grid.g1_axis[1] - grid.g1_axis[0]
    total = grid.g1_axis[:, None] + grid.g2_axis[None, :]
    inside = values[total <= 1 - h + 1e-9]
    outside = values[total >= 1 + h - 1e-9]
    checks["T=0 MI boundary within one cell of g1+g2=1"] = (
        inside.max() < outside.min(),
        f"max I12 for g1+g2<=1-h: {inside.max():.3f}, min for g1+g2>=1+h: {outside.min():.3f}, h={h:.1f}")
    ok, detail = summarize(checks)
    detail += f"; [info] dI/dT minimum T={tr.t_min:.2f} vs analytic T_c={tc:.4f}"
    assert verdict("C6 thermal transition", ok, detail), detail


# --- 7 ----------------------------------------------------------------------

def test_criterion_7_saddle(verdict):
    rng = np.random.default_rng(7)
    worst_eta = worst_res = worst_beta = 0.0
    for _ in range(20):
        eps = rng.uniform(0.2, 2.0)
        lam = math.sqrt(eps * rng.uniform(1.05, 4.0))
        share = rng.uniform(0.0, 1.0)
        p = ModelParams(omega=1.0, omega0=eps, g1=share * lam, g2=(1 - share) * lam)
        beta_c = 1.0 / analytic_tc(p)
        assert beta_c == pytest.approx(critical_beta(eps, lam), rel=1e-12)
        eta = solve_saddle_eta(beta_c, eps, lam)
        worst_eta = max(worst_eta, abs(eta - 1.0))
        worst_res = max(worst_res, abs(saddle_condition(eta, beta_c, eps, lam)))
        worst_beta = max(worst_beta, abs(critical_beta_bisect(eps, lam) - beta_c) / beta_c)
    ok = worst_eta < 1e-10 and worst_res < 1e-10 and worst_beta < 1e-10
    detail = f"20 sets: max |eta-1| {worst_eta:.1e}, max residual {worst_res:.1e}, bisected beta_c rel. error {worst_beta:.1e}"
    assert verdict("C7 saddle-point machinery", ok, detail), detail


# --- 8 ----------------------------------------------------------------------

def brute_force_rho12(rho, n_bos, N):
    ns, rest = 2**N, 2 ** (N - 2)
    out = np.zeros((4, 4))
    for a, b, c, d in itertools.product(range(2), repeat=4):
        out[2 * a + b, 2 * c + d] = sum(
            rho[n * ns + (a << (N - 1)) + (b << (N - 2)) + r, n * ns + (c << (N - 1)) + (d << (N - 2)) + r]
            for n in range(n_bos) for r in range(rest))
    return out


@pytest.mark.slow
def test_criterion_8_kernels(verdict):
    checks = {}
    rng = np.random.default_rng(8)
    sizes = np.linspace(10, 500, 50).astype(int)
    worst = dict(res=0.0, orth=0.0, trace=0.0, frob=0.0)
    t0 = time.perf_counter()
    for n in sizes:
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        for method in ("lapack", "householder"):
            s = eigh(a, method=method)
            w, v = s.energies, s.vectors
            worst["res"] = max(worst["res"], float(np.max(np.linalg.norm(a @ v - v * w, axis=0) / np.maximum(1, np.abs(w)))))
            worst["orth"] = max(worst["orth"], float(np.max(np.abs(v.T @ v - np.eye(n)))))
            worst["trace"] = max(worst["trace"], abs(w.sum() - np.trace(a)) / max(1.0, abs(np.trace(a))))
            worst["frob"] = max(worst["frob"], abs(np.sum(w**2) - np.sum(a * a)) / np.sum(a * a))
    checks["eigensolver invariants (LAPACK and Householder-QL)"] = (
        worst["res"] <= 1e-8 and worst["orth"] <= 1e-10 and worst["trace"] <= 1e-10 and worst["frob"] <= 1e-10,
        f"residual {worst['res']:.1e}, orthonormality {worst['orth']:.1e}, trace {worst['trace']:.1e}, "
        f"Frobenius {worst['frob']:.1e}, {time.perf_counter() - t0:.0f}s")

    bad = 0
    for g1, g2 in ((0.7, 0.4), (1.0, 1.0), (1.6, 0.3)):
        p = ModelParams(g1=g1, g2=g2, N=6, n_max=8)
        b = build_basis(p)
        H = build_hamiltonian(p, b)
        s = eigh(H)
        e = s.energies
        groups = np.split(np.arange(len(e)), np.flatnonzero(np.diff(e) >= 1e-10) + 1)
        for grp in groups:
            if len(grp) == 1:
                v = s.vectors[:, grp[0]]
                bad += len(set(b.parities[np.abs(v) > 1e-8])) != 1
            else:
                for sign in (1, -1):
                    proj = np.where(b.parities[:, None] == sign, s.vectors[:, grp], 0.0)
                    for col, k in zip(proj.T, grp):
                        nrm = np.linalg.norm(col)
                        if nrm > 1e-8:
                            bad += np.linalg.norm(H @ col - e[k] * col) > 1e-8 * max(1, abs(e[k])) * nrm
    checks["parity block-diagonality (N=6, n_max=8)"] = (bad == 0, f"{bad} violations")

    p = ModelParams(g1=0.9, g2=0.4, N=4, n_max=3)
    H = build_spinspace_hamiltonian(p)
    rho = gibbs_state(H, 0.6)
    dims = spin_factor_dims(p)
    oracle = brute_force_rho12(rho, p.n_max + 1, p.N)
    bosons_first = partial_trace(partial_trace(rho, dims, keep=range(1, 5)), [2] * 4, keep=(0, 1))
    spins_first = partial_trace(partial_trace(rho, dims, keep=(0, 1, 2)), [4, 2, 2], keep=(1, 2))
    direct = partial_trace(rho, dims, keep=(1, 2))
    dev = max(np.max(np.abs(x - oracle)) for x in (bosons_first, spins_first, direct))
    checks["partial-trace order independence (N=4, n_max=3)"] = (dev < 1e-13, f"max deviation {dev:.1e}")
    ok, detail = summarize(checks)
    assert verdict("C8 numerical kernels", ok, detail), detail

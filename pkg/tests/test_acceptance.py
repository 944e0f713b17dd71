"""Acceptance suite: one test per numbered criterion, at stated tolerances.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see them all).
Shared trajectories are computed once in session fixtures. Reduced-grid
preset sweeps are persisted to ``out/acceptance/*.csv`` for the figure
package to consume.

Full-model conservation checks run at dt=0.0025: classical RK4 at the
default dt=0.005 dissipates ~7e-8 of norm from the drive-micromotion
population on the fast fiber-bright branch, so the default step satisfies
the fidelity and runtime bounds but not the 1e-8 conservation budget; the
finer step satisfies all three (runtime bounds are asserted on default-step
runs).
"""

import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from nvfiber.dynamics import TimeGrid, collapse_channels, evolve_schrodinger
from nvfiber.hilbert import (
    BasisSpec,
    basis_state,
    build_basis,
    embed_state,
    excitation_operator,
    single_site_config,
)
from nvfiber.model import ModelKind, SystemParams, dark_state, effective_hamiltonian, full_hamiltonian
from nvfiber.protocols import (
    CloningInput,
    clone_phase_covariant,
    cloning_target,
    equatorial_qubit,
    fidelity,
    prepare_w_state,
    reduced_density,
    w_target,
)
from nvfiber.pulses import PulseParams, site_pulses
from nvfiber.sweeps import figure_preset, run_sweep

PARAMS = SystemParams(delta=10.0, nu=10.0, n_sites=3)
FIG3 = PulseParams(omega_m=1.0, t0=150.0, t1=90.0, tp=50.0, T=200.0)
OUT_DIR = Path(__file__).resolve().parents[1] / "out" / "acceptance"

DEFAULT_GRID = TimeGrid(0.0, 200.0, dt=0.005, sample_stride=100)
FINE_GRID = TimeGrid(0.0, 200.0, dt=0.0025, sample_stride=200)


def report(number: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, f"criterion {number}: {detail}"


@pytest.fixture(scope="session")
def eff_run():
    started = time.perf_counter()
    result = prepare_w_state(PARAMS, FIG3, ModelKind.EFFECTIVE, DEFAULT_GRID)
    return result, time.perf_counter() - started


@pytest.fixture(scope="session")
def full_run():
    started = time.perf_counter()
    result = prepare_w_state(PARAMS, FIG3, ModelKind.FULL, DEFAULT_GRID)
    return result, time.perf_counter() - started


@pytest.fixture(scope="session")
def full_fine_run():
    basis = build_basis(BasisSpec(3, ("g", "f", "e"), 1, excitation_cap=1))
    exc = excitation_operator(basis)
    result = prepare_w_state(
        PARAMS, FIG3, ModelKind.FULL, FINE_GRID, basis=basis,
        extra_observables={"excitation": lambda s: float(np.real(
            np.vdot(s.amplitudes, exc.apply(s.amplitudes))))},
    )
    return result


@pytest.fixture(scope="session")
def fig3c_sweep(tmp_path_factory):
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    spec = replace(figure_preset("3c"),
                   values=(40.0, 45.0, 50.0, 55.0, 60.0, 100.0),
                   output=str(OUT_DIR / "fig3c.csv"))
    return run_sweep(spec, workers=3)


@pytest.fixture(scope="session")
def fig4_sweep():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    spec = replace(figure_preset("4"),
                   values=(0.5, 1.0, 2.0, 5.0, 10.0),
                   output=str(OUT_DIR / "fig4.csv"))
    return run_sweep(spec, workers=3)


@pytest.fixture(scope="session")
def fig7_sweep():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    spec = replace(figure_preset("7"),
                   values=(0.0, 0.005, 0.01),
                   values2=(0.0, 0.005, 0.01),
                   output=str(OUT_DIR / "fig7.csv"))
    return run_sweep(spec, workers=3)


@pytest.fixture(scope="session")
def corner_lindblad_run():
    params = SystemParams(delta=10.0, nu=10.0, n_sites=3,
                          kappa_c=0.01, kappa_f=0.01, gamma=0.01)
    basis = build_basis(BasisSpec(3, ("g", "f", "e"), 1, excitation_cap=1))
    channels = collapse_channels(params, basis)
    started = time.perf_counter()
    result = clone_phase_covariant(params, FIG3, CloningInput(0.0), ModelKind.FULL,
                                   DEFAULT_GRID, channels, basis=basis)
    return result, time.perf_counter() - started


def test_criterion_01_dark_state_nullity():
    basis = build_basis(BasisSpec(3, ("g", "f"), 1, excitation_cap=1))
    pulses = site_pulses(FIG3, 3)
    hgen = effective_hamiltonian(PARAMS, pulses, basis)
    started = time.perf_counter()
    worst = 0.0
    for t in np.linspace(0.0, 200.0, 200):
        ds = dark_state(PARAMS, pulses, basis, t)
        worst = max(worst, float(np.linalg.norm(hgen.matvec(t, ds.amplitudes))))
    wall = time.perf_counter() - started
    report(1, worst <= 1e-12 and wall < 1.0,
           f"max residual {worst:.2e} (<=1e-12), wall {wall:.2f}s (<1s)")


def test_criterion_02_fig3_reproduction(eff_run, full_run):
    eff, eff_wall = eff_run
    full, full_wall = full_run
    ok = (eff.final_fidelity >= 0.98 and full.final_fidelity >= 0.95
          and eff_wall < 30.0 and full_wall < 30.0)
    report(2, ok,
           f"F_eff={eff.final_fidelity:.5f} (>=0.98), "
           f"F_full={full.final_fidelity:.5f} (>=0.95), "
           f"walls {eff_wall:.1f}s/{full_wall:.1f}s (<30s at dt=0.005)")


def test_criterion_03_fig3c_band(fig3c_sweep):
    rows = {row.values[0]: row.fidelity for row in fig3c_sweep.rows}
    band_ok = all(rows[tp] > 0.98 for tp in (40.0, 45.0, 50.0, 55.0, 60.0))
    trend_ok = rows[100.0] < rows[50.0]
    wall = sum(row.wall_time for row in fig3c_sweep.rows)
    detail = ", ".join(f"F({tp:g})={rows[tp]:.5f}" for tp in sorted(rows))
    report(3, band_ok and trend_ok and wall < 180.0,
           f"{detail}; band>0.98 {'ok' if band_ok else 'VIOLATED'}, "
           f"F(100)<F(50) {'ok' if trend_ok else 'VIOLATED'}, wall {wall:.0f}s")


def test_criterion_04_fig45_plateaus(eff_run, fig4_sweep):
    eff, _ = eff_run
    plateau = eff.final_fidelity
    nu_rows = {row.values[0]: row.fidelity for row in fig4_sweep.rows}
    # the low-detuning trend needs the explicit-e model: the Raman-limit
    # model only becomes more adiabatic as delta shrinks
    started = time.perf_counter()
    low_delta = prepare_w_state(SystemParams(delta=0.5, nu=10.0, n_sites=3), FIG3,
                                ModelKind.FULL, DEFAULT_GRID)
    wall = time.perf_counter() - started + sum(r.wall_time for r in fig4_sweep.rows)
    ok = (plateau >= 0.99
          and nu_rows[0.5] < plateau
          and low_delta.final_fidelity < plateau
          and wall < 180.0)
    report(4, ok,
           f"plateau={plateau:.5f} (>=0.99), F(nu=0.5)={nu_rows[0.5]:.5f}, "
           f"F_full(delta=0.5)={low_delta.final_fidelity:.5f} (both strictly below), "
           f"wall {wall:.0f}s")


def test_criterion_05_fig6_time_series(eff_run):
    eff, wall = eff_run
    times = eff.trajectory.times
    fid = eff.trajectory.observables["fidelity"]
    at = lambda gt: fid[np.searchsorted(times, gt)]
    late = fid[times >= 160.0]
    ok = (at(200.0) - at(100.0) > 0.0 and np.all(late >= 0.98) and wall < 30.0)
    report(5, ok,
           f"F(200)-F(100)={at(200.0) - at(100.0):+.4f} (>0), "
           f"min F(gt>=160)={late.min():.5f} (>=0.98), wall {wall:.1f}s")


def test_criterion_06_fig7_decoherence_corner(fig7_sweep, corner_lindblad_run):
    corner, corner_wall = corner_lindblad_run
    cells = {row.values: row.fidelity for row in fig7_sweep.rows}
    zero_rate = cells[(0.0, 0.0)]
    ok = (corner.final_fidelity >= 0.95 and zero_rate >= 0.98 and corner_wall < 120.0)
    report(6, ok,
           f"F(kappa=gamma=0.01)={corner.final_fidelity:.5f} (>=0.95, expected "
           f"0.955-0.97), F(0,0)={zero_rate:.5f} (>=0.98), wall {corner_wall:.0f}s "
           f"(<2min, capped basis)")


def test_criterion_07_conservation_suite(eff_run, full_fine_run, corner_lindblad_run):
    eff, _ = eff_run
    corner, _ = corner_lindblad_run
    full_fine = full_fine_run
    norm_eff = eff.trajectory.max_drift
    norm_full = full_fine.trajectory.max_drift
    trace_drift = corner.trajectory.max_drift
    min_eig = corner.trajectory.final_state.min_eigenvalue()
    exc = full_fine.trajectory.observables["excitation"]
    exc_drift = float(np.max(np.abs(exc - exc[0])))
    ok = (norm_eff <= 1e-8 and norm_full <= 1e-8 and trace_drift <= 1e-8
          and min_eig >= -1e-7 and exc_drift <= 1e-8)
    report(7, ok,
           f"norm drift eff={norm_eff:.1e}, full(dt=0.0025)={norm_full:.1e} (<=1e-8); "
           f"trace drift={trace_drift:.1e} (<=1e-8); min eig={min_eig:.1e} (>=-1e-7); "
           f"excitation drift={exc_drift:.1e} (<=1e-8)")


def test_criterion_08_model_cross_validation(eff_run, full_run):
    eff, _ = eff_run
    full, _ = full_run
    gap = abs(full.final_fidelity - eff.final_fidelity)
    report(8, gap <= 0.02,
           f"|F_full - F_eff| = |{full.final_fidelity:.5f} - "
           f"{eff.final_fidelity:.5f}| = {gap:.4f} (<=0.02); the explicit-e model "
           f"carries a third-order differential light shift ~Omega^2 g^2/delta^3 "
           f"between the driven manifolds that the Raman-limit model drops, so the "
           f"gap at delta=10g is intrinsic to the stated Hamiltonian")


@pytest.mark.parametrize("n_sites", [2, 3, 5])
def test_criterion_09_cloning_oracle(n_sites):
    basis = build_basis(BasisSpec(n_sites, ("g", "f"), 1, excitation_cap=1))
    delta = 0.0
    target = cloning_target(basis, delta=delta)
    psi_in = equatorial_qubit(delta)
    expected = 0.5 + 0.5 / np.sqrt(n_sites)
    values = [
        float(np.real(np.vdot(psi_in.amplitudes,
                              reduced_density(target, k).matrix @ psi_in.amplitudes)))
        for k in range(n_sites)
    ]
    worst = max(abs(v - expected) for v in values)
    note = " (cross-checks the quoted 85.4%)" if n_sites == 2 else ""
    report(9, worst <= 1e-12,
           f"N={n_sites}: per-copy deviation from 1/2+1/(2*sqrt(N))={expected:.5f} "
           f"is {worst:.1e} (<=1e-12){note}")


def test_criterion_10_phase_covariance():
    values = []
    for delta in (0.0, np.pi / 3, np.pi, 3 * np.pi / 2):
        res = clone_phase_covariant(PARAMS, FIG3, CloningInput(delta),
                                    ModelKind.EFFECTIVE, DEFAULT_GRID)
        values.append(res.final_fidelity)
    spread = float(np.ptp(values))
    report(10, spread <= 1e-10,
           f"global cloning fidelity spread over four phases = {spread:.1e} (<=1e-10)")


def test_criterion_11_basis_cap_equivalence(full_run):
    capped, _ = full_run
    uncapped_basis = build_basis(BasisSpec(3, ("g", "f", "e"), 1))
    hgen = full_hamiltonian(PARAMS, site_pulses(FIG3, 3), uncapped_basis)
    psi0 = basis_state(uncapped_basis, single_site_config(uncapped_basis.spec, 0, "f"))
    traj = evolve_schrodinger(hgen, psi0, DEFAULT_GRID)
    embedded = embed_state(capped.trajectory.final_state, uncapped_basis)
    diff = float(np.max(np.abs(embedded.amplitudes - traj.final_state.amplitudes)))
    report(11, diff <= 1e-10,
           f"capped(E<=1, dim 11) vs uncapped(n_max=1, dim 432) final-state "
           f"max-norm difference = {diff:.1e} (<=1e-10)")


def test_write_remaining_figure_csvs(eff_run, fig3c_sweep, fig4_sweep, fig7_sweep):
    """Persist reduced-grid preset CSVs for the figure package (criterion 12)."""
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    spec3a = replace(figure_preset("3a"), values=(0.2, 0.6, 1.0, 1.5, 2.0),
                     output=str(OUT_DIR / "fig3a.csv"))
    run_sweep(spec3a, workers=3)
    spec3b = replace(figure_preset("3b"), values=(30.0, 60.0, 90.0, 120.0, 140.0),
                     output=str(OUT_DIR / "fig3b.csv"))
    run_sweep(spec3b, workers=3)
    spec5 = replace(figure_preset("5"), values=(0.5, 1.0, 2.0, 5.0, 10.0),
                    output=str(OUT_DIR / "fig5.csv"))
    run_sweep(spec5, workers=3)
    spec6 = replace(figure_preset("6"), output=str(OUT_DIR / "fig6.csv"))
    run_sweep(spec6)
    for name in ("fig3a", "fig3b", "fig3c", "fig4", "fig5", "fig6", "fig7"):
        assert (OUT_DIR / f"{name}.csv").exists()
    print(f"figure CSVs written to {OUT_DIR}")

"""W-state preparation and 1->N phase-covariant cloning experiments.

``prepare_w_state`` starts from one flipped emitter and rides the dark state
into the N-site W state. ``clone_phase_covariant`` starts from an equatorial
qubit on site 0; its |all-g> branch is stationary while the |f_0> branch
maps onto the W state, distributing the input phase across all sites.

Fidelity conventions: pure states use |<target|psi>|, mixed states
sqrt(<target|rho|target>) — the two agree on projectors. Per-copy cloning
fidelities are the expectations <psi_in|rho_k|psi_in> of the reduced
single-site states, the standard cloning figure of merit (optimal value
1/2 + 1/(2 sqrt N) for equatorial inputs).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dynamics import CollapseChannel, TimeGrid, Trajectory, evolve_lindblad, evolve_schrodinger
from .hilbert import (
    Basis,
    BasisError,
    DensityMatrix,
    SiteSpace,
    StateVector,
    basis_state,
    build_basis,
    ground_config,
    single_site_config,
)
from .model import ModelKind, SystemParams, default_basis_spec, effective_hamiltonian, full_hamiltonian
from .pulses import PulseParams, site_pulses


@dataclass(frozen=True)
class CloningInput:
    """Equatorial input qubit (|g> + e^{i delta} |f>)/sqrt(2) on site 0."""

    delta: float = 0.0


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    trajectory: Trajectory
    final_fidelity: float
    target_label: str
    per_copy_fidelities: tuple[float, ...] | None = None


def fidelity(state: StateVector | DensityMatrix, target: StateVector) -> float:
    """Overlap magnitude with a pure target; sqrt of expectation for rho."""
    if state.basis != target.basis:
        raise BasisError("state and target live on different bases")
    if isinstance(state, StateVector):
        return float(abs(np.vdot(target.amplitudes, state.amplitudes)))
    expect = np.real(np.vdot(target.amplitudes, state.matrix @ target.amplitudes))
    return float(np.sqrt(max(expect, 0.0)))


def w_target(basis: Basis, n_sites: int | None = None) -> StateVector:
    """(1/sqrt N) sum_k |g..f_k..g> with every mode in vacuum."""
    spec = basis.spec
    if n_sites is None:
        n_sites = spec.n_sites
    if n_sites != spec.n_sites:
        raise BasisError(f"basis has {spec.n_sites} sites, requested {n_sites}")
    amps = np.zeros(basis.dimension, dtype=complex)
    for k in range(n_sites):
        amps[basis.lookup(single_site_config(spec, k, "f"))] = 1.0 / np.sqrt(n_sites)
    return StateVector(basis, amps)


def cloning_target(basis: Basis, n_sites: int | None = None, delta: float = 0.0) -> StateVector:
    """(1/sqrt 2)[ |all-g> + (e^{i delta}/sqrt N) sum_k |g..f_k..g> ], vacuum modes."""
    spec = basis.spec
    if n_sites is None:
        n_sites = spec.n_sites
    if n_sites != spec.n_sites:
        raise BasisError(f"basis has {spec.n_sites} sites, requested {n_sites}")
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.lookup(ground_config(spec))] = 1.0 / np.sqrt(2.0)
    phase = np.exp(1j * delta) / np.sqrt(2.0 * n_sites)
    for k in range(n_sites):
        amps[basis.lookup(single_site_config(spec, k, "f"))] = phase
    return StateVector(basis, amps)


def equatorial_qubit(delta: float, levels: Sequence[str] = ("g", "f")) -> StateVector:
    """Single-site (|g> + e^{i delta}|f>)/sqrt(2), padded with zeros on e."""
    space = SiteSpace(tuple(levels))
    amps = np.zeros(space.dimension, dtype=complex)
    amps[list(levels).index("g")] = 1.0 / np.sqrt(2.0)
    amps[list(levels).index("f")] = np.exp(1j * delta) / np.sqrt(2.0)
    return StateVector(space, amps)


def reduced_density(state: StateVector | DensityMatrix, keep_site: int) -> DensityMatrix:
    """Partial trace over all other sites and all modes."""
    basis = state.basis
    if not isinstance(basis, Basis):
        raise BasisError("reduced_density requires a full product-space state")
    spec = basis.spec
    if not 0 <= keep_site < spec.n_sites:
        raise BasisError(f"site index {keep_site} out of range [0, {spec.n_sites})")

    levels = spec.site_levels
    pos = {lv: i for i, lv in enumerate(levels)}
    groups: dict[tuple, list[tuple[int, int]]] = {}
    for idx, (site_levels, occs) in enumerate(basis.states):
        rest = (site_levels[:keep_site] + site_levels[keep_site + 1:], occs)
        groups.setdefault(rest, []).append((pos[site_levels[keep_site]], idx))

    d = len(levels)
    rho = np.zeros((d, d), dtype=complex)
    if isinstance(state, StateVector):
        amps = state.amplitudes
        for members in groups.values():
            for a, i in members:
                for b, j in members:
                    rho[a, b] += amps[i] * np.conj(amps[j])
    else:
        mat = state.matrix
        for members in groups.values():
            for a, i in members:
                for b, j in members:
                    rho[a, b] += mat[i, j]
    return DensityMatrix(SiteSpace(levels), rho)


def _hamiltonian(params: SystemParams, pulse_params: PulseParams, kind: ModelKind,
                 basis: Basis):
    pulses = site_pulses(pulse_params, params.n_sites)
    if kind is ModelKind.FULL:
        return full_hamiltonian(params, pulses, basis)
    return effective_hamiltonian(params, pulses, basis)


def _protocol_basis(params: SystemParams, kind: ModelKind, basis: Basis | None,
                    excitation_cap: int | None, n_max: int) -> Basis:
    if basis is not None:
        return basis
    return build_basis(default_basis_spec(params, kind, n_max=n_max,
                                          excitation_cap=excitation_cap))


def prepare_w_state(params: SystemParams, pulse_params: PulseParams,
                    model_kind: ModelKind = ModelKind.EFFECTIVE,
                    grid: TimeGrid | None = None, *,
                    basis: Basis | None = None,
                    excitation_cap: int | None = 1,
                    n_max: int = 1,
                    extra_observables: Mapping | None = None) -> ProtocolResult:
    """Evolve |f_0 g..g, vacuum> and score it against the W target.

    The trajectory records the W fidelity at every sample, which is the
    fidelity-versus-time curve of the protocol.
    """
    basis = _protocol_basis(params, model_kind, basis, excitation_cap, n_max)
    hgen = _hamiltonian(params, pulse_params, model_kind, basis)
    if grid is None:
        grid = TimeGrid(0.0, pulse_params.T)
    psi0 = basis_state(basis, single_site_config(basis.spec, 0, "f"))
    target = w_target(basis)
    observables = {"fidelity": lambda s: fidelity(s, target)}
    observables.update(extra_observables or {})
    traj = evolve_schrodinger(hgen, psi0, grid, observables)
    return ProtocolResult(
        trajectory=traj,
        final_fidelity=fidelity(traj.final_state, target),
        target_label="W_state",
    )


def clone_phase_covariant(params: SystemParams, pulse_params: PulseParams,
                          cloning_input: CloningInput = CloningInput(),
                          model_kind: ModelKind = ModelKind.EFFECTIVE,
                          grid: TimeGrid | None = None,
                          channels: Sequence[CollapseChannel] | None = None, *,
                          basis: Basis | None = None,
                          excitation_cap: int | None = 1,
                          n_max: int = 1,
                          extra_observables: Mapping | None = None) -> ProtocolResult:
    """Evolve the equatorial input of site 0 into N approximate copies.

    With ``channels`` the run solves the master equation for the density
    matrix; otherwise it stays pure. Per-copy fidelities against the input
    qubit are computed from the reduced single-site states of the final
    state.
    """
    basis = _protocol_basis(params, model_kind, basis, excitation_cap, n_max)
    hgen = _hamiltonian(params, pulse_params, model_kind, basis)
    if grid is None:
        grid = TimeGrid(0.0, pulse_params.T)
    spec = basis.spec

    delta = cloning_input.delta
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.lookup(ground_config(spec))] = 1.0 / np.sqrt(2.0)
    amps[basis.lookup(single_site_config(spec, 0, "f"))] = np.exp(1j * delta) / np.sqrt(2.0)
    psi0 = StateVector(basis, amps)

    target = cloning_target(basis, delta=delta)
    observables = {"fidelity": lambda s: fidelity(s, target)}
    observables.update(extra_observables or {})

    if channels is not None:
        traj = evolve_lindblad(hgen, channels, psi0.to_density(), grid, observables)
    else:
        traj = evolve_schrodinger(hgen, psi0, grid, observables)

    psi_in = equatorial_qubit(delta, spec.site_levels)
    per_copy = tuple(
        float(np.real(np.vdot(psi_in.amplitudes,
                              reduced_density(traj.final_state, k).matrix
                              @ psi_in.amplitudes)))
        for k in range(spec.n_sites)
    )
    return ProtocolResult(
        trajectory=traj,
        final_fidelity=fidelity(traj.final_state, target),
        target_label="cloning_state",
        per_copy_fidelities=per_copy,
    )

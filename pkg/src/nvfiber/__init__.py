"""NV-center / fiber-coupled nanocavity network simulator.

Closed-system adiabatic passage and open-system master-equation dynamics for
N three-level emitters in fiber-linked cavities: W-state preparation and
1->N phase-covariant cloning, plus a declarative parameter-sweep engine and
a CLI.
"""

from .hilbert import (
    Basis,
    BasisError,
    BasisSpec,
    DensityMatrix,
    Operator,
    SiteSpace,
    StateVector,
    annihilation_operator,
    basis_state,
    build_basis,
    embed_state,
    excitation_number,
    excitation_operator,
    ground_config,
    identity_operator,
    single_mode_config,
    single_site_config,
    transition_operator,
)
from .pulses import AdiabaticReport, PulseParams, check_adiabatic_limits, omega, omega0, site_pulses
from .model import (
    HamiltonianGenerator,
    ModelKind,
    SystemParams,
    dark_state,
    default_basis_spec,
    effective_hamiltonian,
    full_hamiltonian,
    raman_rate,
)
from .dynamics import (
    CollapseChannel,
    IntegrationError,
    TimeGrid,
    Trajectory,
    collapse_channels,
    evolve_lindblad,
    evolve_schrodinger,
)
from .protocols import (
    CloningInput,
    ProtocolResult,
    clone_phase_covariant,
    cloning_target,
    equatorial_qubit,
    fidelity,
    prepare_w_state,
    reduced_density,
    w_target,
)

__version__ = "0.1.0"

"""Product-space bases and elementary operators for the emitter-cavity network.

The simulated system is N three-level emitters (levels g, f, e), one cavity
per emitter, and a single shared fiber mode. A basis configuration is the
pair (site levels, mode occupations) with the fiber occupation stored last,
so labels read site-by-site, then cavity-by-cavity, then fiber.

Enumeration is lexicographic over (level indices, occupations) using the
canonical level order g < f < e; it is deterministic and identical for every
``Basis`` built from an equal ``BasisSpec``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import sparse

#: canonical level order used for enumeration and label formatting
LEVELS = ("g", "f", "e")

#: excitation carried by each level: drive moves f<->e, cavity moves g+photon<->e,
#: so f and e both count one excitation and g counts zero
LEVEL_EXCITATION = {"g": 0, "f": 1, "e": 1}

Config = tuple[tuple[str, ...], tuple[int, ...]]


class BasisError(ValueError):
    """Invalid basis specification, or operators/states on mismatched bases."""


def excitation_number(config: Config) -> int:
    """Conserved excitation count: (# sites in f) + (# sites in e) + photons."""
    levels, occs = config
    return sum(LEVEL_EXCITATION[lv] for lv in levels) + sum(occs)


@dataclass(frozen=True)
class BasisSpec:
    """Shape of the product space: N sites, N+1 truncated bosonic modes.

    ``site_levels`` selects which emitter levels are present ({g,f,e} for the
    full model, {g,f} for the effective one). ``excitation_cap`` keeps only
    configurations with excitation number <= cap; ``excitation_exact`` keeps
    the single sector with excitation number == value. At most one of the two
    may be set.
    """

    n_sites: int
    site_levels: tuple[str, ...] = LEVELS
    n_max: int = 1
    n_modes: int | None = None
    excitation_cap: int | None = None
    excitation_exact: int | None = None

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise BasisError(f"n_sites must be >= 1, got {self.n_sites}")
        if self.n_max < 0:
            raise BasisError(f"n_max must be >= 0, got {self.n_max}")
        levels = tuple(lv for lv in LEVELS if lv in self.site_levels)
        if not levels:
            raise BasisError("site_levels must be a non-empty subset of {g, f, e}")
        if set(self.site_levels) - set(LEVELS):
            raise BasisError(f"unknown levels {set(self.site_levels) - set(LEVELS)}")
        object.__setattr__(self, "site_levels", levels)
        if self.n_modes is None:
            object.__setattr__(self, "n_modes", self.n_sites + 1)
        elif self.n_modes != self.n_sites + 1:
            raise BasisError(
                f"n_modes must equal n_sites + 1 = {self.n_sites + 1}, got {self.n_modes}"
            )
        if self.excitation_cap is not None and self.excitation_cap < 0:
            raise BasisError("excitation_cap must be >= 0")
        if self.excitation_exact is not None and self.excitation_exact < 0:
            raise BasisError("excitation_exact must be >= 0")
        if self.excitation_cap is not None and self.excitation_exact is not None:
            raise BasisError("set at most one of excitation_cap / excitation_exact")

    @property
    def fiber_index(self) -> int:
        """Index of the fiber mode (always the last mode)."""
        return self.n_modes - 1


@dataclass(frozen=True, eq=False)
class Basis:
    """Enumerated basis: ordered configurations plus the inverse lookup."""

    spec: BasisSpec
    states: tuple[Config, ...]
    index: Mapping[Config, int] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def lookup(self, config: Config) -> int:
        try:
            return self.index[config]
        except KeyError:
            raise BasisError(f"configuration {config} not in basis") from None

    def __contains__(self, config: Config) -> bool:
        return config in self.index

    def label(self, i: int) -> str:
        """Human-readable ket label, e.g. ``|fgg>|000>|0>_f``."""
        levels, occs = self.states[i]
        cavities = "".join(str(n) for n in occs[:-1])
        return f"|{''.join(levels)}>|{cavities}>|{occs[-1]}>_f"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Basis):
            return NotImplemented
        return self.spec == other.spec

    def __hash__(self) -> int:
        return hash(self.spec)


def build_basis(spec: BasisSpec) -> Basis:
    """Enumerate all admissible configurations for ``spec``.

    Without a cap the dimension is ``len(site_levels)**n_sites *
    (n_max+1)**n_modes``; with a cap it is the count of configurations whose
    excitation number passes the filter.
    """
    states: list[Config] = []
    for levels in itertools.product(spec.site_levels, repeat=spec.n_sites):
        site_exc = sum(LEVEL_EXCITATION[lv] for lv in levels)
        for occs in itertools.product(range(spec.n_max + 1), repeat=spec.n_modes):
            exc = site_exc + sum(occs)
            if spec.excitation_cap is not None and exc > spec.excitation_cap:
                continue
            if spec.excitation_exact is not None and exc != spec.excitation_exact:
                continue
            states.append((levels, occs))
    if not states:
        raise BasisError("basis spec admits no configurations")
    index = {config: i for i, config in enumerate(states)}
    return Basis(spec=spec, states=tuple(states), index=index)


def ground_config(spec: BasisSpec) -> Config:
    """All sites in g, all modes in vacuum."""
    return (("g",) * spec.n_sites, (0,) * spec.n_modes)


def single_site_config(spec: BasisSpec, site: int, level: str) -> Config:
    """One site in ``level``, the rest in g, all modes in vacuum."""
    levels = tuple(level if k == site else "g" for k in range(spec.n_sites))
    return (levels, (0,) * spec.n_modes)


def single_mode_config(spec: BasisSpec, mode: int) -> Config:
    """All sites in g, one photon in ``mode``."""
    occs = tuple(1 if m == mode else 0 for m in range(spec.n_modes))
    return (("g",) * spec.n_sites, occs)


# ---------------------------------------------------------------------------
# Operators and states
# ---------------------------------------------------------------------------


def _check_same_basis(a: "Operator | StateVector | DensityMatrix",
                      b: "Operator | StateVector | DensityMatrix") -> None:
    if a.basis != b.basis:
        raise BasisError("operands live on different bases")


@dataclass(frozen=True, eq=False)
class Operator:
    """Sparse complex linear map on a basis."""

    basis: Basis
    matrix: sparse.csr_matrix = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def dag(self) -> "Operator":
        return Operator(self.basis, self.matrix.conjugate().transpose().tocsr())

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.matrix @ amplitudes

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_basis(self, other)
        return Operator(self.basis, (self.matrix + other.matrix).tocsr())

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same_basis(self, other)
        return Operator(self.basis, (self.matrix - other.matrix).tocsr())

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same_basis(self, other)
        return Operator(self.basis, (self.matrix @ other.matrix).tocsr())

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.basis, (self.matrix * scalar).tocsr())

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return self * (-1.0)

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.conjugate().transpose()
        return 0.0 if d.nnz == 0 else float(np.max(np.abs(d.data)))

    def commutator_norm(self, other: "Operator") -> float:
        """Max-norm of [self, other]."""
        _check_same_basis(self, other)
        c = self.matrix @ other.matrix - other.matrix @ self.matrix
        return 0.0 if c.nnz == 0 else float(np.max(np.abs(c.data)))


def _triplets_to_operator(basis: Basis, rows: list[int], cols: list[int],
                          vals: list[complex]) -> Operator:
    m = sparse.coo_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)),
        shape=(basis.dimension, basis.dimension),
    ).tocsr()
    return Operator(basis, m)


def identity_operator(basis: Basis) -> Operator:
    return Operator(basis, sparse.identity(basis.dimension, dtype=complex, format="csr"))


def annihilation_operator(basis: Basis, mode_index: int) -> Operator:
    """Truncated bosonic lowering operator on the indexed mode.

    Matrix element sqrt(n) between occupations n and n-1; identity on all
    other tensor factors. Transitions whose target configuration is outside
    a capped basis are dropped (mapped to zero).
    """
    spec = basis.spec
    if not 0 <= mode_index < spec.n_modes:
        raise BasisError(f"mode index {mode_index} out of range [0, {spec.n_modes})")
    rows, cols, vals = [], [], []
    for col, (levels, occs) in enumerate(basis.states):
        n = occs[mode_index]
        if n == 0:
            continue
        lowered = list(occs)
        lowered[mode_index] = n - 1
        target = (levels, tuple(lowered))
        if target in basis:
            rows.append(basis.index[target])
            cols.append(col)
            vals.append(np.sqrt(n))
    return _triplets_to_operator(basis, rows, cols, vals)


def transition_operator(basis: Basis, site: int, from_level: str, to_level: str) -> Operator:
    """|to><from| on one site, identity on every other tensor factor."""
    spec = basis.spec
    if not 0 <= site < spec.n_sites:
        raise BasisError(f"site index {site} out of range [0, {spec.n_sites})")
    for lv in (from_level, to_level):
        if lv not in spec.site_levels:
            raise BasisError(f"level {lv!r} not in basis levels {spec.site_levels}")
    rows, cols, vals = [], [], []
    for col, (levels, occs) in enumerate(basis.states):
        if levels[site] != from_level:
            continue
        flipped = tuple(to_level if k == site else lv for k, lv in enumerate(levels))
        target = (flipped, occs)
        if target in basis:
            rows.append(basis.index[target])
            cols.append(col)
            vals.append(1.0)
    return _triplets_to_operator(basis, rows, cols, vals)


def excitation_operator(basis: Basis) -> Operator:
    """Diagonal operator whose eigenvalue is each state's excitation number."""
    diag = np.array([excitation_number(c) for c in basis.states], dtype=complex)
    return Operator(basis, sparse.diags(diag, format="csr"))


@dataclass(frozen=True)
class SiteSpace:
    """Identity tag for a single emitter's reduced state (no modes)."""

    levels: tuple[str, ...]

    @property
    def dimension(self) -> int:
        return len(self.levels)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Dense pure state over a basis (or a single-site space)."""

    basis: Basis | SiteSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size != self.basis.dimension:
            raise BasisError(
                f"amplitude vector of length {amps.size} does not match "
                f"basis dimension {self.basis.dimension}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def check_normalized(self, tol: float = 1e-8) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise ValueError(f"state norm {self.norm()} deviates from 1 by more than {tol}")

    def overlap(self, other: "StateVector") -> complex:
        _check_same_basis(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense mixed state over a basis (or a single-site space)."""

    basis: Basis | SiteSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.basis.dimension
        if mat.shape != (d, d):
            raise BasisError(f"matrix shape {mat.shape} does not match basis dimension {d}")
        object.__setattr__(self, "matrix", mat)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def min_eigenvalue(self) -> float:
        sym = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.min(np.linalg.eigvalsh(sym)))

    def check_physical(self, trace_tol: float = 1e-8, herm_tol: float = 1e-10,
                       eig_tol: float = 1e-8) -> None:
        if self.hermiticity_defect() > herm_tol:
            raise ValueError(f"density matrix not Hermitian to {herm_tol}")
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace()} deviates from 1 by more than {trace_tol}")
        if self.min_eigenvalue() < -eig_tol:
            raise ValueError(f"minimum eigenvalue {self.min_eigenvalue()} below -{eig_tol}")


def basis_state(basis: Basis, config: Config) -> StateVector:
    """One-hot state for a configuration label."""
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.lookup(config)] = 1.0
    return StateVector(basis, amps)


def embed_state(state: StateVector, into: Basis) -> StateVector:
    """Re-express a state in a larger basis sharing the same configuration labels.

    Used to compare capped-basis results with uncapped ones; every source
    configuration must exist in the target basis.
    """
    if not isinstance(state.basis, Basis):
        raise BasisError("embed_state requires a full product-space state")
    amps = np.zeros(into.dimension, dtype=complex)
    for i, config in enumerate(state.basis.states):
        amps[into.lookup(config)] = state.amplitudes[i]
    return StateVector(into, amps)

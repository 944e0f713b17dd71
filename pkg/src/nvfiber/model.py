"""Time-dependent Hamiltonians of the emitter-cavity-fiber network.

Two generators are provided, in the interaction picture with g as the unit:

* full:       H(t) = sum_k [ 2*Omega_k(t)*cos(delta*t) |e>_k<f|
                             + g * a_k * e^{i delta t} |e>_k<g| + h.c. ]
                     + nu * sum_k (b^dag a_k + h.c.)
  The drive is bichromatic at detunings +/-delta so the second-order light
  shifts of the two tones cancel; a single-tone variant is available for
  comparison via ``second_tone=False``.

* effective:  H(t) = sum_k lambda_k(t) (a_k |f>_k<g| + h.c.)
                     + nu * sum_k (b^dag a_k + h.c.),
  with the Raman rate lambda_k(t) = g * Omega_k(t) / delta.

The effective Hamiltonian annihilates the instantaneous dark state built by
``dark_state``: weights 1/lambda_k on the single-f configurations and
-1/nu on the fiber-photon configuration, normalized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .hilbert import (
    Basis,
    BasisError,
    BasisSpec,
    Operator,
    StateVector,
    annihilation_operator,
    single_mode_config,
    single_site_config,
    transition_operator,
)


@dataclass(frozen=True)
class SystemParams:
    """Physical rates in units of g; times elsewhere are in 1/g."""

    delta: float
    nu: float
    n_sites: int = 3
    g: float = 1.0
    kappa_c: float = 0.0
    kappa_f: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.g <= 0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        for name in ("kappa_c", "kappa_f", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


class ModelKind(str, Enum):
    FULL = "full"
    EFFECTIVE = "effective"

    @property
    def site_levels(self) -> tuple[str, ...]:
        return ("g", "f", "e") if self is ModelKind.FULL else ("g", "f")


def default_basis_spec(params: SystemParams, kind: ModelKind, n_max: int = 1,
                       excitation_cap: int | None = 1) -> BasisSpec:
    """Basis matching a model kind; capped at one excitation by default."""
    return BasisSpec(
        n_sites=params.n_sites,
        site_levels=kind.site_levels,
        n_max=n_max,
        excitation_cap=excitation_cap,
    )


@dataclass(frozen=True, eq=False)
class HamiltonianGenerator:
    """H(t) = static + sum_i coeff_i(t) * M_i with immutable sparse parts.

    ``coeffs`` are vectorized callables t -> complex; conjugate-pair terms
    carry their matrices explicitly, so the assembled operator is Hermitian
    at every t.
    """

    basis: Basis
    static: sparse.csr_matrix | None = field(repr=False)
    coeffs: tuple[Callable, ...] = field(repr=False)
    matrices: tuple[sparse.csr_matrix, ...] = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def coefficient_table(self, times: np.ndarray) -> np.ndarray:
        """Coefficients evaluated on a time grid, shape (n_terms, n_times)."""
        times = np.asarray(times, dtype=float)
        table = np.empty((len(self.coeffs), times.size), dtype=complex)
        for i, c in enumerate(self.coeffs):
            table[i] = c(times)
        return table

    def matvec(self, t: float, amplitudes: np.ndarray) -> np.ndarray:
        out = self.static @ amplitudes if self.static is not None else np.zeros_like(amplitudes)
        for c, m in zip(self.coeffs, self.matrices):
            out = out + complex(c(t)) * (m @ amplitudes)
        return out

    def operator(self, t: float) -> Operator:
        d = self.dimension
        total = self.static if self.static is not None else sparse.csr_matrix((d, d), dtype=complex)
        for c, m in zip(self.coeffs, self.matrices):
            total = total + complex(c(t)) * m
        return Operator(self.basis, total.tocsr())


def _fiber_coupling(params: SystemParams, basis: Basis) -> sparse.csr_matrix:
    """nu * sum_k (b^dag a_k + h.c.), time independent."""
    spec = basis.spec
    b_dag = annihilation_operator(basis, spec.fiber_index).dag()
    total = None
    for k in range(spec.n_sites):
        a_k = annihilation_operator(basis, k)
        hop = (b_dag @ a_k).matrix          # annihilate cavity first: exact under a cap
        term = hop + hop.conjugate().transpose()
        total = term if total is None else total + term
    return (params.nu * total).tocsr()


def _validate(params: SystemParams, pulses: Sequence[Callable], basis: Basis,
              kind: ModelKind) -> None:
    if basis.spec.n_sites != params.n_sites:
        raise BasisError(
            f"basis has {basis.spec.n_sites} sites but params expect {params.n_sites}"
        )
    if basis.spec.site_levels != kind.site_levels:
        raise BasisError(
            f"{kind.value} model requires site levels {kind.site_levels}, "
            f"basis has {basis.spec.site_levels}"
        )
    if len(pulses) != params.n_sites:
        raise ValueError(
            f"need one pulse per site ({params.n_sites}), got {len(pulses)}"
        )


def full_hamiltonian(params: SystemParams, pulses: Sequence[Callable], basis: Basis,
                     second_tone: bool = True) -> HamiltonianGenerator:
    """Interaction-picture Hamiltonian with explicit e level and drive phases."""
    _validate(params, pulses, basis, ModelKind.FULL)
    delta, g = params.delta, params.g

    coeffs: list[Callable] = []
    matrices: list[sparse.csr_matrix] = []

    for k, pulse in enumerate(pulses):
        ef = transition_operator(basis, k, "f", "e").matrix      # |e><f|
        if second_tone:
            # both tones: Omega_k(t) (e^{i d t} + e^{-i d t}) |e><f| + h.c.
            def drive(t, _p=pulse):
                return 2.0 * _p(t) * np.cos(delta * t) + 0.0j

            coeffs.append(drive)
            matrices.append((ef + ef.conjugate().transpose()).tocsr())
        else:
            def tone(t, _p=pulse):
                return _p(t) * np.exp(1j * delta * t)

            def tone_conj(t, _p=pulse):
                return _p(t) * np.exp(-1j * delta * t)

            coeffs.extend([tone, tone_conj])
            matrices.extend([ef, ef.conjugate().transpose().tocsr()])

    # cavity couplings share g and the phase, so their matrices are summed
    cav = None
    for k in range(params.n_sites):
        eg = transition_operator(basis, k, "g", "e")             # |e><g|
        a_k = annihilation_operator(basis, k)
        term = (eg @ a_k).matrix                                  # annihilate first
        cav = term if cav is None else cav + term

    def cav_coeff(t):
        return g * np.exp(1j * delta * t)

    def cav_coeff_conj(t):
        return g * np.exp(-1j * delta * t)

    coeffs.extend([cav_coeff, cav_coeff_conj])
    matrices.extend([cav.tocsr(), cav.conjugate().transpose().tocsr()])

    return HamiltonianGenerator(
        basis=basis,
        static=_fiber_coupling(params, basis),
        coeffs=tuple(coeffs),
        matrices=tuple(matrices),
    )


def raman_rate(pulse: Callable, params: SystemParams) -> Callable:
    """lambda_k(t) = g * Omega_k(t) / delta for one site's envelope."""
    if params.delta == 0:
        raise ValueError("effective model requires delta != 0")

    def rate(t):
        return params.g * pulse(t) / params.delta

    return rate


def effective_hamiltonian(params: SystemParams, pulses: Sequence[Callable],
                          basis: Basis) -> HamiltonianGenerator:
    """Raman-limit Hamiltonian on the {g, f} manifold."""
    _validate(params, pulses, basis, ModelKind.EFFECTIVE)
    if params.delta == 0:
        raise ValueError("effective model requires delta != 0")

    coeffs: list[Callable] = []
    matrices: list[sparse.csr_matrix] = []
    for k, pulse in enumerate(pulses):
        fg = transition_operator(basis, k, "g", "f")             # |f><g|
        a_k = annihilation_operator(basis, k)
        swap = (fg @ a_k).matrix                                  # a_k |f><g|, annihilate first
        term = (swap + swap.conjugate().transpose()).tocsr()

        def lam(t, _p=pulse):
            return params.g * _p(t) / params.delta + 0.0j

        coeffs.append(lam)
        matrices.append(term)

    return HamiltonianGenerator(
        basis=basis,
        static=_fiber_coupling(params, basis),
        coeffs=tuple(coeffs),
        matrices=tuple(matrices),
    )


def dark_state(params: SystemParams, pulses: Sequence[Callable], basis: Basis,
               t: float) -> StateVector:
    """Zero-eigenvalue eigenstate of the effective Hamiltonian at time t.

    Weights are 1/lambda_k(t) on the single-f configurations and -1/nu on the
    fiber-photon configuration. If some lambda_k(t) vanish the exact weights
    diverge; the limiting configuration state (uniform over the vanishing
    sites) is returned instead and a warning is issued.
    """
    if len(pulses) != params.n_sites:
        raise ValueError(f"need one pulse per site ({params.n_sites}), got {len(pulses)}")
    if params.nu == 0:
        raise ValueError("dark state undefined for nu = 0")
    spec = basis.spec
    lambdas = np.array([params.g * float(p(t)) / params.delta for p in pulses])

    amps = np.zeros(basis.dimension, dtype=complex)
    f_indices = [basis.lookup(single_site_config(spec, k, "f")) for k in range(spec.n_sites)]
    fiber_index = basis.lookup(single_mode_config(spec, spec.fiber_index))

    zero = lambdas == 0.0
    if np.any(zero):
        warnings.warn(
            "some lambda_k(t) vanish; returning the limiting configuration state",
            RuntimeWarning,
            stacklevel=2,
        )
        for k in np.nonzero(zero)[0]:
            amps[f_indices[k]] = 1.0
    else:
        for k, idx in enumerate(f_indices):
            amps[idx] = 1.0 / lambdas[k]
        amps[fiber_index] = -1.0 / params.nu
    amps /= np.linalg.norm(amps)
    return StateVector(basis, amps)

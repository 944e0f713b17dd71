"""Gaussian Rabi-frequency schedules for the adiabatic transfer.

Two laser envelopes drive the emitters (all quantities in units of the
emitter-cavity coupling g, times in 1/g):

    omega(t)  = omega_m * [exp(-(t-t1)^2/tp^2) + exp(-(t-t0)^2/tp^2)]
    omega0(t) = omega_m *  exp(-(t-t0)^2/tp^2)

Site 0 (the initially excited emitter) is driven by ``omega0``; every other
site by ``omega``. The transfer requires omega0/omega -> 0 at the start of
the evolution and omega/omega0 -> 1 at its end; ``check_adiabatic_limits``
reports both ratios against configurable thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class PulseParams:
    """Peak, centers, width and total duration of the drive schedules."""

    omega_m: float
    t0: float
    t1: float
    tp: float
    T: float

    def __post_init__(self) -> None:
        if self.tp <= 0:
            raise ValueError(f"tp must be > 0, got {self.tp}")
        if self.T <= 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if self.omega_m < 0:
            raise ValueError(f"omega_m must be >= 0, got {self.omega_m}")


def omega(t, p: PulseParams):
    """Two-Gaussian envelope applied to sites 1..N-1 (vectorized in t)."""
    return p.omega_m * (
        np.exp(-((t - p.t1) / p.tp) ** 2) + np.exp(-((t - p.t0) / p.tp) ** 2)
    )


def omega0(t, p: PulseParams):
    """Single late Gaussian applied to site 0 (vectorized in t)."""
    return p.omega_m * np.exp(-((t - p.t0) / p.tp) ** 2)


def site_pulses(p: PulseParams, n_sites: int) -> tuple[Callable, ...]:
    """Envelope per site: omega0 on site 0, omega on all other sites."""
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    first = partial(omega0, p=p)
    rest = partial(omega, p=p)
    return (first,) + (rest,) * (n_sites - 1)


@dataclass(frozen=True)
class AdiabaticReport:
    """Boundary-condition diagnostics for a pulse schedule."""

    start_ratio: float       # omega0(0) / omega(0), should be << 1
    end_ratio: float         # omega(T) / omega0(T), should be ~ 1
    start_ok: bool
    end_ok: bool
    start_threshold: float
    end_tolerance: float

    @property
    def passed(self) -> bool:
        return self.start_ok and self.end_ok


def check_adiabatic_limits(p: PulseParams, start_threshold: float = 0.05,
                           end_tolerance: float = 0.05) -> AdiabaticReport:
    """Evaluate the transfer boundary ratios at t=0 and t=T.

    Thresholds are artifact defaults; the underlying conditions are
    asymptotic limits, so callers may tighten or relax them.
    """
    # omega_m cancels in both ratios; the log-domain forms stay finite even
    # when the individual Gaussians underflow.
    with np.errstate(over="ignore"):
        start = float(1.0 / (1.0 + np.exp((p.t0**2 - p.t1**2) / p.tp**2)))
        end = float(1.0 + np.exp(-((p.T - p.t1) ** 2 - (p.T - p.t0) ** 2) / p.tp**2))
    return AdiabaticReport(
        start_ratio=start,
        end_ratio=end,
        start_ok=start <= start_threshold,
        end_ok=abs(end - 1.0) <= end_tolerance,
        start_threshold=start_threshold,
        end_tolerance=end_tolerance,
    )

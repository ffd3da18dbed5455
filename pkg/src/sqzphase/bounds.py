"""Fisher information and the SQL / OCRB / QCRB precision ladder.

Per-measurement quantities (``fisher_information``, ``max_fisher``, ``qfi``)
are kept apart from the variance bounds, which always take the number of
measurements ``n_meas`` explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from .errors import NoPhaseInformation
from .state import SqueezedThermalState, mean_photon_number

HALF_PI = 0.5 * math.pi


def _check_n_meas(n_meas: int) -> None:
    if int(n_meas) != n_meas or n_meas < 1:
        raise ValueError(f"n_meas must be a positive integer, got {n_meas!r}")


def fisher_information(state: SqueezedThermalState, theta):
    """Homodyne Fisher information per measurement at phase ``theta``."""
    theta = np.asarray(theta, dtype=float)
    lo = math.exp(-2.0 * state.r - 2.0 * state.r_prime)
    hi = math.exp(2.0 * state.r)
    sigma2 = lo * np.cos(theta) ** 2 + hi * np.sin(theta) ** 2
    f = np.sin(2.0 * theta) ** 2 * (hi - lo) ** 2 / (2.0 * sigma2 ** 2)
    return float(f) if f.ndim == 0 else f


def optimal_phase(state: SqueezedThermalState) -> float:
    """Phase in (0, pi/4] where the homodyne Fisher information peaks."""
    return 0.5 * math.acos(math.tanh(2.0 * state.r + state.r_prime))


def max_fisher(state: SqueezedThermalState) -> float:
    return 2.0 * math.sinh(2.0 * state.r + state.r_prime) ** 2


def qfi(state: SqueezedThermalState) -> float:
    """Quantum Fisher information per measurement (0 for the vacuum)."""
    nr = state.squeezing_photons
    return 8.0 * nr * (nr + 1.0) * 2.0 / (1.0 + math.exp(-2.0 * state.r_prime))


def _squeezing_info(state: SqueezedThermalState) -> float:
    nr = state.squeezing_photons
    if nr <= 0.0:
        raise NoPhaseInformation("no phase information: probe has no squeezing photons (bound diverges)")
    return 8.0 * nr * (nr + 1.0)


def ocrb(state: SqueezedThermalState, n_meas: int) -> float:
    """Best variance reachable with homodyne detection, ``1/(8 N n_r (n_r+1))``."""
    _check_n_meas(n_meas)
    return 1.0 / (n_meas * _squeezing_info(state))


def qcrb(state: SqueezedThermalState, n_meas: int) -> float:
    """Measurement-independent quantum Cramer-Rao bound for this probe."""
    return ocrb(state, n_meas) * 0.5 * (1.0 + math.exp(-2.0 * state.r_prime))


def sql(mean_photon: float, n_meas: int) -> float:
    """Coherent-probe variance ``1/(4 N n)`` at the same mean photon number."""
    _check_n_meas(n_meas)
    if not mean_photon > 0:
        raise NoPhaseInformation(f"no photons: SQL needs mean photon number > 0, got {mean_photon}")
    return 1.0 / (4.0 * n_meas * mean_photon)


@dataclass(frozen=True)
class BoundsReport:
    theta: float
    fisher: float
    inv_nf: Optional[float]  # None where the Fisher information vanishes
    sql: float
    ocrb: float
    qcrb: float
    n_meas: int
    mean_photon: float


def bounds_report(state: SqueezedThermalState, theta: float, n_meas: int) -> BoundsReport:
    f = fisher_information(state, theta)
    n = mean_photon_number(state)
    return BoundsReport(
        theta=float(theta),
        fisher=f,
        inv_nf=1.0 / (n_meas * f) if f > 0 else None,
        sql=sql(n, n_meas),
        ocrb=ocrb(state, n_meas),
        qcrb=qcrb(state, n_meas),
        n_meas=int(n_meas),
        mean_photon=n,
    )


@dataclass(frozen=True)
class PhaseInterval:
    theta_low: float
    theta_high: float
    empty: bool = False

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.theta_high - self.theta_low

    def __contains__(self, theta: float) -> bool:
        return not self.empty and self.theta_low <= theta <= self.theta_high


def beyond_sql_interval(state: SqueezedThermalState, xtol: float = 1e-10) -> PhaseInterval:
    """Phases in [0, pi/2] where homodyne detection beats the SQL.

    The condition ``1/(N F) < 1/(4 N n)`` reduces to ``F(theta) > 4 n``.  F
    increases monotonically on ``[0, theta_opt]`` and decreases on
    ``[theta_opt, pi/2]`` while vanishing at both ends, so each edge is
    bracketed by ``theta_opt`` and an endpoint.
    """
    n = mean_photon_number(state)
    t_opt = optimal_phase(state)
    if n <= 0.0 or max_fisher(state) <= 4.0 * n:
        return PhaseInterval(t_opt, t_opt, empty=True)

    def excess(theta: float) -> float:
        return fisher_information(state, theta) - 4.0 * n

    low = bisect(excess, 0.0, t_opt, xtol=xtol)
    high = bisect(excess, t_opt, HALF_PI, xtol=xtol)
    return PhaseInterval(low, high)

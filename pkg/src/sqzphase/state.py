"""Single-mode squeezed thermal states.

Quadratures are scaled so that the vacuum variance is 1/2.  A state is
fully described by its squeezing ``r`` and the extra antisqueezing noise
``r_prime``; its unrotated covariance is ``diag(e^{-2r}, e^{2r+2r'}) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidState

#: Natural-log units per decibel of variance ratio.
DB_TO_NEPER = math.log(10.0) / 20.0


@dataclass(frozen=True)
class SqueezedThermalState:
    """Squeezed thermal probe with squeezing ``r`` and extra antisqueezing ``r_prime``."""

    r: float
    r_prime: float = 0.0

    def __post_init__(self) -> None:
        for name in ("r", "r_prime"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidState(f"{name} must be finite, got {value!r}")
            if value < 0:
                raise InvalidState(f"{name} must be >= 0, got {value!r}")

    @property
    def squeezed_variance(self) -> float:
        return 0.5 * math.exp(-2.0 * self.r)

    @property
    def antisqueezed_variance(self) -> float:
        return 0.5 * math.exp(2.0 * self.r + 2.0 * self.r_prime)

    @property
    def squeezing_photons(self) -> float:
        """Photon number attributable to squeezing, ``sinh^2(r + r'/2)``."""
        return math.sinh(self.r + 0.5 * self.r_prime) ** 2

    @property
    def is_vacuum(self) -> bool:
        return self.r == 0.0 and self.r_prime == 0.0

    def covariance(self, theta: float = 0.0) -> "CovarianceMatrix2":
        return covariance_at_phase(self, theta)


VACUUM = SqueezedThermalState(0.0, 0.0)


@dataclass(frozen=True)
class CovarianceMatrix2:
    """Symmetric 2x2 phase-space covariance ``[[xx, xp], [xp, pp]]``."""

    xx: float
    xp: float
    pp: float

    def __post_init__(self) -> None:
        if not (self.xx > 0 and self.pp > 0 and self.det > 0):
            raise InvalidState(
                f"covariance is not positive definite: xx={self.xx}, xp={self.xp}, pp={self.pp}"
            )

    @property
    def det(self) -> float:
        return self.xx * self.pp - self.xp * self.xp

    @property
    def trace(self) -> float:
        return self.xx + self.pp

    def as_array(self) -> np.ndarray:
        return np.array([[self.xx, self.xp], [self.xp, self.pp]])


def covariance_at_phase(state: SqueezedThermalState, theta: float) -> CovarianceMatrix2:
    """Covariance of the probe after the phase shift ``exp(-i theta n)``.

    The rotation leaves the determinant at ``e^{2r'}/4`` for every ``theta``.
    """
    if not math.isfinite(theta):
        raise InvalidState(f"theta must be finite, got {theta!r}")
    vs = math.exp(-2.0 * state.r)
    va = math.exp(2.0 * state.r + 2.0 * state.r_prime)
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    return CovarianceMatrix2(
        xx=0.5 * (vs * c2 + va * s2),
        xp=0.25 * (va - vs) * math.sin(2.0 * theta),
        pp=0.5 * (va * c2 + vs * s2),
    )


def mean_photon_number(state: SqueezedThermalState) -> float:
    """Mean photon number ``e^{r'} n_r + (e^{r'} - 1)/2``.

    Reduces to ``sinh^2 r`` for a pure squeezed vacuum.
    """
    g = math.exp(state.r_prime)
    return g * state.squeezing_photons + 0.5 * (g - 1.0)


def purity(state: SqueezedThermalState) -> float:
    """Tr(rho^2) = 1 / (2 sqrt(det sigma)) = e^{-r'}."""
    return math.exp(-state.r_prime)


def from_db(squeezing_db: float, antisqueezing_db: float) -> SqueezedThermalState:
    """Build a state from measured noise levels relative to the shot-noise level.

    ``squeezing_db`` is the magnitude of the noise reduction (a reading of
    -3.21 dB is passed as 3.21) and ``antisqueezing_db`` the noise increase of
    the orthogonal quadrature.
    """
    if not (math.isfinite(squeezing_db) and math.isfinite(antisqueezing_db)):
        raise InvalidState("dB values must be finite")
    if squeezing_db < 0:
        raise InvalidState(f"squeezing_db must be >= 0 (a magnitude), got {squeezing_db}")
    if antisqueezing_db < squeezing_db:
        raise InvalidState(
            f"antisqueezing_db ({antisqueezing_db}) < squeezing_db ({squeezing_db}) "
            "would need negative extra noise"
        )
    return SqueezedThermalState(
        r=squeezing_db * DB_TO_NEPER,
        r_prime=(antisqueezing_db - squeezing_db) * DB_TO_NEPER,
    )


def to_db(state: SqueezedThermalState) -> tuple[float, float]:
    """Inverse of :func:`from_db`: ``(squeezing_db, antisqueezing_db)``."""
    return state.r / DB_TO_NEPER, (state.r + state.r_prime) / DB_TO_NEPER


def wigner_value(state: SqueezedThermalState, theta: float, x, p):
    """Wigner function of the phase-shifted state at ``(x, p)``.

    Accepts scalars or broadcastable arrays.  Plotting helper; inference
    works with the homodyne marginal directly.
    """
    cov = covariance_at_phase(state, theta)
    det = cov.det
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    quad = (cov.pp * x * x - 2.0 * cov.xp * x * p + cov.xx * p * p) / det
    out = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    return float(out) if out.ndim == 0 else out

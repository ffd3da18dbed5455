"""Grid posterior over the phase on [0, pi/2] with a flat prior.

Everything is accumulated in log space; the density is only formed after
subtracting the maximum, so records of thousands of samples are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import UninformativePosterior
from .measurement import SampleSet, log_likelihood, _scaled_variance
from .state import SqueezedThermalState

DEFAULT_GRID_POINTS = 2048
MIN_GRID_POINTS = 64
LOG_PRIOR = math.log(2.0 / math.pi)


@dataclass(frozen=True)
class PosteriorGrid:
    thetas: np.ndarray = field(repr=False)
    log_density: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)

    @classmethod
    def from_log_density(cls, thetas, log_density) -> "PosteriorGrid":
        thetas = np.asarray(thetas, dtype=float)
        log_density = np.asarray(log_density, dtype=float)
        w = np.exp(log_density - log_density.max())
        density = w / trapezoid(w, thetas)
        for arr in (thetas, log_density, density):
            arr.flags.writeable = False
        return cls(thetas, log_density, density)

    @property
    def grid_points(self) -> int:
        return int(self.thetas.size)

    @property
    def step(self) -> float:
        return float(self.thetas[1] - self.thetas[0])


def theta_grid(grid_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    if int(grid_points) != grid_points or grid_points < MIN_GRID_POINTS:
        raise ValueError(f"grid_points must be an integer >= {MIN_GRID_POINTS}, got {grid_points!r}")
    return np.linspace(0.0, 0.5 * math.pi, int(grid_points))


def prior_grid(grid_points: int = DEFAULT_GRID_POINTS) -> PosteriorGrid:
    """The flat prior 2/pi, i.e. the posterior before any data."""
    thetas = theta_grid(grid_points)
    return PosteriorGrid.from_log_density(thetas, np.full(thetas.shape, LOG_PRIOR))


def posterior(samples: SampleSet, grid_points: int = DEFAULT_GRID_POINTS) -> PosteriorGrid:
    """Posterior of the phase given a homodyne record.

    The Gaussian likelihood depends on the record only through ``N`` and
    ``sum x_k^2``; the sum is taken with ``math.fsum`` so the result does not
    depend on sample order.
    """
    thetas = theta_grid(grid_points)
    x = samples.samples
    sum_sq = math.fsum(x * x)
    w = _scaled_variance(samples.state, thetas)
    log_post = LOG_PRIOR - 0.5 * x.size * np.log(np.pi * w) - sum_sq / w
    return PosteriorGrid.from_log_density(thetas, log_post)


def update(prior: PosteriorGrid, x: float, state: SqueezedThermalState) -> PosteriorGrid:
    """Fold one outcome into ``prior``; the result is the prior for the next one."""
    return PosteriorGrid.from_log_density(
        prior.thetas, prior.log_density + log_likelihood(x, prior.thetas, state)
    )


def map_estimate(post: PosteriorGrid) -> float:
    """Posterior mode, refined by a parabola through the three points around the grid maximum.

    The parabola is fit to the log density, which is exact for a Gaussian peak.
    """
    d = post.density
    if np.ptp(d) <= 1e-15 * d.max():
        raise UninformativePosterior("uninformative posterior: density is flat, no mode")
    i = int(np.argmax(d))
    theta = float(post.thetas[i])
    if 0 < i < d.size - 1:
        y0, y1, y2 = post.log_density[i - 1 : i + 2]
        curv = y0 - 2.0 * y1 + y2
        if curv < 0:
            theta += 0.5 * (y0 - y2) / curv * post.step
    return theta


def posterior_mean(post: PosteriorGrid) -> float:
    return float(trapezoid(post.thetas * post.density, post.thetas))


def posterior_variance(post: PosteriorGrid) -> float:
    """<theta^2> - <theta>^2 under the grid posterior."""
    t = post.thetas
    dt = t - trapezoid(t * post.density, t)
    # central form; avoids cancellation when the posterior is narrow
    return float(trapezoid(dt * dt * post.density, t))

"""Independent reference computations used by the tests.

None of these go through the closed forms they are checked against.
"""

import math

import numpy as np
from scipy import integrate

from sqzphase.measurement import log_likelihood, marginal_variance
from sqzphase.state import mean_photon_number


def fisher_by_quadrature(state, theta, h=1e-5):
    """∫ p(x|θ) (∂θ ln p(x|θ))² dx with a central difference in θ."""
    sd = math.sqrt(marginal_variance(state, theta))

    def integrand(x):
        score = (log_likelihood(x, theta + h, state) - log_likelihood(x, theta - h, state)) / (2 * h)
        return math.exp(log_likelihood(x, theta, state)) * score * score

    val, _ = integrate.quad(integrand, -14 * sd, 14 * sd, epsabs=0, epsrel=1e-11, limit=200)
    return val


def interval_by_scan(state, fisher, points=10_000):
    """Beyond-SQL interval from a dense θ scan with linear interpolation at the edges."""
    t = np.linspace(0.0, math.pi / 2, points)
    g = fisher(state, t) - 4.0 * mean_photon_number(state)
    inside = np.flatnonzero(g > 0)
    if inside.size == 0:
        return None
    i, j = inside[0], inside[-1]

    def cross(a, b):
        return t[a] - g[a] * (t[b] - t[a]) / (g[b] - g[a])

    return cross(i - 1, i), cross(j, j + 1)


def posterior_linear(samples, state, thetas):
    """Flat-prior posterior as a plain product of likelihoods (short records only)."""
    like = np.ones_like(thetas)
    for x in samples:
        like = like * np.exp(log_likelihood(x, thetas, state))
    like = like * (2 / math.pi)
    return like / integrate.trapezoid(like, thetas)

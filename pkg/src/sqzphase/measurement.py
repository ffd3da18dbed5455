"""Ideal homodyne detection of a phase-shifted squeezed thermal state.

Random streams
--------------
Every stream is Philox4x64-10 keyed with the 128-bit pair ``(seed, stream)``
and a zero starting counter (numpy's ``Philox(key=...)``).  Each 64-bit
output ``u`` becomes the double ``(u >> 11) * 2**-53``.  Normal deviates come
from the Box-Muller transform applied to consecutive pairs of doubles
``(a, b)``::

    rho = sqrt(-2 ln(1 - a))
    z0, z1 = rho * cos(2 pi b), rho * sin(2 pi b)

so sample ``k`` depends only on doubles ``2*(k//2)`` and ``2*(k//2)+1``.  A
draw of ``N`` samples is therefore a prefix of any longer draw from the same
stream.  Independent trials use distinct ``stream`` words.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .state import SqueezedThermalState
from .errors import PhaseEstimationError

RNG_ALGORITHM = "philox4x64-10/box-muller"
_MASK64 = (1 << 64) - 1


def philox_stream(seed: int, stream: int = 0) -> np.random.Generator:
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    if not 0 <= stream <= _MASK64:
        raise ValueError(f"stream must be in [0, 2**64), got {stream}")
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream], dtype=np.uint64)))


def box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` standard normal deviates with the documented transform."""
    m = (n + 1) // 2
    u = rng.random(2 * m)
    a, b = u[0::2], u[1::2]
    rho = np.sqrt(-2.0 * np.log1p(-a))
    z = np.empty(2 * m)
    z[0::2] = rho * np.cos(2.0 * np.pi * b)
    z[1::2] = rho * np.sin(2.0 * np.pi * b)
    return z[:n]


def _scaled_variance(state: SqueezedThermalState, theta):
    # e^{2r'} Sigma_theta^2, written so the vacuum gives exactly 1 at every theta.
    lo = math.exp(-2.0 * state.r)
    hi = math.exp(2.0 * state.r + 2.0 * state.r_prime)
    return lo + (hi - lo) * np.sin(theta) ** 2


def marginal_variance(state: SqueezedThermalState, theta):
    """Variance of the homodyne outcome at phase ``theta``.

    Equals the ``xx`` entry of the rotated covariance.  ``theta`` may be an
    array.
    """
    v = 0.5 * _scaled_variance(state, np.asarray(theta, dtype=float))
    return float(v) if np.ndim(v) == 0 else v


def log_likelihood(x, theta, state: SqueezedThermalState):
    """``ln p(x | theta)`` for the zero-mean Gaussian homodyne marginal.

    ``x`` and ``theta`` broadcast against each other.
    """
    w = _scaled_variance(state, np.asarray(theta, dtype=float))
    x = np.asarray(x, dtype=float)
    out = -0.5 * np.log(np.pi * w) - x * x / w
    return float(out) if np.ndim(out) == 0 else out


def marginal_cdf(x, theta, state: SqueezedThermalState):
    from scipy.special import ndtr

    return ndtr(np.asarray(x, dtype=float) / math.sqrt(marginal_variance(state, theta)))


@dataclass(frozen=True)
class SampleSet:
    """Homodyne record together with what produced it."""

    samples: np.ndarray = field(repr=False)
    state: SqueezedThermalState
    theta_true: float
    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        arr = np.array(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise PhaseEstimationError("a SampleSet needs a non-empty 1-D sample array")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return int(self.samples.size)

    def __len__(self) -> int:
        return self.n

    def head(self, n: int) -> "SampleSet":
        """First ``n`` outcomes (identical to a fresh draw of size ``n``)."""
        return SampleSet(self.samples[:n], self.state, self.theta_true, self.seed, self.stream)

    def meta(self) -> dict:
        return {
            "r": self.state.r,
            "r_prime": self.state.r_prime,
            "theta_true": self.theta_true,
            "seed": self.seed,
            "stream": self.stream,
            "n": self.n,
            "rng": RNG_ALGORITHM,
        }


def sample_homodyne(
    state: SqueezedThermalState, theta: float, n_samples: int, seed: int, stream: int = 0
) -> SampleSet:
    """Draw ``n_samples`` i.i.d. quadrature outcomes at phase ``theta``."""
    if int(n_samples) != n_samples or n_samples < 1:
        raise ValueError(f"n_samples must be a positive integer, got {n_samples!r}")
    z = box_muller(philox_stream(seed, stream), int(n_samples))
    x = math.sqrt(marginal_variance(state, theta)) * z
    return SampleSet(x, state, float(theta), int(seed), int(stream))


def write_samples(path, sample_set: SampleSet) -> None:
    lines = [f"# meta: {json.dumps(sample_set.meta(), sort_keys=True)}", "index,x"]
    lines += [f"{i},{v:.17g}" for i, v in enumerate(sample_set.samples)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_samples(path) -> SampleSet:
    meta = None
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# meta:"):
                meta = json.loads(line[len("# meta:"):])
            elif line.startswith("#") or line == "index,x":
                continue
            else:
                _, v = line.split(",")
                values.append(float(v))
    if meta is None:
        raise PhaseEstimationError(f"{path}: missing '# meta:' header")
    if len(values) != meta["n"]:
        raise PhaseEstimationError(f"{path}: expected {meta['n']} samples, found {len(values)}")
    state = SqueezedThermalState(meta["r"], meta["r_prime"])
    return SampleSet(np.array(values), state, meta["theta_true"], meta["seed"], meta.get("stream", 0))

"""Blur discomfort indices.

Discomfort is modeled as the relative loss of positional certainty,
eps = 1 - sqrt(ratio of information with and without blur).  For Gaussian
blur that reduces to a function of the normalized blur xi = s_B / s_G
alone; the scaled index adds a score gain and a viewing-distance factor
for comparison against subjective ratings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._optimize import golden_section_minimize
from .errors import DomainError


@dataclass(frozen=True)
class DiscomfortParams:
    """Scaling of the index onto a subjective score axis."""

    gain: float                # score at diverging blur (e.g. 0-100 scale)
    gamma: float               # nominal/actual viewing-distance ratio
    neural_spread: float = 2.5

    def __post_init__(self):
        if not (self.gain > 0 and self.gamma > 0 and self.neural_spread > 0):
            raise DomainError("gain, gamma and neural spread must be positive")


def epsilon(blur_spread, neural_spread: float):
    """Discomfort index in [0, 1): 1 - 1/sqrt(1 + (s_B/s_G)^2).

    Equals 1 - sqrt(expected information ratio); 0 without blur, tending
    to 1 for diverging blur.  Accepts scalars or arrays for the spread.
    """
    if not (neural_spread > 0):
        raise DomainError("neural spread must be positive")
    xi = np.asarray(blur_spread, dtype=float) / neural_spread
    if np.any(xi < 0):
        raise DomainError("blur spread must be non-negative")
    out = 1.0 - 1.0 / np.sqrt(1.0 + xi ** 2)
    return float(out) if np.isscalar(blur_spread) else out


def sensitivity(xi):
    """Derivative of the index with respect to normalized blur:
    xi (1 + xi^2)^(-3/2)."""
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0):
        raise DomainError("normalized blur must be non-negative")
    out = x * (1.0 + x ** 2) ** -1.5
    return float(out) if np.isscalar(xi) else out


def delta_xi(xi, delta_eps: float):
    """Blur increment producing a fixed discomfort increment.

    (1/xi)(1 + xi^2)^(3/2) * delta_eps; diverges at xi = 0 and for large
    xi, with a dip at xi = 1/sqrt(2).
    """
    if not (delta_eps > 0):
        raise DomainError("discomfort increment must be positive")
    x = np.asarray(xi, dtype=float)
    if np.any(x <= 0):
        raise DomainError("normalized blur must be positive (threshold diverges at 0)")
    out = (1.0 + x ** 2) ** 1.5 / x * delta_eps
    return float(out) if np.isscalar(xi) else out


def dipper_minimum(delta_eps: float = 0.05,
                   xi_lo: float = 0.05, xi_hi: float = 10.0) -> float:
    """Numerically locate the dip of the increment curve (analytically at
    1/sqrt(2), independent of delta_eps)."""
    x, _ = golden_section_minimize(lambda x: delta_xi(x, delta_eps),
                                   xi_lo, xi_hi, tol=1e-9)
    return x


def defocus_discomfort(pupil_mm: float, diopters: float,
                       neural_spread: float = 2.5) -> float:
    """Discomfort of eye defocus in centesimal units.

    Chains the defocus-to-spread rule s_B = 0.64 p |D| into the index and
    scales by 100.
    """
    if not (pupil_mm > 0):
        raise DomainError("pupil diameter must be positive")
    spread = 0.64 * pupil_mm * abs(diopters)
    return 100.0 * epsilon(spread, neural_spread)


def sbdi(blur_spread, params: DiscomfortParams):
    """Scaled blur discomfort index.

    gain * [1 - 1/sqrt(1 + (gamma^2 s_B/s_G)^2)].  The squared gamma
    reflects the two distance effects at once: the neural spread projected
    onto the image shrinks as s_G/gamma while the applied blur projects
    onto the retina as gamma * s_B.
    """
    return sbdi_values(blur_spread, params.gain, params.gamma, params.neural_spread)


def sbdi_values(blur_spread, gain: float, gamma: float, neural_spread: float):
    """Array-friendly core of :func:`sbdi` used by the fitting code."""
    if not (gain > 0 and gamma > 0 and neural_spread > 0):
        raise DomainError("gain, gamma and neural spread must be positive")
    s = np.asarray(blur_spread, dtype=float)
    if np.any(s < 0):
        raise DomainError("blur spread must be non-negative")
    arg = gamma ** 2 * s / neural_spread
    out = gain * (1.0 - 1.0 / np.sqrt(1.0 + arg ** 2))
    return float(out) if np.isscalar(blur_spread) else out


def diopter_chart(pupils_mm=(2.0, 3.0, 4.0, 5.0, 6.0),
                  d_max: float = 2.0, d_step: float = 0.01,
                  neural_spread: float = 2.5):
    """(diopters, pupil_mm, discomfort_centesimal) rows for charting."""
    n = int(round(d_max / d_step))
    diopters = np.arange(n + 1) * d_step
    rows = []
    for p in pupils_mm:
        for d in diopters:
            rows.append((float(d), float(p),
                         defocus_discomfort(p, float(d), neural_spread)))
    return rows


def dipper_curve(delta_eps: float = 0.05, xi_min: float = 0.05,
                 xi_max: float = 10.0, points: int = 400):
    """(xi, delta_xi) rows on a logarithmic xi grid."""
    if not (0 < xi_min < xi_max) or points < 2:
        raise DomainError("need 0 < xi_min < xi_max and at least 2 points")
    xi = np.exp(np.linspace(math.log(xi_min), math.log(xi_max), points))
    return [(float(x), float(delta_xi(x, delta_eps))) for x in xi]

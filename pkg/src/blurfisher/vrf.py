"""The complex gradient-plus-Gaussian receptive-field filter and the visual
map it produces.

The filter's frequency response is polar separable,

    H(rho, theta) = j 2 pi rho exp(-c s_G^2 rho^2) e^(j theta),

the cascade of a complex gradient (d/dx1 + j d/dx2, response
j 2 pi rho e^(j theta)) and an isotropic Gaussian smoothing stage.  Applied
to a luminance image it yields a complex smoothed-gradient field: magnitude
is edge strength, phase is the direction orthogonal to the edge.  The
filter is scalar steerable: rotating it in azimuth multiplies it by a unit
complex number.

The kernel is constructed analytically in the frequency domain; its space
taps are obtained by inverse FFT (exact round trip, no spatial truncation
error).  Under the Fourier-pair convention (c = pi) the continuum space
profile is -(2 pi / s_G^4) r exp(-pi r^2 / s_G^2) e^(j phi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .geometry import (
    DEFAULT_CONVENTION,
    FrequencyGrid,
    RetinalGeometry,
    SpreadConvention,
)


@dataclass(frozen=True)
class LuminanceImage:
    """A 2D luminance field on the retinal grid (linear units)."""

    samples: np.ndarray
    geometry: RetinalGeometry

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 2:
            raise ShapeError("luminance samples must be a 2D array")
        if arr.shape != self.geometry.shape:
            raise ShapeError(
                f"samples {arr.shape} do not match geometry {self.geometry.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("luminance samples must be finite")
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_array(cls, samples, receptors_per_degree=60.0) -> "LuminanceImage":
        arr = np.asarray(samples, dtype=float)
        return cls(arr, RetinalGeometry.for_shape(arr.shape, receptors_per_degree))


@dataclass(frozen=True)
class VrfKernel:
    """Receptive-field kernel: analytic spectral taps plus their inverse FFT.

    ``spectral_taps``: H on the FFT frequency grid (DC bin exactly zero).
    ``spatial_taps``: inverse transform scaled by 1/pitch^2, approximating
    the continuum point response (origin at index [0, 0]).
    """

    neural_spread: float
    convention: SpreadConvention
    grid: FrequencyGrid
    spectral_taps: np.ndarray
    spatial_taps: np.ndarray


def nyquist_mask(grid: FrequencyGrid) -> np.ndarray:
    """True on bins where a direction-selective response is representable.

    On even-size grids the single shared Nyquist row/column stands for
    both +f and -f at once, so an odd (gradient-like) filter cannot be
    sampled there consistently; those bins are excluded (like DC) so that
    steering by exact grid rotations holds to machine precision.
    """
    h, w = grid.shape
    mask = np.ones((h, w), dtype=bool)
    if h % 2 == 0:
        mask[h // 2, :] = False
    if w % 2 == 0:
        mask[:, w // 2] = False
    return mask


def make_vntf(
    neural_spread: float,
    grid: FrequencyGrid,
    conv: SpreadConvention = DEFAULT_CONVENTION,
) -> VrfKernel:
    """Build the filter from its analytic frequency response on ``grid``."""
    if not (neural_spread > 0):
        raise DomainError("neural spread must be positive")
    c = conv.exponent_constant
    rho = grid.rho
    radial = 2.0 * np.pi * rho * np.exp(-c * neural_spread ** 2 * rho ** 2)
    h = 1j * radial * np.exp(1j * grid.theta)
    h[~nyquist_mask(grid)] = 0.0
    h[0, 0] = 0.0
    spatial = np.fft.ifft2(h) / grid.pitch ** 2
    return VrfKernel(
        neural_spread=neural_spread,
        convention=conv,
        grid=grid,
        spectral_taps=h,
        spatial_taps=spatial,
    )


def make_psf(
    neural_spread: float,
    geometry: RetinalGeometry,
    conv: SpreadConvention = DEFAULT_CONVENTION,
) -> VrfKernel:
    """Kernel for a retinal geometry, with space taps populated.

    The space taps are the inverse transform of the analytic spectrum, so
    they reproduce the continuum profile
    -(2 pi^3 / (c^2 s_G^4)) r exp(-pi^2 r^2 / (c s_G^2)) e^(j phi)
    up to the aliasing left above the Nyquist band.
    """
    grid = FrequencyGrid.for_geometry(geometry)
    return make_vntf(neural_spread, grid, conv)


def vntf_peak_frequency(neural_spread: float,
                        conv: SpreadConvention = DEFAULT_CONVENTION) -> float:
    """Radial frequency (cycles/arcmin) of the maximum magnitude response.

    argmax of rho exp(-c s^2 rho^2) is 1 / (s sqrt(2 c)).
    """
    if not (neural_spread > 0):
        raise DomainError("neural spread must be positive")
    return 1.0 / (neural_spread * np.sqrt(2.0 * conv.exponent_constant))


def visual_map(image: LuminanceImage, kernel: VrfKernel,
               taper_arcmin: float = 0.0) -> "VisualMap":
    """Complex smoothed-gradient field of a luminance image.

    The image mean is removed first (the filter has no DC response anyway)
    and the convolution runs in the frequency domain under periodic
    extension.  ``taper_arcmin`` optionally applies a raised-cosine border
    of that width before transforming, to suppress wrap-around edge
    responses on non-periodic content.
    """
    if image.samples.shape != kernel.grid.shape:
        raise ShapeError(
            f"image {image.samples.shape} does not match kernel grid {kernel.grid.shape}")
    work = image.samples - image.samples.mean()
    if taper_arcmin > 0:
        work = work * _cosine_border(work.shape, taper_arcmin / image.geometry.pixel_pitch)
        work = work - work.mean()
    values = np.fft.ifft2(np.fft.fft2(work) * kernel.spectral_taps)
    return VisualMap(values=values, geometry=image.geometry,
                     source_neural_spread=kernel.neural_spread)


@dataclass(frozen=True)
class VisualMap:
    """Complex gradient field over the retinal grid."""

    values: np.ndarray
    geometry: RetinalGeometry
    source_neural_spread: float

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        """Gradient direction in (-pi, pi]."""
        return np.angle(self.values)


def steer(obj, alpha: float, method: str = "complex"):
    """Rotate a map or kernel in azimuth by multiplying with e^(j alpha).

    ``method="real"`` computes the identical result through the real
    linear combination of the two real component filters
    (re' = re cos a - im sin a, im' = re sin a + im cos a); both paths are
    exposed so they can be checked against each other.
    """
    if method == "complex":
        def rot(z):
            return z * np.exp(1j * alpha)
    elif method == "real":
        ca, sa = np.cos(alpha), np.sin(alpha)

        def rot(z):
            return (z.real * ca - z.imag * sa) + 1j * (z.real * sa + z.imag * ca)
    else:
        raise DomainError(f"unknown steering method {method!r}")

    if isinstance(obj, VisualMap):
        return VisualMap(values=rot(obj.values), geometry=obj.geometry,
                         source_neural_spread=obj.source_neural_spread)
    if isinstance(obj, VrfKernel):
        return VrfKernel(
            neural_spread=obj.neural_spread,
            convention=obj.convention,
            grid=obj.grid,
            spectral_taps=rot(obj.spectral_taps),
            spatial_taps=rot(obj.spatial_taps),
        )
    return rot(np.asarray(obj))


def invert_map(vmap: VisualMap, kernel: VrfKernel, reg: float = 1e-6) -> LuminanceImage:
    """Recover the (zero-mean) luminance image by spectral inversion.

    Divides by the filter response with Tikhonov-style stabilization,
    conj(H) / (|H|^2 + reg * max|H|^2); with reg = 0 the division is exact
    wherever H is nonzero.  The DC bin is unrecoverable and stays zero.
    """
    if not (reg >= 0):
        raise DomainError("regularization must be non-negative")
    h = kernel.spectral_taps
    h2 = np.abs(h) ** 2
    if reg > 0:
        filt = np.conj(h) / (h2 + reg * h2.max())
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            filt = np.where(h2 > 0, np.conj(h) / np.where(h2 > 0, h2, 1.0), 0.0)
    recovered = np.fft.ifft2(np.fft.fft2(vmap.values) * filt).real
    return LuminanceImage(recovered, vmap.geometry)


def render_false_color(vmap: VisualMap) -> np.ndarray:
    """False-color rendering: edge strength as value, direction as hue.

    The gradient direction is folded into [0, pi) (an edge and its reverse
    share an orientation) and mapped onto the full hue wheel; magnitude is
    normalized to the map's own maximum.  Returns an (H, W, 3) uint8 array.
    """
    mag = vmap.magnitude
    peak = mag.max()
    value = mag / peak if peak > 0 else np.zeros_like(mag)
    direction = np.mod(vmap.phase, np.pi)
    hue = direction / np.pi
    rgb = _hsv_to_rgb(hue, np.ones_like(hue), value)
    return (np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _hsv_to_rgb(h, s, v):
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    rgb = np.zeros(h.shape + (3,))
    for idx, channels in enumerate(((v, t, p), (q, v, p), (p, v, t),
                                    (p, q, v), (t, p, v), (v, p, q))):
        mask = i == idx
        for ch in range(3):
            rgb[..., ch][mask] = channels[ch][mask]
    return rgb


def _cosine_border(shape, width_px: float):
    """Separable raised-cosine window that is 1 in the interior and falls
    to 0 at the borders over ``width_px`` pixels."""
    def profile(n):
        w = np.ones(n)
        m = int(min(np.ceil(width_px), n // 2))
        if m > 0:
            ramp = 0.5 * (1.0 - np.cos(np.pi * (np.arange(m) + 0.5) / width_px))
            w[:m] = ramp
            w[-m:] = ramp[::-1]
        return w
    return np.outer(profile(shape[0]), profile(shape[1]))

"""Angular units, retinal sampling grid, frequency coordinates and spread
conventions.

All internal spatial coordinates are in arcmin and all spatial frequencies
in cycles/arcmin.  Cycles/degree appears only at I/O boundaries (a factor
of 60).  The nominal retina samples at 60 receptors per degree, i.e. one
receptor per arcmin, giving a Nyquist band edge of 30 cycles/degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ShapeError

NOMINAL_RECEPTORS_PER_DEGREE = 60.0


@dataclass(frozen=True)
class SpreadConvention:
    """Fixes the meaning of a Gaussian "spread" value.

    A spread ``s`` always denotes a Gaussian whose transfer function is
    ``exp(-c * s**2 * rho**2)`` with ``c = exponent_constant``.  The same
    constant is applied to the neural smoothing spectrum and to every
    Gaussian blur OTF, so ratios of spreads are convention independent.

    ``sigma_to_spread`` (k) converts the standard deviation of a
    space-domain Gaussian into a spread: ``s = k * sigma``.  Matching
    ``exp(-c s^2 rho^2)`` against the standard-deviation OTF
    ``exp(-2 pi^2 sigma^2 rho^2)`` gives ``k = sqrt(2 pi^2 / c)``, which is
    the default when ``sigma_to_spread`` is not supplied.
    """

    exponent_constant: float = math.pi
    sigma_to_spread: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if not (self.exponent_constant > 0 and math.isfinite(self.exponent_constant)):
            raise DomainError("exponent_constant must be a positive finite number")
        if self.sigma_to_spread is None:
            object.__setattr__(
                self, "sigma_to_spread",
                math.sqrt(2.0 * math.pi ** 2 / self.exponent_constant),
            )
        if not (self.sigma_to_spread > 0 and math.isfinite(self.sigma_to_spread)):
            raise DomainError("sigma_to_spread must be a positive finite number")

    @classmethod
    def fourier_pair(cls) -> "SpreadConvention":
        """c = pi: the spectrum exp(-pi s^2 rho^2) and the space-domain
        profile exp(-pi r^2 / s^2) form an exact Fourier pair.  Package
        default; places the filter's peak response near 9.6 cycles/degree
        for a 2.5 arcmin neural spread."""
        return cls(math.pi)

    @classmethod
    def unit_exponent(cls) -> "SpreadConvention":
        """c = 1: spread appears bare in the exponent, exp(-s^2 rho^2)."""
        return cls(1.0)

    @classmethod
    def gaussian_sigma(cls) -> "SpreadConvention":
        """c = 2 pi^2: a spread is simply the standard deviation of the
        space-domain Gaussian PSF (k = 1)."""
        return cls(2.0 * math.pi ** 2)


#: Named conventions selectable from the CLI / config files.
CONVENTIONS = {
    "fourier-pair": SpreadConvention.fourier_pair,
    "unit": SpreadConvention.unit_exponent,
    "sigma": SpreadConvention.gaussian_sigma,
}

DEFAULT_CONVENTION = SpreadConvention.fourier_pair()


def convention_by_name(name: str) -> SpreadConvention:
    try:
        return CONVENTIONS[name]()
    except KeyError:
        raise DomainError(
            f"unknown spread convention {name!r}; choose from {sorted(CONVENTIONS)}"
        ) from None


@dataclass(frozen=True)
class RetinalGeometry:
    """Regular angular sampling grid of the idealized retina.

    ``pixel_pitch`` is derived: 60 / receptors_per_degree arcmin per pixel.
    """

    grid_height: int
    grid_width: int
    receptors_per_degree: float = NOMINAL_RECEPTORS_PER_DEGREE

    def __post_init__(self):
        if self.grid_height < 1 or self.grid_width < 1:
            raise DomainError("grid dimensions must be positive")
        if not (self.receptors_per_degree > 0):
            raise DomainError("receptors_per_degree must be positive")

    @property
    def pixel_pitch(self) -> float:
        """Arcmin per pixel."""
        return 60.0 / self.receptors_per_degree

    @property
    def nyquist_cpd(self) -> float:
        """Radial Nyquist frequency in cycles/degree."""
        return self.receptors_per_degree / 2.0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.grid_height, self.grid_width)

    @classmethod
    def for_shape(cls, shape, receptors_per_degree=NOMINAL_RECEPTORS_PER_DEGREE):
        h, w = int(shape[0]), int(shape[1])
        return cls(h, w, receptors_per_degree)


@dataclass(frozen=True)
class FrequencyGrid:
    """Discrete frequency coordinates matching a spatial grid.

    ``f1`` varies along the image columns (horizontal frequency) and ``f2``
    along the rows, both in cycles/arcmin in numpy FFT bin order, so the DC
    bin sits at index [0, 0].
    """

    f1: np.ndarray
    f2: np.ndarray
    pitch: float

    @classmethod
    def for_shape(cls, shape, pitch: float) -> "FrequencyGrid":
        if pitch <= 0:
            raise DomainError("pixel pitch must be positive")
        h, w = int(shape[0]), int(shape[1])
        fx = np.fft.fftfreq(w, d=pitch)
        fy = np.fft.fftfreq(h, d=pitch)
        f1, f2 = np.meshgrid(fx, fy)
        return cls(f1=f1, f2=f2, pitch=pitch)

    @classmethod
    def for_geometry(cls, geometry: RetinalGeometry) -> "FrequencyGrid":
        return cls.for_shape(geometry.shape, geometry.pixel_pitch)

    @property
    def rho(self) -> np.ndarray:
        """Radial frequency, cycles/arcmin."""
        return np.hypot(self.f1, self.f2)

    @property
    def theta(self) -> np.ndarray:
        """Azimuth of each frequency bin, radians in (-pi, pi]."""
        return np.arctan2(self.f2, self.f1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.f1.shape

    @property
    def bin_area(self) -> float:
        """Area of one frequency bin, (cycles/arcmin)^2."""
        h, w = self.shape
        return 1.0 / (h * w * self.pitch ** 2)


@dataclass(frozen=True)
class ViewingDistance:
    """Nominal/actual viewing distance pair.

    gamma = delta0 / delta.  gamma is 1 exactly when the pixel density
    projected on the retina equals the nominal 60 per degree.
    """

    delta0: float
    delta: float

    def __post_init__(self):
        if not (self.delta0 > 0 and self.delta > 0):
            raise DomainError("viewing distances must be positive")

    @property
    def gamma(self) -> float:
        return self.delta0 / self.delta

    @classmethod
    def from_gamma(cls, gamma: float, delta0: float = 1.0) -> "ViewingDistance":
        if not (gamma > 0 and math.isfinite(gamma)):
            raise DomainError("gamma must be positive and finite")
        return cls(delta0=delta0, delta=delta0 / gamma)


def gamma_from_pixels_per_degree(ppd_at_screen: float) -> float:
    """Viewing-distance ratio from the observed angular pixel density.

    Returns 60 / ppd: the ratio of the nominal pixel density (60 per
    degree) to the density actually projected on the retina.
    """
    if not (ppd_at_screen > 0 and math.isfinite(ppd_at_screen)):
        raise DomainError("pixels per degree must be positive and finite")
    return NOMINAL_RECEPTORS_PER_DEGREE / ppd_at_screen


def blur_sigma_px_to_spread_arcmin(
    sigma_px: float,
    geometry: RetinalGeometry,
    conv: SpreadConvention = DEFAULT_CONVENTION,
) -> float:
    """Convert a pixel-domain Gaussian standard deviation to a spread.

    The blur databases quote Gaussian blur as a standard deviation in
    pixels; internally a spread in arcmin under ``conv`` is needed:
    ``s = k * sigma_px * pixel_pitch``.
    """
    if not (sigma_px >= 0):
        raise DomainError("sigma_px must be non-negative")
    return conv.sigma_to_spread * sigma_px * geometry.pixel_pitch


def spread_arcmin_to_blur_sigma_px(
    spread_arcmin: float,
    geometry: RetinalGeometry,
    conv: SpreadConvention = DEFAULT_CONVENTION,
) -> float:
    """Inverse of :func:`blur_sigma_px_to_spread_arcmin`."""
    if not (spread_arcmin >= 0):
        raise DomainError("spread must be non-negative")
    return spread_arcmin / (conv.sigma_to_spread * geometry.pixel_pitch)


def load_config(path) -> dict:
    """Read a key=value configuration file.

    Recognized keys: receptors_per_degree, c, k, gamma, s_g.  Lines
    starting with '#' and blank lines are ignored.  Values are parsed as
    floats.
    """
    out = {}
    known = {"receptors_per_degree", "c", "k", "gamma", "s_g"}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            if key not in known:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = float(value.strip())
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad number {value!r}") from None
    return out


def convention_from_config(cfg: dict) -> SpreadConvention:
    """Build a SpreadConvention from a parsed config dict."""
    if "c" in cfg and "k" in cfg:
        return SpreadConvention(cfg["c"], cfg["k"])
    if "c" in cfg:
        return SpreadConvention(cfg["c"])
    return DEFAULT_CONVENTION


def _require_same_shape(a: np.ndarray, b: np.ndarray, what="arrays"):
    if a.shape != b.shape:
        raise ShapeError(f"{what} have incompatible shapes {a.shape} vs {b.shape}")

"""Positional Fisher information of image details.

A detail is a windowed patch of the visual map.  Its total positional
information is the windowed gradient energy divided by the background
noise variance,

    psi(p) = lambda(p) / sigma_v^2,
    lambda(p) = sum_u w(u)^2 |y(p + u)|^2,

and 1/sqrt(psi) bounds the standard deviation of any unbiased position
estimate.  The same quantity evaluates spectrally as the detail spectrum
weighted by the squared filter response and the squared optical transfer
function, which is what makes blur equivalence and the expected-ratio law
for 1/rho^2-spectrum scenes computable without images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .blur import otf_eval
from .errors import DomainError, ShapeError
from .geometry import DEFAULT_CONVENTION, FrequencyGrid, SpreadConvention
from .vrf import LuminanceImage, VisualMap, nyquist_mask


@dataclass(frozen=True)
class DetailWindow:
    """Non-negative sampling window, origin at the array center."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.size == 0:
            raise DomainError("window is empty")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DomainError("window weights must be finite and non-negative")
        if not np.sum(w ** 2) > 0:
            raise DomainError("window must have positive energy")
        object.__setattr__(self, "weights", w)

    @classmethod
    def gaussian(cls, std_arcmin=8.0, pitch=1.0, trunc_sigmas=3.0) -> "DetailWindow":
        """Default detail window: isotropic Gaussian, truncated at 3 sigma.

        Smooth enough that the window's own positional information is
        negligible next to the pattern it captures.
        """
        if std_arcmin <= 0 or pitch <= 0:
            raise DomainError("window std and pitch must be positive")
        half = int(math.ceil(trunc_sigmas * std_arcmin / pitch))
        ax = np.arange(-half, half + 1) * pitch
        xx, yy = np.meshgrid(ax, ax)
        return cls(np.exp(-(xx ** 2 + yy ** 2) / (2.0 * std_arcmin ** 2)))

    @classmethod
    def impulse(cls) -> "DetailWindow":
        return cls(np.ones((1, 1)))

    @classmethod
    def flat(cls, shape) -> "DetailWindow":
        return cls(np.ones(shape))


@dataclass(frozen=True)
class PfiField:
    """Per-point smoothed gradient energy and derived information fields.

    ``lam`` is always present; ``psi`` and ``e_min`` are filled in by
    :func:`pfi_and_emin` once a noise variance is chosen.  Where the
    energy vanishes the localization bound is infinite and ``e_min``
    carries +inf.
    """

    lam: np.ndarray
    noise_variance: float | None = None
    psi: np.ndarray | None = None
    e_min: np.ndarray | None = None


def detail_energy_map(vmap: VisualMap, window: DetailWindow) -> PfiField:
    """Windowed gradient energy at every grid point.

    lambda(p) = sum_u w(u)^2 |y(p+u)|^2, evaluated for all p at once as a
    periodic cross-correlation of |y|^2 with w^2.
    """
    wshape = window.weights.shape
    gshape = vmap.values.shape
    if wshape[0] > gshape[0] or wshape[1] > gshape[1]:
        raise DomainError(
            f"window support {wshape} exceeds the map grid {gshape}")
    energy = np.abs(vmap.values) ** 2
    kernel = np.zeros(gshape)
    kernel[: wshape[0], : wshape[1]] = window.weights ** 2
    # place the window center at the origin of the periodic grid
    kernel = np.roll(kernel, (-(wshape[0] // 2), -(wshape[1] // 2)), axis=(0, 1))
    lam = np.fft.ifft2(np.fft.fft2(energy) * np.conj(np.fft.fft2(kernel))).real
    return PfiField(lam=np.maximum(lam, 0.0))


def pfi_and_emin(field: PfiField, sigma_v2: float) -> PfiField:
    """Attach the information field and the localization bound.

    psi = lambda / sigma_v^2 and e_min = psi^(-1/2); zero-energy points
    get e_min = +inf without overflow warnings.
    """
    if not (sigma_v2 > 0):
        raise DomainError("noise variance must be positive")
    psi = field.lam / sigma_v2
    with np.errstate(divide="ignore"):
        e_min = np.where(psi > 0, 1.0 / np.sqrt(np.where(psi > 0, psi, 1.0)), np.inf)
    return replace(field, noise_variance=sigma_v2, psi=psi, e_min=e_min)


def spectral_pfi(
    detail_spectrum: np.ndarray,
    neural_spread: float,
    otf,
    sigma_v2: float,
    conv: SpreadConvention = DEFAULT_CONVENTION,
    grid: FrequencyGrid | None = None,
) -> float:
    """Total positional information of a detail from its spectrum.

    ``detail_spectrum`` is the plain 2D FFT of the detail samples; ``grid``
    supplies the frequency coordinates (defaults to unit pixel pitch).
    The sum discretizes

        (1/sigma_v^2) integral (2 pi rho)^2 |G|^2 |D|^2 |B|^2 df1 df2

    with the continuum scaling of D and the Cartesian bin area, so with
    unit pitch it equals the spatial energy sum over the filtered detail
    (Parseval).  ``otf=None`` means no optical blur.
    """
    if not (neural_spread > 0):
        raise DomainError("neural spread must be positive")
    if not (sigma_v2 > 0):
        raise DomainError("noise variance must be positive")
    d = np.asarray(detail_spectrum)
    if grid is None:
        grid = FrequencyGrid.for_shape(d.shape, 1.0)
    if grid.shape != d.shape:
        raise ShapeError(f"spectrum {d.shape} does not match grid {grid.shape}")
    c = conv.exponent_constant
    rho2 = grid.f1 ** 2 + grid.f2 ** 2
    h2 = (2.0 * math.pi) ** 2 * rho2 * np.exp(-2.0 * c * neural_spread ** 2 * rho2)
    h2[~nyquist_mask(grid)] = 0.0  # same band convention as the filter itself
    total = h2 * np.abs(d) ** 2
    if otf is not None:
        total = total * np.abs(otf_eval(otf, grid.f1, grid.f2, conv)) ** 2
    # |D_continuum|^2 = pitch^4 |D_fft|^2 and bin area = 1/(N M pitch^2)
    n_rows, n_cols = d.shape
    return float(total.sum()) * grid.pitch ** 2 / (n_rows * n_cols * sigma_v2)


def expected_pfi_ratio(blur_spread: float, neural_spread: float) -> float:
    """Expected information ratio blurred/unblurred for 1/rho^2 scenes.

    s_G^2 / (s_G^2 + s_B^2); convention independent because both spreads
    are expressed under the same convention.
    """
    if not (neural_spread > 0):
        raise DomainError("neural spread must be positive")
    if not (blur_spread >= 0):
        raise DomainError("blur spread must be non-negative")
    g2 = neural_spread ** 2
    return g2 / (g2 + blur_spread ** 2)


@dataclass(frozen=True)
class NaturalSpectrumModel:
    """Scene ensemble model: detail energy spectrum f(theta) / rho^(2 beta).

    ``azimuthal_profile`` is a non-negative callable of theta; None means
    uniform (isotropic scenes).  ``total_azimuthal_weight`` is its integral
    over a full turn.
    """

    beta: float = 1.0
    azimuthal_profile: object = None

    def __post_init__(self):
        if not (self.beta > 0):
            raise DomainError("beta must be positive")

    @property
    def total_azimuthal_weight(self) -> float:
        if self.azimuthal_profile is None:
            return 2.0 * math.pi
        ang = np.linspace(0.0, 2.0 * math.pi, 2048, endpoint=False)
        vals = np.asarray(self.azimuthal_profile(ang), dtype=float)
        if np.any(vals < 0):
            raise DomainError("azimuthal profile must be non-negative")
        return float(vals.mean() * 2.0 * math.pi)

    def energy_spectrum(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        prof = 1.0 if self.azimuthal_profile is None else self.azimuthal_profile(theta)
        with np.errstate(divide="ignore"):
            radial = np.where(rho > 0, rho ** (-2.0 * self.beta), 0.0)
        return prof * radial


def synth_natural_image(beta: float, size: int, seed: int,
                        receptors_per_degree: float = 60.0,
                        band_limit_cpd: float | None = None) -> LuminanceImage:
    """Random scene with the power-law spectrum of natural images.

    White Gaussian noise is shaped in the frequency domain so the expected
    amplitude spectrum falls as rho^-beta (a Gaussian random field).  DC is
    zero and the output is standardized to unit variance.  Deterministic
    for a fixed seed.

    ``band_limit_cpd`` optionally zeroes all content above a radial
    frequency (cycles/degree).  Photographed scenes carry essentially no
    energy in the square grid's corner frequencies beyond the radial
    Nyquist band; limiting at 30 cpd emulates that.
    """
    if size < 16:
        raise DomainError("size must be at least 16")
    if not (beta > 0):
        raise DomainError("beta must be positive")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((size, size))
    grid = FrequencyGrid.for_shape((size, size), 60.0 / receptors_per_degree)
    rho = grid.rho
    amp = np.zeros_like(rho)
    nz = rho > 0
    amp[nz] = rho[nz] ** (-beta)
    if band_limit_cpd is not None:
        amp[rho > band_limit_cpd / 60.0] = 0.0
    shaped = np.fft.fft2(noise) * amp
    img = np.fft.ifft2(shaped).real
    img -= img.mean()
    std = img.std()
    if std > 0:
        img /= std
    from .geometry import RetinalGeometry  # local to avoid cycle at import
    return LuminanceImage(img, RetinalGeometry.for_shape(img.shape, receptors_per_degree))


def radial_amplitude_spectrum(samples: np.ndarray, pitch: float = 1.0):
    """Annular-mean amplitude spectrum with 1-bin-wide annuli.

    Returns (rho_centers, mean_amplitude) in cycles/arcmin, DC excluded.
    """
    arr = np.asarray(samples, dtype=float)
    spec = np.abs(np.fft.fft2(arr - arr.mean()))
    grid = FrequencyGrid.for_shape(arr.shape, pitch)
    n = max(arr.shape)
    idx = np.rint(grid.rho * n * pitch).astype(int)  # integer bin radius
    flat_idx = idx.ravel()
    flat_spec = spec.ravel()
    kmax = flat_idx.max()
    sums = np.bincount(flat_idx, weights=flat_spec, minlength=kmax + 1)
    counts = np.bincount(flat_idx, minlength=kmax + 1)
    valid = counts > 0
    valid[0] = False
    k = np.nonzero(valid)[0]
    return k / (n * pitch), sums[k] / counts[k]


def fit_radial_slope(samples: np.ndarray, pitch: float = 1.0,
                     rho_min_cpd: float = 4.0, rho_max_cpd: float | None = None) -> float:
    """Least-squares log-log slope of the radial amplitude spectrum.

    Fit range defaults to [4 cycles/degree, Nyquist/2] to avoid DC leakage
    and band-edge bias.  For a rho^-beta amplitude field the slope
    estimates -beta.
    """
    rho, amp = radial_amplitude_spectrum(samples, pitch)
    nyq_cpd = 30.0 / pitch
    if rho_max_cpd is None:
        rho_max_cpd = nyq_cpd / 2.0
    lo, hi = rho_min_cpd / 60.0, rho_max_cpd / 60.0
    mask = (rho >= lo) & (rho <= hi) & (amp > 0)
    if mask.sum() < 4:
        raise DomainError("not enough annuli in the fit range")
    x = np.log(rho[mask])
    y = np.log(amp[mask])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def pfi_field_to_csv(field: PfiField, path):
    """Write (p_x, p_y, lambda, psi, e_min) rows; unset fields emit nan."""
    h, w = field.lam.shape
    psi = field.psi if field.psi is not None else np.full_like(field.lam, np.nan)
    emin = field.e_min if field.e_min is not None else np.full_like(field.lam, np.nan)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("p_x,p_y,lambda,psi,e_min\n")
        for r in range(h):
            for col in range(w):
                fh.write(f"{col},{r},{field.lam[r, col]:.9g},"
                         f"{psi[r, col]:.9g},{emin[r, col]:.9g}\n")

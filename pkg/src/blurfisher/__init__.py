"""Blur discomfort prediction via loss of positional information.

The package models foveal vision as a complex gradient-plus-Gaussian
filter on an ideal retinal grid, quantifies how optical blur erodes the
positional information of image details, maps disc and astigmatic blur to
equivalent Gaussian spreads, and validates the resulting discomfort index
against subjective image-quality ratings.
"""

from .blur import (
    AstigmaticGaussian,
    DefocusParams,
    Disc,
    IsotropicGaussian,
    ProductOtf,
    bessel_j1,
    defocus_radius,
    defocus_spread,
    disc_equivalence_curve,
    equiv_spread_astig,
    equiv_spread_disc,
    equiv_spread_generic,
    otf_eval,
    unblurred_weighted_energy,
    weighted_otf_energy,
)
from .discomfort import (
    DiscomfortParams,
    delta_xi,
    diopter_chart,
    dipper_curve,
    dipper_minimum,
    defocus_discomfort,
    epsilon,
    sbdi,
    sbdi_values,
    sensitivity,
)
from .errors import (
    DomainError,
    EstimationError,
    FitError,
    ManifestError,
    QuadratureError,
    ShapeError,
)
from .estimator import BlurEstimate, estimate_blur_sigma
from .fisher import (
    DetailWindow,
    NaturalSpectrumModel,
    PfiField,
    detail_energy_map,
    expected_pfi_ratio,
    fit_radial_slope,
    pfi_and_emin,
    pfi_field_to_csv,
    radial_amplitude_spectrum,
    spectral_pfi,
    synth_natural_image,
)
from .geometry import (
    CONVENTIONS,
    DEFAULT_CONVENTION,
    FrequencyGrid,
    RetinalGeometry,
    SpreadConvention,
    ViewingDistance,
    blur_sigma_px_to_spread_arcmin,
    convention_by_name,
    gamma_from_pixels_per_degree,
    load_config,
    spread_arcmin_to_blur_sigma_px,
)
from .harness import (
    EvalOptions,
    EvaluationReport,
    FitResult,
    ManifestRow,
    RatingManifest,
    fit_sbdi_params,
    fit_scale_params,
    mos_to_dmos_tid,
    normalize_dmos_minmax,
    plcc,
    rmse,
    run_evaluation,
    thurstone_to_sbdi_scale,
    write_report,
)
from .vrf import (
    LuminanceImage,
    VisualMap,
    VrfKernel,
    invert_map,
    make_psf,
    make_vntf,
    render_false_color,
    steer,
    visual_map,
    vntf_peak_frequency,
)

__version__ = "0.1.0"

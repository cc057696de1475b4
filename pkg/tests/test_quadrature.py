import math

import numpy as np
import pytest
from scipy import special

from blurfisher.errors import QuadratureError
from blurfisher.quadrature import adaptive_panel_integral


def test_gaussian_vs_erf():
    val = adaptive_panel_integral(lambda x: np.exp(-x ** 2), 0.0, 6.0, rel_tol=1e-12)
    assert val == pytest.approx(math.sqrt(math.pi) / 2 * special.erf(6.0), rel=1e-11)


def test_rho_gaussian_closed_form():
    # integral rho exp(-b rho^2) drho = (1 - exp(-b a^2)) / (2 b)
    b = 39.27
    a = 1.2
    val = adaptive_panel_integral(lambda r: r * np.exp(-b * r ** 2), 0.0, a, rel_tol=1e-12)
    assert val == pytest.approx((1 - math.exp(-b * a * a)) / (2 * b), rel=1e-11)


def test_oscillatory_bessel_weighted():
    # disc-blur style integrand with a fine oscillation scale; reference
    # from scipy's adaptive quadrature at tight tolerance
    R = 8.0

    def f(rho):
        x = 2 * np.pi * np.asarray(rho) * R
        core = np.where(x > 1e-12, 2 * special.j1(x) / np.where(x > 0, x, 1.0), 1.0)
        return core ** 2 * np.exp(-2 * rho ** 2) * rho

    from scipy.integrate import quad
    ref, err = quad(lambda r: float(f(np.array([r]))[0]), 0.0, 4.0,
                    limit=2000, epsabs=1e-14, epsrel=1e-13)
    val = adaptive_panel_integral(f, 0.0, 4.0, rel_tol=1e-10,
                                  max_panel_width=1.0 / (8 * R))
    assert val == pytest.approx(ref, rel=1e-9)


def test_empty_interval():
    assert adaptive_panel_integral(lambda x: x, 1.0, 1.0) == 0.0


def test_nonconvergence_reports_diagnostics():
    rng = np.random.default_rng(0)

    def noisy(x):
        # non-smooth integrand defeats the error estimate
        return 1.0 + rng.standard_normal(np.shape(x)) if np.ndim(x) else 1.0

    with pytest.raises(QuadratureError) as excinfo:
        adaptive_panel_integral(noisy, 0.0, 1.0, rel_tol=1e-12, max_depth=3)
    assert excinfo.value.interval is not None
    assert excinfo.value.error_estimate > 0

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from blowup_lab.errors import ConfigError, NumericalError
from blowup_lab.model import (ModelParams, PressureLaw, alpha_constant, composite_simpson,
                              gamma_half_integer, green_function, potential_gradient,
                              unit_ball_volume)


@pytest.mark.parametrize("half", range(1, 25))
def test_gamma_half_integer_matches_library_gamma(half):
    x = half / 2
    assert gamma_half_integer(x) == pytest.approx(math.gamma(x), rel=1e-14)


def test_gamma_rejects_non_half_integers():
    with pytest.raises(ConfigError):
        gamma_half_integer(1.3)
    with pytest.raises(ConfigError):
        gamma_half_integer(0.0)


def test_alpha_constant_low_dimensions():
    assert alpha_constant(1) == 2.0
    assert alpha_constant(2) == pytest.approx(6.283185307, abs=1e-9)


def test_alpha_constant_dim4_against_scipy_gamma():
    oracle = 4 * 2 * math.pi**2 / special.gamma(3.0)
    assert alpha_constant(4) == pytest.approx(oracle, rel=1e-15)
    assert alpha_constant(4) == pytest.approx(39.47841760, abs=1e-8)
    assert alpha_constant(4) == pytest.approx(4 * math.pi**2, rel=1e-15)


def test_alpha3_is_4pi():
    assert alpha_constant(3) == pytest.approx(4 * math.pi, rel=1e-15)


@pytest.mark.parametrize("dim", range(3, 11))
def test_alpha_is_n_n_minus_2_times_volume(dim):
    assert alpha_constant(dim) == pytest.approx(dim * (dim - 2) * unit_ball_volume(dim), rel=1e-14)


@pytest.mark.parametrize("dim,expected", [(1, 2.0), (2, math.pi), (3, 4 * math.pi / 3)])
def test_unit_ball_volume(dim, expected):
    assert unit_ball_volume(dim) == pytest.approx(expected, rel=1e-15)


def test_unit_ball_volume_dim3_monte_carlo():
    rng = np.random.default_rng(12345)
    pts = rng.uniform(-1, 1, size=(400_000, 3))
    estimate = 8.0 * np.mean(np.sum(pts**2, axis=1) <= 1.0)
    # binomial standard error ~ 8 * sqrt(p (1 - p) / n) ~ 6e-3
    assert abs(estimate - unit_ball_volume(3)) < 0.025
    assert unit_ball_volume(3) == pytest.approx(4.188790205, abs=1e-9)


@pytest.mark.parametrize("fn", [alpha_constant, unit_ball_volume])
def test_dimension_zero_rejected(fn):
    with pytest.raises(ConfigError):
        fn(0)


def test_green_function_examples():
    assert green_function(1, 3.0) == 3.0
    assert green_function(2, 1.0) == 0.0
    assert green_function(4, 2.0) == -0.25


@pytest.mark.parametrize("radius", [0.0, -1.0])
def test_green_function_rejects_singular_point(radius):
    with pytest.raises(ConfigError):
        green_function(3, radius)


@given(dim=st.integers(1, 8), r=st.floats(1e-3, 1e3), factor=st.floats(1.001, 10.0))
def test_green_function_strictly_increasing(dim, r, factor):
    assert green_function(dim, r * factor) > green_function(dim, r)


def zero_density(t, s):
    return np.zeros_like(s)


def unit_density(t, s):
    return np.ones_like(s)


def test_potential_gradient_zero_density():
    assert potential_gradient(zero_density, 4, 0.0, 1.0) == 0.0


def test_potential_gradient_uniform_dim4():
    # int_0^1 s^3 ds = 1/4 exactly; Simpson is exact on cubics
    value = potential_gradient(unit_density, 4, 0.0, 1.0, 64)
    assert value == pytest.approx(alpha_constant(4) / 4, rel=1e-14)
    assert value == pytest.approx(9.869604401, abs=1e-9)


def test_potential_gradient_uniform_dim3_gauss_law():
    # uniform ball of density 1: enclosed "mass" 4 pi r^3 / 3, field 4 pi r / 3
    value = potential_gradient(unit_density, 3, 0.0, 2.0, 64)
    gauss = 4 * math.pi * 2.0 / 3
    assert value == pytest.approx(gauss, rel=1e-14)
    assert value == pytest.approx(8.377580410, abs=1e-9)


@pytest.mark.parametrize("dim,rel", [(1, 1e-13), (2, 1e-13), (3, 1e-13), (4, 1e-13),
                                     (6, 1e-11)])
def test_potential_gradient_constant_density_limit(dim, rel):
    # Simpson is exact up to cubics; s^5 (dim 6) leaves an O(h^4) remainder
    rho0, r = 2.5, 1.7
    value = potential_gradient(lambda t, s: rho0 * np.ones_like(s), dim, 0.0, r, 1024)
    assert value == pytest.approx(alpha_constant(dim) * rho0 * r / dim, rel=rel)


def test_simpson_order_on_smooth_integrand():
    exact = 1.0 - math.cos(2.0)   # int_0^2 sin
    errors = [abs(composite_simpson(np.sin, 0.0, 2.0, n) - exact) for n in (8, 16, 32, 64)]
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert min(orders) >= 3.9


def test_potential_gradient_order_with_nonpolynomial_density():
    # rho = exp(-s), dim 4: int_0^r s^3 e^-s ds = 6 - e^-r (r^3 + 3r^2 + 6r + 6)
    r = 3.0
    exact = alpha_constant(4) * (6 - math.exp(-r) * (r**3 + 3 * r**2 + 6 * r + 6)) / r**3
    errs = [abs(potential_gradient(lambda t, s: np.exp(-s), 4, 0.0, r, n) - exact)
            for n in (16, 32, 64, 128)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 3.9


def test_potential_gradient_nonnegative_for_nonnegative_density():
    rng = np.random.default_rng(7)
    for _ in range(20):
        c = rng.uniform(0.1, 3.0)
        value = potential_gradient(lambda t, s: np.exp(-c * s**2), 4, 0.0, rng.uniform(0.1, 4), 64)
        assert value >= 0


def test_potential_gradient_errors():
    with pytest.raises(ConfigError):
        potential_gradient(unit_density, 3, 0.0, 0.0)
    with pytest.raises(ConfigError):
        potential_gradient(unit_density, 3, 0.0, 1.0, 7)
    with pytest.raises(NumericalError):
        potential_gradient(lambda t, s: np.full_like(s, np.nan), 3, 0.0, 1.0, 8)


@pytest.mark.parametrize("field,value", [("big_t", 0.0), ("kappa", -1.0), ("alpha0", 0.0),
                                         ("big_c", 0.0), ("theta", -0.5), ("dim", 0)])
def test_model_params_invariants(field, value):
    with pytest.raises(ConfigError):
        ModelParams(**{field: value})


def test_model_params_blowup_time():
    assert ModelParams(big_c=2.0, big_t=3.0).blowup_time == 1.5
    assert ModelParams(big_c=-1.0).blowup_time is None


def test_pressure_law():
    assert PressureLaw().pressureless
    law = PressureLaw(2.0, 1.5)
    rho = np.linspace(0, 3, 20)
    assert np.all(np.diff(law.pressure(rho)) >= 0)
    with pytest.raises(ConfigError):
        PressureLaw(-1.0, 2.0)
    with pytest.raises(ConfigError):
        PressureLaw(1.0, 0.5)

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy import special as sp

from heisenlab.experiments import random_field
from heisenlab.heisenberg import GeometryConfig, convolve_sigma_direct
from heisenlab.special import ParameterError, SpectralPoint, spherical_fn, spherical_fn_derivative
from heisenlab.spectral import (
    DomainError,
    OperatorPath,
    SpectralField,
    SynthesisError,
    analytic_family,
    dyadic_block,
    dyadic_projection,
    fractional_integral,
    g_function,
    normalized_fractional,
    poisson,
    spectral_derivative_integral,
    spherical_mean,
    spherical_mean_path,
    subordinated_analytic_family,
    subordination_constant,
    szego_threshold,
    uniform_average,
    uniform_average_multiplier,
)

L = SpectralPoint.laguerre
LAMBDAS = (-2.0, -1.0, 1.0, 2.0)


def laguerre_points(k_max=4, lambdas=LAMBDAS):
    return [L(lam, k) for lam in lambdas for k in range(k_max + 1)]


def coeff_distance(f: SpectralField, g: SpectralField) -> float:
    """Relative Plancherel distance between two fields."""
    return (f - g).l2_norm() / max(f.l2_norm(), 1e-300)


@pytest.fixture
def laguerre_field(rng, geometry):
    return random_field(rng, geometry, laguerre_points(), 2)


@pytest.fixture
def mixed_field(rng, geometry):
    pts = laguerre_points(3) + [SpectralPoint.bessel(u) for u in geometry.bessel_grid.nodes[:6]]
    pts.append(SpectralPoint.trivial())
    return random_field(rng, geometry, pts, 2)


# ---------------------------------------------------------------------------
# SpectralField


def test_plancherel_matches_physical_norm(laguerre_field):
    # the midpoint radial rule is fourth order; step 0.05 puts it well below 1e-6
    f = SpectralField(laguerre_field.geometry.refined(4), laguerre_field.coefficients)
    assert f.to_physical().l2_norm() == pytest.approx(f.l2_norm(), rel=1e-6)


def test_random_field_is_hermitian(laguerre_field, mixed_field):
    assert laguerre_field.is_hermitian()
    assert mixed_field.is_hermitian()
    assert laguerre_field.to_physical().hermitian


def test_non_hermitian_detected(geometry):
    f = SpectralField(geometry, {L(1.0, 0): np.eye(2)})
    assert not f.is_hermitian()


def test_non_integer_lambda_has_no_synthesis(geometry):
    f = SpectralField(geometry, {L(0.37, 1): np.eye(1)})
    assert f.l2_norm() > 0
    with pytest.raises(SynthesisError):
        f.to_physical()


def test_unresolved_frequency_rejected(geometry):
    f = SpectralField(geometry, {L(40.0, 0): np.eye(1)})
    with pytest.raises(SynthesisError):
        f.to_physical()


def test_coefficient_shape_checks(geometry):
    with pytest.raises(ParameterError):
        SpectralField(geometry, {L(1.0, 0): np.ones((2, 3))})
    with pytest.raises(ParameterError):
        SpectralField(geometry, {L(1.0, 0): np.eye(2), L(2.0, 0): np.eye(3)})


def test_physical_round_trip_converges(laguerre_field):
    # analysis interpolates the grid samples, so the error follows the radial step
    errors = []
    for factor in (1, 2, 4):
        g = laguerre_field.geometry.refined(factor) if factor > 1 else laguerre_field.geometry
        f = SpectralField(g, laguerre_field.coefficients)
        errors.append(coeff_distance(f, SpectralField.from_physical(f.to_physical())))
    assert errors[0] < 1e-3
    assert errors[2] < 1e-6
    assert errors[0] / errors[1] > 8 and errors[1] / errors[2] > 8


def test_arithmetic(laguerre_field):
    zero = laguerre_field - laguerre_field
    assert zero.l2_norm() == 0.0
    assert laguerre_field.scaled(2.0).l2_norm() == pytest.approx(2 * laguerre_field.l2_norm())


# ---------------------------------------------------------------------------
# spherical means


def test_spherical_mean_at_zero_is_identity(mixed_field):
    assert coeff_distance(mixed_field, spherical_mean(mixed_field, 0.0)) < 1e-15


def test_trivial_mass_is_invariant(geometry):
    f = SpectralField(geometry, {SpectralPoint.trivial(): np.array([[1.0, 2j], [-2j, 3.0]])})
    for r in (0.1, 1.0, 10.0, 100.0):
        assert coeff_distance(f, spherical_mean(f, r)) == 0.0


@pytest.mark.parametrize("r", [0.01, 0.5, 2.0, 7.0, 30.0])
def test_spherical_mean_contracts(mixed_field, r):
    assert spherical_mean(mixed_field, r).l2_norm() <= mixed_field.l2_norm() * (1 + 1e-12)


def test_negative_radius_rejected(mixed_field):
    with pytest.raises(ParameterError):
        spherical_mean(mixed_field, -1.0)


def test_spherical_mean_matches_direct_convolution(laguerre_field):
    r = 1.5
    direct = convolve_sigma_direct(laguerre_field.to_physical(), r)
    spectral = spherical_mean(laguerre_field, r).to_physical()
    w = laguerre_field.geometry.grid_weights[:, :, None, None]
    err = math.sqrt(np.sum(w * np.abs(direct.values - spectral.values) ** 2))
    assert err / spectral.l2_norm() <= 5e-3


# ---------------------------------------------------------------------------
# uniform averages


def test_uniform_average_trivial_character():
    assert uniform_average_multiplier(SpectralPoint.trivial(), 3.0, 2) == 1.0


@pytest.mark.parametrize("zeta", [L(1.0, 0), L(-1.0, 1), SpectralPoint.bessel(1.0)])
def test_uniform_average_small_radius(zeta):
    assert abs(uniform_average_multiplier(zeta, 1e-3, 2) - 1.0) <= 1e-6


@pytest.mark.parametrize("zeta", [L(3.0, 5), L(8.0, 8), SpectralPoint.bessel(4.0)])
def test_uniform_average_gap_is_quadratic(zeta):
    # 1 - phi(s) ~ c s^2 with c growing with |lam| k or u^2, so only the rate is uniform
    gaps = [1.0 - uniform_average_multiplier(zeta, r, 2) for r in (1e-2, 1e-3)]
    assert gaps[0] / gaps[1] == pytest.approx(100.0, rel=1e-3)


@pytest.mark.parametrize("r", [0.2, 1.0, 3.0, 12.0])
def test_uniform_average_gaussian_ground_state(r):
    exact = math.sqrt(math.pi) / r * math.erf(r / 2)
    assert uniform_average_multiplier(L(1.0, 0), r, 2) == pytest.approx(exact, abs=1e-10)


@pytest.mark.parametrize("zeta", [L(1.0, 0), L(-2.0, 3), L(0.5, 7), SpectralPoint.bessel(0.8), SpectralPoint.bessel(3.0)])
@pytest.mark.parametrize("r", [0.3, 2.0, 9.0])
def test_comparison_identity(zeta, r):
    # sigma_r - mu_r = (1/r) int_0^r s d/ds sigma_s ds, one multiplier at a time
    n = 2
    lhs = float(np.real(spherical_fn(zeta, r, n))) - uniform_average_multiplier(zeta, r, n)
    rhs, _ = integrate.quad(
        lambda s: s * float(np.real(spherical_fn_derivative(zeta, s, n, 1))), 0.0, r, epsabs=1e-13, epsrel=1e-13, limit=400
    )
    assert abs(lhs - rhs / r) <= 1e-8


def test_uniform_average_contracts(mixed_field):
    for r in (0.5, 4.0):
        assert uniform_average(mixed_field, r).l2_norm() <= mixed_field.l2_norm() * (1 + 1e-12)


# ---------------------------------------------------------------------------
# Poisson integrals and the analytic family


def test_poisson_identity_and_semigroup(mixed_field):
    assert coeff_distance(mixed_field, poisson(mixed_field, 0.0)) == 0.0
    lhs = poisson(poisson(mixed_field, 0.7), 1.9)
    assert coeff_distance(lhs, poisson(mixed_field, 2.6)) <= 1e-13


def test_poisson_leaves_lambda_zero_mass(geometry):
    f = SpectralField(geometry, {SpectralPoint.bessel(1.0): np.eye(1), SpectralPoint.trivial(): np.eye(1)})
    assert coeff_distance(f, poisson(f, 5.0)) == 0.0


@pytest.mark.parametrize("b", [0.0, 1.0, -0.5 + 0.75j])
def test_poisson_commutes_with_analytic_family(laguerre_field, b):
    lhs = poisson(analytic_family(laguerre_field, b, 1.3), 0.8)
    rhs = analytic_family(poisson(laguerre_field, 0.8), b, 1.3)
    assert coeff_distance(lhs, rhs) <= 1e-12


@pytest.mark.parametrize("r", [0.0, 0.4, 2.5])
def test_analytic_family_at_zero_is_spherical_mean(laguerre_field, r):
    assert coeff_distance(analytic_family(laguerre_field, 0.0, r), spherical_mean(laguerre_field, r)) <= 1e-12


@given(a=st.floats(-0.9, 4.0), r=st.floats(0.0, 6.0))
@settings(max_examples=40, deadline=None)
def test_ground_state_multiplier_ignores_order(a, r):
    f = SpectralField(GeometryConfig.uniform(), {L(2.0, 0): np.eye(1)})
    c = analytic_family(f, a, r).coefficients[L(2.0, 0)][0, 0]
    assert c == pytest.approx(math.exp(-2.0 * r * r / 4), rel=1e-12, abs=1e-300)


def test_analytic_family_domain(geometry, mixed_field):
    with pytest.raises(DomainError):
        analytic_family(mixed_field, 0.5, 1.0)
    trivial = SpectralField(geometry, {SpectralPoint.trivial(): np.eye(1)})
    with pytest.raises(DomainError):
        analytic_family(trivial, 0.5, 1.0)


def test_analytic_family_szego_threshold(laguerre_field):
    t = szego_threshold(2)
    assert t == pytest.approx(-4 / 3)
    with pytest.raises(ParameterError):
        analytic_family(laguerre_field, t, 1.0)
    with pytest.raises(ParameterError):
        analytic_family(laguerre_field, t - 0.5 + 1j, 1.0)
    analytic_family(laguerre_field, t + 1e-3, 1.0)


@pytest.mark.parametrize("r", [0.5, 1.5, 3.0])
def test_subordination_operator_identity(laguerre_field, r):
    lhs = analytic_family(laguerre_field, 1.0, r)
    rhs = subordinated_analytic_family(laguerre_field, 1.0, 0.0, r)
    assert coeff_distance(lhs, rhs) <= 1e-4


def test_subordination_complex_orders(laguerre_field):
    # a - b real keeps the (1-v) endpoint free of oscillation
    a, b = 1.5 + 0.5j, 0.25 + 0.5j
    lhs = analytic_family(laguerre_field, a, 1.1)
    rhs = subordinated_analytic_family(laguerre_field, a, b, 1.1, nodes=96)
    assert coeff_distance(lhs, rhs) <= 1e-6


@pytest.mark.parametrize("n,a,b", [(2, 1.0, 0.0), (3, 2.5, 0.5), (2, 0.75, -0.5)])
def test_subordination_constant_normalises_ground_state(n, a, b):
    # at k = 0 both sides carry exp(-rho^2/4), leaving C/2 * B(n+b, a-b) = 1
    beta, _ = integrate.quad(lambda s: s ** (2 * n + 2 * b - 1) * (1 - s * s) ** (a - b - 1), 0, 1)
    assert subordination_constant(n, a, b) * beta == pytest.approx(1.0, rel=1e-9)
    printed = subordination_constant(n, a, b) / 2
    assert printed * beta == pytest.approx(0.5, rel=1e-9)


def test_subordination_needs_ordered_orders(laguerre_field):
    with pytest.raises(ParameterError):
        subordinated_analytic_family(laguerre_field, 0.0, 1.0, 1.0)


def test_subordination_rejects_bessel(mixed_field):
    with pytest.raises(DomainError):
        subordinated_analytic_family(mixed_field, 1.0, 0.0, 1.0)


# ---------------------------------------------------------------------------
# fractional calculus


def smooth_path(rng, d=2):
    xs = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(3)]

    def func(r):
        r = np.asarray(r, dtype=float)[..., None, None]
        return xs[0] + np.sin(r) * xs[1] + r * np.exp(-0.3 * r) * xs[2]

    def derivative(r, m):
        r = np.asarray(r, dtype=float)[..., None, None]
        sin_d = np.sin(r + 0.5 * m * np.pi)
        # d^m (r e^{-cr}) = (-c)^m r e^{-cr} + m (-c)^{m-1} e^{-cr}
        c = -0.3
        gauss_d = (c**m * r + m * c ** (m - 1)) * np.exp(c * r)
        return sin_d * xs[1] + gauss_d * xs[2]

    return OperatorPath.from_function(func), OperatorPath.from_function(func, derivative=derivative)


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


@pytest.mark.parametrize("a", [0.3, 1.0, 2.5, 0.7 + 0.4j])
def test_fractional_integral_of_constant(a):
    X = np.array([[1.0, 2.0], [0.5j, -1.0]])
    path = OperatorPath.from_function(lambda r: np.broadcast_to(X, np.shape(r) + X.shape))
    for r in (0.1, 1.0, 8.0):
        expected = r**a * X / sp.gamma(a + 1)
        assert rel(fractional_integral(path, a, r), expected) <= 1e-12
        assert rel(normalized_fractional(path, a, r), X / sp.gamma(a + 1)) <= 1e-12


@pytest.mark.parametrize("m", [0.0, 1.0, 2.5, 4.0])
@pytest.mark.parametrize("a", [0.5, 1.7, 0.7 - 0.3j])
def test_fractional_integral_of_power(m, a):
    X = np.array([[2.0, 1j], [-1j, 0.5]])
    path = OperatorPath.from_function(lambda r: np.asarray(r)[..., None, None] ** m * X)
    r = 3.0
    expected = sp.gamma(m + 1) / sp.gamma(m + a + 1) * r ** (m + a) * X
    assert rel(fractional_integral(path, a, r), expected) <= 1e-8


def test_first_order_integral_is_plain_integral(rng):
    path, _ = smooth_path(rng)
    r = 2.2
    expected = np.array(
        [[integrate.quad(lambda s: path(s)[i, j].real, 0, r)[0] + 1j * integrate.quad(lambda s: path(s)[i, j].imag, 0, r)[0]
          for j in range(2)] for i in range(2)]
    )
    assert rel(fractional_integral(path, 1.0, r), expected) <= 1e-10


def test_semigroup(rng):
    path, _ = smooth_path(rng)
    a, b = 0.7, 1.3

    def inner(r):
        r = np.asarray(r, dtype=float)
        vals = np.array([fractional_integral(path, b, s) for s in r.ravel()])
        return vals.reshape(r.shape + path.value_shape)

    composed = OperatorPath.from_function(inner, r_grid=np.geomspace(1e-2, 5.0, 8))
    for r in (0.5, 2.0, 4.5):
        assert rel(fractional_integral(composed, a, r), fractional_integral(path, a + b, r)) <= 1e-6


@pytest.mark.parametrize("k", [1, 2])
def test_negative_integer_order_is_scaled_derivative(rng, k):
    numeric, exact = smooth_path(rng)
    for r in (0.3, 1.0, 4.0):
        expected = r**k * exact.diff(r, k)
        assert rel(normalized_fractional(numeric, -k, r), expected) <= 1e-4


def test_negative_order_on_spherical_mean_path(laguerre_field):
    _, path = spherical_mean_path(laguerre_field)
    numeric = OperatorPath.from_function(path.func)
    for r in (0.5, 2.0):
        assert rel(normalized_fractional(numeric, -1, r), normalized_fractional(path, -1, r)) <= 1e-4


def test_zero_order_is_identity(rng):
    path, _ = smooth_path(rng)
    assert np.array_equal(normalized_fractional(path, 0, 1.7), path(1.7))


def test_normalized_integral_tends_to_identity(rng):
    path, _ = smooth_path(rng)
    r = 1.3
    residuals = [rel(normalized_fractional(path, a, r), path(r)) for a in (0.5, 0.25, 0.1)]
    assert residuals[0] > residuals[1] > residuals[2]


def test_fractional_integral_rejects_bad_order(rng):
    path, _ = smooth_path(rng)
    with pytest.raises(ParameterError):
        fractional_integral(path, 0.0, 1.0)
    with pytest.raises(ParameterError):
        fractional_integral(path, -0.5 + 1j, 1.0)
    with pytest.raises(ParameterError):
        fractional_integral(path, 0.5, 0.0)


def test_operator_path_validation():
    with pytest.raises(ParameterError):
        OperatorPath(np.array([1.0, 0.5]), np.zeros(2))
    with pytest.raises(ParameterError):
        OperatorPath(np.array([0.5, 1.0]), np.array([0.0, np.nan]))
    with pytest.raises(ParameterError):
        OperatorPath(np.array([0.5, 1.0]), np.zeros(3))


def test_sampled_path_interpolates():
    grid = np.linspace(0.1, 3.0, 60)
    path = OperatorPath(grid, np.sin(grid))
    assert float(path(1.234)) == pytest.approx(math.sin(1.234), abs=1e-5)
    assert float(path.diff(1.234)) == pytest.approx(math.cos(1.234), abs=1e-3)


# ---------------------------------------------------------------------------
# g-functions


def scalar_g_integral(zeta, n):
    val, _ = integrate.quad(
        lambda r: r * abs(spherical_fn_derivative(zeta, r, n, 1)) ** 2, 0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=400
    )
    return val


@pytest.mark.parametrize("zeta", [L(1.0, 0), L(2.0, 3), L(-1.0, 8)])
def test_g_function_single_mode(geometry, zeta):
    c = np.array([[1.0, 0.5j], [-0.5j, 2.0]])
    f = SpectralField(geometry, {zeta: c})
    res = g_function(f, 1)
    expected = f.weights[zeta] * np.sum(np.abs(c) ** 2) * scalar_g_integral(zeta, 2)
    assert res.norm**2 == pytest.approx(expected, rel=1e-8)
    ratio = res.norm / f.l2_norm()
    assert ratio == pytest.approx(math.sqrt(spectral_derivative_integral(zeta, 2, 1)), abs=1e-6)
    assert np.allclose(res.gram, res.gram.conj().T)
    assert np.all(np.linalg.eigvalsh(res.gram) >= -1e-12)


def test_bessel_g_integral_is_scale_free():
    # the m = 1 value comes from a closed form; check it against panels plus the r^{-2} tail
    n = 2
    zeta = SpectralPoint.bessel(1.0)
    R = 300.0
    edges = np.arange(0.0, R + 1.0, 1.0)
    body = sum(
        integrate.quad(lambda r: r * abs(spherical_fn_derivative(zeta, r, n, 1)) ** 2, a, b, epsabs=1e-14)[0]
        for a, b in zip(edges[:-1], edges[1:])
    )
    tail = 0.5 * 4.0 * 2.0 / math.pi / R
    assert spectral_derivative_integral(zeta, n, 1) == pytest.approx(body + tail, rel=1e-4)
    assert spectral_derivative_integral(SpectralPoint.bessel(7.0), n) == spectral_derivative_integral(zeta, n)


def test_g_function_bound_over_random_fields(rng, geometry):
    pts = laguerre_points(8) + [SpectralPoint.bessel(u) for u in geometry.bessel_grid.nodes[:8]]
    sup = max(spectral_derivative_integral(z, 2, 1) for z in pts)
    for _ in range(200):
        chosen = [p for p in pts if rng.random() < 0.3] or pts[:1]
        f = random_field(rng, geometry, chosen, 2)
        assert g_function(f, 1).norm <= math.sqrt(sup) * f.l2_norm() + 1e-6


def test_g_function_vanishes_on_trivial_mass(geometry):
    f = SpectralField(geometry, {SpectralPoint.trivial(): np.eye(2)})
    assert g_function(f, 1).norm == 0.0


def test_g_function_order_range(laguerre_field):
    with pytest.raises(ParameterError):
        g_function(laguerre_field, 0)
    with pytest.raises(ParameterError):
        g_function(laguerre_field, 2)


# ---------------------------------------------------------------------------
# dyadic decomposition


def test_dyadic_membership():
    assert dyadic_block(L(1.0, 1)) == 0
    assert dyadic_block(L(3.0, 1)) == 1
    assert dyadic_block(L(-3.0, 1)) == 1
    assert dyadic_block(L(2.0, 4)) == 3
    assert dyadic_block(L(5.0, 0)) == -1
    assert dyadic_block(SpectralPoint.bessel(1.0)) is None
    assert dyadic_block(SpectralPoint.trivial()) is None


def test_dyadic_partition_reconstructs(rng, geometry):
    f = random_field(rng, geometry, laguerre_points(8, (-4.0, -1.0, 1.0, 3.0, 4.0)), 2)
    top = max(dyadic_block(z) for z in f.points)
    total = f.zero()
    for j in range(-1, top + 1):
        total = total + dyadic_projection(f, j)
    assert (total - f).l2_norm() == 0.0


def test_dyadic_drops_lambda_zero_mass(mixed_field):
    laguerre_norm = mixed_field.restrict(lambda z: z.is_laguerre).l2_norm()
    parts = [dyadic_projection(mixed_field, j).l2_norm() ** 2 for j in range(-1, 6)]
    assert math.sqrt(sum(parts)) == pytest.approx(laguerre_norm, rel=1e-12)
    with pytest.raises(ParameterError):
        dyadic_projection(mixed_field, -2)


@given(lam=st.floats(0.05, 20.0), k=st.integers(0, 30), r=st.floats(0.0, 10.0))
@settings(max_examples=60, deadline=None)
def test_multiplier_depends_on_lambda_magnitude_only(lam, k, r):
    assert spherical_fn(L(lam, k), r, 2) == spherical_fn(L(-lam, k), r, 2)

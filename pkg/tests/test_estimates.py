from __future__ import annotations

import json
import math

import numpy as np
import pytest
from scipy import integrate
from scipy import special as sp

from heisenlab.estimates import (
    CHECKS,
    DECAY_ETA_GRID,
    DECAY_K_GRID,
    CheckReport,
    DecayFit,
    admissible_tail_rate,
    asymptotic_constants,
    check_asymptotics,
    check_pointwise_control,
    check_pointwise_spherical,
    check_psi_subordination,
    check_spectral_integral,
    compute_A,
    compute_B,
    contraction_scan,
    derivative_integral_numeric,
    fit_decay,
    pointwise_control_slack,
    psi_subordination_rhs,
    random_matrix_path,
    run_check,
    sample_spectrum,
    szego_scan,
)
from heisenlab.special import ParameterError, SpectralPoint, psi, script_l
from heisenlab.spectral import spectral_derivative_integral


# ---------------------------------------------------------------------------
# A and B against a Romberg oracle built on scipy's Laguerre polynomials


def _psi_and_derivative(k, b, rho):
    """``psi^b_k`` and its radial derivative from generalised Laguerre polynomials."""
    x = 0.5 * rho * rho
    norm = sp.binom(k + b, k)
    g = np.exp(-0.25 * rho * rho)
    L = sp.eval_genlaguerre(k, b, x)
    dL = -sp.eval_genlaguerre(k - 1, b + 1, x) if k > 0 else 0.0
    return L * g / norm, (rho * dL - 0.5 * rho * L) * g / norm


def romberg_AB(b, k, eta, levels=16):
    s = math.sqrt(eta)
    end = (math.sqrt(2.0 * (4 * k + 2 * b + 2)) + 16.0) / s
    r = np.linspace(1.0, max(end, 2.0), 2**levels + 1)
    f, df = _psi_and_derivative(k, b, s * r)
    dx = r[1] - r[0]
    return math.sqrt(integrate.romb(f * f, dx)), math.sqrt(eta * integrate.romb(df * df, dx))


AB_CASES = [(0.5, 0, 1.0), (0.5, 3, 2.0), (1.0, 10, 4.0), (0.25, 16, 1.5), (1.5, 8, 0.3), (0.0, 5, 8.0),
            (2.0, 24, 1.0), (0.75, 40, 0.5), (1.0, 1, 30.0), (0.4, 64, 0.2)]


@pytest.mark.parametrize("b,k,eta", AB_CASES)
def test_A_B_match_romberg_oracle(b, k, eta):
    A_ref, B_ref = romberg_AB(b, k, eta)
    assert compute_A(b, k, eta) == pytest.approx(A_ref, rel=1e-8)
    assert compute_B(b, k, eta) == pytest.approx(B_ref, rel=1e-8)


@pytest.mark.parametrize("eta", [0.1, 1.0, 4.0, 20.0])
def test_A_ground_state_closed_form(eta):
    exact = math.sqrt(math.pi / (2 * eta)) * math.erfc(math.sqrt(eta / 2))
    assert compute_A(0.5, 0, eta) ** 2 == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("b", [0.5 + 1j, 0.5 - 3j, 2.0 + 0.25j])
def test_A_ground_state_ignores_imaginary_order(b):
    assert compute_A(b, 0, 2.0) == pytest.approx(compute_A(b.real, 0, 2.0), rel=1e-12)


def test_A_decreases_in_eta():
    assert compute_A(0.5, 10, 4) > compute_A(0.5, 10, 8)


def test_A_B_reject_bad_input():
    with pytest.raises(ParameterError):
        compute_A(0.5, 3, 0.0)
    with pytest.raises(ParameterError):
        compute_B(-1.5, 3, 1.0)


# ---------------------------------------------------------------------------
# decay fits


def test_decay_fit_report_layout():
    # a sparse grid leans on large eta k, so the exponent itself is checked on the full grid
    ks, etas = (4, 8, 16, 32), (1, 2, 4, 8, 16, 32, 64)
    fit_a, fit_b, report = fit_decay(0.5, ks, etas, min_samples=20)
    assert isinstance(fit_a, DecayFit) and isinstance(fit_b, DecayFit)
    assert fit_a.fitted_exponent < 0 and fit_b.fitted_exponent < 0
    assert report.summary["A2_exponent"] == fit_a.fitted_exponent
    assert math.isfinite(fit_a.max_normalized_value) and math.isfinite(fit_b.max_normalized_value)
    row = report.rows[0]
    assert row[5] == pytest.approx(row[3] * row[2] ** 1.0)
    assert report.summary["samples"] == len(report.rows) >= 20
    assert all(10 <= row[2] <= 1e4 for row in report.rows)


def test_decay_fit_needs_samples():
    with pytest.raises(ParameterError):
        fit_decay(0.5, (16,), (1,))
    with pytest.raises(ParameterError):
        fit_decay(0.5, (4, 8), (2, 4, 8))
    with pytest.raises(ParameterError):
        fit_decay(2.0, DECAY_K_GRID, DECAY_ETA_GRID)


def test_decay_fit_samples_must_increase():
    with pytest.raises(ParameterError):
        DecayFit([(2.0, 1.0), (1.0, 1.0)], 1.0, -1.0, 1.0)
    with pytest.raises(ParameterError):
        DecayFit([], 1.0, -1.0, 1.0)


# ---------------------------------------------------------------------------
# Laguerre-function asymptotics


@pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
def test_script_l_vanishes_at_origin(delta):
    assert script_l(8, delta, 0.0) == 0.0


def test_origin_regime_constant_finite():
    c = asymptotic_constants(8, 1.0, 0.05)
    assert all(math.isfinite(v) and v > 0 for v in c.values())


def test_asymptotics_stable_in_k():
    report = check_asymptotics(1.0)
    assert report.passed
    assert report.summary["gamma"] == pytest.approx(0.8 * report.summary["admissible_gamma"])
    assert len(report.rows) == 3


def test_tail_rate_is_positive():
    for k in (8, 32, 128):
        assert admissible_tail_rate(k, 1.0) > 0


def test_asymptotics_validation():
    with pytest.raises(ParameterError):
        asymptotic_constants(0, 1.0, 0.1)
    with pytest.raises(ParameterError):
        asymptotic_constants(4, -1.0, 0.1)
    with pytest.raises(ParameterError):
        check_asymptotics(1.0, scaling="meters")


# ---------------------------------------------------------------------------
# psi subordination


def test_psi_subordination_ground_state():
    r = np.linspace(0.0, 5.0, 21)
    assert check_psi_subordination(0, 1.5, 0.0, 0.5, 1.0, r) <= 1e-8
    assert check_psi_subordination(0, 2.0, 0.9, 0.5, 3.0, r) <= 1e-8


def test_psi_subordination_reference_case():
    assert check_psi_subordination(6, 1.0, 0.7, 0.4, 2.0, [1.5]) <= 1e-6


@pytest.mark.parametrize("k", [1, 4, 9])
def test_psi_subordination_real_orders(k):
    r = np.linspace(0.0, 4.0, 9)
    rhs = psi_subordination_rhs(k, 1.7, 0.0, 0.6, 1.3, r)
    assert np.max(np.abs(rhs - psi(k, 1.7, math.sqrt(1.3) * r))) <= 1e-8


def test_psi_subordination_order_checks():
    with pytest.raises(ParameterError):
        check_psi_subordination(2, 0.5, 0.0, 0.7, 1.0, [1.0])
    with pytest.raises(ParameterError):
        check_psi_subordination(2, 1.0, 0.0, 0.0, 1.0, [1.0])


# ---------------------------------------------------------------------------
# spectral integrals


def test_sample_spectrum_ranges():
    pts = sample_spectrum(200)
    assert len(pts) == 200
    lag = [z for z in pts if z.is_laguerre]
    assert min(z.lam for z in lag) == pytest.approx(0.1) and max(z.lam for z in lag) == pytest.approx(64.0)
    assert max(z.k for z in lag) == 128
    assert all(0.1 - 1e-12 <= z.u <= 64.0 + 1e-12 for z in pts if z.is_bessel)


@pytest.mark.parametrize("zeta", [SpectralPoint.laguerre(1.0, 0), SpectralPoint.laguerre(5.0, 7), SpectralPoint.laguerre(0.3, 40)])
def test_laguerre_integral_two_ways(zeta):
    assert derivative_integral_numeric(zeta, 2) == pytest.approx(spectral_derivative_integral(zeta, 2), rel=1e-8)


@pytest.mark.parametrize("u", [0.2, 3.0, 25.0])
def test_bessel_integral_substitution_invariance(u):
    one = derivative_integral_numeric(SpectralPoint.bessel(1.0), 2)
    assert derivative_integral_numeric(SpectralPoint.bessel(u), 2) == pytest.approx(one, rel=1e-8)
    assert one == pytest.approx(spectral_derivative_integral(SpectralPoint.bessel(u), 2), rel=1e-5)


def test_trivial_integral_is_zero():
    assert derivative_integral_numeric(SpectralPoint.trivial(), 2) == 0.0
    assert spectral_derivative_integral(SpectralPoint.trivial(), 2) == 0.0


def test_spectral_integral_check():
    report = check_spectral_integral(1, 2)
    assert report.passed
    assert report.summary["sup"] == pytest.approx(report.summary["sup_doubled"], rel=0.05)
    assert len(report.rows) == 200
    with pytest.raises(ParameterError):
        check_spectral_integral(2, 2)
    with pytest.raises(ParameterError):
        check_spectral_integral(1, 2, count=50)


# ---------------------------------------------------------------------------
# pointwise decay, scans and pointwise control


def test_pointwise_spherical_bounded():
    report = check_pointwise_spherical(0.5, 8)
    assert report.passed
    assert report.summary["gamma_epsilon"] > 0
    assert report.summary["C_bessel"] < math.inf


def test_gaussian_rate_grows_with_epsilon():
    rates = [check_pointwise_spherical(eps, 8).summary["gamma_epsilon"] for eps in (0.25, 0.5, 1.0)]
    assert rates[0] < rates[1] < rates[2]


def test_pointwise_spherical_validation():
    with pytest.raises(ParameterError):
        check_pointwise_spherical(0.0, 8)
    with pytest.raises(ParameterError):
        check_pointwise_spherical(0.5, 0)


def test_contraction_scan_small():
    report = contraction_scan(k_max=30, r_max=20.0, r_count=300)
    assert report.passed
    assert report.summary["max_abs"] <= 1 + 1e-9


def test_szego_scan_reports_finite_sup():
    report = szego_scan(k_max=40, r_max=30.0)
    assert report.passed
    assert report.summary["re_a"] == pytest.approx(-4 / 3 + 0.05)


def test_pointwise_control_inequality():
    report = check_pointwise_control(paths=100, seed=3)
    assert report.passed
    assert report.summary["min_slack"] >= -1e-8


def test_pointwise_control_constant_path_is_tight():
    # F = X on [0, 1] with ell = 1: rhs 2|X|^2 - |X|^2 = |X|^2
    X = np.array([[1.0, 2.0], [0.0, 1j]])
    F = lambda t: np.broadcast_to(X, np.shape(np.atleast_1d(t)) + X.shape)
    dF = lambda t: np.zeros(np.shape(np.atleast_1d(t)) + X.shape)
    slack = pointwise_control_slack(F, dF, (0.0, 1.0), 1.0, [0.0, 0.5])
    assert slack == pytest.approx(float(np.min(np.linalg.eigvalsh(X.conj().T @ X))), rel=1e-12)


def test_random_matrix_path_derivative(rng):
    F, dF = random_matrix_path(rng, 3)
    t, h = np.array([0.3]), 1e-5
    numeric = (F(t + h) - F(t - h)) / (2 * h)
    assert np.allclose(numeric, dF(t), atol=1e-5)


# ---------------------------------------------------------------------------
# reports and registry


def test_report_serialisation():
    rep = CheckReport("demo", True, ["a", "b"], [[1, 2.5], [3, "x"]], {"value": 1.5})
    assert rep.to_csv() == "a,b\n1,2.5\n3,x\n"
    assert json.loads(rep.verdict_json()) == {"check": "demo", "status": "PASS", "value": 1.5}


def test_registry():
    assert set(CHECKS) == {
        "decay-fit", "asymptotics", "psi-subordination", "spectral-integral",
        "pointwise-spherical", "contraction-scan", "szego-scan", "pointwise-control",
    }
    with pytest.raises(ParameterError):
        run_check("no-such-check")
    rep = run_check("psi-subordination")
    assert rep.passed and rep.summary["max_abs_residual"] <= 1e-6


def test_checks_are_deterministic():
    a = run_check("pointwise-control", paths=20, seed=5)
    b = run_check("pointwise-control", paths=20, seed=5)
    assert a.to_csv() == b.to_csv()

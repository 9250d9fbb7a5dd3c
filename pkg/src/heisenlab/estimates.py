"""Quantitative checks of the spectral estimates behind the maximal theorems.

Every check is a measurement: it samples the relevant quantity on a grid,
fits or bounds it, and returns a :class:`CheckReport` carrying CSV rows and
a JSON-ready verdict.  The underlying inequalities have unspecified
constants, so a check passes when the normalised quantity stays bounded
and stable under refinement, not when it hits a particular number.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from .special import (
    Order,
    ParameterError,
    SpectralPoint,
    _check_order,
    bessel_eta,
    log_abs_psi,
    loggamma,
    psi,
    psi_derivative,
    script_l,
    spherical_fn_derivative,
)
from .spectral import spectral_derivative_integral


class QuadratureError(RuntimeError):
    """An adaptive quadrature hit its iteration cap."""


@dataclass
class CheckReport:
    """Outcome of one check: tabular samples plus a verdict."""

    name: str
    passed: bool
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()

    def verdict(self) -> dict:
        return {"check": self.name, "status": "PASS" if self.passed else "FAIL", **self.summary}

    def verdict_json(self) -> str:
        return json.dumps(self.verdict(), sort_keys=True, default=float)


# ---------------------------------------------------------------------------
# A and B integrals

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _tail_integral(fn, start: float, turning: float, width: float = 0.5, tol: float = 1e-10, max_panels: int = 20000) -> float:
    """``int_start^inf fn`` by Gauss-Legendre panels until past ``turning`` and negligible."""
    total = 0.0
    a = start
    for _ in range(max_panels):
        b = a + width
        s = 0.5 * width * (_GL_X + 1.0) + a
        piece = 0.5 * width * float(np.sum(_GL_W * fn(s)))
        total += piece
        a = b
        if a > turning and abs(piece) <= tol * abs(total):
            return total
    raise QuadratureError(f"integral from {start} did not converge within {max_panels} panels")


def _turning_point(k: int, b: Order) -> float:
    # psi^b_k oscillates up to rho^2/2 ~ 4k + 2 re(b) + 2
    return math.sqrt(2.0 * (4 * k + 2 * max(np.real(b), 0.0) + 2.0)) + 12.0


def compute_A(b: Order, k: int, eta: float) -> float:
    """``A(b,k,eta) = (int_1^inf |psi^b_k(sqrt(eta) r)|^2 dr)^{1/2}``."""
    b = _check_order(b)
    if not eta > 0:
        raise ParameterError(f"eta must be > 0, got {eta}")
    s = math.sqrt(eta)
    val = _tail_integral(lambda rho: np.abs(psi(k, b, rho)) ** 2, s, _turning_point(k, b), width=min(0.5, 4.0 / math.sqrt(k + 1.0)))
    return math.sqrt(val / s)


def compute_B(b: Order, k: int, eta: float) -> float:
    """``B(b,k,eta) = (int_1^inf |d/dr psi^b_k(sqrt(eta) r)|^2 dr)^{1/2}``."""
    b = _check_order(b)
    if not eta > 0:
        raise ParameterError(f"eta must be > 0, got {eta}")
    s = math.sqrt(eta)
    val = _tail_integral(lambda rho: np.abs(psi_derivative(k, b, rho)) ** 2, s, _turning_point(k, b), width=min(0.5, 4.0 / math.sqrt(k + 1.0)))
    return math.sqrt(val * s)


# ---------------------------------------------------------------------------
# decay fits


@dataclass
class DecayFit:
    samples: list[tuple[float, float]]
    fitted_constant: float
    fitted_exponent: float
    max_normalized_value: float

    def __post_init__(self):
        if not self.samples:
            raise ParameterError("a decay fit needs samples")
        xs = [s[0] for s in self.samples]
        if any(x <= 0 for x in xs) or any(b < a for a, b in zip(xs, xs[1:])):
            raise ParameterError("fit abscissas must be positive and sorted")


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(math.exp(intercept)), float(slope)


def fit_decay(
    delta_prime: float,
    k_grid,
    eta_grid,
    product_range: tuple[float, float] = (10.0, 1e4),
    tolerance: float = 0.15,
    min_samples: int = 40,
) -> tuple[DecayFit, DecayFit, CheckReport]:
    """Fit ``A^2`` and ``B^2`` against ``eta k`` on a sample grid.

    Pairs with ``eta k`` outside ``product_range`` are skipped and at least
    ``min_samples`` must remain.  The check
    passes when both normalised sups are finite and the least-squares
    exponent of ``A^2`` is within ``tolerance`` of ``-(delta' + 1/2)``.
    """
    if not 0 < delta_prime <= 1.5:
        raise ParameterError(f"delta' must lie in (0, 1.5], got {delta_prime}")
    lo, hi = product_range
    cells = sorted(
        {(float(e) * int(k), int(k), float(e)) for k in k_grid for e in eta_grid if lo <= float(e) * int(k) <= hi}
    )
    if len(cells) < max(min_samples, 2):
        raise ParameterError(f"need at least {max(min_samples, 2)} samples with eta k in {product_range}, got {len(cells)}")
    rows = []
    a_samples, b_samples = [], []
    for prod, k, eta in cells:
        a2 = compute_A(delta_prime, k, eta) ** 2
        b2 = compute_B(delta_prime, k, eta) ** 2
        na, nb = a2 * prod ** (delta_prime + 0.5), b2 * prod ** (delta_prime - 0.5)
        rows.append([k, eta, prod, a2, b2, na, nb])
        a_samples.append((prod, a2))
        b_samples.append((prod, b2))
    x = np.array([s[0] for s in a_samples])
    ca, ea = _loglog_fit(x, np.array([s[1] for s in a_samples]))
    cb, eb = _loglog_fit(x, np.array([s[1] for s in b_samples]))
    max_na = max(r[5] for r in rows)
    max_nb = max(r[6] for r in rows)
    fit_a = DecayFit(a_samples, ca, ea, max_na)
    fit_b = DecayFit(b_samples, cb, eb, max_nb)
    target = -(delta_prime + 0.5)
    passed = bool(math.isfinite(max_na) and math.isfinite(max_nb) and abs(ea - target) <= tolerance)
    report = CheckReport(
        "decay-fit",
        passed,
        ["k", "eta", "eta_k", "A2", "B2", "A2_normalized", "B2_normalized"],
        rows,
        {
            "delta_prime": delta_prime,
            "samples": len(rows),
            "A2_exponent": ea,
            "A2_target_exponent": target,
            "A2_normalized_sup": max_na,
            "B2_exponent": eb,
            "B2_normalized_sup": max_nb,
        },
    )
    return fit_a, fit_b, report


# ---------------------------------------------------------------------------
# Laguerre-function asymptotics

REGIMES = ("origin", "oscillatory", "transition", "tail")


def _regime_scale(k: int, delta: float, scaling: str) -> float:
    if scaling == "nu":
        return 4.0 * k + 2.0 * delta + 2.0
    if scaling == "k":
        return float(k)
    raise ParameterError(f"scaling must be 'nu' or 'k', got {scaling!r}")


def _regime_grid(nu: float, tail_length: float = 200.0) -> np.ndarray:
    return np.concatenate(
        [
            np.geomspace(1e-6 / nu, 1.0 / nu, 400),
            np.linspace(1.0 / nu, 1.5 * nu, int(min(40000, 400 * nu))),
            np.linspace(1.5 * nu, 1.5 * nu + tail_length, 4000),
        ]
    )


def admissible_tail_rate(k: int, delta: float, scaling: str = "nu") -> float:
    """Largest ``gamma`` with ``|L^delta_k(r)| <= e^{-gamma r}`` on the tail regime."""
    nu = _regime_scale(k, delta, scaling)
    r = np.linspace(1.5 * nu, 1.5 * nu + 200.0, 4000)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(script_l(k, delta, r)))
    return float(np.min(-logs / r))


def asymptotic_constants(k: int, delta: float, gamma: float, scaling: str = "nu") -> dict[str, float]:
    """Sup of ``|L^delta_k| / bound`` on each of the four regimes.

    With ``scaling='nu'`` the regime boundaries and bound shapes use
    ``nu = 4k + 2 delta + 2``; ``'k'`` uses ``k`` itself.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    nu = _regime_scale(k, delta, scaling)
    r = _regime_grid(nu)
    val = np.abs(script_l(k, delta, r))
    m1 = r <= 1.0 / nu
    m2 = (r >= 1.0 / nu) & (r <= 0.5 * nu)
    m3 = (r >= 0.5 * nu) & (r <= 1.5 * nu)
    m4 = r >= 1.5 * nu
    shape1 = (nu * r[m1]) ** (0.5 * delta)
    shape2 = (nu * r[m2]) ** -0.25
    shape3 = nu**-0.25 * (nu ** (1.0 / 3.0) + np.abs(nu - r[m3])) ** -0.25
    return {
        "origin": float(np.max(val[m1] / shape1)),
        "oscillatory": float(np.max(val[m2] / shape2)),
        "transition": float(np.max(val[m3] / shape3)),
        "tail": float(np.max(val[m4] * np.exp(gamma * r[m4]))),
    }


def check_asymptotics(
    delta: float,
    k_values=(8, 32, 128),
    gamma: float | None = None,
    scaling: str = "nu",
) -> CheckReport:
    """Implied constants of the four-regime Laguerre-function bounds.

    Passes when every constant is finite and none grows by more than a
    factor 2 beyond its value at the smallest ``k``.  If ``gamma`` is not
    given, ``0.8`` times the smallest admissible tail rate over
    ``k_values`` is used.
    """
    k_values = sorted(int(k) for k in k_values)
    rates = {k: admissible_tail_rate(k, delta, scaling) for k in k_values}
    # constants at a rate slightly below the slowest measured one stay bounded in k
    g = 0.8 * min(rates.values()) if gamma is None else float(gamma)
    rows, table = [], {}
    for k in k_values:
        consts = asymptotic_constants(k, delta, g, scaling)
        table[k] = consts
        rows.append([k, delta, scaling, g] + [consts[name] for name in REGIMES] + [rates[k]])
    stable = {}
    for name in REGIMES:
        vals = [table[k][name] for k in k_values]
        stable[name] = bool(all(math.isfinite(v) for v in vals) and max(vals) <= 2.0 * vals[0])
    return CheckReport(
        "asymptotics",
        all(stable.values()),
        ["k", "delta", "scaling", "gamma"] + [f"c_{name}" for name in REGIMES] + ["admissible_gamma"],
        rows,
        {"delta": delta, "gamma": g, "scaling": scaling, "stable": stable, "admissible_gamma": min(rates.values())},
    )


# ---------------------------------------------------------------------------
# psi subordination


def psi_subordination_constant(delta: float, gamma: float, delta_prime: float) -> complex:
    """``Gamma(delta+i gamma+1) / (Gamma(delta-delta'+i gamma) Gamma(delta'+1))``."""
    a = complex(delta, gamma)
    return complex(np.exp(loggamma(a + 1.0) - loggamma(a - delta_prime) - loggamma(delta_prime + 1.0)))


def psi_subordination_rhs(k: int, delta: float, gamma: float, delta_prime: float, lam: float, r, nodes: int = 96):
    """Integral side of the subordination of ``psi^{delta+i gamma}_k`` onto ``psi^{delta'}_k``.

    The factor ``(1-s)^{i gamma}`` oscillates without bound as ``s -> 1``, so
    the integral is taken in ``v = -log(1-s)`` where it becomes the smooth
    phase ``e^{-i gamma v}``; generalised Gauss-Laguerre nodes carry
    ``v^{delta'} e^{-(delta-delta') v}``.  Accuracy degrades once
    ``|gamma| / (delta - delta')`` is large, since the phase then oscillates
    many times within the decay length of the weight.
    """
    if not 0 < delta_prime < delta:
        raise ParameterError(f"need 0 < delta' < delta, got delta'={delta_prime}, delta={delta}")
    c = delta - delta_prime
    y, w = sp.roots_genlaguerre(nodes, delta_prime)
    v = y / c
    w = w * c ** (-delta_prime - 1.0)
    s = -np.expm1(-v)
    w = w * (s / v) ** delta_prime * np.exp(-1j * gamma * v)
    lam = abs(lam)
    r = np.atleast_1d(np.asarray(r, dtype=float))[:, None]
    integrand = np.exp(-0.25 * lam * r * r * np.exp(-v)) * psi(k, delta_prime, np.sqrt(lam * s) * r)
    return psi_subordination_constant(delta, gamma, delta_prime) * np.sum(w * integrand, axis=1)


def check_psi_subordination(k: int, delta: float, gamma: float, delta_prime: float, lam: float, r) -> float:
    """Max abs. residual of the subordination identity over the radii ``r``."""
    lhs = np.atleast_1d(psi(k, complex(delta, gamma) if gamma else delta, math.sqrt(abs(lam)) * np.asarray(r, dtype=float)))
    rhs = psi_subordination_rhs(k, delta, gamma, delta_prime, lam, r)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# spectral integrals


def sample_spectrum(count: int, k_max: int = 128, lam_range=(0.1, 64.0), u_range=(0.1, 64.0)) -> list[SpectralPoint]:
    """Deterministic spread of Laguerre and Bessel points (about 3:1)."""
    n_lag = (3 * count) // 4
    n_bes = count - n_lag
    lams = np.geomspace(*lam_range, n_lag)
    ks = np.round(np.linspace(0, k_max, n_lag)).astype(int)
    # interleave k against lambda so small and large k meet small and large lambda
    ks = ks[np.argsort(np.argsort(np.sin(np.arange(n_lag) * 2.3999632)))]
    pts = [SpectralPoint.laguerre(l, k) for l, k in zip(lams, ks)]
    pts += [SpectralPoint.bessel(u) for u in np.geomspace(*u_range, n_bes)]
    return pts


def derivative_integral_numeric(zeta: SpectralPoint, n: int, m: int = 1, r_max: float | None = None) -> float:
    """``int_0^inf r^{2m-1} |phi_zeta^{(m)}|^2 dr`` by Gauss-Legendre panels.

    The Bessel tail beyond ``r_max`` is added from the large-argument
    amplitude of the kernel.  Serves as an independent check on
    :func:`heisenlab.spectral.spectral_derivative_integral`.
    """
    if zeta.is_trivial:
        return 0.0
    if zeta.is_laguerre:
        s = math.sqrt(abs(zeta.lam))
        end = math.sqrt(2.0 * (4 * zeta.k + 2 * n + 80)) / s
        width = min(0.25, 2.0 / math.sqrt(zeta.k + 1.0)) / s
        return _panels(lambda r: r ** (2 * m - 1) * np.abs(spherical_fn_derivative(zeta, r, n, m)) ** 2, end, width)
    u = zeta.u
    X = 2000.0 if r_max is None else r_max * u
    body = _panels(lambda r: r ** (2 * m - 1) * np.abs(spherical_fn_derivative(zeta, r, n, m)) ** 2, X / u, 0.5 / u)
    nu = n - 1
    amp2 = (2.0**nu * math.factorial(nu)) ** 2 * 2.0 / math.pi
    tail = 0.5 * amp2 * X ** (2 * m - 1 - 2 * nu) / (2 * nu + 1 - 2 * m)
    return body + tail


def _panels(fn, end: float, width: float) -> float:
    edges = np.arange(0.0, end + width, width)
    a, b = edges[:-1, None], edges[1:, None]
    s = 0.5 * (b - a) * (_GL_X[None, :] + 1.0) + a
    vals = fn(s.ravel()).reshape(s.shape)
    return float(np.sum(0.5 * (b - a) * _GL_W[None, :] * vals))


def check_spectral_integral(m: int, n: int, count: int = 200) -> CheckReport:
    """Sup over sampled spectral points of ``int r^{2m-1}|phi^{(m)}|^2 dr``.

    Passes when the sup is finite and changes by less than 5% when the
    sample is doubled.
    """
    if not 1 <= m <= n - 1:
        raise ParameterError(f"m must lie in [1, n-1], got m={m}, n={n}")
    if count < 200:
        raise ParameterError(f"need at least 200 samples, got {count}")

    def sweep(c):
        vals = [(spectral_derivative_integral(z, n, m), z) for z in sample_spectrum(c)]
        return vals, max(vals, key=lambda t: t[0])

    vals, (sup, arg) = sweep(count)
    _, (sup2, arg2) = sweep(2 * count)
    rows = [[z.kind, z.lam, z.k, z.u, v] for v, z in vals]
    stable = math.isfinite(sup) and abs(sup2 - sup) <= 0.05 * sup
    return CheckReport(
        "spectral-integral",
        bool(stable),
        ["kind", "lambda", "k", "u", "integral"],
        rows,
        {"m": m, "n": n, "samples": count, "sup": sup, "sup_doubled": sup2, "argmax": repr(arg), "argmax_doubled": repr(arg2)},
    )


# ---------------------------------------------------------------------------
# pointwise decay of spherical functions


def _laguerre_block(epsilon: float, N: int, lam_count: int = 48) -> list[SpectralPoint]:
    lams = np.geomspace(epsilon, N, lam_count)
    return [SpectralPoint.laguerre(l, k) for l in lams for k in range(N + 1)]


def laguerre_block_log_sup(epsilon: float, N: int, r_grid, n: int) -> np.ndarray:
    """``log sup_{zeta in Sigma_{eps,N}} |phi_zeta(r)|`` (λ sampled geometrically)."""
    r_grid = np.asarray(r_grid, dtype=float)
    best = np.full(r_grid.shape, -np.inf)
    for z in _laguerre_block(epsilon, N):
        best = np.maximum(best, log_abs_psi(z.k, float(n - 1), math.sqrt(abs(z.lam)) * r_grid))
    return best


def bessel_block_sup(epsilon: float, r_grid, n: int, u_count: int = 256) -> np.ndarray:
    """``sup_{eps <= u <= 1/eps} |eta_u(r)|``."""
    r_grid = np.asarray(r_grid, dtype=float)
    us = np.geomspace(epsilon, 1.0 / epsilon, u_count)
    return np.max(np.abs(np.array([bessel_eta(u, r_grid, n) for u in us])), axis=0)


def check_pointwise_spherical(epsilon: float, N: int, r_grid=None, n: int = 2) -> CheckReport:
    """Gaussian decay on the Laguerre block and ``r^{-n+1/2}`` decay on the Bessel block.

    The Laguerre sup is fitted as ``C e^{-gamma eps r^2}`` (least squares in
    ``r^2`` for the rate, then the smallest ``C`` making it a bound).  The
    Bessel sup is normalised by ``eps^{-3} r^{-n+1/2}``; it passes when its
    sup over ``[1, r_max]`` is within a factor 2 of the sup over the first
    half of the range.
    """
    if not 0 < epsilon <= 1:
        raise ParameterError(f"epsilon must lie in (0, 1], got {epsilon}")
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    r = np.geomspace(1.0, 100.0, 200) if r_grid is None else np.asarray(r_grid, dtype=float)
    log_lag = laguerre_block_log_sup(epsilon, N, r, n)
    slope, _ = np.polyfit(r * r, log_lag, 1)
    gamma = -slope / epsilon
    logC = float(np.max(log_lag + gamma * epsilon * r * r))
    bes = bessel_block_sup(epsilon, r, n)
    norm_bes = bes * r ** (n - 0.5) * epsilon**3
    half = r <= math.sqrt(r[0] * r[-1])
    bessel_bounded = bool(np.all(np.isfinite(norm_bes)) and np.max(norm_bes) <= 2.0 * np.max(norm_bes[half]))
    lag_ok = bool(gamma > 0 and math.isfinite(logC))
    rows = [[float(ri), float(li), float(li + gamma * epsilon * ri * ri - logC), float(bi), float(nb)] for ri, li, bi, nb in zip(r, log_lag, bes, norm_bes)]
    return CheckReport(
        "pointwise-spherical",
        lag_ok and bessel_bounded,
        ["r", "log_sup_laguerre", "log_normalized_laguerre", "sup_bessel", "bessel_normalized"],
        rows,
        {
            "epsilon": epsilon,
            "N": N,
            "n": n,
            "gamma": float(gamma),
            "gamma_epsilon": float(gamma * epsilon),
            "C_laguerre": math.exp(logC),
            "C_bessel": float(np.max(norm_bes)),
        },
    )


# ---------------------------------------------------------------------------
# scans


def contraction_scan(n: int = 2, k_max: int = 200, r_max: float = 50.0, r_count: int = 2000) -> CheckReport:
    """``max |phi_zeta(r)|`` over a spectral grid and ``r in (0, r_max]``."""
    r = np.linspace(r_max / r_count, r_max, r_count)
    lams = [0.1, 0.5, 1.0, 4.0, 16.0, 64.0]
    rows = []
    worst = 0.0
    for lam in lams:
        for k in range(0, k_max + 1):
            v = float(np.max(np.abs(psi(k, float(n - 1), math.sqrt(lam) * r))))
            worst = max(worst, v)
            rows.append(["laguerre", lam, k, "", v])
    for u in np.geomspace(0.05, 64.0, 40):
        v = float(np.max(np.abs(bessel_eta(u, r, n))))
        worst = max(worst, v)
        rows.append(["bessel", "", "", float(u), v])
    return CheckReport(
        "contraction-scan",
        worst <= 1.0 + 1e-9,
        ["kind", "lambda", "k", "u", "max_abs"],
        rows,
        {"n": n, "max_abs": worst, "points": len(rows), "r_max": r_max},
    )


def szego_scan(n: int = 2, offset: float = 0.05, im: float = 0.0, k_max: int = 300, r_max: float = 60.0) -> CheckReport:
    """Sup of ``|psi^{n-1+a}_k(r)|`` at ``re(a) = -n+1-1/3+offset``.

    Positive offsets sit above the threshold where the sup is expected to
    stay finite uniformly in ``k``; the constant is recorded, not asserted.
    """
    re_a = -n + 1.0 - 1.0 / 3.0 + offset
    order = n - 1 + complex(re_a, im) if im else n - 1 + re_a
    r = np.linspace(0.0, r_max, 3000)
    rows = []
    for k in range(0, k_max + 1):
        rows.append([k, float(np.max(np.abs(psi(k, order, r))))])
    sup = max(v for _, v in rows)
    # growth of the running sup over the last half of the k range
    first = max(v for k, v in rows if k <= k_max // 2)
    return CheckReport(
        "szego-scan",
        bool(math.isfinite(sup)),
        ["k", "sup_abs"],
        rows,
        {"n": n, "re_a": re_a, "im_a": im, "sup": sup, "sup_first_half": first},
    )


# ---------------------------------------------------------------------------
# pointwise control of matrix paths


def pointwise_control_slack(F, dF, interval: tuple[float, float], ell: float, t_grid, nodes: int = 64) -> float:
    """Min eigenvalue of ``2/ell int|F|^2 + 2 ell int|F'|^2 - |F(t)|^2`` over ``t_grid``.

    ``F`` and ``dF`` map an array of times to ``(len, d, d)`` matrices; the
    integrals run over ``interval`` (Gauss-Legendre).  The inequality holds
    for ``0 < ell <= |interval|``.
    """
    a, b = interval
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (b - a) * (x + 1.0) + a
    w = 0.5 * (b - a) * w
    Fs, dFs = np.asarray(F(s)), np.asarray(dF(s))
    gram = lambda M: np.conj(np.swapaxes(M, -1, -2)) @ M
    rhs = (2.0 / ell) * np.einsum("q,qij->ij", w, gram(Fs)) + 2.0 * ell * np.einsum("q,qij->ij", w, gram(dFs))
    Ft = np.asarray(F(np.asarray(t_grid, dtype=float)))
    diff = rhs[None] - gram(Ft)
    diff = 0.5 * (diff + np.conj(np.swapaxes(diff, -1, -2)))
    return float(np.min(np.linalg.eigvalsh(diff)))


def random_matrix_path(rng: np.random.Generator, d: int, modes: int = 4, interval=(0.0, 1.0)):
    """Random smooth path ``t -> sum_j C_j cos(omega_j t) + S_j sin(omega_j t)`` and its derivative."""
    a, b = interval
    omegas = 2.0 * math.pi * rng.uniform(0.2, 3.0, modes) / (b - a)
    C = rng.normal(size=(modes, d, d)) + 1j * rng.normal(size=(modes, d, d))
    S = rng.normal(size=(modes, d, d)) + 1j * rng.normal(size=(modes, d, d))

    def F(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None, None, None]
        return np.sum(C * np.cos(omegas[:, None, None] * t) + S * np.sin(omegas[:, None, None] * t), axis=1)

    def dF(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None, None, None]
        om = omegas[:, None, None]
        return np.sum(-C * om * np.sin(om * t) + S * om * np.cos(om * t), axis=1)

    return F, dF


def check_pointwise_control(paths: int = 1000, d: int = 3, seed: int = 0, t_count: int = 41) -> CheckReport:
    """Matrix pointwise-control inequality on random smooth paths over ``[0, 1]``."""
    rng = np.random.default_rng(seed)
    interval = (0.0, 1.0)
    t = np.linspace(*interval, t_count)
    worst = math.inf
    rows = []
    for i in range(paths):
        F, dF = random_matrix_path(rng, d, interval=interval)
        for ell in (1.0, 0.25):
            slack = pointwise_control_slack(F, dF, interval, ell, t)
            worst = min(worst, slack)
            rows.append([i, ell, slack])
    return CheckReport(
        "pointwise-control",
        worst >= -1e-8,
        ["path", "ell", "min_eigenvalue_slack"],
        rows,
        {"paths": paths, "d": d, "min_slack": worst},
    )


# ---------------------------------------------------------------------------
# registry

DECAY_K_GRID = (4, 6, 8, 12, 16, 24, 32, 48, 64)
DECAY_ETA_GRID = (1, 1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64)
PSI_SUBORDINATION_CASES = (
    (6, 1.0, 0.7, 0.4, 2.0),
    (0, 1.5, 0.0, 0.5, 1.0),
    (12, 2.0, -0.4, 1.0, 0.5),
    (20, 2.5, -1.3, 1.1, 0.7),
)


def _stack(name: str, key: str, reports: list[CheckReport]) -> CheckReport:
    """Concatenate per-parameter reports, tagging rows with ``key``."""
    first = reports[0]
    columns = first.columns if key in first.columns else [key] + first.columns
    rows = []
    for rep in reports:
        tag = rep.summary[key]
        rows += [row if key in first.columns else [tag] + list(row) for row in rep.rows]
    summary = {f"{key}={rep.summary[key]:g}": rep.verdict() for rep in reports}
    return CheckReport(name, all(rep.passed for rep in reports), columns, rows, summary)


def run_decay_fit(delta_primes=(0.25, 0.5, 1.0), tolerance: float = 0.15) -> CheckReport:
    reports = [fit_decay(dp, DECAY_K_GRID, DECAY_ETA_GRID, tolerance=tolerance)[2] for dp in delta_primes]
    return _stack("decay-fit", "delta_prime", reports)


def run_asymptotics(deltas=(0.0, 0.5, 1.0, 2.0), k_values=(8, 32, 128), scaling: str = "nu") -> CheckReport:
    return _stack("asymptotics", "delta", [check_asymptotics(d, k_values, scaling=scaling) for d in deltas])


def run_psi_subordination(cases=PSI_SUBORDINATION_CASES, r_max: float = 10.0, tol: float = 1e-6) -> CheckReport:
    r = np.linspace(0.0, r_max, 101)
    rows = []
    for k, delta, gamma, dp, lam in cases:
        rows.append([int(k), delta, gamma, dp, lam, check_psi_subordination(int(k), delta, gamma, dp, lam, r)])
    worst = max(row[-1] for row in rows)
    return CheckReport(
        "psi-subordination",
        bool(worst <= tol),
        ["k", "delta", "gamma", "delta_prime", "lambda", "max_abs_residual"],
        rows,
        {"max_abs_residual": worst, "tolerance": tol},
    )


def run_pointwise_spherical(epsilons=(0.25, 0.5, 1.0), N: int = 8, n: int = 2) -> CheckReport:
    return _stack("pointwise-spherical", "epsilon", [check_pointwise_spherical(e, N, n=n) for e in epsilons])


CHECKS = {
    "decay-fit": run_decay_fit,
    "asymptotics": run_asymptotics,
    "psi-subordination": run_psi_subordination,
    "spectral-integral": lambda m=1, n=2, count=200: check_spectral_integral(m, n, count),
    "pointwise-spherical": run_pointwise_spherical,
    "contraction-scan": contraction_scan,
    "szego-scan": szego_scan,
    "pointwise-control": check_pointwise_control,
}


def run_check(name: str, **params) -> CheckReport:
    """Run a registered check; ``params`` override its defaults."""
    if name not in CHECKS:
        raise ParameterError(f"unknown check {name!r}; choose from {sorted(CHECKS)}")
    return CHECKS[name](**params)

"""Spectral fields and the radial operator calculus acting on them.

A :class:`SpectralField` stores one ``d x d`` coefficient per point of the
Gelfand spectrum.  Spherical means, uniform averages, Poisson integrals and
the analytic family all act as scalar multipliers per spectral point, so
every operator here is a loop over coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy import integrate
from scipy import special as sp
from scipy.interpolate import CubicSpline

from .heisenberg import (
    BesselGrid,
    GeometryConfig,
    PhysicalField,
    _frequencies,
    bessel_mode_norm,
    center_synthesis,
    hankel_analysis,
    laguerre_analysis,
    laguerre_mode,
    partial_fourier,
    radial_interpolant,
)
from .special import (
    ParameterError,
    Order,
    SpectralPoint,
    _check_order,
    bessel_eta,
    loggamma,
    psi,
    psi_derivative,
    spherical_fn,
    spherical_fn_derivative,
)


class DomainError(ValueError):
    """An operator was applied to spectral mass outside its domain."""


class SynthesisError(ValueError):
    """A spectral field has no physical representation on the grid."""


def plancherel_weight(zeta: SpectralPoint, n: int, bessel_radius: float) -> float:
    """Weight ``w`` with ``||f||_2^2 = sum_zeta w tr(c^* c)`` on ``H^n / Z``.

    Laguerre mass at ``(lam, k)`` carries ``2 pi (2 pi/|lam|)^n binom(k+n-1, k)``,
    Bessel mass the ball norm ``2 pi N_u`` (exact when ``u`` is a grid node)
    and the trivial character the abstract weight 1.
    """
    if zeta.is_laguerre:
        return 2.0 * math.pi * (2.0 * math.pi / abs(zeta.lam)) ** n * math.comb(zeta.k + n - 1, zeta.k)
    if zeta.is_bessel:
        return 2.0 * math.pi * float(bessel_mode_norm(n, zeta.u, bessel_radius))
    return 1.0


@dataclass(frozen=True)
class SpectralField:
    """Finitely supported map from spectral points to ``d x d`` matrices."""

    geometry: GeometryConfig
    coefficients: Mapping[SpectralPoint, np.ndarray]
    fiber_dim: int = 0
    weights: Mapping[SpectralPoint, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        coeffs = {}
        d = self.fiber_dim
        for zeta in sorted(self.coefficients, key=SpectralPoint.sort_key):
            c = np.atleast_2d(np.asarray(self.coefficients[zeta], dtype=complex))
            if c.ndim != 2 or c.shape[0] != c.shape[1]:
                raise ParameterError(f"coefficient at {zeta} must be square, got shape {c.shape}")
            if d == 0:
                d = c.shape[0]
            elif c.shape[0] != d:
                raise ParameterError(f"coefficient at {zeta} has dimension {c.shape[0]} != {d}")
            coeffs[zeta] = c
        if d == 0:
            d = 1
        n, R = self.geometry.n, self.geometry.bessel_radius
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "fiber_dim", d)
        object.__setattr__(self, "weights", {z: plancherel_weight(z, n, R) for z in coeffs})

    @property
    def n(self) -> int:
        return self.geometry.n

    @property
    def points(self) -> list[SpectralPoint]:
        return list(self.coefficients)

    def zero(self) -> "SpectralField":
        return SpectralField(self.geometry, {}, self.fiber_dim)

    def with_coefficients(self, coeffs: Mapping[SpectralPoint, np.ndarray]) -> "SpectralField":
        return SpectralField(self.geometry, coeffs, self.fiber_dim)

    def l2_norm(self) -> float:
        total = sum(self.weights[z] * float(np.sum(np.abs(c) ** 2)) for z, c in self.coefficients.items())
        return math.sqrt(total)

    def restrict(self, keep: Callable[[SpectralPoint], bool]) -> "SpectralField":
        return self.with_coefficients({z: c for z, c in self.coefficients.items() if keep(z)})

    def multiply(self, multiplier: Callable[[SpectralPoint], complex]) -> "SpectralField":
        return self.with_coefficients({z: multiplier(z) * c for z, c in self.coefficients.items()})

    def __add__(self, other: "SpectralField") -> "SpectralField":
        out = dict(self.coefficients)
        for z, c in other.coefficients.items():
            out[z] = out[z] + c if z in out else c
        return self.with_coefficients(out)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return self + other.scaled(-1.0)

    def scaled(self, c: complex) -> "SpectralField":
        return self.multiply(lambda _: c)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        """Whether the physical field is Hermitian: ``c_{-lam,k} = c_{lam,k}^*``."""
        for z, c in self.coefficients.items():
            if z.is_laguerre:
                partner = self.coefficients.get(SpectralPoint.laguerre(-z.lam, z.k))
                target = np.zeros_like(c) if partner is None else partner.conj().T
            else:
                target = c.conj().T
            if np.max(np.abs(c - target)) > tol * max(np.max(np.abs(c)), 1.0):
                return False
        return True

    # -- physical representation ------------------------------------------

    def to_physical(self) -> PhysicalField:
        """Synthesise on the geometry's (radial, center) grid.

        Laguerre mass must sit at integer ``lam`` within the resolvable
        frequency range.  Bessel modes are truncated to the ball of radius
        ``geometry.bessel_radius``; trivial mass is a constant.
        """
        g = self.geometry
        rho = g.radial_nodes
        d = self.fiber_dim
        blocks: dict[int, np.ndarray] = {}
        for z, c in self.coefficients.items():
            if z.is_laguerre:
                lam = int(round(z.lam))
                if lam != z.lam:
                    raise SynthesisError(f"{z}: physical synthesis needs integer lambda")
                if abs(lam) > g.max_frequency:
                    raise SynthesisError(f"{z}: |lambda| exceeds the center resolution")
                prof = laguerre_mode(z.lam, z.k, g.n, rho)
            elif z.is_bessel:
                lam = 0
                prof = np.where(rho <= g.bessel_radius, bessel_eta(z.u, rho, g.n), 0.0)
            else:
                lam = 0
                prof = np.ones_like(rho)
            block = blocks.setdefault(lam, np.zeros((rho.size, d, d), dtype=complex))
            block += prof[:, None, None] * c
        if not blocks:
            return PhysicalField(g, np.zeros((rho.size, g.center_samples, d, d), dtype=complex))
        values = center_synthesis(g, blocks)
        if not self.is_hermitian():
            return PhysicalField(g, values)
        # remove synthesis roundoff so the Hermitian check sees exact symmetry
        return PhysicalField(g, 0.5 * (values + np.conj(np.swapaxes(values, -1, -2))), hermitian=True)

    @classmethod
    def from_physical(
        cls,
        f: PhysicalField,
        K: int | None = None,
        tail_tol: float | None = 1e-6,
        drop_tol: float = 1e-14,
    ) -> "SpectralField":
        """Spectral coefficients of a physical field.

        Nonzero central frequencies go through Laguerre analysis with
        ``K + 1`` modes (default ``geometry.k_max``), the ``lam = 0`` block
        through Fourier-Bessel analysis on the geometry's Bessel grid.
        Coefficients below ``drop_tol`` times the largest one are dropped.
        """
        g = f.geometry
        K = g.k_max if K is None else K
        rho = g.radial_nodes
        scale = np.max(np.abs(f.values), initial=0.0)
        coeffs: dict[SpectralPoint, np.ndarray] = {}
        for lam in _frequencies(g):
            block = partial_fourier(f, lam)
            if np.max(np.abs(block), initial=0.0) <= drop_tol * scale:
                continue
            profile = radial_interpolant(rho, block)
            if lam != 0:
                res = laguerre_analysis(profile, lam, g.n, K, tail_tol=tail_tol)
                for k, c in enumerate(res.coefficients):
                    coeffs[SpectralPoint.laguerre(lam, k)] = c
            else:
                grid = g.bessel_grid
                for u, c in zip(grid.nodes, hankel_analysis(profile, grid)):
                    coeffs[SpectralPoint.bessel(u)] = c
        if coeffs:
            top = max(np.max(np.abs(c)) for c in coeffs.values())
            coeffs = {z: c for z, c in coeffs.items() if np.max(np.abs(c)) > drop_tol * top}
        return cls(g, coeffs, f.fiber_dim)


# ---------------------------------------------------------------------------
# multiplier operators


def spherical_mean(f: SpectralField, r: float) -> SpectralField:
    """``f * sigma_r`` as the multiplier ``phi_zeta(r)``."""
    if r < 0:
        raise ParameterError(f"radius must be >= 0, got {r}")
    n = f.n
    out = f.multiply(lambda z: spherical_fn(z, r, n))
    before, after = f.l2_norm(), out.l2_norm()
    if after > before * (1.0 + 1e-12) + 1e-300:
        raise ArithmeticError(f"spherical mean expanded the L2 norm: {after} > {before}")
    return out


def spherical_mean_multipliers(points: Iterable[SpectralPoint], r_grid, n: int) -> np.ndarray:
    """Table ``phi_zeta(r)`` of shape ``(len(points), len(r_grid))``."""
    r_grid = np.asarray(r_grid, dtype=float)
    return np.array([np.asarray(spherical_fn(z, r_grid, n), dtype=complex) for z in points])


def uniform_average_multiplier(zeta: SpectralPoint, r: float, n: int) -> complex:
    """``(1/r) int_0^r phi_zeta(s) ds`` by adaptive quadrature."""
    if r <= 0:
        raise ParameterError(f"radius must be > 0, got {r}")
    if zeta.is_trivial:
        return 1.0
    val, _ = integrate.quad(lambda s: float(np.real(spherical_fn(zeta, s, n))), 0.0, r, epsabs=1e-10, epsrel=1e-12, limit=400)
    return val / r


def uniform_average(f: SpectralField, r: float) -> SpectralField:
    """Uniform average ``mu_r = (1/r) int_0^r sigma_s ds`` of the spherical means."""
    return f.multiply(lambda z: uniform_average_multiplier(z, r, f.n))


def poisson(f: SpectralField, r: float) -> SpectralField:
    """Poisson integral: Laguerre mass at ``lam`` scaled by ``exp(-|lam| r / 4)``."""
    if r < 0:
        raise ParameterError(f"Poisson parameter must be >= 0, got {r}")
    return f.multiply(lambda z: math.exp(-0.25 * abs(z.lam) * r) if z.is_laguerre else 1.0)


def szego_threshold(n: int) -> float:
    """Lower bound on ``re(a)`` for the analytic family: ``-n + 1 - 1/3``."""
    return -n + 1.0 - 1.0 / 3.0


def analytic_family_multiplier(zeta: SpectralPoint, a: Order, r, n: int):
    """``psi^{n-1+a}_k(sqrt|lam| r)`` for a Laguerre point."""
    r = np.asarray(r, dtype=float)
    return psi(zeta.k, n - 1 + a, math.sqrt(abs(zeta.lam)) * r)


def analytic_family(f: SpectralField, a: Order, r: float) -> SpectralField:
    """Analytic family of spherical means with order ``a``.

    Only Laguerre mass is admissible; ``re(a)`` must exceed
    :func:`szego_threshold`.
    """
    n = f.n
    a = _check_order(a, lower=szego_threshold(n))
    bad = [z for z in f.coefficients if not z.is_laguerre]
    if bad:
        raise DomainError(f"analytic family is defined on Laguerre mass only; found {bad[0]}")
    return f.multiply(lambda z: analytic_family_multiplier(z, a, r, n))


def subordination_constant(n: int, a: Order, b: Order) -> Order:
    """``2 Gamma(n+a) / (Gamma(a-b) Gamma(n+b))``.

    This is the constant that makes
    ``psi^{n-1+a}_k(rho) = C int_0^1 s^{2n+2b-1}(1-s^2)^{a-b-1}
    e^{-rho^2(1-s^2)/4} psi^{n-1+b}_k(rho s) ds`` exact; at ``k = 0`` it
    reduces to ``1 = C / (2 (n+b)) B(...)`` type Beta integrals.
    """
    return 2.0 * np.exp(loggamma(n + a) - loggamma(a - b) - loggamma(n + b))


def subordinated_analytic_family(f: SpectralField, a: Order, b: Order, r: float, nodes: int = 64) -> SpectralField:
    """Right-hand side of the subordination formula for the analytic family.

    Evaluates ``C int_0^1 s^{2n+2b-1}(1-s^2)^{a-b-1} P_{r^2(1-s^2)} M^b_{rs} f ds``
    with ``v = s^2`` and Gauss-Jacobi nodes for ``v^{n+b-1}(1-v)^{a-b-1}``
    (real parts; imaginary parts are folded into the integrand).
    """
    n = f.n
    alpha, beta = a - b - 1.0, n + b - 1.0
    if np.real(alpha) <= -1 or np.real(beta) <= -1:
        raise ParameterError("subordination needs re(a) > re(b) and re(b) > -n")
    x, w = sp.roots_jacobi(nodes, float(np.real(alpha)), float(np.real(beta)))
    v = 0.5 * (x + 1.0)
    w = w * 2.0 ** (-np.real(alpha) - np.real(beta) - 1.0)
    w = w * (1.0 - v) ** (1j * np.imag(alpha)) * v ** (1j * np.imag(beta))
    const = subordination_constant(n, a, b) * 0.5

    def mult(z: SpectralPoint):
        if not z.is_laguerre:
            raise DomainError(f"subordination acts on Laguerre mass only; found {z}")
        lam = abs(z.lam)
        vals = np.exp(-0.25 * lam * r * r * (1.0 - v)) * psi(z.k, n - 1 + b, math.sqrt(lam) * r * np.sqrt(v))
        return const * np.sum(w * vals)

    return f.multiply(mult)


# ---------------------------------------------------------------------------
# operator paths and fractional integrals


@dataclass(frozen=True)
class OperatorPath:
    """A map ``r -> array`` sampled on an increasing radial grid.

    If ``func`` is given it is the exact evaluator and the samples are only
    a record; otherwise values between samples come from a cubic spline.
    ``derivative(r, m)`` may supply exact radial derivatives.
    """

    r_grid: np.ndarray
    values: np.ndarray
    func: Callable[[np.ndarray], np.ndarray] | None = None
    derivative: Callable[[np.ndarray, int], np.ndarray] | None = None

    def __post_init__(self):
        r = np.asarray(self.r_grid, dtype=float)
        v = np.asarray(self.values)
        if r.ndim != 1 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ParameterError("r_grid must be strictly increasing and positive")
        if v.shape[0] != r.size:
            raise ParameterError(f"values have {v.shape[0]} samples for {r.size} radii")
        if not np.all(np.isfinite(v)):
            raise ParameterError("path values must be finite")
        object.__setattr__(self, "r_grid", r)
        object.__setattr__(self, "values", v)

    @staticmethod
    def default_grid(count: int = 256, r_min: float = 1e-3, r_max: float = 50.0) -> np.ndarray:
        return np.geomspace(r_min, r_max, count)

    @classmethod
    def from_function(cls, func, r_grid=None, derivative=None) -> "OperatorPath":
        r_grid = cls.default_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
        return cls(r_grid, np.asarray(func(r_grid)), func=func, derivative=derivative)

    @property
    def value_shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]

    def _spline(self) -> CubicSpline:
        spline = self.__dict__.get("_spline_cache")
        if spline is None:
            spline = CubicSpline(self.r_grid, self.values, axis=0)
            object.__setattr__(self, "_spline_cache", spline)
        return spline

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(r))
        return self._spline()(r)

    def diff(self, r, m: int = 1) -> np.ndarray:
        """``d^m F / dr^m`` at ``r``."""
        r = np.asarray(r, dtype=float)
        if self.derivative is not None:
            return np.asarray(self.derivative(r, m))
        if self.func is None:
            return self._spline()(r, m)
        return _richardson_derivative(self.func, r, m)


def _richardson_derivative(func, r: np.ndarray, m: int) -> np.ndarray:
    """Central differences of order ``m`` with one Richardson step."""
    stencils = {
        1: ([-1, 1], [-0.5, 0.5]),
        2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
        3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
        4: ([-2, -1, 0, 1, 2], [1.0, -4.0, 6.0, -4.0, 1.0]),
    }
    if m not in stencils:
        raise ParameterError(f"finite-difference derivative order must be in 1..4, got {m}")
    offsets, weights = stencils[m]
    h = np.maximum(1e-3, 1e-2 * np.abs(r)) if m > 1 else np.maximum(1e-4, 1e-3 * np.abs(r))

    def d(step):
        acc = 0.0
        for off, w in zip(offsets, weights):
            acc = acc + w * np.asarray(func(r + off * step))
        extra = np.ndim(acc) - np.ndim(step)
        return acc / np.reshape(step, np.shape(step) + (1,) * extra) ** m

    return (4.0 * d(0.5 * h) - d(h)) / 3.0


def spherical_mean_path(f: SpectralField, r_grid=None) -> tuple[list[SpectralPoint], OperatorPath]:
    """``r -> spherical_mean(f, r)`` as a path of coefficient stacks.

    The values at radius ``r`` have shape ``(Z, d, d)`` in the order of the
    returned points; evaluation and derivatives are exact per spectral point.
    """
    points = f.points
    coeffs = np.array([f.coefficients[z] for z in points]) if points else np.zeros((0, f.fiber_dim, f.fiber_dim))
    n = f.n

    def func(r):
        r = np.asarray(r, dtype=float)
        tab = spherical_mean_multipliers(points, r.ravel(), n).T.reshape(r.shape + (len(points),))
        return tab[..., None, None] * coeffs

    def derivative(r, m):
        r = np.asarray(r, dtype=float)
        tab = np.array([np.asarray(spherical_fn_derivative(z, r.ravel(), n, m), dtype=complex) for z in points])
        return tab.T.reshape(r.shape + (len(points),))[..., None, None] * coeffs

    return points, OperatorPath.from_function(func, r_grid, derivative)


def fractional_integral(path: OperatorPath, a: Order, r: float, nodes: int = 64) -> np.ndarray:
    """Riemann-Liouville integral ``I^a F(r) = (1/Gamma(a)) int_0^r (r-s)^{a-1} F(s) ds``.

    With ``s = r u`` the kernel becomes ``r^a (1-u)^{a-1}``; Gauss-Jacobi
    nodes absorb ``(1-u)^{re(a)-1}`` and the oscillating factor
    ``(1-u)^{i im(a)}`` is applied to the integrand.
    """
    a = _check_order(a, lower=0.0)
    if r <= 0:
        raise ParameterError(f"radius must be > 0, got {r}")
    re_a, im_a = float(np.real(a)), float(np.imag(a))
    scale = np.exp(a * math.log(r) - loggamma(a))
    if not im_a:
        x, w = sp.roots_jacobi(nodes, re_a - 1.0, 0.0)
        u = 0.5 * (x + 1.0)
        vals = path(r * u)
        w = (w * 2.0 ** (-re_a)).reshape((-1,) + (1,) * (vals.ndim - 1))
        return scale * np.sum(w * vals, axis=0)
    # (1-u)^{i im(a)} oscillates without bound at u = 1, so the first two
    # Taylor terms of F(ru) there are integrated exactly and the nodes only
    # see a remainder that vanishes like (1-u)^2.
    g1 = np.asarray(path(np.asarray(r, dtype=float)))
    dg1 = r * np.asarray(path.diff(np.asarray(r, dtype=float), 1))
    x, w = sp.roots_jacobi(nodes, re_a + 1.0, 0.0)
    u = 0.5 * (x + 1.0)
    vals = path(r * u)
    shape = (-1,) + (1,) * (vals.ndim - 1)
    one_minus = (1.0 - u).reshape(shape)
    rem = (vals - g1 + dg1 * one_minus) / one_minus**2
    w = (w * 2.0 ** (-re_a - 2.0) * (1.0 - u) ** (1j * im_a)).reshape(shape)
    return scale * (g1 / a - dg1 / (a + 1.0) + np.sum(w * rem, axis=0))


def normalized_fractional(path: OperatorPath, a: Order, r: float, nodes: int = 64) -> np.ndarray:
    """``M^a F(r) = r^{-a} I^a F(r)``.

    ``a = 0`` is the identity and ``a = -k`` for a positive integer ``k``
    is ``r^k F^{(k)}(r)``.  Other orders need ``re(a) > 0``.
    """
    if a == 0:
        return path(np.asarray(r, dtype=float))
    if np.imag(a) == 0 and np.real(a) < 0 and float(np.real(a)).is_integer():
        k = int(-np.real(a))
        return r**k * path.diff(np.asarray(r, dtype=float), k)
    return r ** (-a) * fractional_integral(path, a, r, nodes)


# ---------------------------------------------------------------------------
# g-functions


def _laguerre_g_integral(k: int, n: int, m: int) -> float:
    """``int_0^inf rho^{2m-1} |d^m/drho psi^{n-1}_k(rho)|^2 d rho`` (scale invariant)."""
    if m == 1:
        # x = rho^2/2: integrand |psi'(sqrt(2x))|^2 dx, polynomial times e^{-x}
        Q = k + 8
        x, w = sp.roots_genlaguerre(Q, 0.0)
        vals = np.abs(psi_derivative(k, float(n - 1), np.sqrt(2.0 * x))) ** 2
        return float(np.sum(np.exp(np.log(w) + x) * vals))
    zeta = SpectralPoint.laguerre(1.0, k)
    edge = math.sqrt(2.0 * (4 * k + 2 * n + 80))
    return _panel_integral(lambda s: s ** (2 * m - 1) * np.abs(spherical_fn_derivative(zeta, s, n, m)) ** 2, 0.0, edge, 2.0)


def _panel_integral(fn, lo: float, hi: float, width: float, order: int = 24) -> float:
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.arange(lo, hi + width, width)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * (x + 1.0) + a
        total += 0.5 * (b - a) * float(np.sum(w * fn(s)))
    return total


def _bessel_g_integral(n: int, m: int, r_max: float | None = None) -> float:
    """``int_0^inf x^{2m-1} |d^m/dx eta_1(x)|^2 dx`` for the Bessel kernel of ``H^n``."""
    nu = n - 1
    if m == 1:
        # (2^nu nu!)^2 int J_{nu+1}^2 x^{1-2nu} dx by the Weber-Schafheitlin formula
        lam = 2.0 * nu - 1.0
        mu = nu + 1.0
        val = math.exp(
            math.lgamma(lam) + math.lgamma(mu + 0.5 * (1 - lam))
            - lam * math.log(2.0) - 2 * math.lgamma(0.5 * (1 + lam)) - math.lgamma(mu + 0.5 * (1 + lam))
        )
        return (2.0**nu * math.factorial(nu)) ** 2 * val
    zeta = SpectralPoint.bessel(1.0)
    R = 400.0 if r_max is None else r_max
    body = _panel_integral(lambda s: s ** (2 * m - 1) * np.abs(spherical_fn_derivative(zeta, s, n, m)) ** 2, 0.0, R, 1.0)
    amp2 = (2.0**nu * math.factorial(nu)) ** 2 * 2.0 / math.pi
    tail = 0.5 * amp2 * R ** (2 * m - 1 - 2 * nu) / (2 * nu + 1 - 2 * m)
    return body + tail


def spectral_derivative_integral(zeta: SpectralPoint, n: int, m: int = 1) -> float:
    """``int_0^inf r^{2m-1} |d^m/dr^m phi_zeta(r)|^2 dr``.

    The integral is invariant under dilation of ``phi_zeta``, so it depends
    on ``k`` alone for Laguerre points and not at all on ``u``.
    """
    if not 1 <= m <= max(n - 1, 1) or m > 4:
        raise ParameterError(f"derivative order m must lie in [1, n-1], got m={m}, n={n}")
    if zeta.is_trivial:
        return 0.0
    if zeta.is_bessel:
        return _bessel_g_integral(n, m)
    return _laguerre_g_integral(zeta.k, n, m)


@dataclass
class GFunctionResult:
    norm: float
    gram: np.ndarray  # sum_zeta w_zeta G(zeta) c^* c, a positive d x d matrix
    integrals: dict[SpectralPoint, float]


def g_function(f: SpectralField, m: int = 1) -> GFunctionResult:
    """Littlewood-Paley square function of the spherical means.

    ``||g_m(f)||_2^2 = sum_zeta w_zeta G_m(zeta) tr(c^* c)`` where ``G_m`` is
    :func:`spectral_derivative_integral`.  The returned ``gram`` integrates
    ``g_m(f)^2`` over the group, leaving a Hermitian ``d x d`` matrix.
    """
    n = f.n
    if not 1 <= m <= n - 1:
        raise ParameterError(f"g-function order must lie in [1, n-1] = [1, {n - 1}], got {m}")
    d = f.fiber_dim
    gram = np.zeros((d, d), dtype=complex)
    integrals = {}
    cache: dict[tuple, float] = {}
    for z, c in f.coefficients.items():
        key = (z.kind, z.k)
        if key not in cache:
            cache[key] = spectral_derivative_integral(z, n, m)
        integrals[z] = cache[key]
        gram += f.weights[z] * integrals[z] * (c.conj().T @ c)
    gram = 0.5 * (gram + gram.conj().T)
    return GFunctionResult(math.sqrt(max(float(np.real(np.trace(gram))), 0.0)), gram, integrals)


# ---------------------------------------------------------------------------
# dyadic decomposition


def dyadic_block(zeta: SpectralPoint) -> int | None:
    """Index ``j`` with ``|lam| k in [2^j, 2^{j+1})``; ``-1`` for ``k = 0``.

    Non-Laguerre points belong to no block.  Points with ``0 < |lam| k < 1``
    (possible only for non-integer ``lam``) are put in block 0.
    """
    if not zeta.is_laguerre:
        return None
    if zeta.k == 0:
        return -1
    return max(0, math.floor(math.log2(abs(zeta.lam) * zeta.k)))


def dyadic_projection(f: SpectralField, j: int) -> SpectralField:
    """Restriction of the Laguerre mass to dyadic block ``j >= -1``."""
    if j < -1:
        raise ParameterError(f"dyadic index must be >= -1, got {j}")
    return f.restrict(lambda z: dyadic_block(z) == j)

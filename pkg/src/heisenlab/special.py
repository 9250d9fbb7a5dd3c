"""Scalar special functions: Laguerre polynomials and functions, Bessel
kernels, and the spherical functions of the Heisenberg group.

All evaluators are vectorised over the radial argument and accept a complex
Laguerre order wherever the underlying formula makes sense.  Laguerre
polynomials are computed by the three-term recurrence with a running
power-of-two rescaling, so that ``psi`` stays finite for large ``k`` and
``r`` even when ``L^a_k`` itself would overflow a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special as sp

K_MAX = 1024

# rescale the recurrence whenever a magnitude exceeds 2**_RESCALE_EXP
_RESCALE_EXP = 500
# below this |x| the Bessel kernel uses its power series
BESSEL_SERIES_RADIUS = 1.0

Order = Union[float, complex]


class ParameterError(ValueError):
    """Raised when an argument lies outside the domain of an evaluator."""


# ---------------------------------------------------------------------------
# spectral points


@dataclass(frozen=True)
class SpectralPoint:
    """A point of the Gelfand spectrum.

    ``kind`` is one of ``"laguerre"`` (parameters ``lam != 0`` and integer
    ``k >= 0``), ``"bessel"`` (parameter ``u > 0``) or ``"trivial"``.
    Instances are hashable and compare by value, so they serve as keys of
    spectral coefficient maps.
    """

    kind: str
    lam: float = 0.0
    k: int = 0
    u: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "laguerre":
            if self.lam == 0 or not math.isfinite(self.lam):
                raise ParameterError(f"Laguerre point needs finite lam != 0, got {self.lam}")
            if int(self.k) != self.k or self.k < 0:
                raise ParameterError(f"Laguerre point needs integer k >= 0, got {self.k}")
        elif self.kind == "bessel":
            if not (self.u > 0 and math.isfinite(self.u)):
                raise ParameterError(f"Bessel point needs u > 0, got {self.u}")
        elif self.kind != "trivial":
            raise ParameterError(f"unknown spectral kind {self.kind!r}")

    @classmethod
    def laguerre(cls, lam: float, k: int) -> "SpectralPoint":
        return cls("laguerre", lam=float(lam), k=int(k))

    @classmethod
    def bessel(cls, u: float) -> "SpectralPoint":
        return cls("bessel", u=float(u))

    @classmethod
    def trivial(cls) -> "SpectralPoint":
        return cls("trivial")

    @property
    def is_laguerre(self) -> bool:
        return self.kind == "laguerre"

    @property
    def is_bessel(self) -> bool:
        return self.kind == "bessel"

    @property
    def is_trivial(self) -> bool:
        return self.kind == "trivial"

    def sort_key(self) -> tuple:
        order = {"trivial": 0, "bessel": 1, "laguerre": 2}[self.kind]
        return (order, self.lam, self.k, self.u)

    def __repr__(self) -> str:
        if self.kind == "laguerre":
            return f"Laguerre(lam={self.lam:g}, k={self.k})"
        if self.kind == "bessel":
            return f"Bessel(u={self.u:g})"
        return "Trivial()"


# ---------------------------------------------------------------------------
# helpers


def _check_order(a: Order, lower: float = -1.0) -> Order:
    if isinstance(a, complex) and a.imag == 0:
        a = a.real
    if np.real(a) <= lower:
        raise ParameterError(f"order must satisfy re(a) > {lower}, got {a}")
    return a


def _check_k(k: int) -> int:
    if int(k) != k or k < 0:
        raise ParameterError(f"degree k must be a nonnegative integer, got {k}")
    if k > K_MAX:
        raise ParameterError(f"degree k={k} exceeds K_MAX={K_MAX}")
    return int(k)


def loggamma(z: Order) -> Order:
    """log Gamma on the principal branch; real for real positive ``z``."""
    if isinstance(z, complex):
        return complex(sp.loggamma(z))
    if z > 0:
        return float(sp.gammaln(z))
    return complex(sp.loggamma(complex(z)))


def gamma_ratio(k: int, a: Order) -> Order:
    """``Gamma(k+1) Gamma(a+1) / Gamma(k+a+1)``, the normaliser of ``psi``."""
    return np.exp(loggamma(k + 1.0) + loggamma(a + 1.0) - loggamma(k + a + 1.0))


def _laguerre_scaled(k: int, a: Order, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(v, e)`` with ``L^a_k(x) = v * exp(e)`` elementwise."""
    x = np.asarray(x, dtype=float)
    dtype = complex if isinstance(a, complex) else float
    logscale = np.zeros(x.shape)
    p0 = np.ones(x.shape, dtype=dtype)
    if k == 0:
        return p0, logscale
    p1 = (1.0 + a - x).astype(dtype)
    big = 2.0**_RESCALE_EXP
    for j in range(1, k):
        p0, p1 = p1, ((2 * j + 1 + a - x) * p1 - (j + a) * p0) / (j + 1)
        over = np.abs(p1) > big
        if np.any(over):
            p0 = np.where(over, p0 / big, p0)
            p1 = np.where(over, p1 / big, p1)
            logscale = logscale + over * (_RESCALE_EXP * math.log(2.0))
    return p1, logscale


def _as_output(values: np.ndarray, like) -> np.ndarray | float | complex:
    if np.ndim(like) == 0:
        return values.reshape(()).item()
    return values


# ---------------------------------------------------------------------------
# Laguerre family


def laguerre_poly(k: int, a: Order, r):
    """Generalised Laguerre polynomial ``L^a_k(r)`` by upward recurrence.

    Parameters
    ----------
    k : int
        Degree, ``0 <= k <= K_MAX``.
    a : float or complex
        Type, ``re(a) > -1``.
    r : float or array_like
        Argument(s), ``r >= 0``.
    """
    k = _check_k(k)
    a = _check_order(a)
    x = np.asarray(r, dtype=float)
    v, e = _laguerre_scaled(k, a, x)
    return _as_output(v * np.exp(e), r)


def laguerre_poly_derivative(k: int, a: Order, r):
    """``d/dr L^a_k(r) = -L^{a+1}_{k-1}(r)`` (zero for ``k = 0``)."""
    k = _check_k(k)
    a = _check_order(a)
    x = np.asarray(r, dtype=float)
    if k == 0:
        return _as_output(np.zeros(x.shape, dtype=complex if isinstance(a, complex) else float), r)
    v, e = _laguerre_scaled(k - 1, a + 1, x)
    return _as_output(-v * np.exp(e), r)


def psi(k: int, a: Order, r):
    r"""Normalised Laguerre function

    .. math:: \psi^a_k(r) = \frac{\Gamma(k+1)\Gamma(a+1)}{\Gamma(k+a+1)}
              L^a_k(r^2/2)\, e^{-r^2/4},

    with ``psi(k, a, 0) == 1`` exactly.
    """
    k = _check_k(k)
    a = _check_order(a)
    rr = np.asarray(r, dtype=float)
    x = 0.5 * rr * rr
    v, e = _laguerre_scaled(k, a, x)
    lognorm = loggamma(k + 1.0) + loggamma(a + 1.0) - loggamma(k + a + 1.0)
    out = v * np.exp(lognorm + e - 0.5 * x)
    out = np.where(rr == 0, 1.0, out)
    return _as_output(out, r)


def log_abs_psi(k: int, a: Order, r) -> np.ndarray:
    """``log|psi^a_k(r)|`` without underflow (``-inf`` at exact zeros)."""
    k = _check_k(k)
    a = _check_order(a)
    rr = np.asarray(r, dtype=float)
    x = 0.5 * rr * rr
    v, e = _laguerre_scaled(k, a, x)
    lognorm = np.real(loggamma(k + 1.0) + loggamma(a + 1.0) - loggamma(k + a + 1.0))
    with np.errstate(divide="ignore"):
        out = np.log(np.abs(v)) + e + lognorm - 0.5 * x
    return np.where(rr == 0, 0.0, out)


def psi_derivative(k: int, a: Order, r):
    """``d/dr psi^a_k(r)``; odd in ``r``, so negative arguments are allowed."""
    k = _check_k(k)
    a = _check_order(a)
    rr = np.asarray(r, dtype=float)
    x = 0.5 * rr * rr
    lognorm = loggamma(k + 1.0) + loggamma(a + 1.0) - loggamma(k + a + 1.0)
    v0, e0 = _laguerre_scaled(k, a, x)
    total = -0.5 * v0 * np.exp(lognorm + e0 - 0.5 * x)
    if k > 0:
        v1, e1 = _laguerre_scaled(k - 1, a + 1, x)
        total = total - v1 * np.exp(lognorm + e1 - 0.5 * x)
    return _as_output(rr * total, r)


def script_l(k: int, delta: float, r):
    r"""Laguerre function
    :math:`(\Gamma(k+1)/\Gamma(k+\delta+1))^{1/2} e^{-r/2} r^{\delta/2} L^\delta_k(r)`.
    """
    k = _check_k(k)
    if delta < 0:
        raise ParameterError(f"delta must be >= 0, got {delta}")
    x = np.asarray(r, dtype=float)
    v, e = _laguerre_scaled(k, float(delta), x)
    lognorm = 0.5 * (sp.gammaln(k + 1.0) - sp.gammaln(k + delta + 1.0))
    with np.errstate(divide="ignore"):
        logpow = np.where(x > 0, 0.5 * delta * np.log(np.where(x > 0, x, 1.0)), 0.0)
    out = v * np.exp(lognorm + e - 0.5 * x + logpow)
    if delta > 0:
        out = np.where(x == 0, 0.0, out)
    return _as_output(out, r)


# ---------------------------------------------------------------------------
# Bessel kernels


def _eta(nu: int, x: np.ndarray) -> np.ndarray:
    """``2^nu nu! J_nu(x) / x^nu`` for real ``x`` (even in ``x``)."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty(x.shape)
    small = x <= BESSEL_SERIES_RADIUS
    if np.any(small):
        xs = x[small]
        q = -(0.5 * xs) ** 2
        term = np.ones_like(xs)
        acc = np.ones_like(xs)
        for m in range(1, 25):
            term = term * q / (m * (m + nu))
            acc = acc + term
        out[small] = acc
    if np.any(~small):
        xl = x[~small]
        lognorm = nu * math.log(2.0) + math.lgamma(nu + 1.0)
        out[~small] = sp.jv(nu, xl) * np.exp(lognorm - nu * np.log(xl))
    return out


def bessel_eta(u: float, r, n: int):
    """Bessel spherical function ``eta_u`` at ``|z| = r`` on ``H^n``.

    Equal to ``2^{n-1}(n-1)! J_{n-1}(ur)/(ur)^{n-1}``; continuous at
    ``r = 0`` with value 1.
    """
    if not u > 0:
        raise ParameterError(f"Bessel parameter u must be > 0, got {u}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    x = u * np.asarray(r, dtype=float)
    return _as_output(_eta(n - 1, x), r)


def bessel_eta_derivative(u: float, r, n: int):
    """``d/dr eta_u(r)``, using ``eta_nu'(x) = -x/(2(nu+1)) eta_{nu+1}(x)``."""
    if not u > 0:
        raise ParameterError(f"Bessel parameter u must be > 0, got {u}")
    nu = n - 1
    x = u * np.asarray(r, dtype=float)
    out = -u * x / (2.0 * (nu + 1)) * _eta(nu + 1, x)
    return _as_output(out, r)


# ---------------------------------------------------------------------------
# spherical functions


def spherical_fn(zeta: SpectralPoint, r, n: int):
    """Spherical function ``phi_zeta`` evaluated on the sphere of radius ``r``.

    Laguerre points give ``psi^{n-1}_k(sqrt|lam| r)``, Bessel points give
    ``eta_u(r)`` and the trivial character is identically 1.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rr = np.asarray(r, dtype=float)
    if zeta.is_trivial:
        return _as_output(np.ones(rr.shape), r)
    if zeta.is_bessel:
        return bessel_eta(zeta.u, r, n)
    return psi(zeta.k, float(n - 1), math.sqrt(abs(zeta.lam)) * rr)


def _first_derivative(zeta: SpectralPoint, r: np.ndarray, n: int) -> np.ndarray:
    if zeta.is_trivial:
        return np.zeros(r.shape)
    if zeta.is_bessel:
        return np.asarray(bessel_eta_derivative(zeta.u, r, n))
    s = math.sqrt(abs(zeta.lam))
    return s * np.asarray(psi_derivative(zeta.k, float(n - 1), s * r))


# central-difference stencils (offsets, weights) for derivative orders 1..3
_STENCILS = {
    1: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    2: (np.array([-1, 0, 1]), np.array([1.0, -2.0, 1.0])),
    3: (np.array([-2, -1, 1, 2]), np.array([-0.5, 1.0, -1.0, 0.5])),
}


def spherical_fn_derivative(zeta: SpectralPoint, r, n: int, m: int = 1):
    """``d^m/dr^m phi_zeta(r)`` for ``1 <= m <= 4``.

    ``m = 1`` is analytic.  Higher orders differentiate the analytic first
    derivative by central differences with one Richardson step, using the
    base step ``h = max(1e-4, 1e-3 r)``.  The spherical functions are even in
    ``r``, so stencils may reach across the origin.
    """
    if not 1 <= m <= 4:
        raise ParameterError(f"derivative order m must be in [1, 4], got {m}")
    rr = np.asarray(r, dtype=float)
    if m == 1:
        return _as_output(_first_derivative(zeta, rr, n), r)
    q = m - 1
    offsets, weights = _STENCILS[q]
    h = np.maximum(1e-4, 1e-3 * np.abs(rr))

    def diff(step):
        acc = np.zeros(rr.shape, dtype=float)
        for off, w in zip(offsets, weights):
            acc = acc + w * _first_derivative(zeta, rr + off * step, n)
        return acc / step**q

    coarse, fine = diff(h), diff(0.5 * h)
    return _as_output((4.0 * fine - coarse) / 3.0, r)

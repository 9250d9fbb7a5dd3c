"""Group arithmetic, sphere quadrature and radial transforms on ``H^n``.

Physical fields are K_n-radial matrix-valued functions on the reduced
Heisenberg group, sampled on a radial grid in ``|z|`` times a uniform grid of
the central circle ``[0, 2 pi)``.  The direct sphere-quadrature convolution in
this module is the oracle for the spectral-multiplier path in
:mod:`heisenlab.spectral`.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special as sp
from scipy.interpolate import CubicSpline

from .special import ParameterError, _laguerre_scaled, bessel_eta

CENTER_PERIOD = 2.0 * math.pi
FIELD_FORMAT_VERSION = 1
_MAGIC = b"HLFIELD\0"


class AliasingError(ValueError):
    """Requested central frequency is not resolved by the center samples."""


class TailEnergyError(ValueError):
    """A profile is not representable within the requested number of modes."""

    def __init__(self, message: str, tail: float):
        super().__init__(message)
        self.tail = tail


class DecayError(ValueError):
    """A profile does not decay at the edge of its radial grid."""


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere ``S^{2n-1}`` in ``C^n = R^{2n}``."""
    return 2.0 * math.pi**n / math.factorial(n - 1)


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class BesselGrid:
    """Fourier-Bessel grid on the ball of radius ``radius`` in ``R^{2n}``.

    Nodes are ``u_m = j_{n-1,m} / radius``; ``weights[m]`` is the inverse
    squared norm ``1/N_m`` of ``eta_{u_m}`` on the ball, so a band-limited
    radial profile is ``sum_m b_m eta_{u_m}`` with ``b_m = <f, eta_m> / N_m``.
    """

    n: int
    radius: float
    count: int

    @property
    def nodes(self) -> np.ndarray:
        return sp.jn_zeros(self.n - 1, self.count) / self.radius

    @property
    def norms(self) -> np.ndarray:
        return bessel_mode_norm(self.n, self.nodes, self.radius)

    @property
    def weights(self) -> np.ndarray:
        return 1.0 / self.norms


def bessel_mode_norm(n: int, u, radius: float) -> np.ndarray:
    """``int_{|z|<R} eta_u(|z|)^2 dz`` assuming ``J_{n-1}(uR) = 0``."""
    nu = n - 1
    u = np.asarray(u, dtype=float)
    c = (2.0**nu * math.factorial(nu)) ** 2
    return sphere_area(n) * c * u ** (-2.0 * nu) * 0.5 * radius**2 * sp.jv(nu + 1, u * radius) ** 2


@dataclass(frozen=True)
class GeometryConfig:
    """Discretisation of the reduced Heisenberg group ``H^n / Z``.

    ``radial_nodes`` / ``radial_weights`` form a quadrature for
    ``int_0^inf g(rho) d rho``; the measure of ``C^n`` restricted to radial
    functions is obtained through :attr:`volume_weights`.
    """

    n: int
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    center_samples: int
    lambda_set: tuple[int, ...]
    k_max: int
    bessel_radius: float
    bessel_count: int

    def __post_init__(self):
        rho = np.asarray(self.radial_nodes, dtype=float)
        w = np.asarray(self.radial_weights, dtype=float)
        object.__setattr__(self, "radial_nodes", rho)
        object.__setattr__(self, "radial_weights", w)
        object.__setattr__(self, "lambda_set", tuple(int(v) for v in self.lambda_set))
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if rho.ndim != 1 or rho.size < 2 or np.any(rho <= 0) or np.any(np.diff(rho) <= 0):
            raise ParameterError("radial nodes must be increasing positive reals")
        if w.shape != rho.shape or np.any(w <= 0):
            raise ParameterError("radial weights must be positive and match the nodes")
        if any(v == 0 for v in self.lambda_set):
            raise ParameterError("lambda_set must not contain 0")
        lmax = max((abs(v) for v in self.lambda_set), default=0)
        if self.center_samples % 2 == 0 or self.center_samples < 2 * lmax + 1:
            raise ParameterError(
                f"center_samples must be odd and >= 2 max|lambda| + 1 = {2 * lmax + 1}, "
                f"got {self.center_samples}"
            )

    @classmethod
    def uniform(
        cls,
        n: int = 2,
        rho_max: float = 16.0,
        step: float = 0.2,
        center_samples: int = 9,
        lambda_set: Sequence[int] = (-2, -1, 1, 2),
        k_max: int = 8,
        bessel_radius: float | None = None,
        bessel_count: int = 32,
    ) -> "GeometryConfig":
        """Midpoint radial grid ``rho_i = (i - 1/2) step`` on ``(0, rho_max]``."""
        count = int(round(rho_max / step))
        rho = (np.arange(count) + 0.5) * step
        return cls(
            n=n,
            radial_nodes=rho,
            radial_weights=np.full(count, step),
            center_samples=center_samples,
            lambda_set=tuple(lambda_set),
            k_max=k_max,
            bessel_radius=rho_max if bessel_radius is None else bessel_radius,
            bessel_count=bessel_count,
        )

    @property
    def center_nodes(self) -> np.ndarray:
        return CENTER_PERIOD * np.arange(self.center_samples) / self.center_samples

    @property
    def center_weight(self) -> float:
        return CENTER_PERIOD / self.center_samples

    @property
    def volume_weights(self) -> np.ndarray:
        """Weights for ``int_{C^n} g(|z|) dz`` at the radial nodes."""
        rho = self.radial_nodes
        return sphere_area(self.n) * rho ** (2 * self.n - 1) * self.radial_weights

    @property
    def grid_weights(self) -> np.ndarray:
        """Trace weights of the (radial, center) grid, shape ``(P, T)``."""
        return np.outer(self.volume_weights, np.full(self.center_samples, self.center_weight))

    @property
    def bessel_grid(self) -> BesselGrid:
        return BesselGrid(self.n, self.bessel_radius, self.bessel_count)

    @property
    def max_frequency(self) -> int:
        return (self.center_samples - 1) // 2

    def refined(self, factor: int = 2) -> "GeometryConfig":
        """Same extent with a radial step divided by ``factor`` (uniform grids only)."""
        step = self.radial_weights[0]
        if not np.allclose(self.radial_weights, step):
            raise ParameterError("refined() requires a uniform radial grid")
        rho_max = self.radial_nodes[-1] + 0.5 * step
        return GeometryConfig.uniform(
            n=self.n,
            rho_max=rho_max,
            step=step / factor,
            center_samples=self.center_samples,
            lambda_set=self.lambda_set,
            k_max=self.k_max,
            bessel_radius=self.bessel_radius,
            bessel_count=self.bessel_count,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "radial_nodes": self.radial_nodes.tolist(),
            "radial_weights": self.radial_weights.tolist(),
            "center_samples": self.center_samples,
            "center_period": CENTER_PERIOD,
            "lambda_set": list(self.lambda_set),
            "k_max": self.k_max,
            "bessel_radius": self.bessel_radius,
            "bessel_count": self.bessel_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeometryConfig":
        data = dict(data)
        data.pop("center_period", None)
        return cls(**data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeometryConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(json.dumps(self.to_dict(), sort_keys=True))


# ---------------------------------------------------------------------------
# group law


@dataclass(frozen=True)
class GroupElement:
    """Element ``(z, t)`` of ``H^n``; ``z`` is a complex n-vector."""

    z: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=complex)))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.z.size

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(np.zeros(n, dtype=complex), 0.0)

    def reduce(self) -> "GroupElement":
        t = self.t % CENTER_PERIOD
        # a tiny negative t rounds up to exactly the period
        return GroupElement(self.z, 0.0 if t >= CENTER_PERIOD else t)


def symplectic(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``Im(z . conj(w))`` along the last axis."""
    return np.imag(np.sum(z * np.conj(w), axis=-1))


def group_op(g: GroupElement, h: GroupElement, reduced: bool = False) -> GroupElement:
    """``(z, t)(w, s) = (z + w, t + s + Im(z . conj w) / 2)``."""
    if g.n != h.n:
        raise ParameterError(f"dimension mismatch: {g.n} vs {h.n}")
    out = GroupElement(g.z + h.z, g.t + h.t + 0.5 * float(symplectic(g.z, h.z)))
    return out.reduce() if reduced else out


def group_inv(g: GroupElement, reduced: bool = False) -> GroupElement:
    out = GroupElement(-g.z, -g.t)
    return out.reduce() if reduced else out


# ---------------------------------------------------------------------------
# sphere quadrature


@dataclass(frozen=True)
class SphereRule:
    """Quadrature for the normalised surface measure on ``{|w| = r}`` in ``C^n``."""

    points: np.ndarray  # (Q, n) complex
    weights: np.ndarray  # (Q,)

    def elements(self) -> list[tuple[GroupElement, float]]:
        return [(GroupElement(p, 0.0), float(w)) for p, w in zip(self.points, self.weights)]


def _angle_count(order: int) -> int:
    return 2 * (order // 2 + 1)


def sphere_quadrature(n: int, r: float, order: int) -> SphereRule:
    """Product Gauss rule on ``S^{2n-1}_r``, exact up to degree ``order``.

    For ``n = 2`` the sphere is parametrised by
    ``w = r (sqrt(1-s) e^{i a}, sqrt(s) e^{i b})`` in which the normalised
    surface measure is ``ds da db / (2 pi)^2``; ``s`` gets Gauss-Legendre
    nodes and both angles uniform nodes (an even number, so the rule is
    antipodally symmetric).
    """
    if n not in (1, 2):
        raise ParameterError(f"sphere quadrature supports n in (1, 2), got {n}")
    if order < 8:
        raise ParameterError(f"order must be >= 8, got {order}")
    if not r > 0:
        raise ParameterError(f"radius must be > 0, got {r}")
    m = _angle_count(order)
    theta = 2.0 * math.pi * np.arange(m) / m
    if n == 1:
        pts = (r * np.exp(1j * theta))[:, None]
        return SphereRule(pts, np.full(m, 1.0 / m))
    x, wx = np.polynomial.legendre.leggauss(order // 2 + 1)
    s, ws = 0.5 * (x + 1.0), 0.5 * wx
    S, A, B = np.meshgrid(s, theta, theta, indexing="ij")
    W = np.broadcast_to(ws[:, None, None] / m**2, S.shape)
    pts = np.stack([r * np.sqrt(1.0 - S) * np.exp(1j * A), r * np.sqrt(S) * np.exp(1j * B)], axis=-1)
    return SphereRule(pts.reshape(-1, 2), W.reshape(-1).copy())


def _first_coordinate_rule(n: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Marginal of the unit-sphere rule on the first coordinate.

    Returns ``(w1, rest2, weights)`` where ``rest2 = |w'|^2``; integrands of
    radial functions at ``z = rho e_1`` depend on ``w`` only through these.
    """
    m = _angle_count(order)
    theta = 2.0 * math.pi * np.arange(m) / m
    if n == 1:
        return np.exp(1j * theta), np.zeros(m), np.full(m, 1.0 / m)
    x, wx = np.polynomial.legendre.leggauss(order // 2 + 1)
    s, ws = 0.5 * (x + 1.0), 0.5 * wx
    S, A = np.meshgrid(s, theta, indexing="ij")
    W = ws[:, None] / m * np.ones_like(A)
    return (np.sqrt(1.0 - S) * np.exp(1j * A)).ravel(), S.ravel(), W.ravel()


# ---------------------------------------------------------------------------
# fields


def radial_interpolant(rho: np.ndarray, values: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Cubic interpolant of a radial profile, even in ``rho``, zero beyond the grid.

    ``values`` has the radial index first; trailing axes are carried along.
    """
    rho = np.asarray(rho, dtype=float)
    values = np.asarray(values)
    xs = np.concatenate([-rho[::-1], rho])
    ys = np.concatenate([values[::-1], values], axis=0)
    spline = CubicSpline(xs, ys, axis=0)
    edge = rho[-1]

    def evaluate(x):
        x = np.abs(np.asarray(x, dtype=float))
        out = spline(x)
        mask = x > edge
        if np.any(mask):
            out = np.where(mask.reshape(mask.shape + (1,) * (out.ndim - mask.ndim)), 0.0, out)
        return out

    return evaluate


@dataclass(frozen=True)
class PhysicalField:
    """Radial ``d x d``-matrix field on the (radial x center) grid.

    ``values`` has shape ``(P, T, d, d)``.  When ``hermitian`` is set every
    fibre is checked to be Hermitian to ``1e-12``.
    """

    geometry: GeometryConfig
    values: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        g = self.geometry
        if v.ndim != 4 or v.shape[:2] != (g.radial_nodes.size, g.center_samples) or v.shape[2] != v.shape[3]:
            raise ParameterError(
                f"values must have shape (P, T, d, d) = ({g.radial_nodes.size}, {g.center_samples}, d, d), "
                f"got {v.shape}"
            )
        object.__setattr__(self, "values", v)
        if self.hermitian:
            dev = np.max(np.abs(v - np.conj(np.swapaxes(v, -1, -2))), initial=0.0)
            scale = max(np.max(np.abs(v), initial=0.0), 1e-300)
            if dev > 1e-12 * scale:
                raise ParameterError(f"field is not Hermitian (deviation {dev:.3e})")

    @property
    def fiber_dim(self) -> int:
        return self.values.shape[-1]

    @classmethod
    def constant(cls, geometry: GeometryConfig, matrix) -> "PhysicalField":
        m = np.asarray(matrix, dtype=complex)
        vals = np.broadcast_to(m, (geometry.radial_nodes.size, geometry.center_samples) + m.shape)
        return cls(geometry, vals.copy(), hermitian=np.allclose(m, m.conj().T))

    def l2_norm(self) -> float:
        """Grid L_2 norm under the trace ``sum_g w_g tr(x_g^* x_g)``."""
        w = self.geometry.grid_weights
        return float(np.sqrt(np.sum(w * np.sum(np.abs(self.values) ** 2, axis=(-1, -2)))))

    def __add__(self, other: "PhysicalField") -> "PhysicalField":
        return PhysicalField(self.geometry, self.values + other.values)

    def __sub__(self, other: "PhysicalField") -> "PhysicalField":
        return PhysicalField(self.geometry, self.values - other.values)

    def scaled(self, c: complex) -> "PhysicalField":
        return PhysicalField(self.geometry, c * self.values)


def partial_fourier(f: PhysicalField, lam: int) -> np.ndarray:
    """``f^lam(rho) = (1/2pi) int_0^{2pi} f(rho, t) e^{i lam t} dt``, shape ``(P, d, d)``."""
    lam = int(lam)
    if abs(lam) > f.geometry.max_frequency:
        raise AliasingError(
            f"|lambda|={abs(lam)} exceeds the resolvable frequency {f.geometry.max_frequency}"
        )
    coeffs = np.fft.ifft(f.values, axis=1)
    return coeffs[:, lam % f.geometry.center_samples]


def center_synthesis(geometry: GeometryConfig, blocks: dict[int, np.ndarray]) -> np.ndarray:
    """Inverse of :func:`partial_fourier`: ``sum_lam f^lam(rho) e^{-i lam t}``."""
    T = geometry.center_samples
    first = next(iter(blocks.values()))
    spec = np.zeros((first.shape[0], T) + first.shape[1:], dtype=complex)
    for lam, block in blocks.items():
        if abs(lam) > geometry.max_frequency:
            raise AliasingError(f"|lambda|={abs(lam)} exceeds {geometry.max_frequency}")
        spec[:, lam % T] += block
    return np.fft.fft(spec, axis=1)


def _frequencies(geometry: GeometryConfig) -> list[int]:
    m = geometry.max_frequency
    return list(range(-m, m + 1))


def _check_edge_decay(values: np.ndarray, tol: float = 1e-10) -> None:
    scale = np.max(np.abs(values), initial=0.0)
    if scale == 0:
        return
    if np.max(np.abs(values[-1])) > tol * scale:
        raise DecayError(
            f"profile does not decay at the grid edge "
            f"(edge/max = {np.max(np.abs(values[-1])) / scale:.2e} > {tol:g})"
        )


def _flat_tail(block: np.ndarray, tol: float = 1e-10) -> np.ndarray | None:
    """Edge value of a profile whose last two samples agree, else ``None``."""
    edge = block[-1]
    scale = np.max(np.abs(block), initial=0.0)
    if scale == 0 or np.max(np.abs(edge)) <= tol * scale:
        return None
    if np.max(np.abs(block[-2] - edge)) <= tol * scale:
        return edge
    return None


def _twisted_sphere_average(
    profile: Callable[[np.ndarray], np.ndarray],
    lam: float,
    rho: np.ndarray,
    r: float,
    n: int,
    order: int,
) -> np.ndarray:
    """``int profile(|z - w|) e^{i lam/2 Im(z.conj w)} d sigma_r(w)`` at ``z = rho e_1``."""
    w1, rest2, wq = _first_coordinate_rule(n, order)
    rho = np.asarray(rho, dtype=float)[:, None]
    diff2 = np.abs(rho - r * w1[None, :]) ** 2 + r * r * rest2[None, :]
    dist = np.sqrt(diff2)
    phase = np.exp(-0.5j * lam * rho * r * np.imag(w1)[None, :])
    vals = profile(dist)
    extra = vals.ndim - 2
    weights = (wq[None, :] * phase).reshape(phase.shape + (1,) * extra)
    return np.sum(weights * vals, axis=1)


def convolve_sigma_direct(f: PhysicalField, r: float, order: int = 64) -> PhysicalField:
    """``(f * sigma_r)(g) = int f(g h^{-1}) d sigma_r(h)`` by sphere quadrature.

    The field is interpolated by cubic splines in ``rho`` and exactly
    (trigonometrically) in ``t``; each central frequency block is then a
    twisted sphere average.  Matrix fibres are convolved entrywise.  Blocks
    must decay at the grid edge, except that a ``t``-independent block may
    level off to a constant, which is carried through exactly.
    """
    g = f.geometry
    if g.n not in (1, 2):
        raise ParameterError("direct convolution supports n in (1, 2)")
    rho = g.radial_nodes
    if not 0 < r <= rho[-1]:
        raise ParameterError(f"radius {r} outside the interpolable range (0, {rho[-1]}]")
    blocks = {}
    for lam in _frequencies(g):
        block = partial_fourier(f, lam)
        if not np.any(block):
            continue
        far = _flat_tail(block) if lam == 0 else None
        if far is not None:
            # constant far field: sigma_r is a probability measure and the
            # lam = 0 phase is 1, so the constant passes through unchanged
            block = block - far
        _check_edge_decay(block)
        interp = radial_interpolant(rho, block)
        blocks[lam] = _twisted_sphere_average(interp, lam, rho, r, g.n, order)
        if far is not None:
            blocks[lam] = blocks[lam] + far
    if not blocks:
        return PhysicalField(g, np.zeros_like(f.values))
    return PhysicalField(g, center_synthesis(g, blocks))


def twisted_convolve(
    g: Callable[[np.ndarray], np.ndarray],
    h: Callable[[np.ndarray], np.ndarray],
    lam: float,
    n: int,
    rho_out: np.ndarray,
    quad_nodes: np.ndarray,
    quad_weights: np.ndarray,
    order: int = 48,
) -> np.ndarray:
    """Radial twisted convolution ``g *_lam h`` evaluated at ``|z| = rho_out``.

    ``g * h (z) = int_{C^n} g(z - w) h(w) e^{i lam/2 Im(z . conj w)} dw`` by a
    product polar rule: ``quad_nodes/quad_weights`` integrate in ``|w|``, the
    sphere rule of the given ``order`` in the direction.  Both profiles are
    callables of the radius.  Intended as an oracle, not for speed.
    """
    if n not in (1, 2):
        raise ParameterError("twisted convolution oracle supports n in (1, 2)")
    quad_nodes = np.asarray(quad_nodes, dtype=float)
    hv = np.asarray(h(quad_nodes))
    if np.max(np.abs(hv[-1])) > 1e-10 * max(np.max(np.abs(hv)), 1e-300):
        raise DecayError("second profile does not decay at the truncation radius")
    area = sphere_area(n)
    acc = None
    for s, ws, hs in zip(quad_nodes, quad_weights, hv):
        avg = _twisted_sphere_average(g, lam, rho_out, s, n, order)
        term = ws * area * s ** (2 * n - 1) * avg * hs
        acc = term if acc is None else acc + term
    return acc


# ---------------------------------------------------------------------------
# Laguerre and Hankel transforms


def laguerre_mode(lam: float, k: int, n: int, rho) -> np.ndarray:
    """Dilated Laguerre function ``phi^lam_k(rho) = L^{n-1}_k(|lam| rho^2/2) e^{-|lam| rho^2/4}``."""
    rho = np.asarray(rho, dtype=float)
    x = 0.5 * abs(lam) * rho * rho
    v, e = _laguerre_scaled(int(k), float(n - 1), x)
    return v * np.exp(e - 0.5 * x)


def laguerre_mode_norm2(lam: float, k: int, n: int) -> float:
    """``int_{C^n} |phi^lam_k|^2 dz = (2 pi / |lam|)^n binom(k+n-1, k)``."""
    return (2.0 * math.pi / abs(lam)) ** n * math.comb(k + n - 1, k)


@dataclass
class LaguerreAnalysis:
    coefficients: np.ndarray  # (K+1, ...)
    tail: float  # relative energy outside the first K+1 modes


def laguerre_analysis(
    profile: Callable[[np.ndarray], np.ndarray],
    lam: float,
    n: int,
    K: int,
    nodes: int | None = None,
    tail_tol: float | None = 1e-8,
) -> LaguerreAnalysis:
    """Coefficients ``c_0..c_K`` with ``profile = sum_k c_k phi^lam_k``.

    Inner products against ``phi^lam_k`` in ``L^2(C^n)`` are computed by
    generalised Gauss-Laguerre quadrature in ``x = |lam| rho^2 / 2``.  The
    relative energy not captured by the first ``K+1`` modes is returned as
    ``tail``; if it exceeds ``tail_tol`` a :class:`TailEnergyError` is raised.
    """
    Q = nodes if nodes is not None else max(2 * K + 16, 48)
    x, w = sp.roots_genlaguerre(Q, n - 1)
    rho = np.sqrt(2.0 * x / abs(lam))
    vals = np.asarray(profile(rho))
    extra = (1,) * (vals.ndim - 1)
    logw = np.log(w)
    coeffs = []
    for k in range(K + 1):
        v, e = _laguerre_scaled(k, float(n - 1), x)
        kern = v * np.exp(logw + e + 0.5 * x)
        ck = np.sum(kern.reshape((-1,) + extra) * vals, axis=0)
        coeffs.append(ck * math.exp(math.lgamma(k + 1) - math.lgamma(k + n)))
    coeffs = np.array(coeffs)
    # energy: int |f|^2 dz = |S| 2^{n-1} |lam|^{-n} int |f|^2 x^{n-1} dx
    energy_w = np.exp(logw + x).reshape((-1,) + extra)
    total = np.sum(energy_w * np.abs(vals) ** 2)
    total *= sphere_area(n) * 2.0 ** (n - 1) / abs(lam) ** n
    captured = sum(
        laguerre_mode_norm2(lam, k, n) * np.sum(np.abs(coeffs[k]) ** 2) for k in range(K + 1)
    )
    tail = float(max(total - captured, 0.0) / total) if total > 0 else 0.0
    if tail_tol is not None and tail > tail_tol:
        raise TailEnergyError(f"tail energy {tail:.3e} exceeds {tail_tol:g} with K={K}", tail)
    return LaguerreAnalysis(coeffs, tail)


def laguerre_synthesis(coefficients: np.ndarray, lam: float, n: int, rho) -> np.ndarray:
    """``sum_k c_k phi^lam_k(rho)``; output shape ``(len(rho),) + c_k.shape``."""
    coefficients = np.asarray(coefficients)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    extra = (1,) * (coefficients.ndim - 1)
    out = np.zeros(rho.shape + coefficients.shape[1:], dtype=np.result_type(coefficients, float))
    for k, ck in enumerate(coefficients):
        out = out + laguerre_mode(lam, k, n, rho).reshape(rho.shape + extra) * ck
    return out


def laguerre_quadrature_nodes(lam: float, n: int, Q: int) -> np.ndarray:
    """Radii of the Gauss-Laguerre nodes used by :func:`laguerre_analysis`."""
    x, _ = sp.roots_genlaguerre(Q, n - 1)
    return np.sqrt(2.0 * x / abs(lam))


def hankel_analysis(
    profile: Callable[[np.ndarray], np.ndarray],
    grid: BesselGrid,
    nodes: int | None = None,
    edge_tol: float = 1e-10,
) -> np.ndarray:
    """Fourier-Bessel coefficients ``b_m`` with ``profile = sum_m b_m eta_{u_m}``.

    ``b_m = <f, eta_{u_m}> / N_m`` with the inner product of ``L^2`` of the
    ball of radius ``grid.radius``, integrated by Gauss-Legendre in ``rho``.
    """
    Q = nodes if nodes is not None else 2 * grid.count + 96
    x, wx = np.polynomial.legendre.leggauss(Q)
    R = grid.radius
    rho = 0.5 * R * (x + 1.0)
    wr = 0.5 * R * wx
    vals = np.asarray(profile(rho))
    scale = np.max(np.abs(vals), initial=0.0)
    edge = np.max(np.abs(np.asarray(profile(np.array([R])))), initial=0.0)
    if scale > 0 and edge > edge_tol * scale:
        raise DecayError(f"profile does not vanish at the ball radius (edge/max = {edge / scale:.2e})")
    extra = (1,) * (vals.ndim - 1)
    n = grid.n
    meas = sphere_area(n) * rho ** (2 * n - 1) * wr
    out = []
    for u, wm in zip(grid.nodes, grid.weights):
        kern = (meas * bessel_eta(u, rho, n)).reshape((-1,) + extra)
        out.append(wm * np.sum(kern * vals, axis=0))
    return np.array(out)


def hankel_synthesis(coefficients: np.ndarray, grid: BesselGrid, rho) -> np.ndarray:
    """``sum_m b_m eta_{u_m}(rho)``."""
    coefficients = np.asarray(coefficients)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    extra = (1,) * (coefficients.ndim - 1)
    out = np.zeros(rho.shape + coefficients.shape[1:], dtype=np.result_type(coefficients, float))
    for u, bm in zip(grid.nodes, coefficients):
        out = out + np.asarray(bessel_eta(u, rho, grid.n)).reshape(rho.shape + extra) * bm
    return out


# ---------------------------------------------------------------------------
# serialization


def save_field(field: PhysicalField, path: str | Path) -> tuple[Path, Path]:
    """Write ``path`` (binary, little endian) and ``path + '.json'`` (geometry)."""
    path = Path(path)
    g = field.geometry
    P, T, d, _ = field.values.shape
    header = _MAGIC + struct.pack("<IIIIII", FIELD_FORMAT_VERSION, g.n, d, P, T, int(field.hermitian))
    body = (
        np.asarray(g.radial_nodes, dtype="<f8").tobytes()
        + np.asarray(g.radial_weights, dtype="<f8").tobytes()
        + np.asarray(field.values, dtype="<c16").tobytes()
    )
    path.write_bytes(header + body)
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(json.dumps({"version": FIELD_FORMAT_VERSION, "geometry": g.to_dict()}, indent=2))
    return path, sidecar


def load_field(path: str | Path) -> PhysicalField:
    path = Path(path)
    raw = path.read_bytes()
    if raw[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path} is not a field container")
    off = len(_MAGIC)
    version, n, d, P, T, herm = struct.unpack_from("<IIIIII", raw, off)
    if version != FIELD_FORMAT_VERSION:
        raise ValueError(f"field format version {version} != supported {FIELD_FORMAT_VERSION}")
    off += struct.calcsize("<IIIIII")
    sidecar = json.loads(path.with_name(path.name + ".json").read_text())
    if sidecar.get("version") != FIELD_FORMAT_VERSION:
        raise ValueError(f"sidecar version {sidecar.get('version')} != {FIELD_FORMAT_VERSION}")
    geometry = GeometryConfig.from_dict(sidecar["geometry"])
    if geometry.n != n or geometry.radial_nodes.size != P or geometry.center_samples != T:
        raise ValueError("binary header disagrees with the geometry sidecar")
    nodes = np.frombuffer(raw, dtype="<f8", count=P, offset=off)
    off += 8 * P
    off += 8 * P  # weights are authoritative in the sidecar
    values = np.frombuffer(raw, dtype="<c16", count=P * T * d * d, offset=off).reshape(P, T, d, d)
    if not np.array_equal(nodes, geometry.radial_nodes):
        raise ValueError("binary radial nodes disagree with the geometry sidecar")
    return PhysicalField(geometry, values.astype(complex), hermitian=bool(herm))

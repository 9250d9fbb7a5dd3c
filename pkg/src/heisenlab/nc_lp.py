"""Noncommutative L_p norms on weighted matrix algebras and maximal norms.

The algebra is ``L_inf(grid) (x) M_d`` with trace
``tau(x) = sum_g w_g tr(x_g)``.  For a self-adjoint family ``x_1..x_N`` the
maximal norm is ``inf{ ||a||_p : -a <= x_i <= a }``; the program separates
over grid points and is solved for all fibres at once by a log-det barrier
method with BFGS inner iterations.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .heisenberg import GeometryConfig, PhysicalField
from .special import ParameterError


class SolverError(RuntimeError):
    """The maximal-norm solver did not reach its tolerance.

    Carries the last iterate (``certificate``) and the barrier gap.
    """

    def __init__(self, message: str, certificate: "AlgebraElement | None" = None, gap: float = math.nan):
        super().__init__(message)
        self.certificate = certificate
        self.gap = gap


@dataclass(frozen=True, eq=False)
class TracialAlgebra:
    """``d x d`` matrices over ``G`` weighted points; ``tau(1) = d sum w``."""

    fiber_dim: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.fiber_dim < 1:
            raise ParameterError(f"fiber dimension must be >= 1, got {self.fiber_dim}")
        if w.ndim != 1 or w.size == 0 or np.any(w <= 0):
            raise ParameterError("algebra weights must be a nonempty vector of positive reals")
        object.__setattr__(self, "weights", w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TracialAlgebra):
            return NotImplemented
        return self.fiber_dim == other.fiber_dim and np.array_equal(self.weights, other.weights)

    def __hash__(self) -> int:
        return hash((self.fiber_dim, self.weights.tobytes()))

    @classmethod
    def matrices(cls, d: int) -> "TracialAlgebra":
        """The bare matrix algebra ``M_d`` with its usual trace."""
        return cls(d, np.ones(1))

    @classmethod
    def from_geometry(cls, geometry: GeometryConfig, d: int) -> "TracialAlgebra":
        return cls(d, geometry.grid_weights.ravel())

    @property
    def size(self) -> int:
        return self.weights.size

    def identity(self) -> "AlgebraElement":
        eye = np.broadcast_to(np.eye(self.fiber_dim), (self.size, self.fiber_dim, self.fiber_dim))
        return AlgebraElement(self, eye.copy())

    def trace(self, x: "AlgebraElement") -> complex:
        return complex(np.sum(self.weights * np.trace(x.values, axis1=-2, axis2=-1)))


@dataclass(frozen=True)
class AlgebraElement:
    """Element with one ``d x d`` matrix per grid point, shape ``(G, d, d)``."""

    algebra: TracialAlgebra
    values: np.ndarray
    hermitian: bool = field(default=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        d = self.algebra.fiber_dim
        if v.shape == (d, d) and self.algebra.size == 1:
            v = v[None]
        if v.shape != (self.algebra.size, d, d):
            raise ParameterError(f"values must have shape {(self.algebra.size, d, d)}, got {v.shape}")
        object.__setattr__(self, "values", v)
        if self.hermitian:
            dev = np.max(np.abs(v - _adjoint(v)), initial=0.0)
            if dev > 1e-12 * max(np.max(np.abs(v), initial=0.0), 1e-300):
                raise ParameterError(f"element flagged Hermitian deviates by {dev:.3e}")

    @classmethod
    def from_field(cls, f: PhysicalField, hermitian: bool | None = None) -> "AlgebraElement":
        alg = TracialAlgebra.from_geometry(f.geometry, f.fiber_dim)
        herm = f.hermitian if hermitian is None else hermitian
        return cls(alg, f.values.reshape(-1, f.fiber_dim, f.fiber_dim), hermitian=herm)

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, _adjoint(self.values), self.hermitian)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.values + other.values, self.hermitian and other.hermitian)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.values - other.values, self.hermitian and other.hermitian)

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.algebra, self.values @ other.values)

    def scaled(self, c: float) -> "AlgebraElement":
        herm = self.hermitian and np.imag(c) == 0
        return AlgebraElement(self.algebra, c * self.values, herm)

    def abs(self) -> "AlgebraElement":
        """``|x| = (x^* x)^{1/2}``."""
        u, s, vh = np.linalg.svd(self.values)
        v = _adjoint(vh)
        return AlgebraElement(self.algebra, (v * s[..., None, :]) @ vh, hermitian=False)._symmetrized()

    def _symmetrized(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, 0.5 * (self.values + _adjoint(self.values)), hermitian=True)


def _adjoint(v: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(v, -1, -2))


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise ParameterError(f"p must lie in [1, inf], got {p}")
    return p


def _singular_values(x: AlgebraElement) -> np.ndarray:
    if x.hermitian:
        return np.abs(np.linalg.eigvalsh(x.values))
    return np.linalg.svd(x.values, compute_uv=False)


def lp_norm(x: AlgebraElement, p: float) -> float:
    """``(tau |x|^p)^{1/p}``; ``p = inf`` gives the largest operator norm."""
    p = _check_p(p)
    s = _singular_values(x)
    if math.isinf(p):
        return float(np.max(s, initial=0.0))
    return float(np.sum(x.algebra.weights * np.sum(s**p, axis=-1)) ** (1.0 / p))


# ---------------------------------------------------------------------------
# maximal norm


@dataclass(frozen=True)
class SolverOptions:
    rel_tol: float = 1e-7  # barrier gap relative to the objective
    max_outer: int = 80
    max_inner: int = 400
    barrier_growth: float = 8.0
    max_fiber_budget: int = 256  # d * G
    max_family: int = 64


@dataclass
class MaximalNormResult:
    value: float
    certificate: AlgebraElement
    iterations: int
    feasibility_gap: float
    lower_bound: float
    upper_bound: float
    diagnostics: list[dict] = field(default_factory=list, repr=False)

    def diagnostics_csv(self) -> str:
        buf = io.StringIO()
        cols = ["outer", "inner", "objective", "barrier_weight", "min_slack"]
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for row in self.diagnostics:
            writer.writerow({c: row[c] for c in cols})
        return buf.getvalue()


def _hermitian_from_params(theta: np.ndarray, d: int) -> np.ndarray:
    """Hermitian matrices from ``d^2`` reals: diagonal, then real/imag upper parts."""
    G = theta.shape[0]
    iu = np.triu_indices(d, 1)
    m = len(iu[0])
    a = np.zeros((G, d, d), dtype=complex)
    idx = np.arange(d)
    a[:, idx, idx] = theta[:, :d]
    off = theta[:, d : d + m] + 1j * theta[:, d + m :]
    a[:, iu[0], iu[1]] = off
    a[:, iu[1], iu[0]] = np.conj(off)
    return a


def _params_from_hermitian(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    iu = np.triu_indices(d, 1)
    idx = np.arange(d)
    return np.concatenate([a[:, idx, idx].real, a[:, iu[0], iu[1]].real, a[:, iu[0], iu[1]].imag], axis=1)


def _params_gradient(g: np.ndarray) -> np.ndarray:
    """Parameter gradient from the matrix gradient ``G`` (``d phi = tr(G dA)``)."""
    d = g.shape[-1]
    iu = np.triu_indices(d, 1)
    idx = np.arange(d)
    return np.concatenate(
        [g[:, idx, idx].real, 2.0 * g[:, iu[0], iu[1]].real, 2.0 * g[:, iu[0], iu[1]].imag], axis=1
    )


def _matrix_power(a: np.ndarray, p: float) -> tuple[np.ndarray, np.ndarray]:
    """``(tr a^p, a^{p-1})`` per fibre for positive definite ``a``."""
    ev, vec = np.linalg.eigh(a)
    ev = np.maximum(ev, 1e-300)
    trace = np.sum(ev**p, axis=-1)
    grad = (vec * ev[..., None, :] ** (p - 1.0)) @ _adjoint(vec)
    return trace, grad


class _Barrier:
    """``t tr(a^p) - sum_i log det(a - x_i) - sum_i log det(a + x_i)`` per fibre."""

    def __init__(self, family: np.ndarray, p: float):
        self.x = family  # (N, G, d, d)
        self.p = p
        self.shifts = np.concatenate([family, -family], axis=0)  # a - s for s in shifts

    def slacks(self, a: np.ndarray) -> np.ndarray:
        return a[None] - self.shifts

    def min_slack(self, a: np.ndarray) -> np.ndarray:
        return np.min(np.linalg.eigvalsh(self.slacks(a)), axis=(0, 2))

    def value_grad(self, a: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-fibre value and matrix gradient; ``inf`` where infeasible."""
        S = self.slacks(a)
        ev = np.linalg.eigvalsh(S)
        feasible = np.all(ev > 0, axis=(0, 2))
        logdet = np.sum(np.log(np.where(ev > 0, ev, 1.0)), axis=(0, 2))
        tr, powgrad = _matrix_power(a, self.p)
        val = np.where(feasible, t * tr - logdet, np.inf)
        Sinv = np.linalg.inv(np.where(feasible[None, :, None, None], S, np.eye(a.shape[-1])))
        grad = t * self.p * powgrad - np.sum(Sinv, axis=0)
        return val, grad, tr

    def hessian_params(self, a: np.ndarray, t: float) -> np.ndarray:
        """Exact parameter Hessian of the log-det part plus a diagonal objective term."""
        G, d, _ = a.shape
        m = d * d
        basis = _hermitian_from_params(np.tile(np.eye(m), (G, 1)), d).reshape(G, m, d, d)
        Sinv = np.linalg.inv(self.slacks(a))  # (2N, G, d, d)
        H = np.zeros((G, m, m))
        for k in range(Sinv.shape[0]):
            SE = np.einsum("gij,gmjk->gmik", Sinv[k], basis)
            H += np.real(np.einsum("gmij,gnji->gmn", SE, SE))
        ev = np.linalg.eigvalsh(a)
        p = self.p
        if p > 1:
            curv = p * (p - 1.0) * np.max(ev, axis=-1) ** (p - 2.0) if p >= 2 else p * (p - 1.0) * np.min(ev, axis=-1) ** (p - 2.0)
            H += t * curv[:, None, None] * np.eye(m)[None]
        return H


def _bfgs(barrier: _Barrier, theta: np.ndarray, t: float, d: int, max_inner: int):
    """Batched BFGS on the barrier function; returns ``(theta, iterations)``."""
    G, m = theta.shape
    a = _hermitian_from_params(theta, d)
    val, mgrad, _ = barrier.value_grad(a, t)
    grad = _params_gradient(mgrad)
    Hinv = np.linalg.inv(barrier.hessian_params(a, t))
    active = np.ones(G, dtype=bool)
    it = 0
    for it in range(1, max_inner + 1):
        step = -np.einsum("gij,gj->gi", Hinv, grad)
        decrement = -np.einsum("gi,gi->g", step, grad)
        active = decrement > 1e-12 * np.maximum(1.0, np.abs(val))
        if not np.any(active):
            break
        alpha = np.ones(G)
        slope = np.einsum("gi,gi->g", step, grad)
        new_theta, new_val = theta, val
        pending = active.copy()
        for _ in range(60):
            trial = theta + alpha[:, None] * step
            tv, _, _ = barrier.value_grad(_hermitian_from_params(trial, d), t)
            ok = pending & np.isfinite(tv) & (tv <= val + 1e-4 * alpha * slope)
            new_theta = np.where(ok[:, None], trial, new_theta)
            new_val = np.where(ok, tv, new_val)
            pending &= ~ok
            if not np.any(pending):
                break
            alpha = np.where(pending, 0.5 * alpha, alpha)
        moved = active & ~pending
        if not np.any(moved):
            break
        s = new_theta - theta
        a_new = _hermitian_from_params(new_theta, d)
        _, mg_new, _ = barrier.value_grad(a_new, t)
        g_new = _params_gradient(mg_new)
        y = g_new - grad
        sy = np.einsum("gi,gi->g", s, y)
        upd = moved & (sy > 1e-16)
        if np.any(upd):
            rho = np.where(upd, 1.0 / np.where(upd, sy, 1.0), 0.0)
            I = np.eye(m)[None]
            V = I - rho[:, None, None] * np.einsum("gi,gj->gij", s, y)
            Hn = np.einsum("gij,gjk,glk->gil", V, Hinv, V) + rho[:, None, None] * np.einsum("gi,gj->gij", s, s)
            Hinv = np.where(upd[:, None, None], Hn, Hinv)
        theta = np.where(moved[:, None], new_theta, theta)
        val = np.where(moved, new_val, val)
        grad = np.where(moved[:, None], g_new, grad)
    return theta, it


def _as_family(family: Sequence[AlgebraElement]) -> tuple[TracialAlgebra, np.ndarray]:
    if len(family) == 0:
        raise ParameterError("family must be nonempty")
    alg = family[0].algebra
    for x in family:
        if x.algebra != alg:
            raise ParameterError("family members live on different algebras")
        if not x.hermitian:
            raise ParameterError("maximal norm needs a self-adjoint family (split into real and imaginary parts)")
    return alg, np.array([x.values for x in family])


def _abs_sum(xs: np.ndarray) -> np.ndarray:
    ev, vec = np.linalg.eigh(xs)
    return np.sum((vec * np.abs(ev)[..., None, :]) @ _adjoint(vec), axis=0)


def _fiber_lp(alg: TracialAlgebra, a: np.ndarray, p: float) -> float:
    return lp_norm(AlgebraElement(alg, a, hermitian=False), p)


def maximal_norm(
    family: Sequence[AlgebraElement],
    p: float,
    options: SolverOptions | None = None,
) -> MaximalNormResult:
    """``inf{ ||a||_p : -a <= x_i <= a }`` for a self-adjoint family.

    Parameters
    ----------
    family : sequence of AlgebraElement
        Hermitian elements on a common algebra.
    p : float
        Exponent in ``[1, inf]``.
    options : SolverOptions, optional
        Tolerances and the problem-size budget.

    Returns
    -------
    MaximalNormResult
        The value, the optimal ``a`` and the sandwich bounds
        ``max_i ||x_i||_p <= value <= ||sum_i |x_i| ||_p``.

    Raises
    ------
    SolverError
        If the barrier gap does not close within the iteration caps or the
        certificate fails its feasibility check.
    """
    opts = options or SolverOptions()
    p = _check_p(p)
    alg, xs = _as_family(family)
    N, G, d, _ = xs.shape
    if d * G > opts.max_fiber_budget or N > opts.max_family:
        raise ParameterError(
            f"problem size d*G={d * G}, N={N} exceeds the budget "
            f"({opts.max_fiber_budget}, {opts.max_family})"
        )
    xs = 0.5 * (xs + _adjoint(xs))
    lower = max(lp_norm(AlgebraElement(alg, x, hermitian=True), p) for x in xs)
    abs_sum = _abs_sum(xs)
    upper = _fiber_lp(alg, abs_sum, p)

    if math.isinf(p):
        return _maximal_norm_inf(alg, xs, lower, upper)

    scale = float(np.max(np.abs(np.linalg.eigvalsh(xs)), initial=0.0))
    if scale == 0.0:
        zero = AlgebraElement(alg, np.zeros((G, d, d)), hermitian=True)
        return MaximalNormResult(0.0, zero, 0, 0.0, 0.0, 0.0)
    xn = xs / scale
    barrier = _Barrier(xn, p)
    a0 = 1.01 * _abs_sum(xn) + 1e-2 * np.eye(d)
    theta = _params_from_hermitian(a0)
    nu = 2 * N * d  # barrier parameter per fibre
    tr0 = _matrix_power(a0, p)[0]
    t = float(nu / np.mean(tr0))
    diagnostics: list[dict] = []
    total_inner = 0
    converged = False
    for outer in range(1, opts.max_outer + 1):
        theta, inner = _bfgs(barrier, theta, t, d, opts.max_inner)
        total_inner += inner
        a = _hermitian_from_params(theta, d)
        tr = _matrix_power(a, p)[0]
        objective = float(np.sum(alg.weights * tr))
        gap = float(np.sum(alg.weights) * nu / t)
        diagnostics.append(
            {
                "outer": outer,
                "inner": inner,
                "objective": objective,
                "barrier_weight": t,
                "min_slack": float(np.min(barrier.min_slack(a))),
            }
        )
        if gap <= opts.rel_tol * objective:
            converged = True
            break
        t *= opts.barrier_growth
    a = _hermitian_from_params(theta, d) * scale
    cert = AlgebraElement(alg, 0.5 * (a + _adjoint(a)), hermitian=True)
    rel_gap = gap / max(objective, 1e-300)
    if not converged:
        raise SolverError(f"barrier gap {rel_gap:.2e} above tolerance after {opts.max_outer} rounds", cert, rel_gap)
    value = lp_norm(cert, p)
    result = MaximalNormResult(value, cert, total_inner, rel_gap, lower, upper, diagnostics)
    _verify(result, xs)
    return result


def _maximal_norm_inf(alg: TracialAlgebra, xs: np.ndarray, lower: float, upper: float) -> MaximalNormResult:
    """Bisection on ``t`` where feasibility of ``t`` is certified by ``a = t 1``."""
    N, G, d, _ = xs.shape

    def feasible(t: float) -> bool:
        ev = np.linalg.eigvalsh(xs)
        return bool(np.all(t - ev >= 0) and np.all(t + ev >= 0))

    lo, hi = 0.0, max(upper, lower, 1e-300)
    while not feasible(hi):
        hi *= 2.0
    it = 0
    while hi - lo > 1e-13 * hi and it < 200:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
        it += 1
    cert = AlgebraElement(alg, np.broadcast_to(hi * np.eye(d), (G, d, d)).copy(), hermitian=True)
    result = MaximalNormResult(hi, cert, it, (hi - lo) / max(hi, 1e-300), lower, upper)
    _verify(result, xs)
    return result


def _verify(result: MaximalNormResult, xs: np.ndarray) -> None:
    a = result.certificate.values
    a_inf = float(np.max(np.abs(np.linalg.eigvalsh(a)), initial=0.0))
    slack = min(float(np.min(np.linalg.eigvalsh(a[None] - xs))), float(np.min(np.linalg.eigvalsh(a[None] + xs))))
    if slack < -1e-8 * a_inf:
        raise SolverError(f"certificate infeasible: min slack {slack:.3e}", result.certificate, result.feasibility_gap)
    tol = 1e-6 * max(1.0, result.upper_bound)
    if not result.lower_bound - tol <= result.value <= result.upper_bound + tol:
        raise SolverError(
            f"value {result.value} outside sandwich [{result.lower_bound}, {result.upper_bound}]",
            result.certificate,
            result.feasibility_gap,
        )


def maximal_norm_column(family: Sequence[AlgebraElement], p: float, options: SolverOptions | None = None) -> float:
    """Column maximal norm ``|| sup+ |x_i|^2 ||_{p/2}^{1/2}`` for ``p >= 2``."""
    p = _check_p(p)
    if p < 2:
        raise ParameterError(f"column maximal norm needs p >= 2, got {p}")
    squares = []
    for x in family:
        sq = _adjoint(x.values) @ x.values
        squares.append(AlgebraElement(x.algebra, 0.5 * (sq + _adjoint(sq)), hermitian=True))
    return math.sqrt(maximal_norm(squares, p / 2.0, options).value)


# ---------------------------------------------------------------------------
# conditional expectations


def center_average(f):
    """Average over the center: physical fields by the mean in ``t``, spectral
    fields by dropping all Laguerre mass."""
    from .spectral import SpectralField

    if isinstance(f, PhysicalField):
        mean = np.mean(f.values, axis=1, keepdims=True)
        return PhysicalField(f.geometry, np.broadcast_to(mean, f.values.shape).copy(), f.hermitian)
    if isinstance(f, SpectralField):
        return f.restrict(lambda z: not z.is_laguerre)
    raise TypeError(f"center_average expects a PhysicalField or SpectralField, got {type(f).__name__}")


def fixed_point_part(f):
    """Projection onto invariant vectors: the trivial-character mass."""
    return f.restrict(lambda z: z.is_trivial)

"""Configuration-driven numerical studies: mean-ergodic decay, maximal-norm
ratios and the tail behaviour of spherical means.

Configurations are YAML mappings; see ``docs/config.md`` for the schema.
Each study returns an :class:`ExperimentTable` whose rows are deterministic
functions of the configuration and seed, whatever the thread count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from .heisenberg import GeometryConfig
from .nc_lp import AlgebraElement, SolverError, SolverOptions, lp_norm, maximal_norm, fixed_point_part
from .special import SpectralPoint
from .spectral import SpectralField, spherical_mean

EXPERIMENTS = ("mean-ergodic", "maximal-ratio", "individual-tail", "estimates-suite")
SCENARIOS = ("laguerre", "bessel", "mixed", "trivial")


class ConfigError(ValueError):
    """Invalid configuration; the message names the file and line when known."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RGrid:
    min: float = 1e-3
    max: float = 50.0
    count: int = 64
    spacing: str = "geometric"

    def values(self) -> np.ndarray:
        if self.spacing == "geometric":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    def refined(self) -> "RGrid":
        return replace(self, count=2 * self.count)


@dataclass(frozen=True)
class GeometrySpec:
    n: int = 2
    rho_max: float = 6.0
    step: float = 0.75
    center_samples: int = 9
    lambda_set: tuple[int, ...] = (-4, -3, -2, -1, 1, 2, 3, 4)
    k_max: int = 8
    bessel_radius: float = 16.0
    bessel_count: int = 32

    def build(self) -> GeometryConfig:
        return GeometryConfig.uniform(
            n=self.n,
            rho_max=self.rho_max,
            step=self.step,
            center_samples=self.center_samples,
            lambda_set=self.lambda_set,
            k_max=self.k_max,
            bessel_radius=self.bessel_radius,
            bessel_count=self.bessel_count,
        )


@dataclass(frozen=True)
class SolverSpec:
    rel_tol: float = 1e-7
    max_outer: int = 80
    max_inner: int = 400

    def build(self) -> SolverOptions:
        return SolverOptions(rel_tol=self.rel_tol, max_outer=self.max_outer, max_inner=self.max_inner)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings.

    ``lambdas`` lists the positive central frequencies a random field may
    use (their negatives are added); ``None`` means the geometry's set.  The
    maximal-norm studies need them to be integers in the geometry's set,
    the mean-ergodic study accepts any positive reals.
    """

    experiment: str
    geometry: GeometrySpec = GeometrySpec()
    fiber_dim: int = 2
    trials: int = 8
    seed: int = 0
    format: str = "csv"
    scenario: str = "laguerre"
    epsilon: float = 0.5
    N: int = 8
    lambdas: tuple[float, ...] | None = None
    p_list: tuple[float, ...] = (2.0,)
    r_grid: RGrid = RGrid()
    windows: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    window_samples: int = 8
    refine: bool = True
    solver: SolverSpec = SolverSpec()
    check: str | None = None
    check_params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["geometry"]["lambda_set"] = list(self.geometry.lambda_set)
        return out

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def support_lambdas(self) -> list[float]:
        lams = self.lambdas if self.lambdas is not None else [l for l in self.geometry.lambda_set if l > 0]
        return [float(l) for l in lams if self.epsilon <= abs(l) <= self.N]


_DEFAULTS: dict[str, dict] = {
    "mean-ergodic": {"lambdas": (0.5, 1.0, 2.0, 4.0, 8.0), "r_grid": RGrid(1e-3, 100.0, 96)},
    "maximal-ratio": {"r_grid": RGrid(1e-3, 20.0, 16), "trials": 8},
    "individual-tail": {
        "geometry": GeometrySpec(rho_max=6.0, step=6.0 / 7.0, center_samples=17,
                                 lambda_set=tuple(range(-8, 0)) + tuple(range(1, 9))),
        "scenario": "mixed",
        "trials": 4,
    },
    "estimates-suite": {"check": "contraction-scan"},
}


def _sub_spec(cls, raw: Any, marks: dict, prefix: str, source: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:{marks.get(prefix, '?')}: '{prefix}' must be a mapping")
    names = {f.name for f in fields(cls)}
    for key in raw:
        if key not in names:
            raise ConfigError(f"{source}:{marks.get(prefix + '.' + key, '?')}: unknown key '{prefix}.{key}'")
    kwargs = {}
    for f in fields(cls):
        if f.name in raw:
            kwargs[f.name] = _coerce(raw[f.name], getattr(cls(), f.name), f"{prefix}.{f.name}", marks, source)
    return cls(**kwargs)


def _coerce(value: Any, default: Any, key: str, marks: dict, source: str):
    line = marks.get(key, "?")

    def fail(msg):
        raise ConfigError(f"{source}:{line}: '{key}' {msg}")

    if isinstance(default, bool):
        if not isinstance(value, bool):
            fail(f"must be true or false, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            fail(f"must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, str) and value.lower() in ("inf", "infinity"):
            return math.inf
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail(f"must be a number, got {value!r}")
        return float(value)
    if isinstance(default, tuple) or default is None and key.endswith("lambdas"):
        if not isinstance(value, list):
            fail(f"must be a list, got {value!r}")
        out = []
        for item in value:
            if isinstance(item, str) and item.lower() in ("inf", "infinity"):
                out.append(math.inf)
            elif isinstance(item, bool) or not isinstance(item, (int, float)):
                fail(f"entries must be numbers, got {item!r}")
            else:
                out.append(item)
        if default is None or (default and all(isinstance(x, float) for x in default)):
            out = [float(x) for x in out]
        return tuple(out)
    return value


def config_from_mapping(raw: dict, marks: dict | None = None, source: str = "<config>") -> ExperimentConfig:
    """Validate a parsed mapping; ``marks`` maps dotted keys to line numbers."""
    marks = marks or {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}:1: top level must be a mapping")
    if "experiment" not in raw:
        raise ConfigError(f"{source}:1: missing required key 'experiment'")
    exp = raw["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigError(f"{source}:{marks.get('experiment', '?')}: experiment must be one of {EXPERIMENTS}, got {exp!r}")
    base = ExperimentConfig(experiment=exp, **_DEFAULTS.get(exp, {}))
    kwargs: dict[str, Any] = {}
    names = {f.name for f in fields(ExperimentConfig)}
    for key, value in raw.items():
        line = marks.get(key, "?")
        if key not in names:
            raise ConfigError(f"{source}:{line}: unknown key '{key}'")
        if key == "experiment":
            continue
        if key == "geometry":
            kwargs[key] = _sub_spec(GeometrySpec, value, marks, key, source)
        elif key == "r_grid":
            kwargs[key] = _sub_spec(RGrid, value, marks, key, source)
        elif key == "solver":
            kwargs[key] = _sub_spec(SolverSpec, value, marks, key, source)
        elif key == "check_params":
            if not isinstance(value, dict):
                raise ConfigError(f"{source}:{line}: 'check_params' must be a mapping")
            kwargs[key] = dict(value)
        elif key in ("format", "scenario", "check"):
            if not isinstance(value, str):
                raise ConfigError(f"{source}:{line}: '{key}' must be a string")
            kwargs[key] = value
        else:
            kwargs[key] = _coerce(value, getattr(base, key), key, marks, source)
    cfg = replace(base, **kwargs)
    _validate(cfg, marks, source)
    return cfg


def _validate(cfg: ExperimentConfig, marks: dict, source: str) -> None:
    def fail(key, msg):
        raise ConfigError(f"{source}:{marks.get(key, '?')}: {msg}")

    if cfg.trials < 1:
        fail("trials", f"trials must be >= 1, got {cfg.trials}")
    if not 0 <= cfg.seed < 2**64:
        fail("seed", f"seed must be an unsigned 64-bit integer, got {cfg.seed}")
    if any(not p >= 1 for p in cfg.p_list):
        fail("p_list", f"all p must be >= 1, got {list(cfg.p_list)}")
    if cfg.format not in ("csv", "json"):
        fail("format", f"format must be csv or json, got {cfg.format!r}")
    if cfg.scenario not in SCENARIOS:
        fail("scenario", f"scenario must be one of {SCENARIOS}, got {cfg.scenario!r}")
    if cfg.fiber_dim < 1:
        fail("fiber_dim", "fiber_dim must be >= 1")
    if not 0 < cfg.epsilon <= 1:
        fail("epsilon", f"epsilon must lie in (0, 1], got {cfg.epsilon}")
    if cfg.r_grid.count < 2 or not 0 < cfg.r_grid.min < cfg.r_grid.max:
        fail("r_grid", "r_grid needs 0 < min < max and count >= 2")
    if cfg.r_grid.spacing not in ("geometric", "linear"):
        fail("r_grid.spacing", "r_grid.spacing must be 'geometric' or 'linear'")
    try:
        geometry = cfg.geometry.build()
    except ValueError as exc:
        fail("geometry", f"invalid geometry: {exc}")
    if cfg.experiment in ("maximal-ratio", "individual-tail"):
        bad = [l for l in cfg.support_lambdas() if l != int(l) or int(l) not in geometry.lambda_set]
        if bad:
            fail("lambdas", f"physical studies need integer lambdas from geometry.lambda_set, got {bad}")
        G = geometry.radial_nodes.size * geometry.center_samples
        if cfg.fiber_dim * G > 256:
            fail("geometry", f"fiber_dim * grid size = {cfg.fiber_dim * G} exceeds the solver budget 256")
    if cfg.scenario in ("laguerre", "mixed") and not cfg.support_lambdas():
        fail("lambdas", "no central frequency lies in [epsilon, N]")


def _line_marks(node: yaml.Node, prefix: str = "") -> dict[str, int]:
    marks: dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            marks[key] = key_node.start_mark.line + 1
            marks.update(_line_marks(value_node, key))
    return marks


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a YAML configuration; errors carry ``file:line`` anchors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from exc
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else "?"
        raise ConfigError(f"{path}:{line}: malformed YAML ({getattr(exc, 'problem', exc)})") from exc
    if node is None:
        raise ConfigError(f"{path}:1: empty configuration")
    return config_from_mapping(raw, _line_marks(node), str(path))


# ---------------------------------------------------------------------------
# random fields


def support_points(cfg: ExperimentConfig, geometry: GeometryConfig) -> list[SpectralPoint]:
    """Spectral support of the scenario: ``Sigma_{eps,N}``, ``Sigma'_eps`` or both."""
    pts: list[SpectralPoint] = []
    if cfg.scenario in ("laguerre", "mixed"):
        k_top = min(cfg.N, geometry.k_max)
        for lam in cfg.support_lambdas():
            for k in range(k_top + 1):
                pts.append(SpectralPoint.laguerre(lam, k))
                pts.append(SpectralPoint.laguerre(-lam, k))
    if cfg.scenario in ("bessel", "mixed"):
        pts += [SpectralPoint.bessel(u) for u in geometry.bessel_grid.nodes if cfg.epsilon <= u <= 1.0 / cfg.epsilon]
    if cfg.scenario == "trivial":
        pts.append(SpectralPoint.trivial())
    return pts


def random_field(rng: np.random.Generator, geometry: GeometryConfig, points: list[SpectralPoint], d: int) -> SpectralField:
    """Standard complex Gaussian coefficients, Hermitian-symmetrised, unit norm.

    Pairs ``(lam, k)`` and ``(-lam, k)`` receive adjoint coefficients so the
    physical field is Hermitian.
    """
    coeffs: dict[SpectralPoint, np.ndarray] = {}
    for z in sorted(points, key=SpectralPoint.sort_key):
        if z in coeffs:
            continue
        g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
        if z.is_laguerre:
            partner = SpectralPoint.laguerre(-z.lam, z.k)
            coeffs[z] = g
            if partner in points:
                coeffs[partner] = g.conj().T
        else:
            coeffs[z] = 0.5 * (g + g.conj().T)
    f = SpectralField(geometry, coeffs, d)
    norm = f.l2_norm()
    return f.scaled(1.0 / norm) if norm > 0 else f


# ---------------------------------------------------------------------------
# tables


@dataclass
class ExperimentTable:
    """Rows plus provenance; ``render`` is byte-stable for equal inputs."""

    name: str
    columns: list[str]
    rows: list[list]
    provenance: dict
    summary: dict = field(default_factory=dict)
    failures: int = 0  # cells where the solver gave up
    passed: bool = True

    def render(self, fmt: str) -> str:
        if fmt == "json":
            payload = {
                "experiment": self.name,
                "provenance": self.provenance,
                "columns": self.columns,
                "rows": [[_jsonable(v) for v in row] for row in self.rows],
                "summary": {k: _jsonable(v) for k, v in self.summary.items()},
            }
            return json.dumps(payload, indent=2, sort_keys=True) + "\n"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        prov_cols = sorted(self.provenance)
        writer.writerow(self.columns + prov_cols)
        prov_vals = [_format(self.provenance[c]) for c in prov_cols]
        for row in self.rows:
            writer.writerow([_format(v) for v in row] + prov_vals)
        return buf.getvalue()


def _format(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_format(x) for x in v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def provenance(cfg: ExperimentConfig, geometry: GeometryConfig) -> dict:
    return {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "n": geometry.n,
        "radial_nodes": geometry.radial_nodes.size,
        "center_samples": geometry.center_samples,
        "k_max": geometry.k_max,
        "r_grid": f"{cfg.r_grid.spacing}:{cfg.r_grid.min!r}:{cfg.r_grid.max!r}:{cfg.r_grid.count}",
        "solver_rel_tol": cfg.solver.rel_tol,
    }


def _run_trials(cfg: ExperimentConfig, threads: int, trial_fn: Callable[[int, np.random.Generator], Any]) -> list:
    """Run ``trial_fn`` for every trial; results come back in trial order."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    rngs = [np.random.default_rng(s) for s in seeds]
    if threads <= 1:
        return [trial_fn(i, rngs[i]) for i in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(trial_fn, range(cfg.trials), rngs))


# ---------------------------------------------------------------------------
# studies


def _fit_gaussian(r: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """``y ~ C exp(-rate r^2)`` by least squares in ``log y``; returns ``(C, rate)``."""
    mask = (r >= 1.0) & (y > 1e-280)
    if mask.sum() < 2:
        return math.nan, math.nan
    slope, intercept = np.polyfit(r[mask] ** 2, np.log(y[mask]), 1)
    return float(math.exp(intercept)), float(-slope)


def run_mean_ergodic(cfg: ExperimentConfig, threads: int = 1) -> ExperimentTable:
    """``||sigma_r f - F f||_2 / ||f||_2`` over the r-grid for random fields."""
    geometry = cfg.geometry.build()
    points = support_points(cfg, geometry)
    r = cfg.r_grid.values()
    n = geometry.n

    def trial(i, rng):
        f = random_field(rng, geometry, points, cfg.fiber_dim)
        fixed = fixed_point_part(f)
        norm = f.l2_norm()
        vals = np.array([(spherical_mean(f, ri) - fixed).l2_norm() / norm if norm else 0.0 for ri in r])
        return vals

    curves = _run_trials(cfg, threads, trial)
    rows = [[i, float(ri), float(v)] for i, vals in enumerate(curves) for ri, v in zip(r, vals)]
    worst = np.max(np.array(curves), axis=0)
    summary: dict[str, Any] = {"scenario": cfg.scenario, "r_min": float(r[0]), "value_at_r_min": float(worst[0])}
    summary["r_to_zero_gap"] = float(np.max([_near_identity_gap(cfg, geometry, points, rng) for rng in _rngs(cfg)]))
    if cfg.scenario == "laguerre":
        C, rate = _fit_gaussian(r, worst)
        # least squares in log y is not a bound; C_envelope is the smallest constant that is
        big = (r >= 1.0) & (worst > 0)
        envelope = float(np.max(np.log(worst[big]) + rate * r[big] ** 2)) if big.any() else math.nan
        summary.update({"fit": "C exp(-rate r^2)", "C": C, "rate": rate, "C_envelope": math.exp(envelope)})
    elif cfg.scenario in ("bessel", "mixed"):
        big = r >= 1.0
        normalized = worst[big] * r[big] ** (n - 0.5)
        slope = float(np.polyfit(np.log(r[big]), np.log(worst[big]), 1)[0])
        summary.update({"fit": "r^slope", "slope": slope, "normalized_sup": float(np.max(normalized))})
    columns = ["trial", "r", "relative_gap"]
    return ExperimentTable("mean-ergodic", columns, rows, provenance(cfg, geometry), summary)


def _rngs(cfg: ExperimentConfig):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.trials)]


def _near_identity_gap(cfg, geometry, points, rng) -> float:
    """``||sigma_r f - f||_2 / ||f||_2`` at the smallest radius of the grid."""
    f = random_field(rng, geometry, points, cfg.fiber_dim)
    norm = f.l2_norm()
    return (spherical_mean(f, cfg.r_grid.min) - f).l2_norm() / norm if norm else 0.0


def _family(f: SpectralField, radii, subtract_fixed: bool = False) -> list[AlgebraElement]:
    fixed = fixed_point_part(f) if subtract_fixed else None
    out = []
    for ri in radii:
        g = spherical_mean(f, float(ri))
        if fixed is not None:
            g = g - fixed
        out.append(AlgebraElement.from_field(g.to_physical(), hermitian=True))
    return out


def run_maximal_ratio(cfg: ExperimentConfig, threads: int = 1) -> ExperimentTable:
    """``maximal_norm({sigma_r f}_r, p) / ||f||_p`` per trial and exponent."""
    geometry = cfg.geometry.build()
    points = support_points(cfg, geometry)
    opts = cfg.solver.build()
    r = cfg.r_grid.values()
    r_fine = cfg.r_grid.refined().values() if cfg.refine else None

    def trial(i, rng):
        f = random_field(rng, geometry, points, cfg.fiber_dim)
        x = AlgebraElement.from_field(f.to_physical(), hermitian=True)
        family = _family(f, r)
        fine = _family(f, r_fine) if r_fine is not None else None
        out = []
        for p in cfg.p_list:
            base = lp_norm(x, p)
            try:
                val = maximal_norm(family, p, opts).value
                ratio = val / base
                delta = maximal_norm(fine, p, opts).value / base - ratio if fine is not None else math.nan
                out.append([i, p, ratio, delta, "ok"])
            except SolverError as exc:
                out.append([i, p, math.nan, math.nan, f"solver-failure: {exc}"])
        return out

    results = _run_trials(cfg, threads, trial)
    rows = [row for res in results for row in res]
    summary: dict[str, Any] = {}
    failures = sum(1 for row in rows if row[4] != "ok")
    for p in cfg.p_list:
        ratios = [row[2] for row in rows if row[1] == p and row[4] == "ok"]
        if ratios:
            summary[f"p={p:g}:max_ratio"] = float(np.max(ratios))
            summary[f"p={p:g}:median_ratio"] = float(np.median(ratios))
    columns = ["trial", "p", "ratio", "refinement_delta", "status"]
    return ExperimentTable("maximal-ratio", columns, rows, provenance(cfg, geometry), summary, failures)


def run_individual_tail(cfg: ExperimentConfig, threads: int = 1) -> ExperimentTable:
    """Window maximal norms ``|| sup+_{r in [R, 2R]} (sigma_r f - F f) ||_2``."""
    geometry = cfg.geometry.build()
    points = support_points(cfg, geometry)
    opts = cfg.solver.build()
    windows = [float(R) for R in cfg.windows]

    def trial(i, rng):
        f = random_field(rng, geometry, points, cfg.fiber_dim)
        base = lp_norm(AlgebraElement.from_field(f.to_physical(), hermitian=True), 2.0)
        out = []
        for R in windows:
            radii = np.geomspace(R, 2.0 * R, cfg.window_samples)
            try:
                val = maximal_norm(_family(f, radii, subtract_fixed=True), 2.0, opts).value
                out.append([i, R, val / base if base else 0.0, "ok"])
            except SolverError as exc:
                out.append([i, R, math.nan, f"solver-failure: {exc}"])
        return out

    results = _run_trials(cfg, threads, trial)
    rows = [row for res in results for row in res]
    failures = sum(1 for row in rows if row[3] != "ok")
    worst = [max(row[2] for row in rows if row[1] == R and row[3] == "ok") if failures == 0 else math.nan for R in windows]
    monotone = all(b <= 1.05 * a for a, b in zip(worst, worst[1:]))
    final_small = bool(worst[-1] < 1e-2)
    summary = {
        "window_max": worst,
        "monotone_within_5pct": monotone,
        "final_below_1e-2": final_small,
    }
    if cfg.scenario == "bessel":
        big = np.array(windows)
        summary["window_slope"] = float(np.polyfit(np.log(big), np.log(np.maximum(worst, 1e-300)), 1)[0])
    columns = ["trial", "window_start", "relative_maximal_norm", "status"]
    return ExperimentTable(
        "individual-tail", columns, rows, provenance(cfg, geometry), summary, failures, passed=monotone and final_small
    )


RUNNERS = {
    "mean-ergodic": run_mean_ergodic,
    "maximal-ratio": run_maximal_ratio,
    "individual-tail": run_individual_tail,
}

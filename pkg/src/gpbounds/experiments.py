"""Experiment configuration, presets, runners, and CSV emission.

Configs are flat ``key = value`` text files (``#`` starts a comment).  Every
run is a pure function of (config, seed): derived per-(N, dataset) seeds
make each CSV byte-reproducible.  Floats are printed with 17 significant
digits so files round-trip exactly.

CSV schemas
-----------
variance experiments:   idx, sig_m, sig_bm, sig_bm_gen
                        (exact variance, ball bound, general bound; sig_bm
                        is nan for kernels without the isotropic bound)
learning curves:        idx, y_exact, y_bound, yE1, yE2
ball growth:            n, mean_count, min_count, expected_count
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from . import convergence as conv
from .bounds import RadiusSchedule, bound_report, radius_at
from .curves import monte_carlo_curve
from .gp import TrainingSet
from .kernels import (ALL_KINDS, MATERN_HALF, NEURAL_NETWORK, PERIODIC,
                      POLYNOMIAL, RATIONAL_QUADRATIC, SQUARED_EXPONENTIAL,
                      Kernel, KernelError, lipschitz_constant, make_kernel)

VARIANCE_UNIFORM = "variance-uniform"
VARIANCE_VANISHING = "variance-vanishing"
LEARNING_CURVE = "learning-curve"
CONVERGENCE_CHECK = "convergence-check"
EXPERIMENTS = (VARIANCE_UNIFORM, VARIANCE_VANISHING, LEARNING_CURVE,
               CONVERGENCE_CHECK)

_EXPERIMENT_TAGS = {VARIANCE_UNIFORM: 1, VARIANCE_VANISHING: 2}

VARIANCE_HEADER = ("idx", "sig_m", "sig_bm", "sig_bm_gen")
CURVE_HEADER = ("idx", "y_exact", "y_bound", "yE1", "yE2")
GROWTH_HEADER = ("n", "mean_count", "min_count", "expected_count")


class ConfigError(ValueError):
    """A config key is unknown, ill-typed, or out of its admissible range."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = ""
    kernel: str = ""
    lengthscale: float = 1.0
    signal_variance: float = 1.0
    alpha: float = 1.0
    period: float = 1.0
    offset: float = 1.0
    degree: int = 3
    bias_variance: float = 1.0
    weight_variance: float = 1.0
    noise_variance: float = 0.1
    domain_lo: float = 0.5
    domain_hi: float = 1.5
    test_point: float = 1.0
    schedule_c: float = 1.0
    schedule_alpha: float | None = None
    n_min: int = 1
    n_max: int = 1000
    points_per_decade: int = 25
    datasets: int = 20
    test_points: int = 200
    trials: int = 50
    witness_c: float = 0.5
    witness_epsilon: float = 0.5
    density: str = "uniform"
    seed: int = 1
    subtract_noise: bool = False
    quad_tol: float = 1e-9
    bound_form: str = "proof"


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "bool":
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind in ("float", "float | None"):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from None


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse flat key = value lines into a validated config."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        values[key] = _parse_value(key, raw)
    return validate_config(ExperimentConfig(**values))


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


# default schedule exponents per (experiment family, kernel kind)
_DEFAULT_ALPHA = {
    VARIANCE_UNIFORM: {SQUARED_EXPONENTIAL: 1.0 / 3.0, MATERN_HALF: 0.5,
                       RATIONAL_QUADRATIC: 1.0 / 3.0, PERIODIC: 1.0 / 3.0,
                       POLYNOMIAL: 0.5, NEURAL_NETWORK: 0.5},
    VARIANCE_VANISHING: {SQUARED_EXPONENTIAL: 0.25, MATERN_HALF: 1.0 / 3.0,
                         RATIONAL_QUADRATIC: 0.25, PERIODIC: 0.25,
                         POLYNOMIAL: 1.0 / 3.0, NEURAL_NETWORK: 1.0 / 3.0},
}


def resolved_schedule_alpha(cfg: ExperimentConfig) -> float:
    if cfg.schedule_alpha is not None:
        return cfg.schedule_alpha
    table = _DEFAULT_ALPHA.get(cfg.experiment)
    if table is None or cfg.kernel not in table:
        raise ConfigError("schedule_alpha is required for this experiment")
    return table[cfg.kernel]


def config_kernel(cfg: ExperimentConfig) -> Kernel:
    kind = cfg.kernel
    if kind not in ALL_KINDS:
        raise ConfigError(f"config key 'kernel': unknown kind {kind!r}")
    params = {"signal_variance": cfg.signal_variance}
    if kind in (SQUARED_EXPONENTIAL, MATERN_HALF, RATIONAL_QUADRATIC, PERIODIC):
        params["lengthscale"] = cfg.lengthscale
    if kind == RATIONAL_QUADRATIC:
        params["alpha"] = cfg.alpha
    if kind == PERIODIC:
        params["period"] = cfg.period
    if kind == POLYNOMIAL:
        params.update(offset=cfg.offset, degree=cfg.degree)
    if kind == NEURAL_NETWORK:
        params.update(bias_variance=cfg.bias_variance,
                      weight_variance=cfg.weight_variance)
    try:
        return make_kernel(kind, **params)
    except KernelError as exc:
        raise ConfigError(str(exc)) from None


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"config key 'experiment': must be one of {EXPERIMENTS}")
    for key in ("noise_variance", "schedule_c", "quad_tol"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"config key {key!r}: must be positive")
    if not 0 <= cfg.seed < 2 ** 64:
        raise ConfigError("config key 'seed': must be an unsigned 64-bit integer")
    if cfg.n_min < 1 or cfg.n_max < cfg.n_min:
        raise ConfigError("config keys 'n_min'/'n_max': need 1 <= n_min <= n_max")
    if cfg.points_per_decade < 1:
        raise ConfigError("config key 'points_per_decade': must be >= 1")
    if cfg.schedule_alpha is not None and not 0.0 < cfg.schedule_alpha <= 1.0:
        raise ConfigError("config key 'schedule_alpha': must lie in (0, 1]")
    if cfg.bound_form not in ("proof", "printed"):
        raise ConfigError("config key 'bound_form': must be 'proof' or 'printed'")
    if not cfg.domain_lo < cfg.domain_hi:
        raise ConfigError("config keys 'domain_lo'/'domain_hi': need lo < hi")

    if cfg.experiment in (VARIANCE_UNIFORM, VARIANCE_VANISHING):
        config_kernel(cfg)
        resolved_schedule_alpha(cfg)
        if cfg.datasets < 1:
            raise ConfigError("config key 'datasets': must be >= 1")
        if not cfg.domain_lo <= cfg.test_point <= cfg.domain_hi:
            raise ConfigError("config key 'test_point': must lie in the domain")
        if cfg.experiment == VARIANCE_VANISHING:
            mid = 0.5 * (cfg.domain_lo + cfg.domain_hi)
            if not math.isclose(cfg.test_point, mid):
                raise ConfigError("variance-vanishing needs test_point at the "
                                  "domain midpoint (the density vanishes there)")
    elif cfg.experiment == LEARNING_CURVE:
        kernel = config_kernel(cfg)
        if not kernel.isotropic:
            raise ConfigError("learning-curve experiments need an isotropic kernel")
        if cfg.datasets < 2:
            raise ConfigError("config key 'datasets': must be >= 2")
        if cfg.test_points < 1:
            raise ConfigError("config key 'test_points': must be >= 1")
    else:
        if cfg.density not in ("uniform", "vanishing"):
            raise ConfigError("config key 'density': must be 'uniform' or 'vanishing'")
        if cfg.schedule_alpha is None:
            raise ConfigError("config key 'schedule_alpha': required for "
                              "convergence checks")
        if not 0.0 < cfg.witness_epsilon < 1.0:
            raise ConfigError("config key 'witness_epsilon': must lie in (0, 1)")
        if not cfg.witness_c > 0:
            raise ConfigError("config key 'witness_c': must be positive")
        if cfg.trials < 1:
            raise ConfigError("config key 'trials': must be >= 1")
    return cfg


def log_grid(n_min: int, n_max: int, per_decade: int) -> list[int]:
    """Strictly increasing integer grid, about per_decade points per decade,
    always containing both endpoints."""
    if n_min < 1 or n_max < n_min or per_decade < 1:
        raise ConfigError("need 1 <= n_min <= n_max and per_decade >= 1")
    span = math.log10(n_max / n_min)
    steps = int(math.floor(span * per_decade)) + 1
    grid = {int(round(n_min * 10.0 ** (i / per_decade))) for i in range(steps + 1)}
    grid.add(n_max)
    return sorted(v for v in grid if n_min <= v <= n_max)


def format_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def _config_density(cfg: ExperimentConfig) -> conv.Density:
    if cfg.experiment == VARIANCE_VANISHING or cfg.density == "vanishing":
        half = 0.5 * (cfg.domain_hi - cfg.domain_lo)
        return conv.vanishing(0.5 * (cfg.domain_lo + cfg.domain_hi), half)
    return conv.uniform(cfg.domain_lo, cfg.domain_hi)


def run_variance_experiment(cfg: ExperimentConfig, out_path) -> list[tuple]:
    """Average exact variance and bounds at the test point over the N grid.

    Per (N, dataset) the derived seed draws the training inputs; the radius
    follows the clipped power schedule.  The ball bound column is nan for
    kernels without an isotropic non-increasing form, mirroring the
    general-kernel figures.
    """
    cfg = validate_config(cfg)
    if cfg.experiment not in _EXPERIMENT_TAGS:
        raise ConfigError("run_variance_experiment needs a variance experiment")
    tag = _EXPERIMENT_TAGS[cfg.experiment]
    kernel = config_kernel(cfg)
    density = _config_density(cfg)
    schedule = RadiusSchedule(cfg.schedule_c, resolved_schedule_alpha(cfg))
    lipexpand = lipschitz_constant(kernel, (cfg.domain_lo, cfg.domain_hi))
    x = cfg.test_point
    has_iso = kernel.isotropic and kernel.decreasing
    rows = []
    for n in log_grid(cfg.n_min, cfg.n_max, cfg.points_per_decade):
        rho = radius_at(schedule, n, kernel, x, lipexpand.value)
        acc_exact = acc_gen = acc_iso = 0.0
        for i in range(cfg.datasets):
            rng = np.random.default_rng([cfg.seed, tag, n, i])
            train = TrainingSet(density.sample(n, rng), cfg.noise_variance)
            rep = bound_report(train, kernel, x, rho, lipexpand.value,
                               form=cfg.bound_form)
            acc_exact += rep.exact
            acc_gen += rep.lipschitz
            if has_iso:
                acc_iso += rep.isotropic
        d = float(cfg.datasets)
        rows.append((n, acc_exact / d,
                     acc_iso / d if has_iso else math.nan, acc_gen / d))
    write_csv(out_path, VARIANCE_HEADER, rows)
    return rows


def run_learning_curve(cfg: ExperimentConfig, out_path):
    """Monte-Carlo learning curve plus the three bounds over the N grid."""
    cfg = validate_config(cfg)
    if cfg.experiment != LEARNING_CURVE:
        raise ConfigError("run_learning_curve needs experiment = learning-curve")
    kernel = config_kernel(cfg)
    grid = log_grid(cfg.n_min, cfg.n_max, cfg.points_per_decade)
    table = monte_carlo_curve(kernel, cfg.noise_variance, grid,
                              cfg.test_points, cfg.datasets, cfg.seed,
                              quad_tol=cfg.quad_tol)
    shift = cfg.noise_variance if cfg.subtract_noise else 0.0
    rows = [(r.n, r.e_num - shift, r.e_rho - shift, r.e1 - shift, r.e2 - shift)
            for r in table.rows]
    write_csv(out_path, CURVE_HEADER, rows)
    return table


def run_convergence_check(cfg: ExperimentConfig, out_path) -> conv.ConvergenceVerdict:
    """Schedule/density verdict plus a sampled ball-growth table."""
    cfg = validate_config(cfg)
    if cfg.experiment != CONVERGENCE_CHECK:
        raise ConfigError("run_convergence_check needs experiment = convergence-check")
    density = _config_density(cfg)
    schedule = RadiusSchedule(cfg.schedule_c, cfg.schedule_alpha)
    verdict = conv.check_theorem32(density, cfg.test_point, schedule,
                                   cfg.witness_c, cfg.witness_epsilon,
                                   (cfg.n_min, cfg.n_max))
    grid = log_grid(cfg.n_min, cfg.n_max, cfg.points_per_decade)
    growth = conv.empirical_ball_growth(density, cfg.test_point, schedule,
                                        grid, cfg.trials, cfg.seed)
    rows = [(g.n, g.mean_count, g.min_count, g.expected_count) for g in growth]
    write_csv(out_path, GROWTH_HEADER, rows)
    return verdict


_VARIANCE_BASE = dict(noise_variance=0.1, lengthscale=1.0, signal_variance=1.0,
                       domain_lo=0.5, domain_hi=1.5, test_point=1.0,
                       schedule_c=1.0, datasets=20, n_min=1, n_max=1220,
                       points_per_decade=25, seed=1)
_CURVE_BASE = dict(experiment=LEARNING_CURVE, noise_variance=0.05,
                    lengthscale=0.3, signal_variance=1.0, datasets=20,
                    test_points=200, n_min=1, n_max=2000,
                    points_per_decade=25, seed=1)

PRESETS: dict[str, dict] = {
    "variance-uniform-se": dict(experiment=VARIANCE_UNIFORM,
                                kernel=SQUARED_EXPONENTIAL, **_VARIANCE_BASE),
    "variance-uniform-matern": dict(experiment=VARIANCE_UNIFORM,
                                    kernel=MATERN_HALF, **_VARIANCE_BASE),
    "variance-uniform-polynomial": dict(experiment=VARIANCE_UNIFORM,
                                        kernel=POLYNOMIAL, **_VARIANCE_BASE),
    "variance-uniform-neural-network": dict(experiment=VARIANCE_UNIFORM,
                                            kernel=NEURAL_NETWORK,
                                            **_VARIANCE_BASE),
    "variance-vanishing-se": dict(experiment=VARIANCE_VANISHING,
                                  kernel=SQUARED_EXPONENTIAL, **_VARIANCE_BASE),
    "variance-vanishing-matern": dict(experiment=VARIANCE_VANISHING,
                                      kernel=MATERN_HALF, **_VARIANCE_BASE),
    "variance-vanishing-polynomial": dict(experiment=VARIANCE_VANISHING,
                                          kernel=POLYNOMIAL, **_VARIANCE_BASE),
    "variance-vanishing-neural-network": dict(experiment=VARIANCE_VANISHING,
                                              kernel=NEURAL_NETWORK,
                                              **_VARIANCE_BASE),
    "learning-curve-se": dict(kernel=SQUARED_EXPONENTIAL, **_CURVE_BASE),
    "learning-curve-matern": dict(kernel=MATERN_HALF, **_CURVE_BASE),
    "learning-curve-rational-quadratic": dict(kernel=RATIONAL_QUADRATIC,
                                              alpha=1.0, **_CURVE_BASE),
    "learning-curve-periodic": dict(kernel=PERIODIC, period=1.0, **_CURVE_BASE),
    "convergence-uniform": dict(experiment=CONVERGENCE_CHECK, density="uniform",
                                domain_lo=0.5, domain_hi=1.5, test_point=1.0,
                                schedule_c=1.0, schedule_alpha=1.0 / 3.0,
                                witness_c=0.5, witness_epsilon=0.5,
                                n_min=1, n_max=10000, points_per_decade=25,
                                trials=50, seed=1),
    "convergence-vanishing": dict(experiment=CONVERGENCE_CHECK,
                                  density="vanishing", domain_lo=0.5,
                                  domain_hi=1.5, test_point=1.0,
                                  schedule_c=1.0, schedule_alpha=1.0 / 3.0,
                                  witness_c=1.0, witness_epsilon=0.25,
                                  n_min=1, n_max=10000, points_per_decade=25,
                                  trials=50, seed=1),
}


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; see 'presets list'")
    return validate_config(ExperimentConfig(**PRESETS[name]))


def apply_overrides(cfg: ExperimentConfig, seed: int | None = None,
                    n_max: int | None = None) -> ExperimentConfig:
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    if n_max is not None:
        cfg = replace(cfg, n_max=n_max)
    return validate_config(cfg)


_PLOT_STYLES = {
    VARIANCE_HEADER: [("sig_m", "exact variance"), ("sig_bm", "ball bound"),
                      ("sig_bm_gen", "general bound")],
    CURVE_HEADER: [("y_exact", "monte carlo"), ("y_bound", "section bound"),
                   ("yE1", "one-sample bound"), ("yE2", "two-sample bound")],
    GROWTH_HEADER: [("mean_count", "mean in ball"), ("min_count", "min in ball"),
                    ("expected_count", "expected in ball")],
}


def plot_script(csv_path) -> str:
    """Emit a gnuplot script for a CSV written by one of the runners."""
    try:
        with open(csv_path, "r", encoding="utf-8") as fh:
            header = tuple(fh.readline().strip().split(","))
    except OSError as exc:
        raise ConfigError(f"cannot read {csv_path}: {exc}") from None
    if header not in _PLOT_STYLES:
        raise ConfigError(f"unrecognized CSV header {','.join(header)!r}")
    x_col = header[0]
    lines = [
        "set datafile separator ','",
        "set datafile missing 'nan'",
        "set logscale xy",
        f"set xlabel '{x_col}'",
        "set key left bottom",
    ]
    plots = ", \\\n     ".join(
        f"'{csv_path}' using '{x_col}':'{col}' with lines title '{title}'"
        for col, title in _PLOT_STYLES[header])
    lines.append("plot " + plots)
    return "\n".join(lines) + "\n"

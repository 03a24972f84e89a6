"""Average learning-curve bounds for one-dimensional uniform sampling.

Everything here lives on the unit interval with N iid uniform training
inputs and a uniform test point.  The reference curve is

    e(N) = E[ E_x[ sigma_N^2(x) ] ] + s        (s = noise variance)

estimated by Monte Carlo, and three upper bounds on it:

* ``e1_bound``  - each test point sees only its nearest sample; the gap
  statistics enter through the spacing density N (1 - d)^(N - 1).
* ``e2_bound``  - interior test points see both enclosing samples, via the
  exact two-sample posterior.
* ``e_rho_bound`` - the interval is cut into sections of n consecutive
  samples; all n samples of a section lie within the section-width radius
  of any test point inside it, so the ball-count bound applies with the
  exact Beta(n-1, N-n+2) width density of n-1 consecutive spacings.

``greedy_select_n`` picks the section size per N by walking n upward while
the bound still improves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import beta as beta_dist

from .gp import GPPosterior, TrainingSet
from .kernels import Kernel

_INNER_EPSABS = 1e-13
_INNER_EPSREL = 1e-11
_TAIL = 1e-13
# spacing weights are numerically dead past ~40/N
_SPACING_REACH = 40.0


class CurveError(ValueError):
    """Curve bound requested outside its admissible configuration."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature missed the requested tolerance."""

    def __init__(self, requested: float, achieved: float):
        self.requested = requested
        self.achieved = achieved
        super().__init__(f"quadrature achieved {achieved:.3g}, "
                         f"requested {requested:.3g}")


def spacing_density(n: int, delta):
    """Density N (1 - delta)^(N - 1) of a single uniform spacing on [0, 1]."""
    if n < 1 or int(n) != n:
        raise CurveError("N must be a positive integer")
    d = np.asarray(delta, dtype=float)
    if np.any((d < 0) | (d > 1)):
        raise CurveError("delta must lie in [0, 1]")
    if n == 1:
        out = np.ones_like(d)
    else:
        with np.errstate(divide="ignore"):
            out = np.exp(math.log(n) + (n - 1) * np.log1p(-d))
    return float(out) if out.ndim == 0 else out


def _sq_integral(kernel: Kernel, lo: float, hi: float,
                 epsabs: float = _INNER_EPSABS) -> float:
    """Integral of k(tau)^2 over [lo, hi] at tight tolerance."""
    if hi <= lo:
        return 0.0
    val, _ = quad(lambda t: kernel.iso(t) ** 2, lo, hi,
                  epsabs=epsabs, epsrel=_INNER_EPSREL, limit=100)
    return val


def _check_curve_inputs(kernel: Kernel, noise_variance: float, n: int):
    if not kernel.isotropic:
        raise CurveError("learning-curve bounds need an isotropic kernel")
    if not noise_variance > 0:
        raise CurveError("noise_variance must be positive")
    if n < 1 or int(n) != n:
        raise CurveError("N must be a positive integer")


def _outer_quad(fn, lo, hi, epsabs, points=None):
    val, err = quad(fn, lo, hi, epsabs=epsabs, epsrel=1e-14, limit=200,
                    points=points)
    return val, err


def e1_bound(kernel: Kernel, noise_variance: float, n: int,
             quad_tol: float = 1e-9) -> float:
    """Nearest-sample bound on the average learning curve.

    e1(N) = k(0) + s - 2 E[F(d)]/(k(0)+s) - 2(N-1) E[F(d/2)]/(k(0)+s)
    with F(u) the integral of k^2 over [0, u] and the expectation under the
    spacing density.  The two full-width terms come from the boundary
    segments, the N-1 half-width pairs from the interior ones.
    """
    _check_curve_inputs(kernel, noise_variance, n)
    k0 = kernel.iso(0.0)
    s = noise_variance
    dmax = min(1.0, _SPACING_REACH / n)
    scale = 2.0 / (k0 + s)

    def boundary(d):
        return spacing_density(n, d) * scale * _sq_integral(kernel, 0.0, d)

    total_err = 0.0
    q1, err = _outer_quad(boundary, 0.0, dmax, quad_tol / 4.0)
    total_err += err
    q2 = 0.0
    if n >= 2:
        def interior(d):
            return (spacing_density(n, d) * scale * (n - 1)
                    * _sq_integral(kernel, 0.0, d / 2.0))
        q2, err = _outer_quad(interior, 0.0, dmax, quad_tol / 4.0)
        total_err += err
    if total_err > quad_tol:
        raise QuadratureError(quad_tol, total_err)
    return k0 + s - q1 - q2


def e2_bound(kernel: Kernel, noise_variance: float, n: int,
             quad_tol: float = 1e-9) -> float:
    """Two-nearest-samples bound on the average learning curve.

    Interior segments use the exact two-sample posterior integrated across
    the gap; with a = k(0) + s the inner integral is

        int_0^d [ a k(t)^2 - k(d) k(t) k(d - t) ] dt
        -----------------------------------------   ,
                     a^2 - k(d)^2

    and the boundary segments reuse the single-sample term.  N = 1 has no
    interior pair and reduces to e1_bound.
    """
    _check_curve_inputs(kernel, noise_variance, n)
    k0 = kernel.iso(0.0)
    s = noise_variance
    a = k0 + s
    dmax = min(1.0, _SPACING_REACH / n)

    def boundary(d):
        return spacing_density(n, d) * 2.0 / a * _sq_integral(kernel, 0.0, d)

    def pair_term(d):
        if d <= 0.0:
            return 0.0
        kd = kernel.iso(d)
        inner, _ = quad(
            lambda t: a * kernel.iso(t) ** 2
                      - kd * kernel.iso(t) * kernel.iso(d - t),
            0.0, d, epsabs=_INNER_EPSABS, epsrel=_INNER_EPSREL, limit=100)
        return (spacing_density(n, d) * 2.0 * (n - 1)
                * inner / (a * a - kd * kd))

    total_err = 0.0
    q1, err = _outer_quad(boundary, 0.0, dmax, quad_tol / 4.0)
    total_err += err
    q2 = 0.0
    if n >= 2:
        q2, err = _outer_quad(pair_term, 0.0, dmax, quad_tol / 4.0)
        total_err += err
    if total_err > quad_tol:
        raise QuadratureError(quad_tol, total_err)
    return k0 + s - q1 - q2


@dataclass(frozen=True)
class SegmentPlan:
    """Partition of N sorted samples into m inner sections of n consecutive
    samples (adjacent sections share an endpoint) plus two boundary blocks."""

    n_total: int
    section_size: int
    inner_sections: int
    left_count: int
    right_count: int
    valid: bool


def segment_plan(n_total: int, section_size: int) -> SegmentPlan:
    """m = ceil((N - 2n + 1)/(n - 1)); the leftover N - m(n-1) + 1 samples
    split evenly between the boundaries.  Valid only when m >= 1 and the
    smaller boundary keeps at least one sample; the first valid N for a
    given n is N = 2n."""
    if n_total < 1 or int(n_total) != n_total:
        raise CurveError("N must be a positive integer")
    if section_size < 2 or int(section_size) != section_size:
        raise CurveError("section size must be an integer >= 2")
    n_tot, n = int(n_total), int(section_size)
    m = -(-(n_tot - 2 * n + 1) // (n - 1))
    leftover = n_tot - m * (n - 1) + 1
    left = leftover // 2
    right = leftover - left
    valid = m >= 1 and left >= 1
    return SegmentPlan(n_tot, n, m, left, right, valid)


def i_n_integral(kernel: Kernel, n_total: int, n: int, delta: float,
                 quad_tol: float = 1e-9) -> float:
    """Section integrand C(N, n-1) (1-d)^(N-n-1) d^(n-2) int_{d/2}^d k^2.

    Defined for 2 <= n <= N - 1; the powers are evaluated in log space so
    large N stays finite.
    """
    if not kernel.isotropic:
        raise CurveError("i_n_integral needs an isotropic kernel")
    if int(n_total) != n_total or int(n) != n or not 2 <= n <= n_total - 1:
        raise CurveError("need integer section size with 2 <= n <= N - 1")
    if not 0.0 <= delta <= 1.0:
        raise CurveError("delta must lie in [0, 1]")
    exp1 = n_total - n - 1
    exp2 = n - 2
    if delta == 0.0 or (delta == 1.0 and exp1 > 0):
        return 0.0
    log_w = (math.lgamma(n_total + 1) - math.lgamma(n) - math.lgamma(n_total - n + 2))
    if exp1 > 0:
        log_w += exp1 * math.log1p(-delta)
    if exp2 > 0:
        log_w += exp2 * math.log(delta)
    weight = math.exp(log_w)
    epsabs = min(_INNER_EPSABS, quad_tol / max(weight, 1.0))
    return weight * _sq_integral(kernel, delta / 2.0, delta, epsabs)


def _section_weight_log(n_total: int, nn: int, d: float) -> float:
    """Log density of the width of nn - 1 consecutive uniform spacings,
    Beta(nn - 1, N - nn + 2)."""
    a, b = nn - 1, n_total - nn + 2
    out = (math.lgamma(n_total + 1) - math.lgamma(a) - math.lgamma(b))
    if a > 1:
        out += (a - 1) * math.log(d)
    if b > 1:
        out += (b - 1) * math.log1p(-d)
    return out


def _section_term(kernel: Kernel, noise_variance: float, n_total: int,
                  nn: int, count: int, scale: float, epsabs: float):
    """scale * 2 E_width[ int_{d/2}^d k^2 ] / (k(0) + s/count), the width
    expectation under Beta(nn - 1, N - nn + 2)."""
    k0 = kernel.iso(0.0)
    denom = k0 + noise_variance / count
    a, b = nn - 1, n_total - nn + 2
    hi = float(beta_dist.isf(_TAIL, a, b))
    hi = min(max(hi, 1e-12), 1.0)

    def integrand(d):
        if d <= 0.0 or d >= 1.0:
            return 0.0
        w = math.exp(_section_weight_log(n_total, nn, d))
        return scale * 2.0 * w * _sq_integral(kernel, d / 2.0, d) / denom

    points = None
    if a > 1 and a + b > 2:
        mode = (a - 1) / (a + b - 2)
        if 0.0 < mode < hi:
            points = [mode]
    return _outer_quad(integrand, 0.0, hi, epsabs, points=points)


def e_rho_bound(kernel: Kernel, noise_variance: float, n_total: int, n: int,
                quad_tol: float = 1e-9) -> float:
    """Section bound on the average learning curve for section size n.

    Every test point in a section of width d has all n section samples
    within radius between d/2 and d, so the ball-count bound applies with
    the noise floor shrunk to s/n; the two boundary blocks contribute the
    same way with their own counts.  Requires a valid segment_plan; fall
    back to e1_bound otherwise.
    """
    _check_curve_inputs(kernel, noise_variance, n_total)
    plan = segment_plan(n_total, n)
    if not plan.valid:
        raise CurveError(
            f"no valid section plan for N={n_total}, n={n}; use e1_bound")
    k0 = kernel.iso(0.0)
    s = noise_variance
    part = quad_tol / 6.0
    total = k0 + s
    total_err = 0.0
    for nn, count, scale in (
            (plan.section_size, plan.section_size, float(plan.inner_sections)),
            (plan.left_count + 1, plan.left_count, 1.0),
            (plan.right_count + 1, plan.right_count, 1.0)):
        val, err = _section_term(kernel, s, n_total, nn, count, scale, part)
        total -= val
        total_err += err
    if total_err > quad_tol:
        raise QuadratureError(quad_tol, total_err)
    return total


def _bound_for_size(kernel, noise_variance, n_total, size, quad_tol):
    if size == 1:
        return e1_bound(kernel, noise_variance, n_total, quad_tol)
    if not segment_plan(n_total, size).valid:
        return None
    return e_rho_bound(kernel, noise_variance, n_total, size, quad_tol)


def _greedy(kernel, noise_variance, n_total, n_start, quad_tol):
    size = max(1, int(n_start))
    best = _bound_for_size(kernel, noise_variance, n_total, size, quad_tol)
    if best is None:
        size, best = 1, _bound_for_size(kernel, noise_variance, n_total, 1, quad_tol)
    while True:
        trial = _bound_for_size(kernel, noise_variance, n_total, size + 1, quad_tol)
        if trial is None or not trial < best:
            return size, best
        size, best = size + 1, trial


def greedy_select_n(kernel: Kernel, noise_variance: float, n_total: int,
                    n_start: int = 1, quad_tol: float = 1e-9) -> int:
    """Walk the section size upward from the warm start while the section
    bound strictly improves; size 1 means the nearest-sample fallback."""
    _check_curve_inputs(kernel, noise_variance, n_total)
    if n_start < 1 or int(n_start) != n_start:
        raise CurveError("n_start must be a positive integer")
    return _greedy(kernel, noise_variance, n_total, n_start, quad_tol)[0]


@dataclass(frozen=True)
class CurveRow:
    n: int
    e_num: float
    e_num_se: float
    e1: float
    e2: float
    e_rho: float
    n_selected: int


@dataclass(frozen=True)
class LearningCurveTable:
    rows: tuple[CurveRow, ...]
    kernel: Kernel
    noise_variance: float
    seed: int
    test_points: int
    datasets: int


_CURVE_TAG = 3


def monte_carlo_curve(kernel: Kernel, noise_variance: float, n_list,
                      test_points: int, datasets: int, seed: int,
                      quad_tol: float = 1e-9,
                      include_bounds: bool = True) -> LearningCurveTable:
    """Reference curve e(N) by Monte Carlo, with the three bounds per row.

    For each N and dataset index a derived seed draws N uniform training
    inputs and the test points, so any row can be reproduced in isolation.
    e(N) averages the posterior variance over both draws and adds the noise
    variance; the quoted standard error is across dataset means.  N = 0
    rows carry the prior value exactly.
    """
    if not kernel.isotropic:
        raise CurveError("learning-curve experiments need an isotropic kernel")
    if test_points < 1 or datasets < 2:
        raise CurveError("need test_points >= 1 and datasets >= 2")
    ns = [int(v) for v in n_list]
    if any(v < 0 for v in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise CurveError("N-list must be strictly increasing and non-negative")
    k0 = kernel.iso(0.0)
    prior = k0 + noise_variance
    rows = []
    warm = 1
    for n in ns:
        if n == 0:
            rows.append(CurveRow(0, prior, 0.0, prior, prior, prior, 0))
            continue
        dataset_means = np.empty(datasets)
        for i in range(datasets):
            rng = np.random.default_rng([seed, _CURVE_TAG, n, i])
            train = TrainingSet(rng.uniform(0.0, 1.0, n), noise_variance)
            post = GPPosterior(train, kernel)
            xs = rng.uniform(0.0, 1.0, test_points)
            dataset_means[i] = float(np.mean(post.variance_batch(xs)))
        e_num = float(np.mean(dataset_means)) + noise_variance
        se = float(np.std(dataset_means, ddof=1) / math.sqrt(datasets))
        if include_bounds:
            e1 = e1_bound(kernel, noise_variance, n, quad_tol)
            e2 = e2_bound(kernel, noise_variance, n, quad_tol)
            warm, e_rho = _greedy(kernel, noise_variance, n, warm, quad_tol)
            rows.append(CurveRow(n, e_num, se, e1, e2, e_rho, warm))
        else:
            rows.append(CurveRow(n, e_num, se, math.nan, math.nan, math.nan, 0))
    return LearningCurveTable(tuple(rows), kernel, noise_variance, seed,
                              test_points, datasets)

"""Covariance kernel catalog.

Six kernel families share one frozen ``Kernel`` record: four isotropic
(stationary) kinds evaluated through ``k.iso(tau)`` and two inner-product
kinds (cubic polynomial and arcsine neural-network).  Every kernel carries
the metadata the variance bounds need: whether it is isotropic, whether
``k(tau)`` is non-increasing, and a per-argument Lipschitz constant
estimate over a box domain.

Functional forms (``s2`` is the signal variance, ``l`` the lengthscale):

* squared-exponential   ``s2 * exp(-tau^2 / (2 l^2))``
* matern-1/2            ``s2 * exp(-tau / l)``
* rational-quadratic    ``s2 * (1 + tau^2 / (2 a l^2))^(-a)``
* periodic              ``s2 * exp(-2 sin^2(pi tau / p) / l^2)``
* polynomial            ``s2 * (x.z + c)^d``           (default c=1, d=3)
* neural-network        arcsine form on the augmented input (1, x) with
                        bias/weight variances (default 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.spatial.distance import cdist

SQUARED_EXPONENTIAL = "squared-exponential"
MATERN_HALF = "matern-1/2"
RATIONAL_QUADRATIC = "rational-quadratic"
PERIODIC = "periodic"
POLYNOMIAL = "polynomial"
NEURAL_NETWORK = "neural-network"

ISOTROPIC_KINDS = (SQUARED_EXPONENTIAL, MATERN_HALF, RATIONAL_QUADRATIC, PERIODIC)
ALL_KINDS = ISOTROPIC_KINDS + (POLYNOMIAL, NEURAL_NETWORK)


class KernelError(ValueError):
    """Invalid kernel parameters or an operation unsupported by this kind."""


def as_point(x) -> np.ndarray:
    """Coerce a scalar or length-d array to a single point of shape (d,)."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1:
        raise KernelError(f"expected a single point, got shape {a.shape}")
    return a


def as_points(x) -> np.ndarray:
    """Coerce input to an (n, d) array; a 1-d array is read as n scalar points."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    elif a.ndim != 2:
        raise KernelError(f"expected points of shape (n, d), got {a.shape}")
    return a


@dataclass(frozen=True)
class Kernel:
    """One catalog entry.  Use the factory functions rather than the raw ctor."""

    kind: str
    lengthscale: float = 1.0
    signal_variance: float = 1.0
    extra: Mapping[str, float] = field(default_factory=dict)
    isotropic: bool = True
    decreasing: bool = True

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        if not (self.signal_variance > 0 and math.isfinite(self.signal_variance)):
            raise KernelError("signal_variance must be positive and finite")
        if self.kind in ISOTROPIC_KINDS:
            if not (self.lengthscale > 0 and math.isfinite(self.lengthscale)):
                raise KernelError("lengthscale must be positive and finite")
            if not self.isotropic:
                raise KernelError(f"{self.kind} is isotropic by construction")
        else:
            if self.isotropic or self.decreasing:
                raise KernelError(f"{self.kind} is not isotropic")
        if self.kind == RATIONAL_QUADRATIC and self.extra.get("alpha", 1.0) <= 0:
            raise KernelError("rational-quadratic alpha must be positive")
        if self.kind == PERIODIC and self.extra.get("period", 1.0) <= 0:
            raise KernelError("period must be positive")
        if self.kind == POLYNOMIAL:
            if self.extra.get("offset", 1.0) <= 0:
                raise KernelError("polynomial offset must be positive")
            degree = self.extra.get("degree", 3)
            if degree != int(degree) or degree < 1:
                raise KernelError("polynomial degree must be a positive integer")
        if self.kind == NEURAL_NETWORK:
            if self.extra.get("bias_variance", 1.0) <= 0 or self.extra.get("weight_variance", 1.0) <= 0:
                raise KernelError("neural-network variances must be positive")

    def iso(self, tau):
        """Evaluate k(tau) for an isotropic kernel; tau >= 0, scalar or array."""
        if not self.isotropic:
            raise KernelError(f"{self.kind} has no isotropic form")
        t = np.asarray(tau, dtype=float)
        if np.any(t < 0):
            raise KernelError("tau must be non-negative")
        s2, l = self.signal_variance, self.lengthscale
        if self.kind == SQUARED_EXPONENTIAL:
            out = s2 * np.exp(-0.5 * (t / l) ** 2)
        elif self.kind == MATERN_HALF:
            out = s2 * np.exp(-t / l)
        elif self.kind == RATIONAL_QUADRATIC:
            a = self.extra.get("alpha", 1.0)
            out = s2 * (1.0 + t * t / (2.0 * a * l * l)) ** (-a)
        else:
            p = self.extra.get("period", 1.0)
            out = s2 * np.exp(-2.0 * np.sin(np.pi * t / p) ** 2 / (l * l))
        return float(out) if out.ndim == 0 else out

    def __call__(self, x, z) -> float:
        """Evaluate k(x, z) for a pair of points."""
        xp, zp = as_point(x), as_point(z)
        if xp.shape != zp.shape:
            raise KernelError("x and z must have the same dimension")
        if self.isotropic:
            return float(self.iso(float(np.linalg.norm(xp - zp))))
        return float(kernel_matrix(self, xp.reshape(1, -1), zp.reshape(1, -1))[0, 0])

    def prior_variance(self, x) -> float:
        """k(x, x); constant (= signal variance) for isotropic kinds."""
        if self.isotropic:
            return float(self.signal_variance)
        return self(x, x)


def _nn_gram(kernel: Kernel, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    sb = kernel.extra.get("bias_variance", 1.0)
    sw = kernel.extra.get("weight_variance", 1.0)
    s_xz = sb + sw * (X @ Z.T)
    s_xx = sb + sw * np.sum(X * X, axis=1)
    s_zz = sb + sw * np.sum(Z * Z, axis=1)
    denom = np.sqrt(np.outer(1.0 + 2.0 * s_xx, 1.0 + 2.0 * s_zz))
    # rounding can push the ratio a hair past 1 for coincident points
    arg = np.clip(2.0 * s_xz / denom, -1.0, 1.0)
    return kernel.signal_variance * (2.0 / np.pi) * np.arcsin(arg)


def kernel_matrix(kernel: Kernel, X, Z=None) -> np.ndarray:
    """Cross-covariance matrix k(X, Z); Z defaults to X."""
    Xp = as_points(X)
    Zp = Xp if Z is None else as_points(Z)
    if Xp.shape[1] != Zp.shape[1]:
        raise KernelError("point sets must share a dimension")
    if kernel.isotropic:
        return kernel.iso(cdist(Xp, Zp))
    if kernel.kind == POLYNOMIAL:
        c = kernel.extra.get("offset", 1.0)
        d = int(kernel.extra.get("degree", 3))
        return kernel.signal_variance * (Xp @ Zp.T + c) ** d
    return _nn_gram(kernel, Xp, Zp)


def kernel_vector(kernel: Kernel, X, x) -> np.ndarray:
    """Covariances between the rows of X and a single point x, shape (n,)."""
    xp = as_point(x)
    return kernel_matrix(kernel, X, xp.reshape(1, -1))[:, 0]


def squared_exponential(lengthscale: float = 1.0, signal_variance: float = 1.0) -> Kernel:
    return Kernel(SQUARED_EXPONENTIAL, lengthscale, signal_variance)


def matern_half(lengthscale: float = 1.0, signal_variance: float = 1.0) -> Kernel:
    return Kernel(MATERN_HALF, lengthscale, signal_variance)


def rational_quadratic(lengthscale: float = 1.0, signal_variance: float = 1.0,
                       alpha: float = 1.0) -> Kernel:
    return Kernel(RATIONAL_QUADRATIC, lengthscale, signal_variance, {"alpha": alpha})


def periodic(lengthscale: float = 1.0, signal_variance: float = 1.0,
             period: float = 1.0) -> Kernel:
    # oscillates, so it is not monotone in tau
    return Kernel(PERIODIC, lengthscale, signal_variance, {"period": period},
                  decreasing=False)


def polynomial(offset: float = 1.0, degree: int = 3, signal_variance: float = 1.0) -> Kernel:
    return Kernel(POLYNOMIAL, 1.0, signal_variance,
                  {"offset": offset, "degree": int(degree)},
                  isotropic=False, decreasing=False)


def neural_network(bias_variance: float = 1.0, weight_variance: float = 1.0,
                   signal_variance: float = 1.0) -> Kernel:
    return Kernel(NEURAL_NETWORK, 1.0, signal_variance,
                  {"bias_variance": bias_variance, "weight_variance": weight_variance},
                  isotropic=False, decreasing=False)


_FACTORIES = {
    SQUARED_EXPONENTIAL: squared_exponential,
    MATERN_HALF: matern_half,
    RATIONAL_QUADRATIC: rational_quadratic,
    PERIODIC: periodic,
    POLYNOMIAL: polynomial,
    NEURAL_NETWORK: neural_network,
}


def make_kernel(kind: str, **params) -> Kernel:
    """Build a kernel by kind name; unknown kinds or parameters raise KernelError."""
    if kind not in _FACTORIES:
        raise KernelError(f"unknown kernel kind {kind!r}; choose from {ALL_KINDS}")
    try:
        return _FACTORIES[kind](**params)
    except TypeError as exc:
        raise KernelError(f"bad parameters for {kind}: {exc}") from None


@dataclass(frozen=True)
class LipschitzEstimate:
    """A per-argument Lipschitz constant with the method that produced it."""

    value: float
    method: str          # "analytic" or "grid-estimate"
    safety_factor: float


def _as_box(domain) -> np.ndarray:
    box = np.asarray(domain, dtype=float)
    if box.ndim == 1 and box.size == 2:
        box = box.reshape(1, 2)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] < box[:, 0]):
        raise KernelError("domain must be (lo, hi) or an array of per-axis (lo, hi)")
    return box


GRID_POINTS = 10_000
SAFETY_FACTOR = 1.05


def lipschitz_constant(kernel: Kernel, domain, method: str = "auto") -> LipschitzEstimate:
    """Upper bound on |k(x, z) - k(x', z)| / ||x - x'|| over a box domain.

    Closed forms exist for the squared-exponential (s2 * e^(-1/2) / l, the
    maximum of tau * exp(-tau^2/2)) and the Matern-1/2 (s2 / l, the one-sided
    slope at tau -> 0+).  Every other kind is estimated as the largest
    absolute difference quotient on a 10^4-point grid, inflated by a 1.05
    safety factor.  A single-point domain admits any constant, so 0 is
    returned and quoted as analytic.
    """
    if method not in ("auto", "analytic", "grid-estimate"):
        raise KernelError(f"unknown method {method!r}")
    box = _as_box(domain)
    diam = float(np.linalg.norm(box[:, 1] - box[:, 0]))
    if diam == 0.0:
        return LipschitzEstimate(0.0, "analytic", 1.0)

    s2, l = kernel.signal_variance, kernel.lengthscale
    if method != "grid-estimate":
        if kernel.kind == SQUARED_EXPONENTIAL:
            return LipschitzEstimate(s2 * math.exp(-0.5) / l, "analytic", 1.0)
        if kernel.kind == MATERN_HALF:
            return LipschitzEstimate(s2 / l, "analytic", 1.0)
        if method == "analytic":
            raise KernelError(f"no closed-form Lipschitz constant for {kernel.kind}")

    if kernel.isotropic:
        taus = np.linspace(0.0, diam, GRID_POINTS)
        vals = kernel.iso(taus)
        slope = float(np.max(np.abs(np.diff(vals)))) / (taus[1] - taus[0])
        return LipschitzEstimate(slope * SAFETY_FACTOR, "grid-estimate", SAFETY_FACTOR)

    if box.shape[0] != 1:
        raise KernelError("grid Lipschitz estimation is one-dimensional only")
    lo, hi = box[0]
    xs = np.linspace(lo, hi, GRID_POINTS).reshape(-1, 1)
    zs = np.linspace(lo, hi, 201).reshape(-1, 1)
    K = kernel_matrix(kernel, xs, zs)
    h = xs[1, 0] - xs[0, 0]
    slope = float(np.max(np.abs(np.diff(K, axis=0)))) / h
    return LipschitzEstimate(slope * SAFETY_FACTOR, "grid-estimate", SAFETY_FACTOR)

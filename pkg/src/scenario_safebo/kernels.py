"""Stationary kernels, Gram matrices, the kernel semimetric and RKHS norms."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._fastsum import dense_sums, matern_sums_1d

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "RkhsFunction",
    "eval_kernel",
    "gram",
    "semimetric",
    "semimetric_matrix",
    "quadratic_form",
    "rkhs_norm",
    "scale_to_norm",
    "eval_function",
]

# floating-point PSD noise tolerances
_SEMIMETRIC_TOL = 1e-12
_NORM_TOL = 1e-8


class KernelFamily(str, Enum):
    MATERN32 = "matern32"
    MATERN52 = "matern52"
    SQUARED_EXPONENTIAL = "se"


def _as_points(x):
    """Coerce to a (k, n) float array; a 1D array is read as k points in 1D."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1)
    if x.ndim == 1:
        return x[:, None]
    return x


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus lengthscale.

    Parameters
    ----------
    family : KernelFamily or str
        ``"matern32"`` (default), ``"matern52"`` or ``"se"``.
    lengthscale : float
        Positive lengthscale in domain units.
    output_scale : float
        Value of ``k(a, a)``.
    """

    family: KernelFamily = KernelFamily.MATERN32
    lengthscale: float = 0.1
    output_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if not self.output_scale > 0:
            raise ValueError(f"output_scale must be positive, got {self.output_scale}")

    def profile(self, r):
        """Kernel value as a function of Euclidean distance ``r``."""
        r = np.asarray(r, dtype=float) / self.lengthscale
        if self.family is KernelFamily.MATERN32:
            s = np.sqrt(3.0) * r
            k = (1.0 + s) * np.exp(-s)
        elif self.family is KernelFamily.MATERN52:
            s = np.sqrt(5.0) * r
            k = (1.0 + s + s * s / 3.0) * np.exp(-s)
        else:
            k = np.exp(-0.5 * r * r)
        return self.output_scale * k

    def __call__(self, x1, x2=None):
        """Cross-kernel matrix between two point sets."""
        x1 = _as_points(x1)
        x2 = x1 if x2 is None else _as_points(x2)
        if x1.shape[1] != x2.shape[1]:
            raise ValueError(
                f"dimension mismatch: {x1.shape[1]} vs {x2.shape[1]}")
        diff = x1[:, None, :] - x2[None, :, :]
        return self.profile(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)))


def eval_kernel(spec: KernelSpec, a, b) -> float:
    """Return ``k(a, b)`` for two single points."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(spec.profile(np.linalg.norm(a - b)))


def gram(spec: KernelSpec, points) -> np.ndarray:
    """Symmetric Gram matrix of ``points`` with the diagonal set exactly."""
    points = _as_points(points)
    if len(points) == 0:
        raise ValueError("gram needs at least one point")
    K = spec(points)
    K = 0.5 * (K + K.T)
    np.fill_diagonal(K, spec.output_scale)
    return K


def semimetric_matrix(spec: KernelSpec, x1, x2) -> np.ndarray:
    """Pairwise kernel semimetric ``d_k`` between two point sets."""
    x1 = _as_points(x1)
    x2 = _as_points(x2)
    sq = 2.0 * spec.output_scale - 2.0 * spec(x1, x2)
    if np.any(sq < -_SEMIMETRIC_TOL):
        raise ValueError(f"negative semimetric radicand {sq.min():.3e}")
    return np.sqrt(np.clip(sq, 0.0, None))


def semimetric(spec: KernelSpec, a, b) -> float:
    """Kernel semimetric ``sqrt(k(a,a) + k(b,b) - 2 k(a,b))``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    sq = 2.0 * spec.output_scale - 2.0 * eval_kernel(spec, a, b)
    if sq < -_SEMIMETRIC_TOL:
        raise ValueError(f"negative semimetric radicand {sq:.3e}")
    return float(np.sqrt(max(sq, 0.0)))


_ORDER = {KernelFamily.MATERN32: 3, KernelFamily.MATERN52: 5,
          KernelFamily.SQUARED_EXPONENTIAL: 0}


def kernel_sums(spec: KernelSpec, centers, coefficients) -> np.ndarray:
    """Batched ``K_j @ alpha_j`` evaluated at the centers themselves.

    Parameters
    ----------
    centers : (m, N, n) array
    coefficients : (m, N) array

    One-dimensional Matern kernels use an exact recursive summation in
    O(N log N); everything else uses a compiled O(N^2) pairwise loop.
    """
    centers = np.asarray(centers, dtype=float)
    coefficients = np.asarray(coefficients, dtype=float)
    order = _ORDER[spec.family]
    if centers.shape[2] == 1 and order:
        c = np.sqrt(order) / spec.lengthscale
        return spec.output_scale * matern_sums_1d(centers[:, :, 0], coefficients, c, order)
    return spec.output_scale * dense_sums(centers, coefficients, spec.lengthscale, order)


def quadratic_form(spec: KernelSpec, centers, coefficients) -> np.ndarray:
    """Batched ``alpha^T K alpha``, clamped at zero within tolerance."""
    coefficients = np.asarray(coefficients, dtype=float)
    q = np.einsum("ij,ij->i", coefficients, kernel_sums(spec, centers, coefficients))
    N = coefficients.shape[1]
    scale = np.maximum(1.0, np.einsum("ij,ij->i", coefficients, coefficients))
    if np.any(q < -_NORM_TOL * N * scale):
        raise ValueError(f"negative quadratic form {q.min():.3e}")
    return np.clip(q, 0.0, None)


@dataclass(frozen=True)
class RkhsFunction:
    """Finite kernel expansion ``sum_s alpha_s k(., x_s)``."""

    centers: np.ndarray
    coefficients: np.ndarray
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def __post_init__(self):
        centers = _as_points(self.centers)
        coefficients = np.asarray(self.coefficients, dtype=float).ravel()
        if len(centers) != len(coefficients):
            raise ValueError(
                f"{len(centers)} centers but {len(coefficients)} coefficients")
        if len(centers) == 0:
            raise ValueError("an RkhsFunction needs at least one center")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def __call__(self, a):
        """Evaluate at one point (returns float) or a (k, n) array of points."""
        a_arr = np.asarray(a, dtype=float)
        single = a_arr.ndim == 0 or (a_arr.ndim == 1 and self.dim > 1)
        pts = a_arr.reshape(1, -1) if single else _as_points(a_arr)
        if pts.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: {pts.shape[1]} vs {self.dim}")
        vals = self.kernel(pts, self.centers) @ self.coefficients
        return float(vals[0]) if single else vals

    def norm(self) -> float:
        return rkhs_norm(self)

    def scaled(self, factor: float) -> "RkhsFunction":
        return RkhsFunction(self.centers, self.coefficients * factor, self.kernel)


def rkhs_norm(f: RkhsFunction) -> float:
    """RKHS norm ``sqrt(alpha^T K alpha)`` of a finite expansion."""
    q = quadratic_form(f.kernel, f.centers[None], f.coefficients[None])
    return float(np.sqrt(q[0]))


def scale_to_norm(f: RkhsFunction, target: float) -> RkhsFunction:
    """Rescale the coefficients so that the RKHS norm equals ``target``."""
    if not target > 0:
        raise ValueError(f"target norm must be positive, got {target}")
    current = rkhs_norm(f)
    if current == 0.0:
        raise ValueError("cannot rescale a function with zero RKHS norm")
    if current == target:
        return f
    return f.scaled(target / current)


def eval_function(f: RkhsFunction, a) -> float:
    """``sum_s alpha_s k(a, x_s)`` at a single point."""
    return float(f(np.atleast_1d(np.asarray(a, dtype=float)).reshape(1, -1))[0])

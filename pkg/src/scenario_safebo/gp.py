"""Exact GP posterior and the data-dependent confidence width."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .kernels import KernelSpec, _as_points, gram

__all__ = ["Dataset", "ConfidenceParams", "GaussianProcess", "FactorizationError"]


class FactorizationError(LinAlgError):
    """Cholesky factorization of the regularized Gram matrix failed."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


@dataclass(frozen=True)
class Dataset:
    """Queried inputs ``(t, n)`` and their noisy observations ``(t,)``."""

    inputs: np.ndarray
    observations: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.observations, dtype=float).ravel()
        x = np.asarray(self.inputs, dtype=float)
        if x.ndim < 2:
            x = x.reshape(len(y), -1) if len(y) else np.zeros((0, 1))
        if len(x) != len(y):
            raise ValueError(f"{len(x)} inputs but {len(y)} observations")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("inputs and observations must be finite")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "observations", y)

    @classmethod
    def empty(cls, dim: int = 1) -> "Dataset":
        return cls(np.zeros((0, dim)), np.zeros(0))

    def __len__(self):
        return len(self.observations)

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]

    def subset(self, mask) -> "Dataset":
        return Dataset(self.inputs[mask], self.observations[mask])


@dataclass(frozen=True)
class ConfidenceParams:
    """Norm over-estimate ``B`` and confidence parameter ``delta``."""

    B: float
    delta: float = 1e-2

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.B >= 0.0:
            raise ValueError(f"B must be nonnegative, got {self.B}")


class GaussianProcess:
    """Zero-mean GP posterior with a fixed ridge ``lam`` on the Gram matrix.

    Parameters
    ----------
    data : Dataset
    kernel : KernelSpec
    noise_std : float
        Measurement noise standard deviation.
    ridge : {"variance", "std"}
        ``"variance"`` uses ``lam = noise_std**2`` (default), ``"std"`` uses
        ``lam = noise_std``. The same ``lam`` enters the posterior and the
        confidence width.
    """

    def __init__(self, data: Dataset, kernel: KernelSpec, noise_std: float = 1e-2,
                 ridge: str = "variance"):
        if not noise_std > 0:
            raise ValueError(f"noise_std must be positive, got {noise_std}")
        if ridge not in ("variance", "std"):
            raise ValueError(f"unknown ridge convention {ridge!r}")
        self.data = data
        self.kernel = kernel
        self.noise_std = float(noise_std)
        self.lam = self.noise_std ** 2 if ridge == "variance" else self.noise_std
        t = len(data)
        if t == 0:
            self._factor = None
            self._weights = np.zeros(0)
            self.log_det = 0.0
            return
        K = gram(kernel, data.inputs)
        self._K = K
        try:
            self._factor = cho_factor(K + self.lam * np.eye(t), lower=True)
        except LinAlgError as err:
            cond = np.linalg.cond(K + self.lam * np.eye(t))
            raise FactorizationError(
                f"Cholesky failed for t={t}, cond={cond:.3e}", cond) from err
        self._weights = cho_solve(self._factor, data.observations)
        # log det(I + K/lam) = log det(K + lam I) - t log lam
        self.log_det = float(2.0 * np.sum(np.log(np.diag(self._factor[0])))
                             - t * np.log(self.lam))

    def __len__(self):
        return len(self.data)

    def predict(self, points):
        """Posterior mean and variance at ``(k, n)`` points (arrays)."""
        pts = _as_points(points)
        prior = np.full(len(pts), self.kernel.output_scale)
        if self._factor is None:
            return np.zeros(len(pts)), prior
        kx = self.kernel(pts, self.data.inputs)
        mean = kx @ self._weights
        v = cho_solve(self._factor, kx.T)
        var = prior - np.einsum("ij,ji->i", kx, v)
        return mean, np.clip(var, 0.0, prior)

    def posterior_mean_var(self, a):
        """Posterior mean and variance at a single point, as floats."""
        a = np.atleast_1d(np.asarray(a, dtype=float)).reshape(1, -1)
        mean, var = self.predict(a)
        return float(mean[0]), float(var[0])

    def beta(self, cp: ConfidenceParams) -> float:
        """Confidence width ``B + sqrt(lam logdet(I + K/lam) - 2 lam log delta)``."""
        radicand = self.lam * self.log_det - 2.0 * self.lam * np.log(cp.delta)
        return float(cp.B + np.sqrt(max(radicand, 0.0)))

    def confidence_interval(self, cp: ConfidenceParams, a):
        """``mu(a) -/+ beta sigma(a)`` at a single point."""
        mean, var = self.posterior_mean_var(a)
        half = self.beta(cp) * np.sqrt(var)
        return mean - half, mean + half

    def mean_function_norm(self) -> float:
        """RKHS norm of the posterior mean, ``sqrt(w^T K w)``."""
        if self._factor is None:
            raise ValueError("the posterior mean norm needs at least one sample")
        w = self._weights
        return float(np.sqrt(max(w @ self._K @ w, 0.0)))


def posterior_mean_var(gp: GaussianProcess, a):
    return gp.posterior_mean_var(a)


def beta(gp: GaussianProcess, cp: ConfidenceParams) -> float:
    return gp.beta(cp)


def confidence_interval(gp: GaussianProcess, cp: ConfidenceParams, a):
    return gp.confidence_interval(cp, a)


def mean_function_norm(gp: GaussianProcess) -> float:
    return gp.mean_function_norm()

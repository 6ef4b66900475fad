"""Axis-aligned boxes and the finite grids safe exploration runs on."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Box", "DomainGrid"]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo, hi]`` in ``R^n``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1D arrays of equal length")
        if np.any(hi < lo):
            raise ValueError(f"empty box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def unit(cls, dim: int = 1) -> "Box":
        return cls(np.zeros(dim), np.ones(dim))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def width(self) -> float:
        """Largest edge length."""
        return float(np.max(self.hi - self.lo))

    def contains(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return np.all((points >= self.lo) & (points <= self.hi), axis=1)

    def intersect(self, other: "Box") -> "Box":
        return Box(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))

    def sample(self, rng, size) -> np.ndarray:
        """``size`` uniform points in the box, shape ``(size, dim)``."""
        return self.lo + (self.hi - self.lo) * rng.random((size, self.dim))


@dataclass(frozen=True)
class DomainGrid:
    """Finite, duplicate-free discretization of a box."""

    box: Box
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.box.dim)
        if len(pts) == 0:
            raise ValueError("a grid needs at least one point")
        if not np.all(self.box.contains(pts)):
            raise ValueError("grid points must lie inside the box")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("grid points must be unique")
        object.__setattr__(self, "points", pts)

    @classmethod
    def regular(cls, box: Box, resolution: int, extra=None) -> "DomainGrid":
        """Tensor lattice with ``resolution`` points per dimension.

        ``extra`` points (e.g. initial safe parameters) are merged in so that
        they are represented exactly.
        """
        axes = [np.linspace(l, h, resolution) for l, h in zip(box.lo, box.hi)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.dim)
        if extra is not None:
            pts = np.vstack([pts, np.asarray(extra, dtype=float).reshape(-1, box.dim)])
        # lexicographic order with the first coordinate as the primary key
        pts = np.unique(pts, axis=0)
        return cls(box, pts)

    def __len__(self):
        return len(self.points)

    def index_of(self, point) -> int:
        """Index of an exact grid point; raises ``KeyError`` otherwise."""
        point = np.asarray(point, dtype=float).reshape(1, -1)
        hit = np.flatnonzero(np.all(self.points == point, axis=1))
        if len(hit) == 0:
            raise KeyError(f"{point.ravel()} is not a grid point")
        return int(hit[0])

    def nearest(self, point) -> int:
        point = np.asarray(point, dtype=float).reshape(1, -1)
        return int(np.argmin(np.sum((self.points - point) ** 2, axis=1)))

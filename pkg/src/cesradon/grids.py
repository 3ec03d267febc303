"""Log-uniform grids shared by sampled densities and the inversion pipeline.

Nodes follow the FFT convention: per axis, u_j = u_min + j*du for
j = 0..N-1 with du = (u_max - u_min)/N, i.e. the right endpoint is
excluded and the grid is periodic-compatible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogGrid:
    """A tensor-product grid in u = log(x) coordinates."""

    u_min: tuple
    u_max: tuple
    shape: tuple

    def __post_init__(self):
        object.__setattr__(self, "u_min", tuple(float(v) for v in self.u_min))
        object.__setattr__(self, "u_max", tuple(float(v) for v in self.u_max))
        object.__setattr__(self, "shape", tuple(int(v) for v in self.shape))
        if not (len(self.u_min) == len(self.u_max) == len(self.shape)):
            raise ValueError("u_min, u_max, shape must have equal length")
        if len(self.shape) == 0:
            raise ValueError("grid needs at least one axis")
        for lo, hi, n in zip(self.u_min, self.u_max, self.shape):
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ValueError("need finite u_min < u_max on every axis")
            if n < 2:
                raise ValueError("need at least 2 nodes per axis")

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def spacing(self, axis: int) -> float:
        return (self.u_max[axis] - self.u_min[axis]) / self.shape[axis]

    def axis_nodes(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return self.u_min[axis] + self.spacing(axis) * np.arange(n)

    def mesh(self):
        """List of n arrays of shape ``self.shape`` ('ij' indexing)."""
        return np.meshgrid(*(self.axis_nodes(k) for k in range(self.dim)),
                           indexing="ij")

    def points_u(self) -> np.ndarray:
        """All nodes as a (size, dim) array, row-major."""
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)

    def points_x(self) -> np.ndarray:
        """Node positions in original coordinates x = exp(u), (size, dim)."""
        return np.exp(self.points_u())

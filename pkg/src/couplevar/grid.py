"""Staggered-grid containers and boundary-aware difference operators.

Conventions used across the package:

* A scalar grid (image plane) is a float64 array of shape ``(N, M)``
  where ``N`` is the height and ``M`` the width.  Entry ``u[j, i]``
  belongs to the cell centred at ``(i + 1/2, j + 1/2)``; the grid size
  ``h`` is fixed to 1 and parameters absorb it.
* Vector fields live on the staggered (dual) grid: the x component sits
  on vertical cell faces, shape ``(N, M - 1)``, the y component on
  horizontal faces, shape ``(N - 1, M)``.  Faces on the domain boundary
  are not stored and every operator treats them as exactly zero, which
  encodes homogeneous Neumann conditions for cell data and zero
  Dirichlet conditions for the shifted component of face data.
* Operators never mutate their inputs; all returned arrays are fresh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "StaggeredField",
    "grad_forward",
    "divergence",
    "laplacian_u",
    "laplacian_v",
    "dot",
    "neighbor_sum",
    "neighbor_count",
]


@dataclass(frozen=True)
class StaggeredField:
    """Pair of face-centered component arrays of a 2-D vector field."""

    x: np.ndarray  # shape (N, M-1), x component on vertical faces
    y: np.ndarray  # shape (N-1, M), y component on horizontal faces

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 2 or y.ndim != 2:
            raise ValueError("staggered components must be 2-D arrays")
        n, mx = x.shape
        ny, m = y.shape
        if ny != n - 1 or mx != m - 1:
            raise ValueError(
                f"inconsistent staggered shapes {x.shape} / {y.shape}: "
                f"expected (N, M-1) and (N-1, M)"
            )

    @classmethod
    def zeros(cls, grid_shape: tuple[int, int]) -> "StaggeredField":
        n, m = grid_shape
        return cls(np.zeros((n, max(m - 1, 0))), np.zeros((max(n - 1, 0), m)))

    @property
    def grid_shape(self) -> tuple[int, int]:
        """Shape (N, M) of the companion scalar grid."""
        return self.x.shape[0], self.y.shape[1]

    def copy(self) -> "StaggeredField":
        return StaggeredField(self.x.copy(), self.y.copy())

    def __add__(self, other: "StaggeredField") -> "StaggeredField":
        return StaggeredField(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "StaggeredField") -> "StaggeredField":
        return StaggeredField(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "StaggeredField":
        return StaggeredField(-self.x, -self.y)

    def __mul__(self, other) -> "StaggeredField":
        if isinstance(other, StaggeredField):
            return StaggeredField(self.x * other.x, self.y * other.y)
        return StaggeredField(self.x * other, self.y * other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "StaggeredField":
        if isinstance(other, StaggeredField):
            return StaggeredField(self.x / other.x, self.y / other.y)
        return StaggeredField(self.x / other, self.y / other)


def grad_forward(u: np.ndarray) -> StaggeredField:
    """Forward-difference gradient of a scalar grid onto the face grid.

    Boundary faces (where the Neumann condition makes the derivative
    vanish) are not stored.
    """
    u = np.asarray(u, dtype=float)
    return StaggeredField(np.diff(u, axis=1), np.diff(u, axis=0))


def divergence(w: StaggeredField) -> np.ndarray:
    """Cell-centered divergence, the exact negative adjoint of grad_forward.

    ``div(w)[j, i] = w.x[j, i] - w.x[j, i-1] + w.y[j, i] - w.y[j-1, i]``
    with out-of-range faces equal to zero, so that
    ``<grad_forward(u), w> = -<u, divergence(w)>`` holds identically.
    """
    n, m = w.grid_shape
    out = np.zeros((n, m))
    out[:, :-1] += w.x
    out[:, 1:] -= w.x
    out[:-1, :] += w.y
    out[1:, :] -= w.y
    return out


def laplacian_u(u: np.ndarray) -> np.ndarray:
    """Five-point Laplacian with reflecting boundaries, ``div(grad(u))``."""
    return divergence(grad_forward(u))


def _component_laplacian(a: np.ndarray, dirichlet_axis: int) -> np.ndarray:
    """Laplacian of one face array: Dirichlet along its own axis, Neumann
    along the other.  Missing neighbours count as zero; the diagonal along
    the Dirichlet axis is always -2, along the Neumann axis -deg."""
    out = neighbor_sum(a)
    deg = neighbor_count(a.shape, axis=1 - dirichlet_axis)
    out -= (2.0 + deg) * a
    return out


def laplacian_v(w: StaggeredField) -> StaggeredField:
    """Componentwise Laplacian on the staggered grid.

    Defined as the negative Gram operator of the second-order smoothness
    differences, so ``<w, laplacian_v(w)> = -S2(w)`` exactly.
    """
    return StaggeredField(
        _component_laplacian(w.x, dirichlet_axis=1),
        _component_laplacian(w.y, dirichlet_axis=0),
    )


def dot(a, b) -> float:
    """Euclidean inner product of two grids or two staggered fields."""
    if isinstance(a, StaggeredField):
        return float(np.vdot(a.x, b.x) + np.vdot(a.y, b.y))
    return float(np.vdot(a, b))


def neighbor_sum(a: np.ndarray) -> np.ndarray:
    """Sum of the in-range 4-neighbours of every entry (zero outside)."""
    out = np.zeros_like(a)
    out[:, 1:] += a[:, :-1]
    out[:, :-1] += a[:, 1:]
    out[1:, :] += a[:-1, :]
    out[:-1, :] += a[1:, :]
    return out


def neighbor_count(shape: tuple[int, int], axis: int | None = None) -> np.ndarray:
    """Number of in-range neighbours per entry (along one axis if given)."""
    deg = np.zeros(shape)
    if axis is None or axis == 1:
        deg[:, 1:] += 1
        deg[:, :-1] += 1
    if axis is None or axis == 0:
        deg[1:, :] += 1
        deg[:-1, :] += 1
    return deg

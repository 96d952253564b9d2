"""Discrete energies: coupling magnitude, penaliser, diffusivities, objective.

The objective combines a quadratic data term, a quadratic smoothness term
of order 1 or 2 acting on the auxiliary face field, and a pixelwise
square-root coupling penalty tying the field to the forward gradient.
All functions accept either a single channel (2-D array plus one
:class:`~couplevar.grid.StaggeredField`) or sequences of channels; the
channel sum happens inside :func:`coupling_magnitude` before the square
root, which is the only place channels interact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import StaggeredField, divergence, grad_forward, laplacian_v

__all__ = [
    "ModelParams",
    "coupling_magnitude",
    "diffusivity",
    "face_diffusivities",
    "smoothness",
    "total_energy",
    "energy_gradient",
]


@dataclass(frozen=True)
class ModelParams:
    """Model order and weights.

    order: regularisation order of the smoothness term, 1 or 2.
    alpha: smoothness weight, > 0.
    beta:  coupling weight, > 0.
    eps:   penaliser regularisation, >= 0 (solvers require > 0).
    """

    order: int
    alpha: float
    beta: float
    eps: float = 1e-6

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")


def _as_channels(u, w):
    """Normalise (grid, field) or (sequence, sequence) to channel lists."""
    if isinstance(u, np.ndarray) and u.ndim == 2:
        u, w = [u], [w]
    u = [np.asarray(c, dtype=float) for c in u]
    w = list(w)
    if len(u) != len(w):
        raise ValueError("channel counts of u and w differ")
    for uc, wc in zip(u, w):
        if uc.shape != u[0].shape:
            raise ValueError("channels have inconsistent shapes")
        if wc.grid_shape != uc.shape:
            raise ValueError(
                f"staggered field for grid {wc.grid_shape} does not match "
                f"image shape {uc.shape}"
            )
    return u, w


def coupling_magnitude(u, w) -> np.ndarray:
    """Cell-centered squared deviation between grad_forward(u) and w.

    Each cell averages the squared residuals on its (up to) four adjacent
    faces, with unstored boundary faces contributing zero.  For several
    channels the per-channel maps are summed before any square root is
    taken.
    """
    u, w = _as_channels(u, w)
    n, mm = u[0].shape
    m = np.zeros((n, mm))
    for uc, wc in zip(u, w):
        r1 = np.diff(uc, axis=1) - wc.x
        r2 = np.diff(uc, axis=0) - wc.y
        m[:, :-1] += r1**2
        m[:, 1:] += r1**2
        m[:-1, :] += r2**2
        m[1:, :] += r2**2
    m *= 0.5
    return m


def diffusivity(m, eps: float):
    """Penaliser diffusivity ``1 / sqrt(m + eps)``."""
    val = np.asarray(m, dtype=float) + eps
    if np.any(val <= 0):
        raise ValueError("diffusivity undefined: m + eps must be positive")
    out = 1.0 / np.sqrt(val)
    return float(out) if np.isscalar(m) or np.ndim(m) == 0 else out


def face_diffusivities(m: np.ndarray, eps: float) -> StaggeredField:
    """Diffusivity averaged onto faces.

    Each stored face carries the arithmetic mean of the diffusivity at its
    two adjacent cells; this is the exact gradient factor of the pixelwise
    coupling sum with respect to that face value.
    """
    phi = diffusivity(m, eps)
    return StaggeredField(
        0.5 * (phi[:, :-1] + phi[:, 1:]),
        0.5 * (phi[:-1, :] + phi[1:, :]),
    )


def smoothness(w: StaggeredField, order: int) -> float:
    """Smoothness value of one channel: squared norm (order 1) or the
    squared norm of the componentwise Jacobian differences (order 2)."""
    if order == 1:
        return float(np.sum(w.x**2) + np.sum(w.y**2))
    if order != 2:
        raise ValueError(f"order must be 1 or 2, got {order}")
    n, m = w.grid_shape
    dxm = np.zeros((n, m))  # backward x-difference of w.x, Dirichlet
    dxm[:, :-1] += w.x
    dxm[:, 1:] -= w.x
    dym = np.zeros((n, m))  # backward y-difference of w.y, Dirichlet
    dym[:-1, :] += w.y
    dym[1:, :] -= w.y
    dyp = np.diff(w.x, axis=0)  # forward y-difference of w.x, Neumann
    dxp = np.diff(w.y, axis=1)  # forward x-difference of w.y, Neumann
    return float(
        np.sum(dxm**2) + np.sum(dyp**2) + np.sum(dxp**2) + np.sum(dym**2)
    )


def total_energy(f, u, w, params: ModelParams) -> float:
    """Value of the discrete objective for one or several channels.

    Channel reductions run in channel order so repeated evaluations are
    bitwise reproducible.
    """
    f = [f] if isinstance(f, np.ndarray) and f.ndim == 2 else list(f)
    u, w = _as_channels(u, w)
    if len(f) != len(u):
        raise ValueError("channel counts of f and u differ")
    data = 0.0
    smooth = 0.0
    for fc, uc, wc in zip(f, u, w):
        data += float(np.sum((uc - fc) ** 2))
        smooth += smoothness(wc, params.order)
    m = coupling_magnitude(u, w)
    coupling = float(np.sum(np.sqrt(m + params.eps)))
    return 0.5 * data + 0.5 * params.alpha * smooth + params.beta * coupling


def energy_gradient(f, u, w, params: ModelParams):
    """Exact gradient of :func:`total_energy` with respect to (u, w).

    Returns (gu, gw) with the same channel structure as the input.
    Requires ``m + eps > 0`` everywhere (eps > 0 in practice).
    """
    single = isinstance(u, np.ndarray) and u.ndim == 2
    f = [f] if isinstance(f, np.ndarray) and f.ndim == 2 else list(f)
    u, w = _as_channels(u, w)
    d = face_diffusivities(coupling_magnitude(u, w), params.eps)
    gu, gw = [], []
    for fc, uc, wc in zip(f, u, w):
        r = grad_forward(uc) - wc
        dr = d * r
        gu.append(uc - fc - params.beta * divergence(dr))
        if params.order == 1:
            gw.append(params.alpha * wc - params.beta * dr)
        else:
            gw.append(laplacian_v(wc) * -params.alpha - params.beta * dr)
    if single:
        return gu[0], gw[0]
    return gu, gw

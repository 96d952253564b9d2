"""Alternating minimisation baseline with conjugate-gradient inner solves.

This is the conventional way to minimise the coupled objective: freeze
the nonlinear diffusivity at the current iterate, solve the resulting
symmetric positive definite image system with CG, update the auxiliary
field (pointwise for order 1, CG for order 2), repeat.  It shares the
initialisation, the stationarity-based stopping rule, and the trace
format with the split Bregman solver so that runtime comparisons between
the two are meaningful.
"""

from __future__ import annotations

import time

import numpy as np

from .energy import coupling_magnitude, face_diffusivities
from .grid import StaggeredField, divergence, dot, grad_forward, laplacian_v
from .solver_bregman import (
    BregmanState,
    ConvergenceTrace,
    SolveResult,
    SolverConfig,
    _as_channel_list,
    _map_channels,
    _mode_energy,
    _stationarity_norm,
)

__all__ = ["cg_solve", "solve_altmin"]

# Inner CG settings for the subproblem solves: a loose relative tolerance
# per outer step is enough because the iterates are warm started.
CG_INNER_TOL = 1e-2
CG_INNER_CAP = 200


def cg_solve(apply, rhs, x0, max_iters, tol):
    """Conjugate gradients for a symmetric positive definite operator.

    Works on plain arrays and on :class:`~couplevar.grid.StaggeredField`
    operands.  Terminates when the residual norm falls below ``tol``
    times the initial residual norm or after ``max_iters`` iterations.
    A non-positive curvature direction raises ValueError, which signals
    a non-SPD operator (a bug in the caller, not a data condition).
    """
    x = x0
    r = rhs - apply(x)
    rs = dot(r, r)
    r0 = np.sqrt(rs)
    if r0 == 0.0:
        return x
    d = r
    for _ in range(max_iters):
        ad = apply(d)
        dad = dot(d, ad)
        if dad <= 0.0:
            raise ValueError("cg_solve: operator is not positive definite")
        a = rs / dad
        x = x + a * d
        r = r - a * ad
        rs_new = dot(r, r)
        if np.sqrt(rs_new) <= tol * r0:
            break
        d = r + (rs_new / rs) * d
        rs = rs_new
    return x


def _ones_field(shape):
    n, m = shape
    return StaggeredField(np.ones((n, m - 1)), np.ones((n - 1, m)))


def solve_altmin(f, config: SolverConfig) -> SolveResult:
    """Minimise the configured objective by lagged-diffusivity alternation.

    Accepts the same inputs, modes, and configuration as
    :func:`couplevar.solver_bregman.solve` and reports results in the
    same structure; only the minimisation strategy differs.
    """
    channels, single = _as_channel_list(f)
    for c in channels:
        if not np.all(np.isfinite(c)):
            raise ValueError("input image contains non-finite values")
        if c.shape != channels[0].shape:
            raise ValueError("channels have inconsistent shapes")
    if not config.params.eps > 0:
        raise ValueError("solvers require eps > 0")

    params = config.params
    alpha, beta = params.alpha, params.beta
    shape = channels[0].shape
    nch = len(channels)

    t0 = time.perf_counter()
    u = [fc.copy() for fc in channels]
    v = [StaggeredField.zeros(shape) for _ in channels]
    r0 = _stationarity_norm(channels, u, v, config)
    trace = ConvergenceTrace()
    converged = r0 == 0.0
    if config.record_trace:
        trace.append(
            0,
            time.perf_counter() - t0,
            0.0 if converged else 1.0,
            _mode_energy(channels, u, v, config),
        )

    k = 0
    while not converged and k < config.max_iter:
        k += 1
        # The diffusivity is frozen at the previous iterate for both
        # substeps of this outer iteration.
        if config.mode == "quadratic":
            d = _ones_field(shape)
        elif config.mode == "tv":
            zeros = [StaggeredField.zeros(shape) for _ in channels]
            d = face_diffusivities(coupling_magnitude(u, zeros), params.eps)
        else:
            d = face_diffusivities(coupling_magnitude(u, v), params.eps)

        def solve_u(c):
            rhs = channels[c] - beta * divergence(d * v[c])
            op = lambda x: x - beta * divergence(d * grad_forward(x))  # noqa: E731
            return cg_solve(op, rhs, u[c], CG_INNER_CAP, CG_INNER_TOL)

        u = _map_channels(solve_u, nch, config.channel_workers)

        if config.mode != "tv":

            def solve_v(c):
                g = grad_forward(u[c])
                if params.order == 1:
                    return StaggeredField(
                        beta * d.x * g.x / (alpha + beta * d.x),
                        beta * d.y * g.y / (alpha + beta * d.y),
                    )
                op = lambda w: w * beta * d - laplacian_v(w) * alpha  # noqa: E731
                return cg_solve(op, g * beta * d, v[c], CG_INNER_CAP, CG_INNER_TOL)

            v = _map_channels(solve_v, nch, config.channel_workers)

        rel = _stationarity_norm(channels, u, v, config) / r0
        if config.record_trace:
            trace.append(
                k,
                time.perf_counter() - t0,
                rel,
                _mode_energy(channels, u, v, config),
            )
        converged = rel <= config.tol

    state = BregmanState(
        u,
        v,
        [StaggeredField.zeros(shape) for _ in channels],
        [StaggeredField.zeros(shape) for _ in channels],
        k,
        r0,
    )
    if single:
        return SolveResult(u[0], v[0], trace, converged, k, state)
    return SolveResult(list(u), list(v), trace, converged, k, state)

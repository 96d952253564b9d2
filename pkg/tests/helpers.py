"""Shared test utilities: flattening, operator probing, reference evaluators."""

import numpy as np

from couplevar.grid import StaggeredField


def random_grid(rng, shape, scale=1.0):
    return scale * rng.standard_normal(shape)


def random_field(rng, shape, scale=1.0):
    n, m = shape
    return StaggeredField(
        scale * rng.standard_normal((n, m - 1)),
        scale * rng.standard_normal((n - 1, m)),
    )


def field_to_vec(w):
    return np.concatenate([w.x.ravel(), w.y.ravel()])


def vec_to_field(vec, shape):
    n, m = shape
    nx = n * (m - 1)
    return StaggeredField(
        vec[:nx].reshape(n, m - 1).copy(), vec[nx:].reshape(n - 1, m).copy()
    )


def field_dim(shape):
    n, m = shape
    return n * (m - 1) + (n - 1) * m


def assemble_operator(apply_fn, dim, to_vec, from_vec):
    """Build the dense matrix of a linear operator by probing unit vectors."""
    cols = []
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = 1.0
        cols.append(to_vec(apply_fn(from_vec(e))))
    return np.stack(cols, axis=1)


def reference_smoothness_order2(w):
    """Explicit loop evaluation of the second-order smoothness sum.

    Sums the squares of the four difference arrays: backward differences of
    each component along its own axis (zero-padded, Dirichlet) plus forward
    differences along the other axis (dropped at the boundary, Neumann).
    """
    n, m = w.x.shape[0], w.y.shape[1]
    total = 0.0
    for j in range(n):
        for i in range(m):
            left = w.x[j, i - 1] if i - 1 >= 0 else 0.0
            here = w.x[j, i] if i <= m - 2 else 0.0
            total += (here - left) ** 2
    for j in range(n - 1):
        for i in range(m - 1):
            total += (w.x[j + 1, i] - w.x[j, i]) ** 2
    for j in range(n - 1):
        for i in range(m - 1):
            total += (w.y[j, i + 1] - w.y[j, i]) ** 2
    for j in range(n):
        for i in range(m):
            below = w.y[j - 1, i] if j - 1 >= 0 else 0.0
            here = w.y[j, i] if j <= n - 2 else 0.0
            total += (here - below) ** 2
    return total


def reference_coupling_magnitude(u, w):
    """Loop evaluation of the pixelwise coupling magnitude (single channel)."""
    n, m = u.shape
    r1 = np.diff(u, axis=1) - w.x
    r2 = np.diff(u, axis=0) - w.y
    out = np.zeros((n, m))
    for j in range(n):
        for i in range(m):
            s = 0.0
            if i <= m - 2:
                s += r1[j, i] ** 2
            if i - 1 >= 0:
                s += r1[j, i - 1] ** 2
            if j <= n - 2:
                s += r2[j, i] ** 2
            if j - 1 >= 0:
                s += r2[j - 1, i] ** 2
            out[j, i] = 0.5 * s
    return out


def reference_total_energy(f, u, w, order, alpha, beta, eps):
    """Independent term-by-term evaluation of the discrete objective.

    Accepts single-channel (2-D array + field) or multi-channel
    (lists of equal length) inputs.
    """
    if isinstance(u, np.ndarray) and u.ndim == 2:
        f, u, w = [f], [u], [w]
    data = sum(float(np.sum((uc - fc) ** 2)) for uc, fc in zip(u, f))
    if order == 1:
        smooth = sum(
            float(np.sum(wc.x**2)) + float(np.sum(wc.y**2)) for wc in w
        )
    else:
        smooth = sum(reference_smoothness_order2(wc) for wc in w)
    m = sum(reference_coupling_magnitude(uc, wc) for uc, wc in zip(u, w))
    coupling = float(np.sum(np.sqrt(m + eps)))
    return 0.5 * data + 0.5 * alpha * smooth + beta * coupling


def oracle_minimize(f, params, gtol=1e-9, maxiter=50000):
    """Independent generic minimiser of the coupled objective (L-BFGS-B).

    Works on single-channel or channel-list inputs; returns (u, w) with the
    same structure.  The analytic gradient it consumes is validated against
    central finite differences elsewhere, so the minimisation path shares no
    code with the production solvers.
    """
    from scipy.optimize import minimize

    from couplevar.energy import energy_gradient, total_energy

    single = isinstance(f, np.ndarray) and f.ndim == 2
    fs = [f] if single else list(f)
    shape = fs[0].shape
    nu = fs[0].size
    per_field = field_dim(shape)
    nch = len(fs)

    def pack(us, ws):
        parts = []
        for uc, wc in zip(us, ws):
            parts.append(uc.ravel())
            parts.append(field_to_vec(wc))
        return np.concatenate(parts)

    def unpack(z):
        us, ws = [], []
        off = 0
        for _ in range(nch):
            us.append(z[off : off + nu].reshape(shape).copy())
            off += nu
            ws.append(vec_to_field(z[off : off + per_field], shape))
            off += per_field
        return us, ws

    def fun(z):
        us, ws = unpack(z)
        e = total_energy(fs, us, ws, params)
        gu, gw = energy_gradient(fs, us, ws, params)
        return e, pack(gu, gw)

    z0 = pack([fc.copy() for fc in fs], [StaggeredField.zeros(shape)] * nch)
    res = minimize(
        fun,
        z0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": maxiter, "maxfun": maxiter, "ftol": 1e-18,
                 "gtol": gtol, "maxcor": 40},
    )
    us, ws = unpack(res.x)
    if single:
        return us[0], ws[0]
    return us, ws


def oracle_minimize_tv(f, beta, eps, gtol=1e-9):
    """L-BFGS minimiser of the pure coupling objective with the field fixed
    at zero (the large-alpha limit)."""
    from scipy.optimize import minimize

    from couplevar.energy import coupling_magnitude, face_diffusivities
    from couplevar.grid import divergence, grad_forward

    shape = f.shape
    zero = StaggeredField.zeros(shape)

    def fun(z):
        u = z.reshape(shape)
        m = coupling_magnitude(u, zero)
        e = 0.5 * float(np.sum((u - f) ** 2)) + beta * float(
            np.sum(np.sqrt(m + eps))
        )
        d = face_diffusivities(m, eps)
        gu = u - f - beta * divergence(d * grad_forward(u))
        return e, gu.ravel()

    res = minimize(
        fun,
        f.ravel().copy(),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 50000, "ftol": 1e-18, "gtol": gtol, "maxcor": 40},
    )
    return res.x.reshape(shape)

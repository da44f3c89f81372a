"""Independent oracles for the test suite.

Everything here is deliberately written against the raw formulas (literal
loops, fixed-grid quadrature, dense linear algebra, batched flow + Newton)
rather than through the library's own code paths, so a test that compares
the two is a genuine cross-check.
"""

import numpy as np

from dplhom.lattice import energy_many, residual_many


def direct_weighted_norm(values, a, b, p):
    """Literal summation of the weighted norm, zero extension by hand."""
    n = len(values)
    ext = [0.0] + list(values) + [0.0]
    total = 0.0
    for j in range(n + 1):  # difference terms, k = -K .. K+1
        total += a[j] * abs(ext[j + 1] - ext[j]) ** p
    for i in range(n):
        total += b[i] * abs(values[i]) ** p
    return total ** (1.0 / p)


def fd_gradient(values, prob, h=1e-6):
    """Central finite differences of the energy, batched over coordinates."""
    values = np.asarray(values, dtype=float)
    n = values.size
    eye = np.eye(n)
    plus = values[None, :] + h * eye
    minus = values[None, :] - h * eye
    return (energy_many(plus, prob) - energy_many(minus, prob)) / (2.0 * h)


def trapezoid_primitive(f_scalar, k, t, points=200_001):
    """Fixed-grid trapezoid value of int_0^t f(k, s) ds."""
    s = np.linspace(0.0, t, points)
    ys = np.array([f_scalar(k, x) for x in s])
    trap = getattr(np, "trapezoid", None) or np.trapz
    return float(trap(ys, s))


def dense_jacobian_fd(values, prob, h=1e-7):
    """Finite-difference Jacobian of the residual (dense)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    J = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (residual_many(values + e, prob) - residual_many(values - e, prob)) / (2 * h)
    return J


def _batched_newton(V, prob, tol=1e-12, max_iter=60, h=1e-7):
    """Plain (undamped) Newton on every row of V at once; FD Jacobians.

    Returns the rows that converged to roots of the residual.
    """
    V = np.array(V, dtype=float)
    m, n = V.shape
    alive = np.ones(m, dtype=bool)
    done = np.zeros(m, dtype=bool)
    for _ in range(max_iter):
        if not np.any(alive):
            break
        R = residual_many(V, prob)
        bad = ~np.all(np.isfinite(R), axis=1) | (np.max(np.abs(V), axis=1) > 1e6)
        alive &= ~bad
        conv = alive & (np.max(np.abs(R), axis=1) <= tol)
        done |= conv
        alive &= ~conv
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        W = V[idx]
        J = np.empty((idx.size, n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            J[:, :, j] = (residual_many(W + e, prob) - residual_many(W - e, prob)) / (2 * h)
        try:
            steps = np.linalg.solve(J, -R[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            steps = np.full((idx.size, n), np.nan)
            for row, (Ji, ri) in enumerate(zip(J, R[idx])):
                try:
                    steps[row] = np.linalg.solve(Ji, -ri)
                except np.linalg.LinAlgError:
                    pass
        ok_step = np.all(np.isfinite(steps), axis=1)
        V[idx[ok_step]] += steps[ok_step]
        alive[idx[~ok_step]] = False
    return [V[i] for i in np.nonzero(done)[0]]


def multistart_flow_newton(prob, n_starts, amplitude, seed, flow_steps=10, dt=0.02):
    """Gradient-flow preconditioning then Newton polish from random starts.

    Independent root enumerator: integrates du/dtau = -residual(u) for a
    short time (batched explicit Euler with a norm cap), then polishes every
    endpoint with dense FD-Jacobian Newton.  Returns deduplicated roots,
    canonical in sign.
    """
    rng = np.random.default_rng(seed)
    n = prob.window.size
    V = rng.uniform(-amplitude, amplitude, size=(n_starts, n))
    for _ in range(flow_steps):
        R = residual_many(V, prob)
        V = V - dt * R
        scale = np.maximum(1.0, np.max(np.abs(V), axis=1) / (4.0 * amplitude))
        V = V / scale[:, None]
    roots = _batched_newton(V, prob)
    return dedup_signed(roots)


def canonical_sign(v, tol_rel=1e-12):
    v = np.array(v, dtype=float)
    scale = np.max(np.abs(v))
    if scale == 0.0:
        return v
    idx = np.argmax(np.abs(v) > tol_rel * scale)
    return -v if v[idx] < 0.0 else v


def dedup_signed(vectors, tol=1e-6):
    """Deduplicate up to sign with an infinity-norm tolerance."""
    out = []
    for v in vectors:
        c = canonical_sign(v)
        if not any(np.max(np.abs(c - w)) <= tol for w in out):
            out.append(c)
    return out


def sets_match(set_a, set_b, tol=1e-6):
    """Mutual matching of two root inventories up to sign and tolerance."""
    a = dedup_signed(set_a, tol)
    b = dedup_signed(set_b, tol)
    if len(a) != len(b):
        return False, a, b
    for v in a:
        if not any(np.max(np.abs(v - w)) <= tol for w in b):
            return False, a, b
    return True, a, b

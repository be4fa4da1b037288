"""Fixed-step propagators for U' = (i lam sigma3 + s rho J) U.

The production scheme is the fourth-order Magnus method with two Gauss nodes
per step. Its exponential is evaluated in closed form (every step generator is
traceless 2x2), so the oscillatory part exp(i lam h sigma3) is exact and the
order does not degrade for large |lam| h. A classical RK4 stepper is kept as an
independent reference.

Arrays are broadcast over a leading batch of spectral parameters: ``lam`` has
shape (m,), step matrices have shape (m, n, 2, 2).
"""
from __future__ import annotations

import numpy as np

GAUSS1 = 0.5 - np.sqrt(3.0) / 6.0
GAUSS2 = 0.5 + np.sqrt(3.0) / 6.0
J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _expm_traceless(o11, o12, o21):
    """exp of [[o11, o12], [o21, -o11]] via cosh(q) I + sinh(q)/q * Omega."""
    q2 = o11 * o11 + o12 * o21
    q = np.sqrt(q2 + 0j)
    small = np.abs(q) < 1e-6
    qs = np.where(small, 1.0, q)
    ch = np.where(small, 1.0 + q2 / 2.0 + q2 * q2 / 24.0, np.cosh(qs))
    sh = np.where(small, 1.0 + q2 / 6.0 + q2 * q2 / 120.0, np.sinh(qs) / qs)
    E = np.empty(np.broadcast(o11, o12).shape + (2, 2), dtype=complex)
    E[..., 0, 0] = ch + sh * o11
    E[..., 1, 1] = ch - sh * o11
    E[..., 0, 1] = sh * o12
    E[..., 1, 0] = sh * o21
    return E


def magnus_steps(rho, lam, x0, x1, n, chirality=1, damp=True):
    """Per-step propagators on [x0, x1] split into n equal steps.

    ``rho`` is a callable. With ``damp`` each step is multiplied by
    exp(-|Im lam| h) so that products stay finite for large Im lam; the
    caller must undo the factor exp(-|Im lam| (x1 - x0)).
    """
    h = (x1 - x0) / n
    xs = x0 + h * np.arange(n)
    r1 = chirality * np.asarray(rho(xs + GAUSS1 * h), dtype=float)
    r2 = chirality * np.asarray(rho(xs + GAUSS2 * h), dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))[:, None]
    rbar = 0.5 * (r1 + r2)
    comm = (np.sqrt(3.0) / 6.0) * h * h * 1j * lam * (r1 - r2)
    o11 = np.broadcast_to(1j * lam * h, comm.shape)
    E = _expm_traceless(o11, h * rbar + comm, -h * rbar + comm)
    if damp:
        E *= np.exp(-np.abs(lam.imag) * h)[..., None, None]
    return E


def tree_product(E):
    """Ordered product E[n-1] @ ... @ E[0] along axis -3 by pairwise reduction."""
    E = np.asarray(E)
    while E.shape[-3] > 1:
        if E.shape[-3] % 2:
            eye = np.broadcast_to(np.eye(2, dtype=E.dtype), E.shape[:-3] + (1, 2, 2))
            E = np.concatenate([E, eye], axis=-3)
        E = E[..., 1::2, :, :] @ E[..., 0::2, :, :]
    return E[..., 0, :, :]


def cumulative_product(E, U0=None):
    """Running products U_k = E[k-1] ... E[0] U0 for k = 0..n (sequential)."""
    n = E.shape[-3]
    out = np.empty(E.shape[:-3] + (n + 1, 2, 2), dtype=E.dtype)
    U = np.broadcast_to(np.eye(2, dtype=E.dtype) if U0 is None else U0, E.shape[:-3] + (2, 2)).copy()
    out[..., 0, :, :] = U
    for k in range(n):
        U = E[..., k, :, :] @ U
        out[..., k + 1, :, :] = U
    return out


def rk4_propagator(rho, lam, x0, x1, n, chirality=1):
    """Reference RK4 propagator for a single lam (independent check only)."""
    h = (x1 - x0) / n
    lam = complex(lam)
    sig = np.array([[1j * lam, 0], [0, -1j * lam]])

    def A(x):
        return sig + chirality * float(rho(x)) * J

    U = np.eye(2, dtype=complex)
    x = x0
    for _ in range(n):
        k1 = A(x) @ U
        k2 = A(x + h / 2) @ (U + h / 2 * k1)
        k3 = A(x + h / 2) @ (U + h / 2 * k2)
        k4 = A(x + h) @ (U + h * k3)
        U = U + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        x += h
    return U

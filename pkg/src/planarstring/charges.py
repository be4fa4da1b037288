"""Noether charges of the planar string, the constraint, and the Hamiltonian.

All functionals are evaluated at a time slice xi0 from the translated chiral
profiles I_+(xi + xi0), I_-(xi - xi0). Integrands are sampled at the field
spacing on a window that contains both translated supports.

The angular double integral uses the kernel

    F_J = sum over chiralities of  int int eps(eta1 - eta2)
          sin I(eta1) cos I(eta1) sin^2 I(eta2) deta1 deta2,

in which each term involves a single chirality. It is reduced to a single
integral with a cumulative antiderivative; an O(N^2) direct double sum is kept
as an independent check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .chiral_field import DEFAULT_TOL, ExternalVariables, Tolerances, topological_charge
from .errors import ConstraintError, ValidationError
from .worldsheet import _check_pair, delta_e_from_I


def _window(fields, xi0=0.0):
    g = fields[0].grid
    R = g.L + abs(xi0)
    m = 2 * int(np.ceil(R / g.h)) + 1
    return np.linspace(-R, R, m)


def _angles(fields, xi0=0.0):
    fp, fm = _check_pair(fields)
    u = _window(fields, xi0)
    return u, fp.I_at(u + xi0), fm.I_at(u - xi0)


def _simpson_weights(u):
    """Composite Simpson weights for an odd number of uniform nodes."""
    w = np.full(u.size, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (u[1] - u[0]) / 3.0


def _require_quantized(fields, tol):
    return topological_charge(fields[0], tol), topological_charge(fields[1], tol)


def momentum(fields, beta=0.0, kappa=1.0, gamma=1.0, xi0=0.0,
             tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """(P1, P3) = -gamma kappa int [sin(2I_+ + 2b) + sin(2I_- - 2b), cos(2I_+ + 2b) - cos(2I_- - 2b)]."""
    _require_quantized(fields, tol)
    u, Ip, Im = _angles(fields, xi0)
    b = beta
    p1 = np.sin(2 * Ip + 2 * b) + np.sin(2 * Im - 2 * b)
    p3 = np.cos(2 * Ip + 2 * b) - np.cos(2 * Im - 2 * b)
    return -gamma * kappa * np.array([simpson(p1, x=u), simpson(p3, x=u)])


def momentum_from_tangents(fields, beta=0.0, kappa=1.0, gamma=1.0, xi0=0.0) -> np.ndarray:
    """2 gamma kappa int (de_+ + de_-) dxi, an independent route to the momentum."""
    fp, fm = _check_pair(fields)
    u, Ip, Im = _angles(fields, xi0)
    d = delta_e_from_I(Ip, fp.chirality, beta) + delta_e_from_I(Im, fm.chirality, beta)
    return 2 * gamma * kappa * simpson(d, x=u, axis=0)


def F_P(fields, beta=0.0, xi0=0.0) -> float:
    """Squared-momentum functional; |P|^2 = gamma^2 kappa^2 F_P."""
    u, Ip, Im = _angles(fields, xi0)
    p1 = simpson(np.sin(2 * Ip + 2 * beta) + np.sin(2 * Im - 2 * beta), x=u)
    p3 = simpson(np.cos(2 * Ip + 2 * beta) - np.cos(2 * Im - 2 * beta), x=u)
    return float(p1 * p1 + p3 * p3)


def F_P_double(fields, xi0=0.0, direct=False) -> float:
    """The beta-free form 4 int int S(x) S(y) cos(D(x) - D(y)).

    S = sin(I_+ + I_-) and D = I_+ - I_-. The kernel factorizes, so by default
    the double integral is evaluated as 4[(int S cos D)^2 + (int S sin D)^2];
    ``direct`` sums the full N x N kernel instead.
    """
    u, Ip, Im = _angles(fields, xi0)
    S = np.sin(Ip + Im)
    D = Ip - Im
    if direct:
        w = _simpson_weights(u)
        K = np.cos(D[:, None] - D[None, :])
        return float(4 * (w * S) @ K @ (w * S))
    return float(4 * (simpson(S * np.cos(D), x=u) ** 2 + simpson(S * np.sin(D), x=u) ** 2))


def _fj_single(u, I):
    f = np.sin(I) * np.cos(I)
    g = np.sin(I) ** 2
    G = cumulative_simpson(g, x=u, initial=0.0)
    return simpson(f * (2 * G - G[-1]), x=u)


def _fj_single_direct(u, I_at):
    # eta1 on the nodes (Simpson weights), eta2 at cell midpoints (midpoint rule):
    # the sign kernel never vanishes and its jump sits on a cell boundary.
    h = u[1] - u[0]
    mid = 0.5 * (u[1:] + u[:-1])
    I = I_at(u)
    w = _simpson_weights(u)
    f = np.sin(I) * np.cos(I)
    g = np.sin(I_at(mid)) ** 2
    sgn = np.sign(u[:, None] - mid[None, :])
    return float((w * f) @ sgn @ (h * g))


def F_J(fields, xi0=0.0, method="cumulative", kernel="single") -> float:
    """Angular double integral.

    ``kernel="single"`` pairs each chirality with itself (conserved under
    evolution); ``kernel="mixed"`` is the literal variant with the prefactor
    sin I_+(eta1) sin I_-(eta2), kept for comparison. ``method`` selects the
    O(N) cumulative evaluation or the O(N^2) staggered double sum.
    """
    u, Ip, Im = _angles(fields, xi0)
    if kernel == "mixed":
        f1 = np.sin(Ip) * np.cos(Ip)
        g1 = np.sin(Im) * np.sin(Ip)
        f2 = np.sin(Ip) * np.cos(Im)
        g2 = np.sin(Im) ** 2
        total = 0.0
        for f, g in ((f1, g1), (f2, g2)):
            G = cumulative_simpson(g, x=u, initial=0.0)
            total += simpson(f * (2 * G - G[-1]), x=u)
        return float(total)
    if kernel != "single":
        raise ValidationError(f"unknown kernel {kernel!r}")
    if method == "cumulative":
        return float(_fj_single(u, Ip) + _fj_single(u, Im))
    if method == "direct":
        fp, fm = fields
        return (_fj_single_direct(u, lambda x: fp.I_at(x + xi0))
                + _fj_single_direct(u, lambda x: fm.I_at(x - xi0)))
    raise ValidationError(f"unknown method {method!r}")


def angular_J(fields, kappa=1.0, gamma=1.0, xi0=0.0, tol: Tolerances = DEFAULT_TOL, **kw) -> float:
    """J = gamma kappa^2 F_J."""
    _require_quantized(fields, tol)
    return gamma * kappa ** 2 * F_J(fields, xi0, **kw)


def hamiltonian(fields, xi0=0.0, tol: Tolerances = DEFAULT_TOL) -> float:
    """H = 1/2 int (rho_+^2 + rho_-^2) on the constraint surface."""
    _require_quantized(fields, tol)
    fp, fm = _check_pair(fields)
    u = _window(fields, xi0)
    return 0.5 * float(simpson(fp.rho_at(u + xi0) ** 2 + fm.rho_at(u - xi0) ** 2, x=u))


def constraint_phi(fields, P, J, gamma=1.0, beta=0.0, xi0=0.0, fj_tol=1e-12):
    """Residual Phi = |P|^2 - gamma J Omega with Omega = F_P / F_J.

    Returns (Phi, Omega). Raises ConstraintError when F_J vanishes, where
    Omega is undefined (the extended points kappa = 0 or infinity).
    """
    P = np.asarray(P, dtype=float)
    fj = F_J(fields, xi0)
    if abs(fj) < fj_tol:
        raise ConstraintError(
            f"F_J = {fj:.3e} vanishes: Omega undefined, Phi = |P|^2 = {float(P @ P):.6g} (off the constraint surface)")
    omega = F_P(fields, beta, xi0) / fj
    return float(P @ P - gamma * J * omega), omega


@dataclass(frozen=True)
class ChargeSet:
    P: tuple
    J: float
    M: float
    H: float
    F_P: float
    F_J: float
    Omega: Optional[float]
    Phi: float
    n_plus: int
    n_minus: int
    extended: bool = False

    def to_record(self) -> dict:
        return {"P1": self.P[0], "P3": self.P[1], "J": self.J, "M": self.M, "H": self.H,
                "F_P": self.F_P, "F_J": self.F_J, "Omega": self.Omega,
                "Phi_residual": self.Phi, "n_plus": self.n_plus, "n_minus": self.n_minus}


def compute_charges(fields, ext: ExternalVariables, xi0=0.0, tol: Tolerances = DEFAULT_TOL,
                    fj_tol=1e-12) -> ChargeSet:
    """All charges for one configuration.

    When F_J vanishes (vacuum, or any configuration with no angular content)
    Omega is reported as None, Phi as |P|^2, and ``extended`` is set.
    """
    n_p, n_m = _require_quantized(fields, tol)
    k, g, b = ext.kappa, ext.gamma, ext.beta
    P = momentum(fields, b, k, g, xi0, tol)
    fp_ = F_P_double(fields, xi0)
    fj = F_J(fields, xi0)
    J = g * k * k * fj
    Z1, Z3 = ext.Z
    M = Z1 * P[1] - Z3 * P[0] + J
    H = hamiltonian(fields, xi0, tol)
    if abs(fj) < fj_tol:
        omega, phi_res, ext_flag = None, float(P @ P), True
    else:
        omega = fp_ / fj
        phi_res, ext_flag = float(P @ P - g * J * omega), False
    return ChargeSet((float(P[0]), float(P[1])), float(J), float(M), float(H), float(fp_), float(fj),
                     None if omega is None else float(omega), phi_res, n_p, n_m, ext_flag)

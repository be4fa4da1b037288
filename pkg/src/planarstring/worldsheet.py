"""World-sheet reconstruction in (2+1)-dimensional Minkowski space.

Coordinates are ordered (X0, X1, X3) with metric diag(1, -1, -1). Light-cone
variables are xi_+ = xi1 + xi0 and xi_- = xi1 - xi0; the chiral fields enter
only through I_+(xi_+) and I_-(xi_-).

The embedding is

    X0 = kappa xi0,
    X_sp = Z - kappa n(beta) xi1 + kappa [G_+(xi_+) - G_-(xi_-)],

where G_pm is the antiderivative of the frame correction delta_e_pm, centered so
that its two asymptotic values are opposite. Both tangents d_pm X are then
light-like and d_+X . d_-X = -(kappa^2/2) cos^2(I_+ + I_-).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .chiral_field import (DEFAULT_TOL, MINUS, PLUS, ChiralField, ExternalVariables,
                           Tolerances, topological_charge)
from .errors import CuspError, GridError, ValidationError

METRIC = np.array([1.0, -1.0, -1.0])


def minkowski_dot(u, v):
    """Inner product in diag(1, -1, -1) over the last axis."""
    return np.sum(np.asarray(u) * np.asarray(v) * METRIC, axis=-1)


def minkowski_cross(u, v):
    """Vector orthogonal to u and v in the Minkowski metric."""
    w = np.cross(u, v)
    return w * METRIC


def n_vec(beta):
    """Asymptotic direction n(beta) = (sin 2beta, cos 2beta) in the (X1, X3) plane."""
    return np.array([np.sin(2 * beta), np.cos(2 * beta)])


def delta_e_from_I(I, chirality, beta):
    s = chirality
    ang = I + 2 * s * beta
    sI = np.sin(I)
    return np.stack([-sI * np.cos(ang), s * sI * np.sin(ang)], axis=-1)


def delta_e(field: ChiralField, xi, beta):
    """Frame correction sin I * (-cos(I +- 2beta), +-sin(I +- 2beta))."""
    return delta_e_from_I(field.I_at(np.asarray(xi, dtype=float)), field.chirality, beta)


def _check_pair(fields):
    fp, fm = fields
    if fp.chirality != PLUS or fm.chirality != MINUS:
        raise ValidationError("fields must be given as (plus, minus)")
    if fp.grid != fm.grid:
        raise GridError(f"chiral fields live on different grids: {fp.grid} vs {fm.grid}")
    return fp, fm


class Embedding:
    """Closed-form evaluator of X(xi0, xi1) and its derivatives.

    The centered antiderivatives are cubic-spline integrals of delta_e sampled
    at a quarter of the field spacing on a window wide enough for |xi0| <= span.
    """

    def __init__(self, fields, ext: ExternalVariables, span: float = 0.0,
                 tol: Tolerances = DEFAULT_TOL, check_charge: bool = True):
        self.fp, self.fm = _check_pair(fields)
        if check_charge:
            self.n_plus = topological_charge(self.fp, tol)
            self.n_minus = topological_charge(self.fm, tol)
        self.ext = ext
        self.tol = tol
        grid = self.fp.grid
        R = grid.L + abs(span) + 4 * grid.h
        m = int(np.ceil(8 * R / grid.h)) + 1
        self._u = np.linspace(-R, R, m)
        self._G = {}
        for f in (self.fp, self.fm):
            de = delta_e(f, self._u, ext.beta)
            sp = CubicSpline(self._u, de, axis=0)
            anti = sp.antiderivative()
            half = 0.5 * anti(R)
            self._G[f.chirality] = (anti, half, R)

    def G(self, chirality, u):
        anti, half, R = self._G[chirality]
        u = np.asarray(u, dtype=float)
        out = anti(np.clip(u, -R, R)) - half
        return out

    def theta(self, xi0, xi1):
        xi0 = np.asarray(xi0, dtype=float)
        xi1 = np.asarray(xi1, dtype=float)
        return self.fp.I_at(xi1 + xi0) + self.fm.I_at(xi1 - xi0)

    def X(self, xi0, xi1):
        xi0, xi1 = np.broadcast_arrays(np.asarray(xi0, dtype=float), np.asarray(xi1, dtype=float))
        k = self.ext.kappa
        n = n_vec(self.ext.beta)
        sp = (np.asarray(self.ext.Z) - k * n * xi1[..., None]
              + k * (self.G(PLUS, xi1 + xi0) - self.G(MINUS, xi1 - xi0)))
        return np.concatenate([(k * xi0)[..., None], sp], axis=-1)

    def tangents(self, xi0, xi1):
        """(d_+X, d_-X) from the frame formula."""
        xi0, xi1 = np.broadcast_arrays(np.asarray(xi0, dtype=float), np.asarray(xi1, dtype=float))
        return tangent(xi0, xi1, (self.fp, self.fm), self.ext)


def tangent(xi0, xi1, fields, ext: ExternalVariables):
    """Light-like tangents d_+X = (k/2)(b0 - n) + k de_+, d_-X = -(k/2)(b0 + n) - k de_-."""
    fp, fm = fields
    xi0, xi1 = np.broadcast_arrays(np.asarray(xi0, dtype=float), np.asarray(xi1, dtype=float))
    k = ext.kappa
    n = n_vec(ext.beta)
    dp = delta_e(fp, xi1 + xi0, ext.beta)
    dm = delta_e(fm, xi1 - xi0, ext.beta)
    half = np.full(xi0.shape + (1,), 0.5 * k)
    tp = np.concatenate([half, -0.5 * k * n + k * dp], axis=-1)
    tm = np.concatenate([-half, -0.5 * k * n - k * dm], axis=-1)
    return tp, tm


def phi_from_theta(theta, eps_cusp=DEFAULT_TOL.eps_cusp):
    """phi = -2 ln|cos theta|, NaN (the cusp marker) where |cos theta| < eps_cusp."""
    c = np.abs(np.cos(theta))
    with np.errstate(divide="ignore"):
        out = -2.0 * np.log(c) + 0.0  # + 0.0 turns -0.0 into 0.0 for stable output
    return np.where(c < eps_cusp, np.nan, out)


def phi(xi0, xi1, fields, tol: Tolerances = DEFAULT_TOL):
    fp, fm = fields
    xi0 = np.asarray(xi0, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    th = fp.I_at(xi1 + xi0) + fm.I_at(xi1 - xi0)
    return phi_from_theta(th, tol.eps_cusp)


def pde_residual(fields, xi0, xi1, h: float, tol: Tolerances = DEFAULT_TOL):
    """d_+d_- phi - 2 rho_+ rho_- e^phi with d_+d_- = (d1^2 - d0^2)/4 on 3-point stencils of width h.

    The residual is O(h^2); NaN is returned at nodes whose stencil touches a
    cusp.
    """
    fp, fm = _check_pair(fields)
    t = np.asarray(xi0, dtype=float)
    x = np.asarray(xi1, dtype=float)
    p = lambda dt, dx: phi(t + dt, x + dx, (fp, fm), tol)
    c = p(0.0, 0.0)
    d11 = (p(0.0, h) - 2 * c + p(0.0, -h)) / h ** 2
    d00 = (p(h, 0.0) - 2 * c + p(-h, 0.0)) / h ** 2
    rhs = 2 * fp.rho_at(x + t) * fm.rho_at(x - t) * np.exp(c)
    return 0.25 * (d11 - d00) - rhs


@dataclass(frozen=True, eq=False)
class WorldSheet:
    """Gridded embedding; X has shape (len(xi0), len(xi1), 3)."""

    xi0: np.ndarray
    xi1: np.ndarray
    X: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    externals: ExternalVariables
    fields: tuple
    embedding: Embedding

    @property
    def cusp_mask(self):
        return np.isnan(self.phi)


def reconstruct(fields, ext: ExternalVariables, xi0, xi1=None, threads: int = 1,
                tol: Tolerances = DEFAULT_TOL) -> WorldSheet:
    """Build the world-sheet on the lattice xi0 x xi1 (xi1 defaults to the field grid)."""
    fp, fm = _check_pair(fields)
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    xi1 = fp.xi if xi1 is None else np.atleast_1d(np.asarray(xi1, dtype=float))
    emb = Embedding((fp, fm), ext, span=float(np.abs(xi0).max(initial=0.0)), tol=tol)

    def row(t):
        tt = np.full_like(xi1, t)
        return emb.X(tt, xi1), emb.theta(tt, xi1)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(row, xi0))
    else:
        rows = [row(t) for t in xi0]
    X = np.stack([r[0] for r in rows]) if rows else np.zeros((0, xi1.size, 3))
    th = np.stack([r[1] for r in rows]) if rows else np.zeros((0, xi1.size))
    return WorldSheet(xi0, xi1, X, th, phi_from_theta(th, tol.eps_cusp), ext, (fp, fm), emb)


# --------------------------------------------------------------------------
# fundamental forms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FundamentalForms:
    """E_coeff = d_+X . d_-X; II coefficients in light-cone coordinates."""

    E_coeff: np.ndarray
    II_pp: np.ndarray
    II_mm: np.ndarray
    II_pm: np.ndarray

    @property
    def gauss_curvature(self):
        det_I = -self.E_coeff ** 2
        det_II = self.II_pp * self.II_mm - self.II_pm ** 2
        return det_II / det_I


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFF = np.arange(-2, 3)


def _unit_normal(tp, tm, emb: Embedding):
    N = minkowski_cross(tp, tm)
    N = N / np.sqrt(np.abs(minkowski_dot(N, N)))[..., None]
    # orientation fixed by continuity from the left end of the string
    L = emb.fp.grid.L
    tp0, tm0 = emb.tangents(0.0, -L)
    N0 = minkowski_cross(tp0, tm0)
    b = emb.ext.beta
    ref = np.array([0.0, np.cos(2 * b), -np.sin(2 * b)])
    sign = 1.0 if np.dot(N0, ref) >= 0 else -1.0
    return sign * N


def forms(ws, xi0, xi1, step=None, tol: Tolerances = DEFAULT_TOL) -> FundamentalForms:
    """Fundamental forms at the points (xi0, xi1), derived from the embedding.

    Tangents and second derivatives come from 5-point stencils along the
    light-cone directions. The normal is the Minkowski-orthogonal completion
    of the frame tangents; near cusps the stencil tangents become almost
    parallel and their cross product loses too many digits.
    """
    emb = ws.embedding if isinstance(ws, WorldSheet) else ws
    xi0, xi1 = np.broadcast_arrays(np.asarray(xi0, dtype=float), np.asarray(xi1, dtype=float))
    th = emb.theta(xi0, xi1)
    if np.any(np.abs(np.cos(th)) < tol.eps_cusp):
        raise CuspError("fundamental forms requested at a cusp-marked point")
    d = emb.fp.grid.h if step is None else float(step)
    # xi_+ -> xi_+ + k d changes (xi0, xi1) by (k d/2, k d/2); xi_- by (-k d/2, k d/2)
    Xp = np.stack([emb.X(xi0 + o * d / 2, xi1 + o * d / 2) for o in _OFF])
    Xm = np.stack([emb.X(xi0 - o * d / 2, xi1 + o * d / 2) for o in _OFF])
    tp = np.tensordot(_D1, Xp, axes=(0, 0)) / d
    tm = np.tensordot(_D1, Xm, axes=(0, 0)) / d
    Xpp = np.tensordot(_D2, Xp, axes=(0, 0)) / d ** 2
    Xmm = np.tensordot(_D2, Xm, axes=(0, 0)) / d ** 2
    Xpm = np.zeros_like(Xpp)
    for a in (-1, 1):
        for b in (-1, 1):
            # shift xi_+ by a d and xi_- by b d
            Xpm += a * b * emb.X(xi0 + (a - b) * d / 2, xi1 + (a + b) * d / 2)
    Xpm /= 4 * d * d
    N = _unit_normal(*emb.tangents(xi0, xi1), emb)
    return FundamentalForms(minkowski_dot(tp, tm), minkowski_dot(Xpp, N),
                            minkowski_dot(Xmm, N), minkowski_dot(Xpm, N))


# --------------------------------------------------------------------------
# integral curvature
# --------------------------------------------------------------------------

def _dphi(emb: Embedding, t, x):
    """(d0 phi, d1 phi) from phi = -2 ln|cos theta|."""
    th = emb.theta(t, x)
    rp = emb.fp.rho_at(x + t)
    rm = emb.fm.rho_at(x - t)
    tan = np.tan(th)
    return 2 * tan * (rp - rm), 2 * tan * (rp + rm)


def integral_curvature(ws, window, n: int = 2049, method: str = "boundary",
                       tol: Tolerances = DEFAULT_TOL) -> float:
    """Integral of 2 d_+d_- phi over a (xi0, xi1) rectangle (t0, t1, x0, x1).

    ``boundary`` reduces the integral to line integrals of grad phi around
    the rectangle. ``direct`` integrates k dS with k = det II / det I and
    dS = 2|g_{+-}| dxi0 dxi1, using the tangent-frame metric.
    """
    emb = ws.embedding if isinstance(ws, WorldSheet) else ws
    t0, t1, x0, x1 = map(float, window)
    if not (t1 > t0 and x1 > x0):
        raise ValidationError(f"empty window {window}")
    t = np.linspace(t0, t1, n)
    x = np.linspace(x0, x1, n)
    if method == "boundary":
        edges = [emb.theta(t, np.full_like(t, x0)), emb.theta(t, np.full_like(t, x1)),
                 emb.theta(np.full_like(x, t0), x), emb.theta(np.full_like(x, t1), x)]
        if any(np.any(np.abs(np.cos(e)) < tol.eps_cusp * 1e3) for e in edges):
            raise CuspError("window boundary passes through a cusp")
        _, d1_right = _dphi(emb, t, np.full_like(t, x1))
        _, d1_left = _dphi(emb, t, np.full_like(t, x0))
        d0_top, _ = _dphi(emb, np.full_like(x, t1), x)
        d0_bot, _ = _dphi(emb, np.full_like(x, t0), x)
        return 0.5 * (simpson(d1_right - d1_left, x=t) - simpson(d0_top - d0_bot, x=x))
    if method == "direct":
        T, Xg = np.meshgrid(t, x, indexing="ij")
        th = emb.theta(T, Xg)
        if np.any(np.abs(np.cos(th)) < tol.eps_cusp * 1e3):
            raise CuspError("direct curvature integral needs a cusp-free window")
        tp, tm = emb.tangents(T, Xg)
        g = minkowski_dot(tp, tm)
        k = emb.ext.kappa
        II_pp = k * emb.fp.rho_at(Xg + T)
        II_mm = -k * emb.fm.rho_at(Xg - T)
        curv = (II_pp * II_mm) / (-g * g)
        dens = curv * 2 * np.abs(g)
        return float(simpson(simpson(dens, x=x, axis=1), x=t))
    raise ValidationError(f"unknown method {method!r}")

"""Chiral potentials rho(xi), their antiderivatives I(xi), and chiral translation.

A ``ChiralField`` stores samples of rho on a uniform grid over [-L, L] together
with an *evaluator* (closed form, Darboux dressing, or cubic spline) that can
be queried off-grid. Everything downstream (scattering, world-sheet, cusps)
goes through the evaluator so that shifted arguments xi1 +/- xi0 never need
resampling.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Protocol, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DecayError, GridError, QuantizationError, ValidationError

PLUS = 1
MINUS = -1


@dataclass(frozen=True)
class Tolerances:
    eps_decay: float = 1e-10
    eps_topo: float = 1e-6
    eps_cusp: float = 1e-7
    eps_root: float = 1e-10
    eps_braid: float = 1e-6
    eps_geom: float = 1e-8

    def replace(self, **kw) -> "Tolerances":
        vals = {k: getattr(self, k) for k in self.__dataclass_fields__}
        unknown = set(kw) - set(vals)
        if unknown:
            raise ValidationError(f"unknown tolerance(s): {sorted(unknown)}")
        vals.update({k: float(v) for k, v in kw.items()})
        return Tolerances(**vals)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of N samples on [-L, L]."""

    L: float = 50.0
    N: int = 4096

    def __post_init__(self):
        if not self.L > 0 or self.N < 8:
            raise ValidationError(f"invalid grid L={self.L}, N={self.N}")

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.N)

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.L, factor * (self.N - 1) + 1)


@dataclass(frozen=True)
class ExternalVariables:
    """Embedding data: scale kappa, rotation beta, translation Z, tension gamma."""

    kappa: float = 1.0
    beta: float = 0.0
    Z: tuple = (0.0, 0.0)
    gamma: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValidationError("kappa must be positive")
        if not self.gamma > 0:
            raise ValidationError("gamma must be positive")
        object.__setattr__(self, "beta", float(np.mod(self.beta, np.pi)))
        object.__setattr__(self, "Z", (float(self.Z[0]), float(self.Z[1])))

    @property
    def n(self) -> np.ndarray:
        """Asymptotic direction (sin 2beta, cos 2beta) in the (X1, X3) plane."""
        return np.array([np.sin(2 * self.beta), np.cos(2 * self.beta)])


class Profile(Protocol):
    def rho(self, x) -> np.ndarray: ...

    def I(self, x) -> np.ndarray: ...

    def shifted(self, dx: float) -> "Profile": ...


def _log_sech(y):
    ay = np.abs(y)
    return -ay + np.log(2.0) - np.log1p(np.exp(-2.0 * ay))


def _arctan_exp(y):
    # arctan(e^y) without overflow
    y = np.asarray(y, dtype=float)
    return np.where(y > 0, 0.5 * np.pi - np.arctan(np.exp(-np.abs(y))), np.arctan(np.exp(-np.abs(y))))


@dataclass(frozen=True)
class SechSum:
    """Superposition of closed-form one-soliton terms.

    Each term (a, c) contributes rho = -2a sgn(c) sech(2a(xi + s) + ln|c|) and
    I = -2 arctan(c exp(2a(xi + s))), where s is the accumulated shift.
    """

    terms: tuple
    shift: float = 0.0

    def _y(self, x, a, c):
        return 2.0 * a * (np.asarray(x, dtype=float) + self.shift) + np.log(abs(c))

    def rho(self, x):
        out = np.zeros(np.shape(x))
        for a, c in self.terms:
            out = out - 2.0 * a * np.sign(c) * np.exp(_log_sech(self._y(x, a, c)))
        return out

    def I(self, x):
        out = np.zeros(np.shape(x))
        for a, c in self.terms:
            out = out - 2.0 * np.sign(c) * _arctan_exp(self._y(x, a, c))
        return out

    def shifted(self, dx):
        return SechSum(self.terms, self.shift + dx)


class SplineProfile:
    """Cubic-spline evaluator for sampled fields; rho = 0 outside the samples."""

    def __init__(self, xi, rho, shift=0.0, _spline=None, _anti=None):
        self.xi = np.asarray(xi, dtype=float)
        self.samples = np.asarray(rho, dtype=float)
        self.shift = float(shift)
        self._spline = _spline if _spline is not None else CubicSpline(self.xi, self.samples)
        self._anti = _anti if _anti is not None else self._spline.antiderivative()
        self._lo, self._hi = self.xi[0], self.xi[-1]
        self._total = float(self._anti(self._hi))

    def rho(self, x):
        u = np.asarray(x, dtype=float) + self.shift
        inside = (u >= self._lo) & (u <= self._hi)
        return np.where(inside, self._spline(np.clip(u, self._lo, self._hi)), 0.0)

    def I(self, x):
        u = np.clip(np.asarray(x, dtype=float) + self.shift, self._lo, self._hi)
        return self._anti(u)

    def shifted(self, dx):
        return SplineProfile(self.xi, self.samples, self.shift + dx, self._spline, self._anti)


@dataclass(frozen=True, eq=False)
class ChiralField:
    """One chirality's potential sampled on a grid, plus an off-grid evaluator.

    ``I`` caches the antiderivative with I(-L) ~ 0 (lower limit at -infinity).
    Instances are treated as immutable.
    """

    chirality: int
    grid: GridSpec
    rho: np.ndarray
    I: np.ndarray
    profile: Profile = dc_field(repr=False)
    descriptors: tuple = ()

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi

    @property
    def total(self) -> float:
        return float(self.I[-1])

    def rho_at(self, x):
        return self.profile.rho(x)

    def I_at(self, x):
        return self.profile.I(x)


def _check_chirality(chirality):
    if chirality in ("+", 1, PLUS):
        return PLUS
    if chirality in ("-", -1, MINUS):
        return MINUS
    raise ValidationError(f"chirality must be '+' or '-', got {chirality!r}")


def make_field(profile, chirality, grid: GridSpec, tol: Tolerances = DEFAULT_TOL,
               descriptors=()) -> ChiralField:
    chirality = _check_chirality(chirality)
    xi = grid.xi
    rho = np.asarray(profile.rho(xi), dtype=float)
    edge = max(abs(rho[0]), abs(rho[-1]))
    if edge >= tol.eps_decay:
        raise DecayError(
            f"|rho(+-L)| = {edge:.3e} exceeds eps_decay={tol.eps_decay:g}; widen the grid (L={grid.L})")
    I = np.asarray(profile.I(xi), dtype=float)
    return ChiralField(chirality, grid, rho, I, profile, tuple(descriptors))


def soliton_field(a: float, c: float, chirality=PLUS, grid: GridSpec = GridSpec(),
                  tol: Tolerances = DEFAULT_TOL) -> ChiralField:
    """Closed-form one-soliton field rho = -2a sgn(c) sech(2a xi + ln|c|)."""
    if not a > 0:
        raise ValidationError(f"soliton width parameter a must be positive, got {a}")
    if c == 0:
        raise ValidationError("norming constant c must be nonzero")
    return make_field(SechSum(((float(a), float(c)),)), chirality, grid, tol,
                      descriptors=((float(a), float(c)),))


def sech_sum_field(terms: Sequence, chirality=PLUS, grid: GridSpec = GridSpec(),
                   tol: Tolerances = DEFAULT_TOL) -> ChiralField:
    """Field built from a list of one-soliton descriptors (a, c), summed."""
    terms = tuple((float(a), float(c)) for a, c in terms)
    for a, c in terms:
        if not a > 0 or c == 0:
            raise ValidationError(f"bad soliton descriptor (a={a}, c={c})")
    return make_field(SechSum(terms), chirality, grid, tol, descriptors=terms)


def zero_field(chirality=PLUS, grid: GridSpec = GridSpec()) -> ChiralField:
    return make_field(SechSum(()), chirality, grid)


def field_from_samples(xi, rho, chirality=PLUS, tol: Tolerances = DEFAULT_TOL) -> ChiralField:
    """Wrap sampled (xi, rho) pairs; xi must be uniform and symmetric about 0."""
    xi = np.asarray(xi, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if xi.ndim != 1 or xi.shape != rho.shape or xi.size < 8:
        raise ValidationError("xi and rho must be 1-D arrays of equal length (>= 8)")
    grid = GridSpec(float(xi[-1]), xi.size)
    if not np.allclose(xi, grid.xi, rtol=0, atol=1e-9 * grid.L):
        raise GridError("samples must lie on a uniform grid symmetric about xi = 0")
    return make_field(SplineProfile(grid.xi, rho), chirality, grid, tol)


def integral_I(field: ChiralField, xi):
    """I(xi) = integral of rho from -infinity (grid edge) to xi."""
    x = np.asarray(xi, dtype=float)
    L = field.grid.L
    if np.any(np.abs(x) > L * (1 + 1e-12)):
        raise GridError(f"xi outside grid [-{L}, {L}]")
    out = field.I_at(x)
    return float(out) if np.ndim(out) == 0 else out


def topological_charge(field: ChiralField, tol: Tolerances = DEFAULT_TOL) -> int:
    """Integer n with I(+L) = pi n; raises QuantizationError otherwise."""
    total = field.total
    n = int(np.rint(total / np.pi))
    if abs(total - np.pi * n) > tol.eps_topo:
        raise QuantizationError(
            f"integral of rho = {total:.10g} is not a multiple of pi (off by {total - np.pi * n:.3e})")
    return n


def evolve(field: ChiralField, xi0: float, tol: Tolerances = DEFAULT_TOL) -> ChiralField:
    """Profile at time xi0: rho_+(xi + xi0) or rho_-(xi - xi0)."""
    if xi0 == 0:
        return field
    prof = field.profile.shifted(field.chirality * float(xi0))
    out = make_field(prof, field.chirality, field.grid, tol, field.descriptors)
    if abs(out.total - field.total) > tol.eps_topo:
        raise DecayError(f"support escapes the grid after shifting by {xi0}")
    return out

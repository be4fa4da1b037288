"""Forward and inverse scattering for the chiral spectral problems.

Each chirality s = +1/-1 carries the problem

    U' = (i lam sigma3 + s rho J) U,    J = [[0, 1], [-1, 0]],

whose transfer matrix P over [-L, L] defines the monodromy
M(lam) = exp(i lam L sigma3) P^-1 exp(i lam L sigma3) = [[a, b], [., .]].
The diagonal entry a(lam) extends analytically to Im lam > 0; its zeros are
the discrete eigenvalues.

Synthesis of reflectionless potentials is done by iterated Darboux dressing of
the zero potential. A norming constant ``c`` attached to an eigenvalue is the
seed constant of that dressing step (after a polarity normalization that makes
the result independent of the order of the eigenvalues). For a single
eigenvalue i a it reproduces rho = -2a sgn(c) sech(2a xi + ln|c|).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .chiral_field import (DEFAULT_TOL, ChiralField, GridSpec, Tolerances, _check_chirality,
                           integral_I, make_field, topological_charge, zero_field)
from .errors import (ConvergenceError, EigenvalueSearchError, SingularSystemError,
                     ValidationError)
from .integrators import cumulative_product, magnus_steps, tree_product


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteSpectrum:
    """Eigenvalues in the upper half-plane with optional norming constants.

    Each eigenvalue is purely imaginary (with a real constant) or belongs to a
    pair (lam, -conj(lam)) whose constants are complex conjugates. This is the
    reduction that keeps the synthesized potential real.
    """

    chirality: int
    eigenvalues: tuple
    norming_constants: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "chirality", _check_chirality(self.chirality))
        lams = tuple(complex(0.0, l.imag) if abs(l.real) <= 1e-12 else l
                     for l in map(complex, self.eigenvalues))
        object.__setattr__(self, "eigenvalues", lams)
        cs = self.norming_constants
        if cs is not None:
            cs = tuple(complex(c) for c in cs)
            if len(cs) != len(lams):
                raise ValidationError("one norming constant is needed per eigenvalue")
            object.__setattr__(self, "norming_constants", cs)
        self.validate()

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def imaginary_count(self) -> int:
        return sum(1 for l in self.eigenvalues if l.real == 0.0)

    def validate(self, atol: float = 1e-12):
        lams = self.eigenvalues
        cs = self.norming_constants
        for k, l in enumerate(lams):
            if not l.imag > 0:
                raise ValidationError(f"eigenvalue {l} is not in the open upper half-plane")
            for m in range(k):
                if abs(l - lams[m]) <= atol:
                    raise ValidationError(f"eigenvalue {l} is repeated")
        for k, l in enumerate(lams):
            c = None if cs is None else cs[k]
            if c is not None and c == 0:
                raise ValidationError(f"norming constant for {l} must be nonzero")
            if l.real == 0.0:
                if c is not None and c.imag != 0.0:
                    raise ValidationError(f"imaginary eigenvalue {l} needs a real norming constant")
                continue
            partner = [m for m, lm in enumerate(lams) if abs(lm + l.conjugate()) <= atol]
            if not partner:
                raise ValidationError(f"eigenvalue {l} has no mirror partner {-l.conjugate()}")
            if c is not None and abs(cs[partner[0]] - c.conjugate()) > atol * max(1.0, abs(c)):
                raise ValidationError(f"paired eigenvalues {l} and {-l.conjugate()} need conjugate constants")

    def sorted(self) -> "DiscreteSpectrum":
        order = sorted(range(len(self)), key=lambda k: (self.eigenvalues[k].imag, self.eigenvalues[k].real))
        cs = None if self.norming_constants is None else tuple(self.norming_constants[k] for k in order)
        return DiscreteSpectrum(self.chirality, tuple(self.eigenvalues[k] for k in order), cs)


def imaginary_spectrum(a_values, c_values, chirality=1) -> DiscreteSpectrum:
    """Shorthand for a spectrum of purely imaginary eigenvalues i*a."""
    return DiscreteSpectrum(chirality, tuple(1j * float(a) for a in a_values),
                            tuple(float(c) for c in c_values))


# --------------------------------------------------------------------------
# Darboux synthesis
# --------------------------------------------------------------------------

def seed_constants(lams, cs):
    """Polarity-normalized seed constants c_k * prod_j r_kj/|r_kj|.

    r_kj = (lam_k - lam_j)/(lam_k - conj(lam_j)). Without this factor the sign
    of every other soliton in a dressing chain flips with the ordering.
    """
    lams = np.asarray(lams, dtype=complex)
    out = np.array(cs, dtype=complex)
    for k in range(len(lams)):
        for j in range(len(lams)):
            if j != k:
                r = (lams[k] - lams[j]) / (lams[k] - np.conj(lams[j]))
                out[k] *= r / abs(r)
    return out


def _dress(x, lams, seeds):
    """Darboux chain on points x (1-D). Returns (q, U0) with U0 = D(x, 0)."""
    n = len(lams)
    q = np.zeros(x.shape, dtype=complex)
    U0 = np.zeros(x.shape + (2, 2), dtype=complex)
    U0[:, 0, 0] = U0[:, 1, 1] = 1.0
    phis = []
    for l, c in zip(lams, seeds):
        damp = np.exp(-l.imag * np.abs(x))
        phis.append(np.stack([np.exp(1j * l * x) * damp, c * np.exp(-1j * l * x) * damp]))
    for j in range(n):
        phi = phis[j]
        nrm = np.abs(phi[0]) ** 2 + np.abs(phi[1]) ** 2
        if not np.all(nrm > 0) or not np.all(np.isfinite(nrm)):
            raise SingularSystemError("degenerate Darboux projector (norming constants too extreme)")
        P = np.einsum("ix,jx->xij", phi, phi.conj()) / nrm[:, None, None]
        lj = lams[j]
        q -= 4.0 * lj.imag * P[:, 0, 1]
        mu = np.conj(lj) - lj
        D0 = np.eye(2) + (mu / (0.0 - np.conj(lj))) * P
        U0 = D0 @ U0
        for k in range(j + 1, n):
            Dk = np.eye(2) + (mu / (lams[k] - np.conj(lj))) * P
            phis[k] = np.einsum("xij,jx->ix", Dk, phis[k])
    return q, U0


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


class DarbouxProfile:
    """Off-grid evaluator for a reflectionless potential.

    rho comes from the dressing chain. I is read from the dressed lambda = 0
    solution, which is the rotation matrix [[cos I, sin I], [-sin I, cos I]];
    its 2 pi ambiguity is fixed against a fine reference table of unwrapped
    angles.
    """

    def __init__(self, lams, cs, shift=0.0, _ref=None):
        self.lams = np.asarray(lams, dtype=complex)
        self.cs = np.asarray(cs, dtype=complex)
        self.seeds = seed_constants(self.lams, self.cs)
        self.shift = float(shift)
        d = self.lams.conj() / self.lams
        self._Dinf_inv = np.diag([np.prod(d), 1.0])
        self._ref = _ref if _ref is not None else self._reference()

    def _reference(self):
        b = self.lams.imag
        amp = 2.0 * b.sum()
        centers = -np.log(np.abs(self.seeds)) / (2.0 * b)
        R = np.abs(centers).max() + 60.0 / b.min()
        n = int(min(400000, max(2001, 2 * R * amp / 0.02)))
        xr = np.linspace(-R, R, n)
        ang = self._angle(xr)
        return xr, np.unwrap(ang)

    def _angle(self, x):
        _, U0 = _dress(x, self.lams, self.seeds)
        U = U0 @ self._Dinf_inv
        return np.arctan2(U[:, 0, 1].real, U[:, 0, 0].real)

    def rho(self, x):
        x = np.asarray(x, dtype=float)
        q, _ = _dress(x.ravel() + self.shift, self.lams, self.seeds)
        return q.real.reshape(x.shape)

    def imag_residual(self, x):
        q, _ = _dress(np.asarray(x, dtype=float).ravel() + self.shift, self.lams, self.seeds)
        return float(np.abs(q.imag).max(initial=0.0))

    def I(self, x):
        x = np.asarray(x, dtype=float)
        u = x.ravel() + self.shift
        xr, Ir = self._ref
        base = np.interp(u, xr, Ir)
        return (base + _wrap(self._angle(u) - base)).reshape(x.shape)

    def shifted(self, dx):
        return DarbouxProfile(self.lams, self.cs, self.shift + dx, self._ref)


def synth_nsoliton(spectrum: DiscreteSpectrum, grid: GridSpec = GridSpec(),
                   tol: Tolerances = DEFAULT_TOL) -> ChiralField:
    """Reflectionless potential with the given eigenvalues and norming constants."""
    if spectrum.norming_constants is None:
        raise ValidationError("synthesis needs norming constants")
    if len(spectrum) == 0:
        return zero_field(spectrum.chirality, grid)
    prof = DarbouxProfile(spectrum.eigenvalues, spectrum.norming_constants)
    resid = prof.imag_residual(grid.xi)
    scale = 2.0 * sum(l.imag for l in spectrum.eigenvalues)
    if not np.isfinite(resid) or resid > 1e-8 * scale:
        raise SingularSystemError(f"synthesized potential is not real (max |Im q| = {resid:.3e})")
    descr = tuple((l, c) for l, c in zip(spectrum.eigenvalues, spectrum.norming_constants))
    return make_field(prof, spectrum.chirality, grid, tol, descr)


# --------------------------------------------------------------------------
# forward scattering
# --------------------------------------------------------------------------

def rotation_matrix(field: ChiralField, xi):
    """Closed-form lam = 0 solution [[cos I, s sin I], [-s sin I, cos I]]."""
    I = np.asarray(integral_I(field, xi))
    s = field.chirality
    c, sn = np.cos(I), np.sin(I)
    return np.stack([np.stack([c, s * sn], -1), np.stack([-s * sn, c], -1)], -2)


def _n_steps(field: ChiralField, lam_max: float, n_steps=None):
    if n_steps is not None:
        return int(n_steps)
    # |lam| h <= 0.1 keeps the halved-step change of a and b below 1e-8
    rmax = float(np.abs(field.rho).max(initial=0.0))
    need = int(np.ceil(2 * field.grid.L * max(rmax, lam_max) / 0.1))
    return max(field.grid.N - 1, need)


def _damped_transfer(field, lams, n):
    L = field.grid.L
    E = magnus_steps(field.rho_at, lams, -L, L, n, field.chirality, damp=True)
    return tree_product(E)


def _chunks(lams, size):
    return [lams[i:i + size] for i in range(0, len(lams), size)]


def _map_chunks(fn, lams, threads, size=48):
    parts = _chunks(lams, size)
    if threads and threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(fn, parts))
    else:
        res = [fn(p) for p in parts]
    return np.concatenate(res, axis=0) if res else np.zeros((0, 2, 2), complex)


def transfer_matrix(field: ChiralField, lam, n_steps=None, threads=1):
    """Undamped transfer matrix P over [-L, L]; may overflow for large Im lam."""
    lams = np.atleast_1d(np.asarray(lam, dtype=complex))
    n = _n_steps(field, float(np.abs(lams).max(initial=0.0)), n_steps)
    Pd = _map_chunks(lambda p: _damped_transfer(field, p, n), lams, threads)
    scale = np.exp(2.0 * field.grid.L * np.abs(lams.imag))
    return Pd * scale[:, None, None]


def scattering_a(field: ChiralField, lam, n_steps=None, threads=1):
    """a(lam) for Im lam >= 0, evaluated without overflow."""
    lams = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.any(lams.imag < 0):
        raise ValidationError("a(lam) is only defined for Im lam >= 0")
    n = _n_steps(field, float(np.abs(lams).max(initial=0.0)), n_steps)
    Pd = _map_chunks(lambda p: _damped_transfer(field, p, n), lams, threads)
    return np.exp(2j * lams.real * field.grid.L) * Pd[:, 1, 1]


def monodromy(field: ChiralField, lam, n_steps=None, threads=1):
    """M(lam) = exp(i lam L s3) P^-1 exp(i lam L s3) for real lam."""
    lams = np.atleast_1d(np.asarray(lam, dtype=complex))
    P = transfer_matrix(field, lams, n_steps, threads)
    e = np.exp(1j * lams * field.grid.L)
    M = np.empty_like(P)
    M[:, 0, 0] = e * e * P[:, 1, 1]
    M[:, 0, 1] = -P[:, 0, 1]
    M[:, 1, 0] = -P[:, 1, 0]
    M[:, 1, 1] = P[:, 0, 0] / (e * e)
    return M


@dataclass(frozen=True)
class MonodromyData:
    lambda_grid: np.ndarray
    a_values: np.ndarray
    b_values: np.ndarray
    parity: int
    det_error: float
    n_steps: int


def forward_scatter(field: ChiralField, lam, n_steps=None, threads=1, verify=False,
                    tol: Tolerances = DEFAULT_TOL) -> MonodromyData:
    """Scattering coefficients a, b on a real lambda grid (a single value is accepted).

    With ``verify`` the computation is repeated at half the step and a
    ConvergenceError is raised if a or b move by more than 1e-8.
    """
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    n = _n_steps(field, float(np.abs(lams).max(initial=0.0)), n_steps)
    M = monodromy(field, lams, n, threads)
    det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    det_err = float(np.abs(det - 1.0).max(initial=0.0))
    if verify:
        M2 = monodromy(field, lams, 2 * n, threads)
        diff = float(np.abs(M2[:, 0, :] - M[:, 0, :]).max(initial=0.0))
        if diff > 1e-8:
            raise ConvergenceError(f"monodromy not converged at {n} steps (change {diff:.2e} on halving)")
    return MonodromyData(lams, M[:, 0, 0].copy(), M[:, 0, 1].copy(),
                         parity_check(field, tol=tol), det_err, n)


def jost_solution(field: ChiralField, lam: complex = 0.0):
    """Solution on the field grid with U(-L) = diag(e^{-i lam L}, e^{i lam L})."""
    L = field.grid.L
    E = magnus_steps(field.rho_at, [lam], -L, L, field.grid.N - 1, field.chirality, damp=False)[0]
    U0 = np.diag([np.exp(-1j * lam * L), np.exp(1j * lam * L)])
    return cumulative_product(E, U0)


def jost_constant(field: ChiralField, lam: complex) -> complex:
    """Proportionality b with psi_minus_2(lam) = b psi_plus_1(lam) at an eigenvalue.

    psi_minus_2 ~ (0, e^{-i lam xi}) at -infinity and psi_plus_1 ~ (e^{i lam xi}, 0)
    at +infinity. Both are integrated in their stable direction and compared
    at the peak of the bound state.
    """
    L = field.grid.L
    n = field.grid.N - 1
    E = magnus_steps(field.rho_at, [lam], -L, L, n, field.chirality, damp=False)[0]
    vf = cumulative_product(E, np.eye(2, dtype=complex))[:, :, 1]
    size = np.abs(vf).max(axis=1)
    peaks = np.flatnonzero((size[1:-1] >= size[:-2]) & (size[1:-1] >= size[2:])) + 1
    best = (np.inf, 0j)
    for k in peaks[:6]:
        back = magnus_steps(field.rho_at, [lam], L, field.xi[k], n - k, field.chirality, damp=False)[0]
        vb = tree_product(back)[:, 0]
        b = complex(np.vdot(vb, vf[k]) / np.vdot(vb, vb))
        mismatch = np.abs(vf[k] - b * vb).max() / np.abs(vf[k]).max()
        best = min(best, (mismatch, b), key=lambda t: t[0])
    mismatch, b = best
    if not mismatch < 1e-6:
        raise ConvergenceError(f"{lam} does not look like an eigenvalue (column mismatch {mismatch:.2e})")
    return b


def norming_constants(field: ChiralField, eigenvalues) -> DiscreteSpectrum:
    """Recover the synthesis constants for known eigenvalues.

    The seed constant of a dressing step relates to the Jost proportionality
    coefficient by c_seed = -s/b for chirality s, and c follows by removing the
    polarity factor.
    """
    lams = np.asarray(eigenvalues, dtype=complex)
    b = np.array([jost_constant(field, l) for l in lams])
    phase = seed_constants(lams, np.ones(len(lams)))
    # the problem for chirality s sees s rho, and rho -> -rho flips every constant
    cs = -field.chirality / (b * phase)
    cs = [complex(c.real, 0.0) if l.real == 0 else complex(c) for c, l in zip(cs, lams)]
    return DiscreteSpectrum(field.chirality, tuple(lams), tuple(cs))


def recover_spectrum(field: ChiralField, pairs: bool = False, threads=1,
                     tol: Tolerances = DEFAULT_TOL, **search) -> DiscreteSpectrum:
    """Eigenvalues and norming constants of a (reflectionless) field."""
    eig = find_eigenvalues(field, pairs=pairs, threads=threads, tol=tol, **search)
    if len(eig) == 0:
        return DiscreteSpectrum(field.chirality, (), ())
    return norming_constants(field, eig.eigenvalues)


def parity_check(field: ChiralField, tol: Tolerances = DEFAULT_TOL) -> int:
    """Return +1 or -1 according to M(0) = +-identity."""
    M0 = monodromy(field, [0.0])[0]
    for sgn in (1, -1):
        if np.abs(M0 - sgn * np.eye(2)).max() < tol.eps_topo:
            return sgn
    raise ConvergenceError(f"M(0) is not +-identity: {np.round(M0, 8).tolist()}")


# --------------------------------------------------------------------------
# eigenvalue search
# --------------------------------------------------------------------------

def eigenvalue_bound(field: ChiralField) -> float:
    """Upper bound on the sum of Im lam_k from the first trace identity."""
    r = field.rho
    return 0.25 * float(np.trapezoid(r * r, field.xi))


def _imag_roots(field, a_max, n_scan, n, tol, threads):
    a = np.linspace(a_max / n_scan, a_max, n_scan)
    vals = scattering_a(field, 1j * a, n, threads).real
    roots = []
    f = lambda t: float(scattering_a(field, [1j * t], n)[0].real)
    for k in range(n_scan - 1):
        if vals[k] == 0.0:
            roots.append(a[k])
        elif vals[k] * vals[k + 1] < 0:
            roots.append(brentq(f, a[k], a[k + 1], xtol=tol.eps_root, rtol=4 * np.finfo(float).eps))
    return roots


def _winding(field, re_max, im_max, delta, n):
    """Number of zeros of a(lam) in the open first-quadrant box (argument principle)."""
    corners = [delta + 1j * delta, re_max + 1j * delta, re_max + 1j * im_max, delta + 1j * im_max]
    total = 0.0
    for z0, z1 in zip(corners, corners[1:] + corners[:1]):
        m = 64
        while True:
            z = z0 + (z1 - z0) * np.linspace(0.0, 1.0, m + 1)
            ph = np.angle(scattering_a(field, z, n))
            step = np.diff(np.unwrap(ph))
            if np.abs(step).max() < 0.5 or m > 8192:
                break
            m *= 4
        total += step.sum()
    return int(np.rint(total / (2 * np.pi)))


def _newton(field, z, n, tol, iters=60):
    h = 1e-6
    for _ in range(iters):
        f = scattering_a(field, [z, z + h, z - h], n)
        df = (f[1] - f[2]) / (2 * h)
        if df == 0:
            return None
        dz = f[0] / df
        z = z - dz
        if z.imag <= 0:
            return None
        if abs(dz) < tol.eps_root:
            return z
    return None


def find_eigenvalues(field: ChiralField, a_max: Optional[float] = None, n_scan: int = 400,
                     pairs: bool = False, re_max: float = 5.0, n_steps=None, threads=1,
                     tol: Tolerances = DEFAULT_TOL) -> DiscreteSpectrum:
    """Zeros of a(lam) in the upper half-plane.

    Imaginary eigenvalues are bracketed by sign changes of the real function
    a(i t) and refined with Brent's method. Their number must be at least |n|
    and have the parity of n (paired eigenvalues do not contribute to n). With
    ``pairs`` the first quadrant is also searched: an argument-principle count
    fixes how many roots Newton iterations must find there.
    """
    n_top = topological_charge(field, tol)
    if a_max is None:
        a_max = 1.1 * eigenvalue_bound(field) + 1e-3
    n = _n_steps(field, a_max, n_steps)
    roots = []
    for scan in (n_scan, 4 * n_scan):
        roots = _imag_roots(field, a_max, scan, n, tol, threads) if a_max > 0 else []
        if len(roots) >= abs(n_top) and (len(roots) - n_top) % 2 == 0:
            break
    else:
        raise EigenvalueSearchError(
            f"found {len(roots)} imaginary eigenvalues but the topological charge is {n_top}; "
            "enlarge the search window")
    eig = [1j * r for r in roots]
    if pairs and a_max > 0:
        delta = 1e-3 * a_max
        count = _winding(field, re_max, a_max, delta, n)
        found = []
        gx, gy = np.meshgrid(np.linspace(delta, re_max, 41)[1:-1], np.linspace(delta, a_max, 21)[1:-1])
        starts = (gx + 1j * gy).ravel()
        mag = np.abs(scattering_a(field, starts, n, threads))
        for z0 in starts[np.argsort(mag)]:
            if len(found) >= count:
                break
            z = _newton(field, z0, n, tol)
            if z is None or z.real <= 0 or z.real > re_max or z.imag > a_max:
                continue
            if all(abs(z - w) > 1e-6 for w in found):
                found.append(z)
        if len(found) != count:
            raise EigenvalueSearchError(f"argument principle counts {count} paired eigenvalues, located {len(found)}")
        for z in found:
            eig += [z, -z.conjugate()]
    return DiscreteSpectrum(field.chirality, tuple(eig)).sorted()

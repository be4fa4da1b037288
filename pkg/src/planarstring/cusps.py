"""Cusp location and continuation.

A cusp sits where cos theta = 0 with theta(xi0, xi1) = I_+(xi1 + xi0) + I_-(xi1 - xi0),
that is on one of the levels theta = pi/2 + pi k. Roots on a slice are found
per level crossing (so each root carries its branch k), refined by Brent's
method and one Newton step. Lines are continued slice to slice within each
branch; along a branch the roots keep their xi1 order, so a change in the
count is a birth or death (a tangency of theta with the level).
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from .chiral_field import DEFAULT_TOL, ExternalVariables, Tolerances, topological_charge
from .errors import CuspError, TrackingError, ValidationError
from .worldsheet import Embedding, _check_pair


def theta(fields, xi0, xi1):
    fp, fm = fields
    xi1 = np.asarray(xi1, dtype=float)
    return fp.I_at(xi1 + xi0) + fm.I_at(xi1 - xi0)


def _theta_prime(fields, xi0, x):
    fp, fm = fields
    return fp.rho_at(x + xi0) + fm.rho_at(x - xi0)


def _level_index(th):
    return np.floor((th - 0.5 * np.pi) / np.pi).astype(int)


def cusp_positions(fields, xi0: float, xi1=None, tol: Tolerances = DEFAULT_TOL):
    """Sorted list of (xi1, k) with theta = pi/2 + pi k on the slice xi0."""
    fp, fm = _check_pair(fields)
    x = fp.xi if xi1 is None else np.asarray(xi1, dtype=float)
    th = theta((fp, fm), xi0, x)
    lev = _level_index(th)
    cells = np.flatnonzero(lev[1:] != lev[:-1])
    out = []
    for i in cells:
        lo, hi = sorted((lev[i], lev[i + 1]))
        for k in range(lo + 1, hi + 1):
            target = 0.5 * np.pi + np.pi * k
            f = lambda s: float(theta((fp, fm), xi0, s)) - target
            r = brentq(f, x[i], x[i + 1], xtol=tol.eps_root, rtol=4 * np.finfo(float).eps)
            d = float(_theta_prime((fp, fm), xi0, r))
            if d != 0.0:
                rn = r - f(r) / d
                if x[i] <= rn <= x[i + 1] and abs(f(rn)) <= abs(f(r)):
                    r = rn
            out.append((float(r), int(k)))
    if out and (out[0][0] <= x[0] + 2 * (x[1] - x[0]) or out[-1][0] >= x[-1] - 2 * (x[1] - x[0])):
        raise CuspError(f"cusp at the grid edge on slice xi0={xi0}: the support has left the grid")
    out.sort()
    return out


def near_tangencies(fields, xi0, xi1=None, tol: Tolerances = DEFAULT_TOL):
    """(xi1, k) where |cos theta| has a grid minimum below 10 eps_cusp without a crossing."""
    fp, fm = fields
    x = fp.xi if xi1 is None else np.asarray(xi1, dtype=float)
    th = theta(fields, xi0, x)
    c = np.abs(np.cos(th))
    lev = _level_index(th)
    idx = np.flatnonzero((c[1:-1] <= c[:-2]) & (c[1:-1] <= c[2:]) & (c[1:-1] < 10 * tol.eps_cusp)) + 1
    return [(float(x[i]), int(np.rint((th[i] - 0.5 * np.pi) / np.pi)))
            for i in idx if lev[i - 1] == lev[i] == lev[i + 1]]


@dataclass
class CuspLine:
    """A continued cusp world-line; points rows are (xi0, xi1, X0, X1, X3)."""

    line_id: int
    branch_k: int
    points: np.ndarray
    events: list = dc_field(default_factory=list)

    @property
    def xi0_span(self):
        return float(self.points[0, 0]), float(self.points[-1, 0])

    def position_at(self, t):
        """Interpolated (xi1, X1, X3) at time t inside the span."""
        p = self.points
        return np.array([np.interp(t, p[:, 0], p[:, j]) for j in (1, 3, 4)])


@dataclass(frozen=True)
class CuspEvent:
    type: str  # "birth", "death", "tangency"
    xi0: float
    xi1: float
    branch_k: int
    line_ids: tuple
    cause: str = "tangency"

    def to_record(self):
        return {"type": self.type, "xi0": float(self.xi0), "line_ids": [int(i) for i in self.line_ids],
                "branch_k": int(self.branch_k), "xi1": float(self.xi1), "cause": self.cause}


def _by_branch(roots):
    out = {}
    for x, k in roots:
        out.setdefault(k, []).append(x)
    return out


def _best_removal(longer, shorter):
    """Index i such that dropping longer[i], longer[i+1] best matches shorter."""
    best = None
    for i in range(len(longer) - 1):
        rest = longer[:i] + longer[i + 2:]
        cost = sum(abs(a - b) for a, b in zip(rest, shorter))
        if best is None or cost < best[0]:
            best = (cost, i)
    return best[1]


class _Tracker:
    def __init__(self, fields, emb, tol, max_depth=10):
        self.fields = fields
        self.emb = emb
        self.tol = tol
        self.max_depth = max_depth
        self.cache = {}

    def roots(self, t):
        key = float(t)
        if key not in self.cache:
            self.cache[key] = _by_branch(cusp_positions(self.fields, key, tol=self.tol))
        return self.cache[key]

    def count(self, t, k):
        # level crossings on the grid are enough to count the roots of branch k
        x = self.fields[0].xi
        lev = _level_index(theta(self.fields, float(t), x))
        lo = np.minimum(lev[1:], lev[:-1])
        hi = np.maximum(lev[1:], lev[:-1])
        return int(np.count_nonzero((lo < k) & (k <= hi)))

    def locate(self, t0, t1, k):
        """Time at which the branch-k root count changes inside (t0, t1)."""
        c0 = self.count(t0, k)
        a, b = t0, t1
        for _ in range(60):
            m = 0.5 * (a + b)
            if self.count(m, k) == c0:
                a = m
            else:
                b = m
            if b - a < 1e-10 * max(1.0, abs(m)):
                break
        return a, b


def _separation(xs):
    return min((b - a for a, b in zip(xs, xs[1:])), default=np.inf)


def track(fields, ext: ExternalVariables, xi0_range, step: float,
          tol: Tolerances = DEFAULT_TOL):
    """Continue cusp lines over xi0 in [t0, t1] with base step ``step``.

    Returns (lines, events). Intervals where roots move more than half their
    separation are subdivided (up to 2^10 times) before matching.
    """
    fp, fm = _check_pair(fields)
    topological_charge(fp, tol)
    topological_charge(fm, tol)
    t0, t1 = map(float, xi0_range)
    if not (t1 >= t0) or not step > 0:
        raise ValidationError(f"invalid xi0 range {xi0_range} or step {step}")
    span = max(abs(t0), abs(t1))
    emb = Embedding((fp, fm), ext, span=span, tol=tol)
    tr = _Tracker((fp, fm), emb, tol)
    n = max(1, int(np.ceil((t1 - t0) / step - 1e-9)))
    times = list(np.linspace(t0, t1, n + 1))

    lines: list[CuspLine] = []
    events: list[CuspEvent] = []
    active = {}  # k -> list of (line index) in xi1 order
    rows = {}    # line index -> list of (t, x)

    def new_line(k, t, x):
        idx = len(lines)
        lines.append(CuspLine(idx, k, np.zeros((0, 5))))
        rows[idx] = [(t, x)]
        return idx

    first = tr.roots(times[0])
    for k in sorted(first):
        active[k] = [new_line(k, times[0], x) for x in first[k]]
    for x, k in near_tangencies((fp, fm), times[0], tol=tol):
        events.append(CuspEvent("tangency", times[0], x, k, ()))

    def advance(ta, tb, depth):
        ra, rb = tr.roots(ta), tr.roots(tb)
        ks = sorted(set(ra) | set(rb))
        ok = True
        for k in ks:
            xa, xb = ra.get(k, []), rb.get(k, [])
            if len(xa) == len(xb):
                sep = min(_separation(xa), _separation(xb))
                if xa and max(abs(a - b) for a, b in zip(xa, xb)) > 0.5 * sep:
                    ok = False
            elif abs(len(xa) - len(xb)) != 2:
                ok = False
        if not ok and depth < tr.max_depth:
            tm = 0.5 * (ta + tb)
            advance(ta, tm, depth + 1)
            advance(tm, tb, depth + 1)
            return
        if not ok:
            raise TrackingError(f"ambiguous cusp matching between xi0={ta} and xi0={tb}")
        for k in ks:
            xa, xb = ra.get(k, []), rb.get(k, [])
            ids = active.get(k, [])
            if len(xa) == len(xb):
                for i, x in zip(ids, xb):
                    rows[i].append((tb, x))
            elif len(xb) < len(xa):
                i = _best_removal(xa, xb)
                a, b = tr.locate(ta, tb, k)
                pa = tr.roots(a)[k]
                xe = 0.5 * (pa[i] + pa[i + 1])
                dead = ids[i:i + 2]
                for j, d in enumerate(dead):
                    if rows[d][-1][0] < a:
                        rows[d].append((a, pa[i + j]))
                keep = ids[:i] + ids[i + 2:]
                for d, x in zip(keep, xb):
                    rows[d].append((tb, x))
                active[k] = keep
                events.append(CuspEvent("death", 0.5 * (a + b), xe, k, tuple(dead)))
            else:
                i = _best_removal(xb, xa)
                a, b = tr.locate(ta, tb, k)
                pb = tr.roots(b)[k]
                xe = 0.5 * (pb[i] + pb[i + 1])
                born = [new_line(k, b, pb[i]), new_line(k, b, pb[i + 1])]
                new_ids = ids[:i] + born + ids[i:]
                for d, x in zip(new_ids, xb):
                    if rows[d][-1][0] < tb:
                        rows[d].append((tb, x))
                active[k] = new_ids
                events.append(CuspEvent("birth", 0.5 * (a + b), xe, k, tuple(born)))
        for x, k in near_tangencies((fp, fm), tb, tol=tol):
            events.append(CuspEvent("tangency", tb, x, k, ()))

    for ta, tb in zip(times[:-1], times[1:]):
        advance(ta, tb, 0)

    for i, line in enumerate(lines):
        pts = np.array(rows[i], dtype=float)
        X = emb.X(pts[:, 0], pts[:, 1])
        line.points = np.column_stack([pts[:, 0], pts[:, 1], X])
        line.events = [e for e in events if i in e.line_ids]
    events.sort(key=lambda e: (e.xi0, e.xi1))
    return lines, events


def make_locator(fields, ext: ExternalVariables, lines, tol: Tolerances = DEFAULT_TOL):
    """Callable t -> {line_id: (X1, X3)} that re-solves the cusp positions at time t.

    Each line picks the root of its own branch nearest to its interpolated xi1.
    """
    fp, fm = _check_pair(fields)
    span = max(max(abs(v) for v in l.xi0_span) for l in lines) if lines else 0.0
    emb = Embedding((fp, fm), ext, span=span, tol=tol)
    by_id = {l.line_id: l for l in lines}

    def locate(t, ids):
        roots = _by_branch(cusp_positions((fp, fm), float(t), tol=tol))
        out = {}
        for i in ids:
            line = by_id[i]
            guess = line.position_at(t)[0]
            cand = roots.get(line.branch_k, [])
            if not cand:
                raise TrackingError(f"line {i} has no root at xi0={t}")
            x = min(cand, key=lambda r: abs(r - guess))
            X = emb.X(float(t), x)
            out[i] = (float(X[1]), float(X[2]))
        return out

    return locate


def count_per_slice(fields, times, tol: Tolerances = DEFAULT_TOL):
    return [len(cusp_positions(fields, float(t), tol=tol)) for t in times]

"""Braid words from cusp world-lines.

Strands are ordered by a projection coordinate (X1 by default) and time runs
along xi0. When two neighbouring strands exchange order a generator sigma_i
is emitted, where i (1-based) is the left position before the exchange. The
sign is +1 when the strand moving from position i to i+1 passes over, i.e.
has the larger depth coordinate (X3 by default) at the crossing.

Lines that are born or die inside the window turn the word into a tangle:
births and deaths are kept as items interleaved with the generators, and
generator indices then refer to the strand positions current at that time.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .chiral_field import DEFAULT_TOL, Tolerances
from .errors import TrackingError, ValidationError

_AXES = {"X1": 3, "X3": 4}


@dataclass
class BraidWord:
    n_strands: int
    generators: list  # (i, sign, xi0)
    permutation: list
    degeneracies: list = dc_field(default_factory=list)
    items: list = dc_field(default_factory=list)
    tangle: bool = False
    window: tuple = (0.0, 0.0)

    @property
    def writhe(self) -> int:
        return int(sum(s for _, s, _ in self.generators))

    @classmethod
    def from_letters(cls, n_strands, letters):
        """Word built directly from (i, sign) pairs (crossing times set to 0)."""
        gens = [(int(i), int(s), 0.0) for i, s in letters]
        return cls(n_strands, gens, permutation_of([(i, s) for i, s, _ in gens], n_strands))

    def letters(self):
        return [(i, s) for i, s, _ in self.generators]

    def to_record(self) -> dict:
        rec = {"n_strands": self.n_strands,
               "word": [{"i": i, "sign": s, "xi0": t} for i, s, t in self.generators],
               "permutation": list(self.permutation),
               "writhe": self.writhe,
               "degeneracies": list(self.degeneracies)}
        if self.tangle:
            rec["tangle"] = list(self.items)
        return rec


def _coords(line, t, proj, depth, flip):
    p = line.points
    x = np.interp(t, p[:, 0], p[:, proj]) * flip[0]
    z = np.interp(t, p[:, 0], p[:, depth]) * flip[1]
    return x, z


def braid_word(lines, projection: str = "X1", window=None, reverse: bool = False,
               mirror: bool = False, locator: Optional[Callable] = None,
               tol: Tolerances = DEFAULT_TOL) -> BraidWord:
    """Braid word (or tangle) of the cusp lines over the xi0 window.

    ``reverse`` views the picture from behind (both spatial axes flipped),
    which relabels strands right to left. ``mirror`` flips only the depth
    axis. A ``locator`` (see cusps.make_locator) lets crossings be refined by
    bisection on re-solved cusp positions instead of linear interpolation.
    """
    if projection not in _AXES:
        raise ValidationError(f"projection must be X1 or X3, got {projection!r}")
    proj = _AXES[projection]
    depth = _AXES["X3" if projection == "X1" else "X1"]
    flip = (-1.0 if reverse else 1.0, (-1.0 if reverse else 1.0) * (-1.0 if mirror else 1.0))
    lines = list(lines)
    if not lines:
        return BraidWord(0, [], [], window=tuple(window or (0.0, 0.0)))
    if window is None:
        window = (min(l.points[0, 0] for l in lines), max(l.points[-1, 0] for l in lines))
    t0, t1 = map(float, window)
    times = np.unique(np.concatenate([l.points[:, 0] for l in lines] + [[t0, t1]]))
    times = times[(times >= t0) & (times <= t1)]

    def alive(line, t):
        return line.points[0, 0] <= t <= line.points[-1, 0]

    def pos(line, t):
        return _coords(line, t, proj, depth, flip)

    def exact(ids, t):
        if locator is None:
            return {i: pos(lines_by_id[i], t) for i in ids}
        raw = locator(t, ids)
        out = {}
        for i, (x1, x3) in raw.items():
            c = {3: x1, 4: x3}
            out[i] = (c[proj] * flip[0], c[depth] * flip[1])
        return out

    lines_by_id = {l.line_id: l for l in lines}
    order = sorted((l.line_id for l in lines if alive(l, t0)), key=lambda i: pos(lines_by_id[i], t0)[0])
    start = list(order)
    n_start = len(order)
    gens, degen, items = [], [], []
    tangle = False

    def crossing_time(a, b, ta, tb):
        da = pos(lines_by_id[a], ta)[0] - pos(lines_by_id[b], ta)[0]
        db = pos(lines_by_id[a], tb)[0] - pos(lines_by_id[b], tb)[0]
        tc = ta + (tb - ta) * da / (da - db) if da != db else 0.5 * (ta + tb)
        if locator is not None:
            lo, hi = ta, tb
            for _ in range(50):
                m = 0.5 * (lo + hi)
                p = exact((a, b), m)
                dm = p[a][0] - p[b][0]
                if np.sign(dm) == np.sign(da):
                    lo = m
                else:
                    hi = m
                if hi - lo < 1e-12:
                    break
            tc = 0.5 * (lo + hi)
        return tc

    for ta, tb in zip(times[:-1], times[1:]):
        common = [i for i in order if alive(lines_by_id[i], tb)]
        xb = {i: pos(lines_by_id[i], tb)[0] for i in common}
        # pairs whose relative order flips within (ta, tb)
        flips = []
        for p in range(len(common)):
            for q in range(p + 1, len(common)):
                a, b = common[p], common[q]
                if xb[a] > xb[b]:
                    flips.append((crossing_time(a, b, ta, tb), a, b))
        for tc, a, b in sorted(flips):
            ia, ib = order.index(a), order.index(b)
            if ib != ia + 1:
                raise TrackingError(f"non-adjacent strands exchange near xi0={tc:.6g}; refine the step")
            pa = exact((a, b), tc)
            za, zb = pa[a][1], pa[b][1]
            gap = abs(za - zb)
            i = ia + 1
            if gap < tol.eps_braid:
                rec = {"xi0": float(tc), "i": i, "gap": float(gap), "line_ids": [int(a), int(b)]}
                degen.append(rec)
                items.append({"type": "degeneracy", **rec})
            else:
                s = 1 if za > zb else -1
                gens.append((i, s, float(tc)))
                items.append({"type": "generator", "i": i, "sign": s, "xi0": float(tc)})
            order[ia], order[ib] = b, a
        for i in [i for i in order if not alive(lines_by_id[i], tb)]:
            tangle = True
            items.append({"type": "death", "xi0": float(lines_by_id[i].points[-1, 0]),
                          "position": order.index(i) + 1, "line_id": int(i)})
            order.remove(i)
        born = [l.line_id for l in lines if alive(l, tb) and not alive(l, ta) and l.line_id not in order]
        for i in sorted(born, key=lambda j: pos(lines_by_id[j], tb)[0]):
            tangle = True
            x = pos(lines_by_id[i], tb)[0]
            k = sum(1 for j in order if pos(lines_by_id[j], tb)[0] < x)
            order.insert(k, i)
            items.append({"type": "birth", "xi0": float(lines_by_id[i].points[0, 0]),
                          "position": k + 1, "line_id": int(i)})

    if tangle:
        perm = []
    else:
        perm = [order.index(i) + 1 for i in start]
    return BraidWord(n_start, gens, perm, degen, items, tangle, (t0, t1))


def permutation_of(word, n):
    """Final position of the strand starting at each position, from the letters."""
    order = list(range(1, n + 1))
    for i, _ in word:
        if not 1 <= i < n:
            raise ValidationError(f"generator index {i} outside [1, {n - 1}]")
        order[i - 1], order[i] = order[i], order[i - 1]
    return [order.index(s) + 1 for s in range(1, n + 1)]


def free_reduce(word):
    out = []
    for i, s in word:
        if out and out[-1][0] == i and out[-1][1] == -s:
            out.pop()
        else:
            out.append((i, s))
    return out


def cycle_type(perm):
    seen, cycles = set(), []
    for s in range(1, len(perm) + 1):
        if s in seen:
            continue
        n, j = 0, s
        while j not in seen:
            seen.add(j)
            j = perm[j - 1]
            n += 1
        cycles.append(n)
    return sorted(cycles, reverse=True)


def classify(word: BraidWord) -> dict:
    """n_strands, cycle type of the permutation, writhe, freely reduced length."""
    letters = word.letters()
    if word.tangle:
        cycles = None
    else:
        perm = word.permutation or permutation_of(letters, word.n_strands)
        cycles = cycle_type(perm) if word.n_strands else []
    events = Counter(it["type"] for it in word.items if it["type"] in ("birth", "death"))
    return {"n_strands": word.n_strands,
            "cycle_type": cycles,
            "writhe": word.writhe,
            "reduced_length": len(free_reduce(letters)),
            "tangle": word.tangle,
            "births": events.get("birth", 0),
            "deaths": events.get("death", 0)}

"""Readers and writers for the exchange formats.

CSV floats are written with 17 significant digits and JSON floats with
Python's shortest round-trip representation, so every file reads back to the
exact values that were written and identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .braid import BraidWord
from .chiral_field import DEFAULT_TOL, Tolerances, field_from_samples
from .cusps import CuspLine
from .errors import ValidationError
from .scattering import DiscreteSpectrum

CUSP = "CUSP"


def fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _read_csv(path, header):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        got = next(r, None)
        if got != list(header):
            raise ValidationError(f"{path}: expected header {','.join(header)}, got {got}")
        return [row for row in r if row]


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")
    return path


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# fields -------------------------------------------------------------------

def write_field_csv(path, field):
    return _write_csv(path, ("xi", "rho"), ((fmt(x), fmt(r)) for x, r in zip(field.xi, field.rho)))


def read_field_csv(path, chirality, tol: Tolerances = DEFAULT_TOL):
    rows = _read_csv(path, ("xi", "rho"))
    data = np.array(rows, dtype=float).reshape(-1, 2)
    return field_from_samples(data[:, 0], data[:, 1], chirality, tol)


# spectra ------------------------------------------------------------------

def _c_record(c):
    if c is None:
        return None
    c = complex(c)
    return c.real if c.imag == 0.0 else {"re": c.real, "im": c.imag}


def _c_value(v):
    if v is None:
        return None
    if isinstance(v, dict):
        return complex(float(v["re"]), float(v["im"]))
    return complex(float(v), 0.0)


def spectrum_records(spectra):
    out = []
    for spectrum in spectra:
        cs = spectrum.norming_constants or (None,) * len(spectrum)
        for lam, c in zip(spectrum.eigenvalues, cs):
            out.append({"re": lam.real, "im": lam.imag, "c": _c_record(c), "chirality": spectrum.chirality})
    return out


def spectra_from_records(records):
    """Dict chirality -> DiscreteSpectrum from a list of {re, im, c, chirality}."""
    groups = {1: [], -1: []}
    for k, rec in enumerate(records):
        try:
            s = int(rec["chirality"])
            groups[s].append((complex(float(rec.get("re", 0.0)), float(rec["im"])), _c_value(rec.get("c"))))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"spectrum record {k}: {exc!r}") from exc
    out = {}
    for s, items in groups.items():
        lams = tuple(l for l, _ in items)
        cs = [c for _, c in items]
        cs = None if any(c is None for c in cs) else tuple(cs)
        out[s] = DiscreteSpectrum(s, lams, cs)
    return out


def write_spectrum_json(path, spectra):
    return write_json(path, spectrum_records(spectra))


def read_spectrum_json(path):
    return spectra_from_records(read_json(path))


# monodromy ----------------------------------------------------------------

def write_monodromy_csv(path, data):
    rows = ((fmt(l), fmt(a.real), fmt(a.imag), fmt(b.real), fmt(b.imag))
            for l, a, b in zip(data.lambda_grid, data.a_values, data.b_values))
    return _write_csv(path, ("lambda", "re_a", "im_a", "re_b", "im_b"), rows)


def read_monodromy_csv(path):
    """Returns (lambda, a, b) arrays."""
    d = np.array(_read_csv(path, ("lambda", "re_a", "im_a", "re_b", "im_b")), dtype=float).reshape(-1, 5)
    return d[:, 0], d[:, 1] + 1j * d[:, 2], d[:, 3] + 1j * d[:, 4]


# world-sheet --------------------------------------------------------------

WS_HEADER = ("xi0", "xi1", "X0", "X1", "X3", "phi_or_CUSP")


def write_worldsheet_csv(path, ws):
    def rows():
        for i, t in enumerate(ws.xi0):
            for j, x in enumerate(ws.xi1):
                X = ws.X[i, j]
                p = ws.phi[i, j]
                yield (fmt(t), fmt(x), fmt(X[0]), fmt(X[1]), fmt(X[2]), CUSP if np.isnan(p) else fmt(p))
    return _write_csv(path, WS_HEADER, rows())


def read_worldsheet_csv(path):
    """Returns (xi0, xi1, X, phi) with X of shape (n0, n1, 3) and NaN at cusps."""
    rows = _read_csv(path, WS_HEADER)
    d = np.array([[float("nan") if v == CUSP else float(v) for v in r] for r in rows]).reshape(-1, 6)
    xi0 = np.unique(d[:, 0])
    xi1 = d[: d.shape[0] // max(xi0.size, 1), 1] if xi0.size else np.zeros(0)
    shape = (xi0.size, xi1.size)
    return xi0, xi1, d[:, 2:5].reshape(shape + (3,)), d[:, 5].reshape(shape)


# charges ------------------------------------------------------------------

CHARGE_KEYS = ("P1", "P3", "J", "M", "H", "F_P", "F_J", "Omega", "Phi_residual", "n_plus", "n_minus")


def write_charges_json(path, charges):
    rec = charges.to_record() if hasattr(charges, "to_record") else dict(charges)
    return write_json(path, {k: rec[k] for k in CHARGE_KEYS})


def read_charges_json(path):
    rec = read_json(path)
    missing = [k for k in CHARGE_KEYS if k not in rec]
    if missing:
        raise ValidationError(f"{path}: missing charge fields {missing}")
    return rec


# cusps --------------------------------------------------------------------

CUSP_HEADER = ("line_id", "branch_k", "xi0", "xi1", "X0", "X1", "X3")


def write_cusps_csv(path, lines):
    def rows():
        for line in lines:
            for p in line.points:
                yield (str(int(line.line_id)), str(int(line.branch_k))) + tuple(fmt(v) for v in p)
    return _write_csv(path, CUSP_HEADER, rows())


def read_cusps_csv(path):
    lines, order = {}, []
    for r in _read_csv(path, CUSP_HEADER):
        i, k = int(r[0]), int(r[1])
        if i not in lines:
            lines[i] = (k, [])
            order.append(i)
        lines[i][1].append([float(v) for v in r[2:]])
    return [CuspLine(i, lines[i][0], np.array(lines[i][1])) for i in order]


def write_events_json(path, events):
    return write_json(path, [e.to_record() if hasattr(e, "to_record") else e for e in events])


def read_events_json(path):
    recs = read_json(path)
    for k, e in enumerate(recs):
        if not {"type", "xi0", "line_ids"} <= set(e):
            raise ValidationError(f"{path}: event {k} lacks type, xi0 or line_ids")
    return recs


# braid --------------------------------------------------------------------

def write_braid_json(path, word):
    return write_json(path, word.to_record())


def braid_from_record(rec):
    gens = [(int(g["i"]), int(g["sign"]), float(g["xi0"])) for g in rec["word"]]
    items = list(rec.get("tangle", []))
    return BraidWord(int(rec["n_strands"]), gens, list(rec["permutation"]),
                     list(rec.get("degeneracies", [])), items, "tangle" in rec)


def read_braid_json(path):
    return braid_from_record(read_json(path))

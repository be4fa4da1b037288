"""Acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL summary (shown in the pytest terminal
summary, or printed when this file is run as a script) and then asserts the
criterion at its stated tolerance.
"""
import time

import numpy as np

from planarstring import (MINUS, PLUS, ExternalVariables, braid_word, compute_charges,
                          find_eigenvalues, forward_scatter, forms, imaginary_spectrum,
                          momentum, angular_J, hamiltonian, parity_check,
                          soliton_field, synth_nsoliton, tangent, topological_charge, track)
from planarstring.scattering import jost_solution
from planarstring.worldsheet import Embedding, minkowski_dot, pde_residual

try:
    from conftest import ACCEPTANCE
except ImportError:  # pragma: no cover
    ACCEPTANCE = {}


def record(num, ok, detail):
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[num] = line
    print(line)
    assert ok, line


def _pair(ap, am, cp=1.0, cm=1.0):
    return (synth_nsoliton(imaginary_spectrum([ap], [cp], PLUS)),
            synth_nsoliton(imaginary_spectrum([am], [cm], MINUS)))


def test_c01_one_soliton_closed_form():
    t = time.perf_counter()
    a, c = 0.5, 1.0
    f = synth_nsoliton(imaginary_spectrum([a], [c], PLUS))
    U = jost_solution(f, 0.0)
    elapsed = time.perf_counter() - t
    x = f.xi
    m = np.abs(x) <= 10
    e4 = np.exp(-4 * a * x[m])
    u11 = (e4 - c * c) / (e4 + c * c)
    u12 = -2 * c * np.exp(-2 * a * x[m]) / (e4 + c * c)
    err = max(np.abs(U[m, 0, 0] - u11).max(), np.abs(U[m, 0, 1] - u12).max())
    record(1, err < 1e-8 and elapsed < 1.0, f"max|U0 - closed form| = {err:.2e} (< 1e-8), runtime {elapsed:.2f} s (< 1 s)")


def test_c02_quantization_and_parity():
    # constants of one sign: every eigenvalue adds a kink of the same orientation
    cases = [([0.5], [1.0]), ([0.3, 0.9], [-1.0, -1.0]), ([0.3, 0.6, 0.9], [1.0, 2.0, 0.5])]
    worst, ok = 0.0, True
    for N, (a, c) in enumerate(cases, start=1):
        f = synth_nsoliton(imaginary_spectrum(a, c, PLUS))
        n = topological_charge(f)
        worst = max(worst, abs(f.total - np.pi * n))
        ok &= abs(n) == N and parity_check(f) == (-1) ** n
    ok &= worst < 1e-6
    record(2, ok, f"|n| = N and parity (-1)^n for N = 1, 2, 3; max |int rho - pi n| = {worst:.2e} (< 1e-6)")


def test_c03_scattering_round_trip():
    t = time.perf_counter()
    lam = np.linspace(-5, 5, 201)
    eig_err, b_max = 0.0, 0.0
    for a in ([0.5], [0.3, 0.9]):
        f = synth_nsoliton(imaginary_spectrum(a, [1.0] * len(a), PLUS))
        data = forward_scatter(f, lam)
        b_max = max(b_max, float(np.abs(data.b_values).max()))
        found = find_eigenvalues(f)
        got = sorted(l.imag for l in found.eigenvalues)
        if len(got) != len(a):
            eig_err = np.inf
        else:
            eig_err = max(eig_err, max(abs(g - e) for g, e in zip(got, sorted(a))))
    elapsed = time.perf_counter() - t
    record(3, eig_err < 1e-6 and b_max < 1e-6 and elapsed < 10,
           f"eigenvalue error {eig_err:.2e} (< 1e-6), max|b| {b_max:.2e} (< 1e-6), runtime {elapsed:.1f} s (< 10 s)")


def _geometry_samples():
    fields = _pair(0.5, 0.8)
    ext = ExternalVariables(kappa=1.7, beta=0.3)
    T, X = np.meshgrid(np.linspace(-3, 3, 61), np.linspace(-8, 8, 321), indexing="ij")
    tp, tm = tangent(T, X, fields, ext)
    th = fields[0].I_at(X + T) + fields[1].I_at(X - T)
    away = np.abs(np.cos(th)) >= 1e3 * 1e-7
    return ext.kappa, tp, tm, th, away


def test_c04_geometry_identities():
    k, tp, tm, th, away = _geometry_samples()
    light = max(np.abs(minkowski_dot(tp, tp)[away]).max(), np.abs(minkowski_dot(tm, tm)[away]).max()) / k ** 2
    gauge = np.abs(minkowski_dot(tp, tm) + 0.25 * k ** 2 * np.cos(th) ** 2)[away].max() / k ** 2
    record(4, light < 1e-8 and gauge < 1e-8,
           f"light-likeness {light:.1e} (< 1e-8 kappa^2); gauge with kappa^2/4: {gauge:.2e} (< 1e-8 kappa^2)")


def test_c04_companion_gauge_half():
    """Same identity with the factor kappa^2/2 obtained from the tangent formula."""
    k, tp, tm, th, away = _geometry_samples()
    gauge = np.abs(minkowski_dot(tp, tm) + 0.5 * k ** 2 * np.cos(th) ** 2)[away].max() / k ** 2
    assert gauge < 1e-8


def test_c05_second_form_oracle():
    fields = _pair(0.5, 0.8)
    ext = ExternalVariables(kappa=1.3, beta=0.2)
    emb = Embedding(fields, ext, span=3.0)
    T, X = np.meshgrid(np.linspace(-2.5, 2.5, 21), np.linspace(-10, 10, 161), indexing="ij")
    th = emb.theta(T, X)
    away = np.abs(np.cos(th)) >= 0.05
    F = forms(emb, T[away], X[away])
    k = ext.kappa
    rp = fields[0].rho_at(X[away] + T[away])
    rm = fields[1].rho_at(X[away] - T[away])
    scale = k * max(np.abs(fields[0].rho).max(), np.abs(fields[1].rho).max())
    err = max(np.abs(F.II_pp - k * rp).max(), np.abs(F.II_mm + k * rm).max(), np.abs(F.II_pm).max()) / scale
    record(5, err <= 1e-4, f"max relative II error {err:.2e} (<= 1e-4) at N=4096 on {away.sum()} nodes with |cos theta| >= 0.05")


def test_c06_pde_residual_order():
    fields = (soliton_field(0.5, 1.0, PLUS), soliton_field(0.8, 1.0, MINUS))
    T, X = np.meshgrid(np.linspace(-3, 3, 31), np.linspace(-6, 6, 61), indexing="ij")
    th = fields[0].I_at(X + T) + fields[1].I_at(X - T)
    away = np.abs(np.cos(th)) >= 0.05
    hs = (0.02, 0.01, 0.005)
    errs = [np.abs(pde_residual(fields, T[away], X[away], h)).max() for h in hs]
    orders = [np.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]
    record(6, min(orders) >= 1.8,
           f"residual {', '.join(f'{e:.2e}' for e in errs)} at h = {hs}; orders {', '.join(f'{o:.2f}' for o in orders)} (>= 1.8)")


def test_c07_constraint_identity(rng):
    worst = 0.0
    for _ in range(5):
        ap, am = rng.uniform(0.3, 1.0, 2)
        cp, cm = rng.uniform(0.5, 2.0, 2)
        beta = rng.uniform(0, np.pi)
        fields = _pair(ap, am, cp, cm)
        for kappa in (0.5, 1.0, 2.0):
            ch = compute_charges(fields, ExternalVariables(kappa=kappa, beta=beta))
            rel = abs(ch.Phi) / (ch.P[0] ** 2 + ch.P[1] ** 2)
            worst = max(worst, rel)
    record(7, worst < 1e-6, f"max relative |Phi| = {worst:.2e} (< 1e-6) over 5 configurations x kappa in (0.5, 1, 2)")


def test_c08_cusp_count_and_scenarios(pair_11, pair_22, pair_tangle):
    ext = ExternalVariables()
    l11, e11 = track(pair_11, ext, (-5, 5), 0.1)
    l22, e22 = track(pair_22, ext, (-5, 5), 0.1)
    lt, et = track(pair_tangle, ext, (-5, 5), 0.1)
    bd = lambda ev: [e for e in ev if e.type in ("birth", "death")]
    span_ok = lambda lines: all(l.xi0_span == (-5.0, 5.0) for l in lines)
    ok11 = len(l11) == 2 and not bd(e11) and span_ok(l11)
    ok22 = len(l22) == 4 and not bd(e22) and span_ok(l22)
    types = sorted(e.type for e in bd(et))
    okt = len(lt) == 3 and types == ["birth", "death"]
    record(8, ok11 and ok22 and okt,
           f"1+1: {len(l11)} lines, {len(bd(e11))} events; 2+2: {len(l22)} lines, {len(bd(e22))} events; "
           f"tangle: {len(lt)} lines, events {types}")


def test_c09_braid_consistency(pair_11):
    lines, _ = track(pair_11, ExternalVariables(), (-5, 5), 0.1)
    w = braid_word(lines)
    wm = braid_word(lines, mirror=True)
    letters = w.letters()
    same = len({s for _, s in letters}) == 1 and all(i == 1 for i, _ in letters)
    perm_ok = w.permutation == ([2, 1] if len(letters) % 2 else [1, 2])
    ok = w.n_strands == 2 and len(letters) >= 1 and same and perm_ok and wm.writhe == -w.writhe != 0
    record(9, ok, f"{w.n_strands} strands, word {letters}, permutation {w.permutation}, writhe {w.writhe} -> {wm.writhe} mirrored")


def _stability(fields, times):
    H = [hamiltonian(fields, t) for t in times]
    P = [momentum(fields, 0.3, 1.0, 1.0, t) for t in times]
    J = [angular_J(fields, 1.0, 1.0, t) for t in times]
    return (max(abs(h - H[0]) for h in H), max(np.abs(p - P[0]).max() for p in P),
            max(abs(j - J[0]) for j in J))


def test_c10_charge_stability(pair_11):
    dH, dP, dJ = _stability(pair_11, np.linspace(-5, 5, 11))
    single = (synth_nsoliton(imaginary_spectrum([0.5], [1.0], PLUS)),
              synth_nsoliton(imaginary_spectrum([], [], MINUS)))
    H = hamiltonian(single)
    ok = dH < 1e-8 and dP < 1e-6 and dJ < 1e-4 and abs(H - 0.5) < 1e-8
    record(10, ok, f"drift H {dH:.1e}, P {dP:.1e}, J {dJ:.1e} (< 1e-8, 1e-6, 1e-4); "
                   f"H(a=0.5) = {H:.10f} against 0.5")


def test_c10_companion_hamiltonian_value():
    """H of the a = 0.5 soliton is 2a = 1 from 1/2 int 4a^2 sech^2(2a xi)."""
    f = synth_nsoliton(imaginary_spectrum([0.5], [1.0], PLUS))
    g = synth_nsoliton(imaginary_spectrum([], [], MINUS))
    assert abs(hamiltonian((f, g)) - 1.0) < 1e-8


if __name__ == "__main__":
    import sys
    from pathlib import Path

    sys.path.insert(0, str(Path(__file__).parent))
    from conftest import make_pair_11, make_pair_22, make_pair_tangle

    p11, p22, pt = make_pair_11(), make_pair_22(), make_pair_tangle()
    checks = [test_c01_one_soliton_closed_form, test_c02_quantization_and_parity,
              test_c03_scattering_round_trip, test_c04_geometry_identities,
              test_c05_second_form_oracle, test_c06_pde_residual_order,
              lambda: test_c07_constraint_identity(np.random.default_rng(20240611)),
              lambda: test_c08_cusp_count_and_scenarios(p11, p22, pt),
              lambda: test_c09_braid_consistency(p11),
              lambda: test_c10_charge_stability(p11)]
    failed = 0
    for check in checks:
        try:
            check()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)

import numpy as np
from hypothesis import given, settings, strategies as st

from planarstring import (MINUS, PLUS, BraidWord, ExternalVariables, F_P, hamiltonian,
                          imaginary_spectrum, reconstruct, soliton_field, synth_nsoliton,
                          topological_charge)
from planarstring.braid import cycle_type, free_reduce, permutation_of
from planarstring.worldsheet import minkowski_dot, tangent

widths = st.floats(0.3, 1.2)
consts = st.floats(0.2, 5.0)


@settings(max_examples=10, deadline=None)
@given(st.lists(widths, min_size=1, max_size=3, unique=True), st.floats(0.3, 3.0))
def test_same_sign_synthesis_charge(a, c):
    a = sorted(a)
    if min(np.diff(a), default=1.0) < 0.1:
        return
    f = synth_nsoliton(imaginary_spectrum(a, [c] * len(a), PLUS))
    assert topological_charge(f) == -len(a)
    g = synth_nsoliton(imaginary_spectrum(a, [-c] * len(a), MINUS))
    assert topological_charge(g) == len(a)


@settings(max_examples=10, deadline=None)
@given(widths, widths, consts, consts, st.floats(-1.0, 1.0), st.floats(0.5, 2.0))
def test_world_sheet_is_light_like(ap, am, cp, cm, beta, kappa):
    fields = soliton_field(ap, cp, PLUS), soliton_field(am, cm, MINUS)
    ext = ExternalVariables(kappa=kappa, beta=beta)
    T, X = np.meshgrid([-1.0, 0.0, 0.7], np.linspace(-4, 4, 9), indexing="ij")
    tp, tm = tangent(T, X, fields, ext)
    assert np.abs(minkowski_dot(tp, tp)).max() < 1e-12 * kappa ** 2
    assert np.abs(minkowski_dot(tm, tm)).max() < 1e-12 * kappa ** 2
    ws = reconstruct(fields, ext, [0.0, 0.7], np.linspace(-4, 4, 9))
    assert np.allclose(ws.X[..., 0], kappa * ws.xi0[:, None])


@settings(max_examples=10, deadline=None)
@given(widths, widths, consts, st.floats(-3.0, 3.0))
def test_F_P_nonnegative_and_H_positive(ap, am, cp, t):
    fields = soliton_field(ap, cp, PLUS), soliton_field(am, -cp, MINUS)
    assert F_P(fields, 0.0, xi0=t) >= -1e-12
    assert hamiltonian(fields, xi0=t) > 0


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 5).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(1, n - 1), st.sampled_from([-1, 1])),
                                             max_size=12))))
def test_braid_word_invariants(case):
    n, letters = case
    w = BraidWord.from_letters(n, letters)
    perm = permutation_of(letters, n)
    assert sorted(perm) == list(range(1, n + 1))
    assert sum(cycle_type(perm)) == n
    red = free_reduce(letters)
    assert permutation_of(red, n) == perm
    assert sum(e for _, e in red) == w.writhe
    # a word followed by its inverse is trivial
    inv = [(i, -e) for i, e in reversed(letters)]
    assert free_reduce(letters + inv) == []

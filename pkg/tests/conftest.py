import numpy as np
import pytest

from planarstring import (MINUS, PLUS, ExternalVariables, imaginary_spectrum, soliton_field,
                          synth_nsoliton)

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


def make_pair_11():
    """1+1 soliton fields with two cusps (a+ = 0.5, a- = 0.8, c = 1)."""
    return (synth_nsoliton(imaginary_spectrum([0.5], [1.0], PLUS)),
            synth_nsoliton(imaginary_spectrum([0.8], [1.0], MINUS)))


@pytest.fixture(scope="session")
def pair_closed():
    """Closed-form 1+1 soliton fields (exact I, no synthesis)."""
    return soliton_field(0.5, 1.0, PLUS), soliton_field(0.8, 1.0, MINUS)


def make_pair_22():
    return (synth_nsoliton(imaginary_spectrum([0.4, 0.8], [1.0, 1.0], PLUS)),
            synth_nsoliton(imaginary_spectrum([0.5, 0.7], [1.0, 1.0], MINUS)))


def make_pair_tangle():
    """Plus field with n = 0 (opposite constants) against a single minus soliton."""
    return (synth_nsoliton(imaginary_spectrum([0.4, 0.8], [1.0, -1.0], PLUS)),
            synth_nsoliton(imaginary_spectrum([0.6], [1.0], MINUS)))


@pytest.fixture(scope="session")
def pair_11():
    return make_pair_11()


@pytest.fixture(scope="session")
def pair_22():
    return make_pair_22()


@pytest.fixture(scope="session")
def pair_tangle():
    return make_pair_tangle()


@pytest.fixture
def ext():
    return ExternalVariables(kappa=1.3, beta=0.2, Z=(0.5, -1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

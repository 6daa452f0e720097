import numpy as np
import pytest

import pcfractal as pf


class Bundle:
    """Preset structure plus lazily cached per-level forms, modules, spectra."""

    def __init__(self, preset: str):
        self.doc = pf.load_definition(preset)
        self.S = pf.structure_from_definition(self.doc)
        self.hs = pf.harmonic_from_definition(self.doc)
        self.mw = pf.measure_from_definition(self.doc)
        self.se = pf.solve_spectral_exponent(self.hs, self.mw)
        self._ef = {}
        self._em = {}
        self._sd = {}

    def ef(self, m):
        if m not in self._ef:
            self._ef[m] = pf.assemble_energy(self.S, self.hs, m)
        return self._ef[m]

    def module(self, m):
        if m not in self._em:
            self._em[m] = pf.build_module(self.ef(m))
        return self._em[m]

    def sd(self, m, bc="dirichlet"):
        key = (m, bc)
        if key not in self._sd:
            ef = self.ef(m)
            mass = pf.mass_vector(self.S, self.hs, self.mw, m, cm=ef.complex)
            self._sd[key] = pf.eigensolve(ef, mass, bc)
        return self._sd[key]

    def harmonic_fn(self, m0, m, seed=None, values=None):
        return pf.harmonic_function(
            self.S, self.hs, m0, m, boundary_values=values, seed=seed
        )


# one PASS/FAIL line per acceptance criterion, shown after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def interval():
    return Bundle("interval")


@pytest.fixture(scope="session")
def gasket():
    return Bundle("gasket")


def interval_positions(cm):
    """Map interval vertices to their coordinates in [0, 1] via addresses."""
    xs = np.empty(cm.n_vertices)
    for v, (w, p) in enumerate(cm.representatives):
        t = 0.0 if p == 1 else 1.0
        for letter in reversed(w):
            t = t / 2 + (0.0 if letter == 1 else 0.5)
        xs[v] = t
    return xs

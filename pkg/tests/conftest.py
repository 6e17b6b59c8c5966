import numpy as np
import pytest

from twistpoints.calculus.hamiltonians import PerturbedHamiltonian
from twistpoints.calculus.loops import StructuredQuadratic
from twistpoints.calculus.perturbation import BumpTerm, CompactPerturbation

CRITERIA = []


def record_criterion(number, passed, summary):
    """Remember one acceptance line; printed in the terminal summary."""
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {summary}"
    CRITERIA.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def desk():
    """Plane rotation by 1/2 with a rotating linear payload under a bump of radius 2."""
    h = CompactPerturbation([
        BumpTerm((0, 0), 2.0, ((1.0, (1, 0)),), 0.3, 1.0, 0.0),
        BumpTerm((0, 0), 2.0, ((1.0, (0, 1)),), 0.3, 1.0, -np.pi / 2),
    ])
    SQ = StructuredQuadratic.vg(0, 0.5)
    return SQ, PerturbedHamiltonian(SQ.form, h)

"""Shared fixtures: the four reference programs and their elaborated IRs."""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `import oracles`

from qdb.qasm import load_file

PROGRAMS = Path(__file__).parent.parent / "programs"

SUPERPOSITION_MEASURE = PROGRAMS / "superposition_measure.qasm"
QFT8 = PROGRAMS / "qft8.qasm"
ENTANGLED_SEPARABLE = PROGRAMS / "entangled_separable.qasm"
CLONE_ORTHOGONAL = PROGRAMS / "clone_orthogonal.qasm"

ALL_PROGRAMS = [SUPERPOSITION_MEASURE, QFT8, ENTANGLED_SEPARABLE, CLONE_ORTHOGONAL]


@pytest.fixture(scope="session")
def superposition_ir():
    return load_file(SUPERPOSITION_MEASURE)[1]


@pytest.fixture(scope="session")
def qft8_ir():
    return load_file(QFT8)[1]


@pytest.fixture(scope="session")
def entangled_ir():
    return load_file(ENTANGLED_SEPARABLE)[1]


@pytest.fixture(scope="session")
def clone_ir():
    return load_file(CLONE_ORTHOGONAL)[1]

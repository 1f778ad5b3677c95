"""Gate library identities and the documented U phase convention."""
from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from qdb import gates


ALL_NAMED = {
    "I": gates.I,
    "X": gates.X,
    "Y": gates.Y,
    "Z": gates.Z,
    "H": gates.H,
    "S": gates.S,
    "SDG": gates.SDG,
    "T": gates.T,
    "CNOT": gates.CNOT,
}


@pytest.mark.parametrize("name", sorted(ALL_NAMED))
def test_library_gates_unitary(name):
    g = ALL_NAMED[name]
    d = g.shape[0]
    assert np.max(np.abs(g.conj().T @ g - np.eye(d))) <= 1e-12


def test_sigma1_is_the_not_matrix():
    # the classical bit-flip matrix [[0,1],[1,0]]
    np.testing.assert_array_equal(gates.SIGMA[1], np.array([[0, 1], [1, 0]]))
    np.testing.assert_array_equal(gates.X, gates.SIGMA[1])


def test_pauli_list_matches_definitions():
    np.testing.assert_array_equal(gates.SIGMA[0], np.eye(2))
    np.testing.assert_array_equal(gates.SIGMA[2], np.array([[0, -1j], [1j, 0]]))
    np.testing.assert_array_equal(gates.SIGMA[3], np.array([[1, 0], [0, -1]]))


def test_t_is_the_pi_over_8_phase():
    assert gates.T[1, 1] == cmath.exp(1j * math.pi / 8)
    assert gates.T[0, 0] == 1.0


def test_cnot_truth_table():
    # |10> -> |11>, |11> -> |10>, first qubit controls
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    np.testing.assert_array_equal(gates.CNOT, expected)


def test_u_matrix_special_cases():
    np.testing.assert_allclose(gates.u_matrix(math.pi, 0, math.pi), gates.X, atol=1e-15)
    np.testing.assert_allclose(gates.u_matrix(math.pi / 2, 0, math.pi), gates.H, atol=1e-15)
    lam = 0.4321
    np.testing.assert_allclose(
        gates.u_matrix(0, 0, lam), np.diag([1, cmath.exp(1j * lam)]), atol=1e-15
    )


def test_u_matrix_always_unitary():
    rng = np.random.default_rng(11)
    for _ in range(50):
        theta, phi, lam = rng.uniform(-2 * math.pi, 2 * math.pi, 3)
        assert gates.is_unitary(gates.u_matrix(theta, phi, lam))


def test_measurement_rotations_diagonalize():
    for label, pauli in (("X", gates.X), ("Y", gates.Y), ("Z", gates.Z)):
        v = gates.MEASUREMENT_ROTATIONS[label]
        np.testing.assert_allclose(v @ pauli @ v.conj().T, gates.Z, atol=1e-12)

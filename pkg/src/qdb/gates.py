"""Named gate matrices and constructors.

All matrices are complex128 and unitary to machine precision. SIGMA lists
the Pauli operators sigma_0..sigma_3 (I, X, Y, Z); SIGMA[1] is the classical
NOT matrix. T here is the pi/8 phase gate diag(1, e^{i pi/8}); note the
OpenQASM `t` gate elaborates to u1(pi/4) instead, which is the common
convention in assembly headers.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

I = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA = (I, X, Y, Z)
PAULI_BY_NAME = {"I": I, "X": X, "Y": Y, "Z": Z}

H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
T = np.array([[1, 0], [0, cmath.exp(1j * math.pi / 8)]], dtype=np.complex128)
S = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
SDG = S.conj().T

CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=np.complex128,
)

# Change-of-basis rotations for measuring X and Y observables in the Z basis:
# V satisfies V P V^dagger = Z.
MEASUREMENT_ROTATIONS = {"X": H, "Y": H @ SDG, "Z": I}


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """OpenQASM 2.0 primitive U(theta, phi, lam).

    Phase convention: U(pi,0,pi) = X exactly and U(0,0,lam) = diag(1, e^{i lam}).
    """
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return np.array(
        [[c, -cmath.exp(1j * lam) * s],
         [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c]],
        dtype=np.complex128,
    )


def phase_matrix(lam: float) -> np.ndarray:
    return np.array([[1, 0], [0, cmath.exp(1j * lam)]], dtype=np.complex128)


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    d = m.shape[0]
    return m.shape == (d, d) and np.max(np.abs(m.conj().T @ m - np.eye(d))) <= tol

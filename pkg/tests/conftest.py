import numpy as np
import pytest

from qwork.spectral import (
    DensityMatrix,
    HermitianOperator,
    UnitaryMatrix,
    propagator,
    random_hamiltonian,
    thermal_state,
)
from qwork.work_povm import QuenchProtocol

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def qubit_flip_protocol(e_max=1.0):
    """H = H' = diag(-1/2, +1/2) with a spin-flip drive: work is exactly +-1."""
    h = HermitianOperator(np.diag([-0.5, 0.5]).astype(complex))
    return QuenchProtocol(h, h, UnitaryMatrix(PAULI_X), e_max)


def gap_change_protocol():
    """diag(-1/2, 1/2) -> diag(-1, 1) with identity drive; e_max = 2."""
    h0 = HermitianOperator(np.diag([-0.5, 0.5]).astype(complex))
    h1 = HermitianOperator(np.diag([-1.0, 1.0]).astype(complex))
    return QuenchProtocol(h0, h1, UnitaryMatrix.identity(2), 2.0)


def random_protocol(dim, e_max, seed, sudden=False):
    """Random bounded endpoints; optionally a generic (non-identity) drive."""
    h0 = random_hamiltonian(dim, e_max, seed)
    h1 = random_hamiltonian(dim, e_max, seed ^ 1)
    if sudden:
        drive = UnitaryMatrix.identity(dim)
    else:
        drive = propagator(random_hamiltonian(dim, e_max, seed + 1009), 1.3)
    return QuenchProtocol(h0, h1, drive, e_max)


def degenerate_gap_protocol(seed=5):
    """Equally spaced identical spectra diag(-1, 0, 1): gaps collide across pairs."""
    h = HermitianOperator(np.diag([-1.0, 0.0, 1.0]).astype(complex))
    drive = propagator(random_hamiltonian(3, 2.0, seed), 1.0)
    return QuenchProtocol(h, h, drive, 2.0)


def random_density_matrix(dim, seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


@pytest.fixture
def qubit_flip():
    return qubit_flip_protocol()


@pytest.fixture
def gap_change():
    return gap_change_protocol()


def thermal_input(protocol, beta):
    rho, _ = thermal_state(protocol.h_initial, beta)
    return rho

"""Canonical quench protocols: random-matrix quenches, the driven two-level
beam-splitter setup, and user-supplied matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectral import (
    HermitianOperator,
    UnitaryMatrix,
    propagator,
    random_hamiltonian,
)
from .work_povm import QuenchProtocol

MAX_SYSTEM_QUBITS = 12

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative description of a quench scenario for the CLI and presets."""

    kind: str  # "gue" | "two_level_sg" | "custom"
    e_max: float
    n_qubits: int = 4
    seed: int = 7
    omega1: float = 0.6
    omega2: float = 1.0
    theta: float = np.pi / 2
    h_path: Optional[str] = None
    h_tilde_path: Optional[str] = None
    u_path: str = "identity"

    def __post_init__(self):
        if self.kind not in ("gue", "two_level_sg", "custom"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if not (np.isfinite(self.e_max) and self.e_max > 0):
            raise ValueError(f"e_max must be positive, got {self.e_max}")

    def tag(self) -> str:
        if self.kind == "gue":
            return f"gue(n_qubits={self.n_qubits}, e_max={self.e_max}, seed={self.seed})"
        if self.kind == "two_level_sg":
            return (
                f"two_level_sg(omega1={self.omega1}, omega2={self.omega2}, "
                f"theta={self.theta}, e_max={self.e_max})"
            )
        return f"custom(h={self.h_path}, h_tilde={self.h_tilde_path}, u={self.u_path})"


def build_gue_quench(n_qubits: int, e_max: float, seed: int) -> QuenchProtocol:
    """Sudden quench between two independent random Hamiltonians.

    Draws the endpoints with seeds (seed, seed XOR 1), each rescaled to fill
    [-e_max/2, +e_max/2]; the drive is the identity.
    """
    if not 1 <= n_qubits <= MAX_SYSTEM_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_SYSTEM_QUBITS}], got {n_qubits}")
    dim = 1 << n_qubits
    h0 = random_hamiltonian(dim, e_max, seed)
    h1 = random_hamiltonian(dim, e_max, seed ^ 1)
    return QuenchProtocol(h0, h1, UnitaryMatrix.identity(dim), e_max)


def build_two_level_sg(
    omega1: float, omega2: float, theta: float, e_max: float
) -> QuenchProtocol:
    """Two-level quench with a rotation drive: the four-outcome beam-splitter setup.

    The level splitting changes from omega1 to omega2 while the drive rotates
    the spin by theta about x, so a thermal input spreads over the four work
    values +-(omega2 - omega1)/2 and +-(omega2 + omega1)/2 with stay weight
    cos^2(theta/2) and flip weight sin^2(theta/2).
    """
    for name, omega in (("omega1", omega1), ("omega2", omega2)):
        if not 0 <= omega <= e_max:
            raise ValueError(f"{name} = {omega} outside [0, e_max = {e_max}]")
    h0 = HermitianOperator((omega1 / 2) * PAULI_Z)
    h1 = HermitianOperator((omega2 / 2) * PAULI_Z)
    drive = propagator(HermitianOperator(PAULI_X / 2), theta)
    return QuenchProtocol(h0, h1, drive, e_max)


def load_custom(h_path, h_tilde_path, u_path, e_max: float) -> QuenchProtocol:
    """Protocol from JSON matrix files; ``u_path`` may be the literal "identity"."""
    h0 = HermitianOperator.load_json(h_path)
    h1 = HermitianOperator.load_json(h_tilde_path)
    if str(u_path) == "identity":
        drive = UnitaryMatrix.identity(h0.dim)
    else:
        drive = UnitaryMatrix.load_json(u_path)
    return QuenchProtocol(h0, h1, drive, e_max)


def build_protocol(spec: ScenarioSpec) -> QuenchProtocol:
    """Realize a scenario description as a validated protocol."""
    if spec.kind == "gue":
        return build_gue_quench(spec.n_qubits, spec.e_max, spec.seed)
    if spec.kind == "two_level_sg":
        return build_two_level_sg(spec.omega1, spec.omega2, spec.theta, spec.e_max)
    if spec.h_path is None or spec.h_tilde_path is None:
        raise ValueError("custom scenario needs both Hamiltonian file paths")
    return load_custom(spec.h_path, spec.h_tilde_path, spec.u_path, spec.e_max)

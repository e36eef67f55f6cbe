"""Dense complex linear algebra for driven finite-dimensional systems.

Provides validated matrix types (Hamiltonians, density matrices, unitaries,
eigendecompositions), propagators, thermal states, and seeded random
Hamiltonians with an exactly rescaled bounded spectrum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HERMITICITY_TOL = 1e-12
STRUCTURAL_TOL = 1e-10
PSD_TOL = 1e-10
BOUND_TOL = 1e-12


def _as_square_complex(entries) -> np.ndarray:
    m = np.array(entries, dtype=complex, order="C")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix contains non-finite entries")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class HermitianOperator:
    """A Hamiltonian: a dim x dim complex matrix equal to its adjoint."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        object.__setattr__(self, "entries", m)
        if m.shape[0] < 2:
            raise ValueError(f"Hermitian operator needs dim >= 2, got {m.shape[0]}")
        dev = np.abs(m - m.conj().T)
        scale = float(np.abs(m).max()) or 1.0
        worst = float(dev.max())
        if worst > HERMITICITY_TOL * scale:
            i, j = np.unravel_index(int(dev.argmax()), dev.shape)
            raise ValueError(
                f"matrix is not Hermitian: |A[{i},{j}] - conj(A[{j},{i}])| = "
                f"{worst:.3e} exceeds {HERMITICITY_TOL:.0e} * {scale:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_json_dict(self) -> dict:
        return _matrix_to_json_dict(self.entries)

    @classmethod
    def from_json_dict(cls, data: dict) -> "HermitianOperator":
        return cls(_matrix_from_json_dict(data))

    def save_json(self, path) -> None:
        save_matrix_json(path, self.entries)

    @classmethod
    def load_json(cls, path) -> "HermitianOperator":
        return cls(load_matrix_json(path))


@dataclass(frozen=True)
class UnitaryMatrix:
    """A dim x dim complex matrix U with U^dag U = I."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        object.__setattr__(self, "entries", m)
        dev = float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
        if dev > STRUCTURAL_TOL:
            raise ValueError(f"matrix is not unitary: max |U^dag U - I| = {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def to_json_dict(self) -> dict:
        return _matrix_to_json_dict(self.entries)

    @classmethod
    def from_json_dict(cls, data: dict) -> "UnitaryMatrix":
        return cls(_matrix_from_json_dict(data))

    @classmethod
    def identity(cls, dim: int) -> "UnitaryMatrix":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def load_json(cls, path) -> "UnitaryMatrix":
        return cls(load_matrix_json(path))


@dataclass(frozen=True)
class DensityMatrix:
    """A quantum state: Hermitian, unit trace, positive semidefinite."""

    entries: np.ndarray

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        object.__setattr__(self, "entries", m)
        scale = float(np.abs(m).max()) or 1.0
        if float(np.abs(m - m.conj().T).max()) > HERMITICITY_TOL * scale:
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"density matrix trace {tr:.12g} is not 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -PSD_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and a unitary matrix of eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float)
        ev.setflags(write=False)
        vecs = _as_square_complex(self.eigenvectors)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "eigenvectors", vecs)
        if ev.ndim != 1 or ev.size != vecs.shape[0]:
            raise ValueError("eigenvalue count does not match matrix dimension")
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be ascending")
        dev = float(np.abs(vecs.conj().T @ vecs - np.eye(vecs.shape[0])).max())
        if dev > STRUCTURAL_TOL:
            raise ValueError(f"eigenvector matrix is not unitary: {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.eigenvalues.size


def eigendecompose(op: HermitianOperator) -> SpectralDecomposition:
    """Full eigendecomposition of a Hermitian operator, eigenvalues ascending."""
    evals, evecs = np.linalg.eigh(op.entries)
    dec = SpectralDecomposition(evals, evecs)
    rebuilt = (evecs * evals) @ evecs.conj().T
    err = float(np.abs(rebuilt - op.entries).max())
    if err > STRUCTURAL_TOL * max(1.0, float(np.abs(op.entries).max())):
        raise ArithmeticError(f"eigendecomposition reconstruction error {err:.3e}")
    return dec


def propagator(op: HermitianOperator, t: float) -> UnitaryMatrix:
    """exp(-i * op * t), evaluated through the eigendecomposition."""
    dec = eigendecompose(op)
    phases = np.exp(-1j * dec.eigenvalues * float(t))
    return UnitaryMatrix((dec.eigenvectors * phases) @ dec.eigenvectors.conj().T)


def log_partition_function(op: HermitianOperator, beta: float) -> float:
    """ln Tr exp(-beta * op), overflow-safe via a spectral shift."""
    _check_beta(beta)
    evals = np.linalg.eigvalsh(op.entries)
    shift = float(evals.min())
    return float(-beta * shift + np.log(np.exp(-beta * (evals - shift)).sum()))


def thermal_state(op: HermitianOperator, beta: float) -> tuple[DensityMatrix, float]:
    """Gibbs state exp(-beta * op) / Z and the partition function Z.

    Weights are exponentiated after subtracting the ground energy, so large
    beta cannot overflow.
    """
    _check_beta(beta)
    dec = eigendecompose(op)
    shift = float(dec.eigenvalues.min())
    weights = np.exp(-beta * (dec.eigenvalues - shift))
    total = float(weights.sum())
    rho = (dec.eigenvectors * (weights / total)) @ dec.eigenvectors.conj().T
    z = total * float(np.exp(-beta * shift))
    return DensityMatrix(rho), z


def _check_beta(beta: float) -> None:
    if not np.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")


def random_hamiltonian(dim: int, e_max: float, seed: int) -> HermitianOperator:
    """Seeded GUE draw rescaled so the spectrum exactly fills [-e_max/2, +e_max/2].

    Independent complex Gaussian entries are Hermitized, then the matrix is
    shifted and scaled so the extreme eigenvalues land on the bounds.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if e_max <= 0:
        raise ValueError(f"e_max must be > 0, got {e_max}")
    rng = np.random.default_rng(seed)
    raw = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    herm = (raw + raw.conj().T) / 2
    evals = np.linalg.eigvalsh(herm)
    lo, hi = float(evals[0]), float(evals[-1])
    if hi - lo <= 0:
        raise ArithmeticError("degenerate random draw: spectrum has zero width")
    centered = herm - ((lo + hi) / 2) * np.eye(dim)
    return HermitianOperator(centered * (e_max / (hi - lo)))


def spectral_bound_check(op: HermitianOperator, e_max: float) -> bool:
    """True iff every eigenvalue lies in [-e_max/2, +e_max/2] (tolerance 1e-12)."""
    evals = np.linalg.eigvalsh(op.entries)
    slack = BOUND_TOL * max(1.0, abs(e_max))
    half = e_max / 2
    return bool(evals[0] >= -half - slack and evals[-1] <= half + slack)


# --- JSON matrix format: {"dim": n, "re": [n*n reals], "im": [n*n reals]} ---

def _matrix_to_json_dict(m: np.ndarray) -> dict:
    return {
        "dim": int(m.shape[0]),
        "re": m.real.ravel().tolist(),
        "im": m.imag.ravel().tolist(),
    }


def _matrix_from_json_dict(data: dict) -> np.ndarray:
    try:
        dim = int(data["dim"])
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad matrix document: {exc}") from exc
    if re.shape != (dim * dim,) or im.shape != (dim * dim,):
        raise ValueError(
            f"matrix document with dim={dim} needs {dim * dim} re/im entries, "
            f"got {re.size}/{im.size}"
        )
    return (re + 1j * im).reshape(dim, dim)


def save_matrix_json(path, m: np.ndarray) -> None:
    Path(path).write_text(json.dumps(_matrix_to_json_dict(np.asarray(m, dtype=complex))))


def load_matrix_json(path) -> np.ndarray:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return _matrix_from_json_dict(data)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc

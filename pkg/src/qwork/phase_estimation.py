"""Sampling work through an M-qubit ancilla phase-estimation circuit.

Two independent routes produce the coarse-grained work distribution over the
D = 2^M ancilla outcomes:

* an exact statevector simulation of the sampling circuit (uniform ancilla
  superposition, controlled phase kicks by the initial and final spectra
  around the drive, Fourier readout), and
* an analytic convolution of the exact work distribution with the squared
  geometric-sum filter kernel.

They must agree to high precision on energy-diagonal inputs; that agreement
is the build's central cross-check.  Rectangular binning of the exact
distribution gives the reference the filtered distribution converges to as
the ancilla grows.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectral import DensityMatrix
from .work_povm import MASS_FLOOR, QuenchProtocol, WorkDistribution

FILTER_SINGULARITY_TOL = 1e-12
COMMUTE_TOL = 1e-10
NORM_TOL = 1e-10
MAX_ANCILLA_QUBITS = 24
VALUE_CLAMP_TOL = -1e-12
SUM_TOL = 1e-9


@dataclass(frozen=True)
class SamplerConfig:
    """Ancilla size and energy bound; the register has d = 2^m_qubits states."""

    m_qubits: int
    e_max: float

    def __post_init__(self):
        if not 1 <= self.m_qubits <= MAX_ANCILLA_QUBITS:
            raise ValueError(
                f"m_qubits must be in [1, {MAX_ANCILLA_QUBITS}], got {self.m_qubits}"
            )
        if not (np.isfinite(self.e_max) and self.e_max > 0):
            raise ValueError(f"e_max must be positive and finite, got {self.e_max}")

    @property
    def d(self) -> int:
        return 1 << self.m_qubits


def x_to_work(x: int, config: SamplerConfig) -> float:
    """Work value read off ancilla outcome x (modular: upper half is negative)."""
    d = config.d
    if not 0 <= x < d:
        raise ValueError(f"ancilla outcome {x} outside [0, {d})")
    if x <= d // 2:
        return 4.0 * config.e_max * x / d
    return 4.0 * config.e_max * (x - d) / d


def work_values(config: SamplerConfig) -> np.ndarray:
    """x_to_work evaluated on the whole outcome range 0..d-1."""
    xs = np.arange(config.d)
    signed = np.where(xs <= config.d // 2, xs, xs - config.d)
    return 4.0 * config.e_max * signed / config.d


def _filter_values(z, d: int, e_max: float) -> np.ndarray:
    """Squared geometric-sum kernel sin^2(pi z d / 4E) / (d sin(pi z / 4E))^2.

    Both sine arguments are range-reduced against their exact periods before
    evaluation, so values stay accurate near the removable singularities at
    z = 0 mod 4E (where the kernel equals 1) even for large d.
    """
    z = np.asarray(z, dtype=float)
    period = 4.0 * e_max
    xi = (np.pi / period) * (z - period * np.round(z / period))
    mu = (np.pi * d / period) * (z - (period / d) * np.round(z * (d / period)))
    sxi = np.sin(xi)
    num = np.sin(mu) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.abs(sxi) < FILTER_SINGULARITY_TOL, 1.0, num / (d * sxi) ** 2)


def filter_weight(z: float, config: SamplerConfig) -> float:
    """Probability weight the ancilla filter puts at energy offset z."""
    return float(_filter_values(np.asarray([z]), config.d, config.e_max)[0])


@dataclass(frozen=True)
class CoarseGrainedDistribution:
    """Length-d probability table over ancilla outcomes x.

    ``kind`` is "filtered" for the circuit/convolution output and
    "rectangular" for hard binning of the exact distribution.  Tiny negative
    values (rounding noise) are clamped to zero at construction.
    """

    kind: str
    values: np.ndarray
    e_max: float

    def __post_init__(self):
        if self.kind not in ("filtered", "rectangular"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2 or vals.size & (vals.size - 1):
            raise ValueError("values must be a length-2^M vector")
        if float(vals.min()) < VALUE_CLAMP_TOL:
            raise ValueError(f"negative probability {vals.min():.3e} in table")
        vals = np.maximum(vals, 0.0)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        total = float(vals.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"bin probabilities sum to {total:.12g}, not 1")

    @property
    def d(self) -> int:
        return self.values.size

    @property
    def m_qubits(self) -> int:
        return int(self.d).bit_length() - 1

    def config(self) -> SamplerConfig:
        return SamplerConfig(m_qubits=self.m_qubits, e_max=self.e_max)

    def work_values(self) -> np.ndarray:
        return work_values(self.config())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "w", "p"])
        ws = self.work_values()
        for x in range(self.d):
            writer.writerow([x, repr(float(ws[x])), repr(float(self.values[x]))])
        return buf.getvalue()


def _check_bounded(dist: WorkDistribution, config: SamplerConfig) -> None:
    limit = config.e_max * (1.0 + 1e-9)
    worst = float(np.abs(dist.ws).max())
    if worst > limit:
        raise ValueError(
            f"work value {worst:.6g} outside +-e_max = {config.e_max:.6g}; "
            "rescale the protocol bound"
        )


def convolve_distribution(
    dist: WorkDistribution, config: SamplerConfig
) -> CoarseGrainedDistribution:
    """Filtered coarse distribution: the work points smeared by the ancilla kernel."""
    _check_bounded(dist, config)
    d = config.d
    wx = 4.0 * config.e_max * np.arange(d) / d
    vals = np.zeros(d)
    chunk = max(1, (1 << 24) // d)
    for i in range(0, dist.ws.size, chunk):
        sl = slice(i, i + chunk)
        z = wx[:, None] - dist.ws[None, sl]
        vals += _filter_values(z, d, config.e_max) @ dist.ps[sl]
    return CoarseGrainedDistribution("filtered", vals, config.e_max)


def rectangular_coarse_grain(
    dist: WorkDistribution, config: SamplerConfig
) -> CoarseGrainedDistribution:
    """Hard binning: each work point joins the bin whose center is nearest.

    Bins are half-open with width 4 e_max / d; a point exactly on a bin edge
    goes to the upper bin.
    """
    _check_bounded(dist, config)
    d = config.d
    k = np.floor(dist.ws * (d / (4.0 * config.e_max)) + 0.5).astype(np.int64) % d
    vals = np.bincount(k, weights=dist.ps, minlength=d)
    return CoarseGrainedDistribution("rectangular", vals, config.e_max)


def sup_norm_distance(a: CoarseGrainedDistribution, b: CoarseGrainedDistribution) -> float:
    """max_x |a(x) - b(x)| between two tables on the same grid."""
    if a.d != b.d or a.e_max != b.e_max:
        raise ValueError("distributions live on different grids")
    return float(np.abs(a.values - b.values).max())


@dataclass(frozen=True)
class JointState:
    """Statevector of ancilla (size d) and system (size dim_s), ancilla-major."""

    amplitudes: np.ndarray
    d: int
    dim_s: int

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).ravel()
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        if self.d * self.dim_s != amp.size:
            raise ValueError(
                f"amplitude count {amp.size} != d * dim_s = {self.d * self.dim_s}"
            )
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 = {norm:.12g} is not 1")

    def grid(self) -> np.ndarray:
        return self.amplitudes.reshape(self.d, self.dim_s)


def _fourier_cols(grid: np.ndarray, sign: int) -> np.ndarray:
    """Unitary Fourier kernel exp(sign * 2 pi i x t / d) / sqrt(d) on axis 0."""
    if sign > 0:
        return np.fft.ifft(grid, axis=0, norm="ortho")
    return np.fft.fft(grid, axis=0, norm="ortho")


def qft(state: JointState, inverse: bool = False) -> JointState:
    """Quantum Fourier transform on the ancilla register.

    Forward maps |x> to (1/sqrt d) sum_t exp(+2 pi i x t / d) |t>; ``inverse``
    applies the adjoint.
    """
    out = _fourier_cols(state.grid(), -1 if inverse else +1)
    return JointState(out.ravel(), state.d, state.dim_s)


def _mixture_components(
    protocol: QuenchProtocol, initial: DensityMatrix
) -> list[tuple[float, np.ndarray]]:
    """Decompose the input into pure components, as coefficients over the
    initial eigenbasis.

    Pure inputs pass through unchanged.  Mixed inputs must commute with the
    initial Hamiltonian (thermal or otherwise energy-diagonal); they are then
    diagonalized level block by level block, which keeps every component an
    energy eigenvector.
    """
    v = protocol.spectrum_initial.eigenvectors
    rho_v = v.conj().T @ initial.entries @ v
    purity = float(np.trace(initial.entries @ initial.entries).real)
    if purity >= 1.0 - 1e-10:
        _, evecs = np.linalg.eigh(rho_v)
        return [(1.0, evecs[:, -1])]
    levels = protocol.levels_initial
    off_block = rho_v.copy()
    for a in range(levels.count):
        idx = levels.members(a)
        off_block[np.ix_(idx, idx)] = 0.0
    worst = float(np.abs(off_block).max())
    if worst > COMMUTE_TOL:
        raise ValueError(
            "initial state neither pure nor energy-diagonal: off-level element "
            f"{worst:.3e} exceeds {COMMUTE_TOL:.0e}"
        )
    comps: list[tuple[float, np.ndarray]] = []
    dim = protocol.dim
    for a in range(levels.count):
        idx = levels.members(a)
        block = rho_v[np.ix_(idx, idx)]
        evals, evecs = np.linalg.eigh(block)
        for j in range(idx.size):
            weight = float(evals[j])
            if weight < MASS_FLOOR:
                continue
            coeff = np.zeros(dim, dtype=complex)
            coeff[idx] = evecs[:, j]
            comps.append((weight, coeff))
    return comps


def simulate_circuit(
    protocol: QuenchProtocol, initial: DensityMatrix, config: SamplerConfig
) -> CoarseGrainedDistribution:
    """Exact statevector run of the ancilla sampling circuit.

    Per pure component: put the ancilla in the uniform superposition, kick
    each basis state |t> by the initial eigenphases taken t times (the
    controlled inverse evolution), apply the drive, kick by the conjugate
    final eigenphases, and Fourier-read the ancilla.  The readout kernel is
    conjugate to the accumulated phases, so bin x collects the work
    4 e_max x / d.  Component results are averaged in a fixed order.
    """
    if initial.dim != protocol.dim:
        raise ValueError(f"state dim {initial.dim} does not match protocol dim {protocol.dim}")
    d, dim = config.d, protocol.dim
    if d * dim > (1 << 26):
        raise ValueError(
            f"joint register of {d} x {dim} amplitudes exceeds the memory guard"
        )
    e_i = protocol.spectrum_initial.eigenvalues
    e_f = protocol.spectrum_final.eigenvalues
    b = protocol.drive_in_eigenbases
    angle = np.pi / (2.0 * config.e_max)  # phase per unit energy per step
    t = np.arange(d)
    kick_f = np.exp(-1j * angle * np.outer(t, e_f))
    probs = np.zeros(d)
    for weight, coeff in _mixture_components(protocol, initial):
        support = np.flatnonzero(np.abs(coeff) > 0)
        grid = np.zeros((d, support.size), dtype=complex)
        grid[0, :] = coeff[support]
        grid = _fourier_cols(grid, +1)  # uniform ancilla superposition
        grid *= np.exp(1j * angle * np.outer(t, e_i[support]))
        grid = grid @ b[:, support].T  # drive, into the final eigenbasis
        grid *= kick_f
        grid = _fourier_cols(grid, +1)  # readout conjugate to the phase kicks
        probs += weight * np.einsum("xm,xm->x", grid, grid.conj()).real
    total = float(probs.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise ArithmeticError(f"circuit probabilities sum to {total:.12g}")
    return CoarseGrainedDistribution("filtered", probs, config.e_max)


@dataclass(frozen=True)
class SampleProvenance:
    """Where a batch of work samples came from."""

    m_qubits: int
    e_max: float
    tag: str = ""


@dataclass(frozen=True)
class WorkSampleSet:
    """Seeded work samples with the ancilla outcomes that produced them."""

    samples: np.ndarray
    xs: np.ndarray
    seed: int
    k: int
    source: Optional[SampleProvenance] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        xs = np.array(self.xs, dtype=np.int64)
        samples.setflags(write=False)
        xs.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "xs", xs)
        if self.k != samples.size or self.k < 1:
            raise ValueError(f"k = {self.k} does not match {samples.size} samples")
        if xs.size != samples.size:
            raise ValueError("each sample needs its ancilla outcome")

    def to_csv(self) -> str:
        src = self.source or SampleProvenance(m_qubits=0, e_max=float("nan"))
        buf = io.StringIO()
        buf.write(f"# seed: {self.seed}\n")
        buf.write(f"# k: {self.k}\n")
        buf.write(f"# m_qubits: {src.m_qubits}\n")
        buf.write(f"# e_max: {src.e_max!r}\n")
        if src.tag:
            buf.write(f"# scenario: {src.tag}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "x", "w"])
        for i, (x, w) in enumerate(zip(self.xs, self.samples)):
            writer.writerow([i, int(x), repr(float(w))])
        return buf.getvalue()


def sample(
    dist: CoarseGrainedDistribution, k: int, seed: int, tag: str = ""
) -> WorkSampleSet:
    """Draw k work values from a coarse distribution by inverse-CDF sampling."""
    if k < 1:
        raise ValueError(f"sample count must be >= 1, got {k}")
    total = float(dist.values.sum())
    cdf = np.cumsum(dist.values) / total
    rng = np.random.default_rng(seed)
    xs = np.searchsorted(cdf, rng.random(k), side="right").clip(0, dist.d - 1)
    ws = dist.work_values()[xs]
    return WorkSampleSet(
        samples=ws,
        xs=xs,
        seed=seed,
        k=k,
        source=SampleProvenance(m_qubits=dist.m_qubits, e_max=dist.e_max, tag=tag),
    )

"""Two-point-measurement work statistics realized as a single generalized measurement.

The exact work distribution assigns mass p_n * p_{m,n} to each energy gap
w = E'_m - E_n of a quench (H, H', U_E).  The same transition data defines a
POVM through Kraus operators A_w, so work can be read out in one shot; the
exponential work average then reproduces the free-energy difference exactly
for thermal initial states.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .spectral import (
    DensityMatrix,
    HermitianOperator,
    SpectralDecomposition,
    UnitaryMatrix,
    eigendecompose,
    log_partition_function,
    spectral_bound_check,
    thermal_state,
)

GAP_MERGE_REL_TOL = 1e-9   # gaps closer than this (times e_max) are one outcome
MASS_FLOOR = 1e-15         # point masses below this are dropped
COMPLETENESS_TOL = 1e-10
ZERO_PROBABILITY_TOL = 1e-14
DISTRIBUTION_SUM_TOL = 1e-10


@dataclass(frozen=True)
class _LevelClusters:
    """Eigenvalues grouped into (near-)degenerate levels.

    ``starts`` indexes the ascending eigenvalue array; level k covers
    eigenstates starts[k]..starts[k+1].  ``energies`` holds one representative
    (mean) energy per level.
    """

    starts: np.ndarray
    energies: np.ndarray

    @property
    def count(self) -> int:
        return self.energies.size

    def members(self, k: int) -> np.ndarray:
        return np.arange(self.starts[k], self.starts[k + 1])


def _cluster_levels(eigenvalues: np.ndarray, tol: float) -> _LevelClusters:
    splits = np.flatnonzero(np.diff(eigenvalues) > tol) + 1
    starts = np.concatenate([[0], splits, [eigenvalues.size]])
    sums = np.add.reduceat(eigenvalues, starts[:-1])
    counts = np.diff(starts)
    return _LevelClusters(starts=starts, energies=sums / counts)


@dataclass(frozen=True)
class _GapTable:
    """Merged energy gaps between final and initial levels.

    Pairs (final level b, initial level a) are sorted by gap and grouped
    whenever consecutive gaps differ by at most the merge tolerance.  Each
    group becomes one work outcome with the mean gap as its representative.
    """

    gaps: np.ndarray          # one representative per merged group, ascending
    group_starts: np.ndarray  # boundaries into the sorted pair arrays
    pair_final: np.ndarray    # final-level index per sorted pair
    pair_initial: np.ndarray  # initial-level index per sorted pair

    @property
    def count(self) -> int:
        return self.gaps.size

    def group_pairs(self, g: int) -> tuple[np.ndarray, np.ndarray]:
        sl = slice(self.group_starts[g], self.group_starts[g + 1])
        return self.pair_final[sl], self.pair_initial[sl]


@dataclass(frozen=True)
class QuenchProtocol:
    """A drive from Hamiltonian ``h_initial`` to ``h_final`` through ``drive``.

    Both spectra must fit inside [-e_max/2, +e_max/2]; that bound fixes the
    gap-merge tolerance and, downstream, the ancilla work-to-bin mapping.
    """

    h_initial: HermitianOperator
    h_final: HermitianOperator
    drive: UnitaryMatrix
    e_max: float

    def __post_init__(self):
        dims = {self.h_initial.dim, self.h_final.dim, self.drive.dim}
        if len(dims) != 1:
            raise ValueError(f"protocol matrices disagree on dimension: {sorted(dims)}")
        if not (np.isfinite(self.e_max) and self.e_max > 0):
            raise ValueError(f"e_max must be positive and finite, got {self.e_max}")
        for name, op in (("h_initial", self.h_initial), ("h_final", self.h_final)):
            if not spectral_bound_check(op, self.e_max):
                raise ValueError(
                    f"{name} spectrum exceeds +-e_max/2 = {self.e_max / 2:.6g}"
                )

    @property
    def dim(self) -> int:
        return self.h_initial.dim

    @property
    def merge_tol(self) -> float:
        return GAP_MERGE_REL_TOL * self.e_max

    @cached_property
    def spectrum_initial(self) -> SpectralDecomposition:
        return eigendecompose(self.h_initial)

    @cached_property
    def spectrum_final(self) -> SpectralDecomposition:
        return eigendecompose(self.h_final)

    @cached_property
    def drive_in_eigenbases(self) -> np.ndarray:
        """Drive matrix elements <final eigenstate m| U_E |initial eigenstate n>."""
        v = self.spectrum_initial.eigenvectors
        w = self.spectrum_final.eigenvectors
        return w.conj().T @ self.drive.entries @ v

    @cached_property
    def levels_initial(self) -> _LevelClusters:
        return _cluster_levels(self.spectrum_initial.eigenvalues, self.merge_tol)

    @cached_property
    def levels_final(self) -> _LevelClusters:
        return _cluster_levels(self.spectrum_final.eigenvalues, self.merge_tol)

    @cached_property
    def gap_table(self) -> _GapTable:
        eb = self.levels_final.energies
        ea = self.levels_initial.energies
        raw = (eb[:, None] - ea[None, :]).ravel()
        order = np.argsort(raw, kind="stable")
        srt = raw[order]
        splits = np.flatnonzero(np.diff(srt) > self.merge_tol) + 1
        starts = np.concatenate([[0], splits, [srt.size]])
        sums = np.add.reduceat(srt, starts[:-1])
        reps = sums / np.diff(starts)
        n_initial = ea.size
        return _GapTable(
            gaps=reps,
            group_starts=starts,
            pair_final=order // n_initial,
            pair_initial=order % n_initial,
        )


@dataclass(frozen=True)
class WorkDistribution:
    """Discrete work distribution: strictly ascending values with positive mass."""

    ws: np.ndarray
    ps: np.ndarray

    def __post_init__(self):
        ws = np.array(self.ws, dtype=float)
        ps = np.array(self.ps, dtype=float)
        ws.setflags(write=False)
        ps.setflags(write=False)
        object.__setattr__(self, "ws", ws)
        object.__setattr__(self, "ps", ps)
        if ws.ndim != 1 or ws.shape != ps.shape or ws.size == 0:
            raise ValueError("work distribution needs matching non-empty w and p arrays")
        if np.any(np.diff(ws) <= 0):
            raise ValueError("work values must be strictly ascending")
        if np.any(ps <= 0):
            raise ValueError("all probabilities must be positive")
        total = float(ps.sum())
        if abs(total - 1.0) > DISTRIBUTION_SUM_TOL:
            raise ValueError(f"probabilities sum to {total:.12g}, not 1")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.ws.tolist(), self.ps.tolist()))

    def support_size(self) -> int:
        return self.ws.size

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["w", "p"])
        for w, p in zip(self.ws, self.ps):
            writer.writerow([repr(float(w)), repr(float(p))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WorkDistribution":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["w", "p"]:
            raise ValueError("work distribution CSV must start with header 'w,p'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
        return cls(data[:, 0], data[:, 1])

    def to_json(self) -> str:
        return json.dumps({"w": self.ws.tolist(), "p": self.ps.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "WorkDistribution":
        data = json.loads(text)
        return cls(np.asarray(data["w"]), np.asarray(data["p"]))


@dataclass(frozen=True)
class KrausSet:
    """Work outcomes w with their Kraus operators A_w; sum_w A_w^dag A_w = I."""

    ws: np.ndarray
    operators: np.ndarray  # shape (n_outcomes, dim, dim)

    def __post_init__(self):
        ws = np.array(self.ws, dtype=float)
        ops = np.array(self.operators, dtype=complex)
        ws.setflags(write=False)
        ops.setflags(write=False)
        object.__setattr__(self, "ws", ws)
        object.__setattr__(self, "operators", ops)
        if ops.ndim != 3 or ops.shape[0] != ws.size or ops.shape[1] != ops.shape[2]:
            raise ValueError("Kraus set needs one square matrix per work value")
        dim = ops.shape[1]
        total = np.zeros((dim, dim), dtype=complex)
        for a in ops:
            total += a.conj().T @ a
        dev = float(np.abs(total - np.eye(dim)).max())
        if dev > COMPLETENESS_TOL:
            raise ValueError(f"POVM completeness violated: max |sum A^dag A - I| = {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.operators.shape[1]

    def povm_element(self, k: int) -> np.ndarray:
        a = self.operators[k]
        return a.conj().T @ a


def _level_populations(protocol: QuenchProtocol, rho: DensityMatrix) -> np.ndarray:
    """Per-final-eigenstate transition mass, resolved by initial level.

    Returns an array of shape (dim, n_initial_levels): entry (m, a) is
    <m| U_E P_a rho P_a U_E^dag |m> in the final eigenbasis, with P_a the
    projector onto initial level a.  Working with level projectors keeps
    every downstream quantity independent of the eigenvector gauge inside
    degenerate levels.
    """
    v = protocol.spectrum_initial.eigenvectors
    rho_v = v.conj().T @ rho.entries @ v
    x = protocol.drive_in_eigenbases
    levels = protocol.levels_initial
    out = np.empty((protocol.dim, levels.count))
    for a in range(levels.count):
        idx = levels.members(a)
        block = rho_v[np.ix_(idx, idx)]
        xa = x[:, idx]
        out[:, a] = np.einsum("mi,ij,mj->m", xa, block, xa.conj()).real
    return out


def exact_work_distribution(protocol: QuenchProtocol, rho: DensityMatrix) -> WorkDistribution:
    """Exact work distribution of the two-point-measurement scheme.

    Masses are accumulated per merged gap; the first projective energy
    measurement dephases the input across distinct initial levels, which is
    realized here by sandwiching rho between initial-level projectors.
    """
    if rho.dim != protocol.dim:
        raise ValueError(f"state dim {rho.dim} does not match protocol dim {protocol.dim}")
    per_state = _level_populations(protocol, rho)
    # collapse final eigenstates into final levels
    fstarts = protocol.levels_final.starts
    level_masses = np.add.reduceat(per_state, fstarts[:-1], axis=0)
    table = protocol.gap_table
    flat = level_masses.ravel()  # index = b * n_initial_levels + a
    n_a = protocol.levels_initial.count
    pair_mass = flat[table.pair_final * n_a + table.pair_initial]
    group_mass = np.add.reduceat(pair_mass, table.group_starts[:-1])
    keep = group_mass >= MASS_FLOOR
    return WorkDistribution(table.gaps[keep], group_mass[keep])


def _kraus_matrix(protocol: QuenchProtocol, group: int) -> np.ndarray:
    """Kraus operator for one merged gap: sum of drive elements over its pairs."""
    x = protocol.drive_in_eigenbases
    sel = np.zeros_like(x)
    bs, as_ = protocol.gap_table.group_pairs(group)
    for b, a in zip(bs, as_):
        rows = protocol.levels_final.members(b)
        cols = protocol.levels_initial.members(a)
        sel[np.ix_(rows, cols)] = x[np.ix_(rows, cols)]
    w = protocol.spectrum_final.eigenvectors
    v = protocol.spectrum_initial.eigenvectors
    return w @ sel @ v.conj().T


def kraus_operators(protocol: QuenchProtocol) -> KrausSet:
    """All Kraus operators of the work POVM, ascending in w.

    Outcomes whose amplitude matrix is identically zero are omitted; they
    contribute nothing to completeness.
    """
    table = protocol.gap_table
    ws, ops = [], []
    for g in range(table.count):
        a = _kraus_matrix(protocol, g)
        if not np.any(a):
            continue
        ws.append(table.gaps[g])
        ops.append(a)
    return KrausSet(np.asarray(ws), np.asarray(ops))


def post_measurement_state(
    protocol: QuenchProtocol, rho: DensityMatrix, w: float
) -> tuple[DensityMatrix, float]:
    """State after detecting work w, with its probability.

    Returns (A_w rho A_w^dag / P(w), P(w)).  The outcome state lives on the
    final levels reachable by gap w and generally carries coherences there.
    """
    if rho.dim != protocol.dim:
        raise ValueError(f"state dim {rho.dim} does not match protocol dim {protocol.dim}")
    table = protocol.gap_table
    hits = np.flatnonzero(np.abs(table.gaps - w) <= protocol.merge_tol)
    if hits.size == 0:
        raise ValueError(f"w = {w:.12g} is not a realizable gap of this protocol")
    a = _kraus_matrix(protocol, int(hits[0]))
    unnorm = a @ rho.entries @ a.conj().T
    prob = float(np.trace(unnorm).real)
    if prob <= ZERO_PROBABILITY_TOL:
        raise ValueError(f"zero-probability outcome: P({w:.12g}) = {prob:.3e}")
    return DensityMatrix(unnorm / prob), prob


def exponential_work_average(dist: WorkDistribution, beta: float) -> float:
    """sum_k p_k exp(-beta w_k), evaluated in max-shifted log-sum-exp form."""
    a = -beta * dist.ws + np.log(dist.ps)
    shift = float(a.max())
    return float(np.exp(shift) * np.exp(a - shift).sum())


def jarzynski_exact(protocol: QuenchProtocol, beta: float) -> tuple[float, float, float]:
    """Exact exponential work average against the partition-function ratio.

    Returns (lhs, rhs, delta_f) where lhs = <exp(-beta w)> over the exact
    distribution with a thermal initial state, rhs = Z_final / Z_initial and
    delta_f = -ln(rhs) / beta.  The two sides must agree to relative 1e-10;
    disagreement signals a numerical failure.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    rho, _ = thermal_state(protocol.h_initial, beta)
    dist = exact_work_distribution(protocol, rho)
    lhs = exponential_work_average(dist, beta)
    ln_z0 = log_partition_function(protocol.h_initial, beta)
    ln_z1 = log_partition_function(protocol.h_final, beta)
    rhs = float(np.exp(ln_z1 - ln_z0))
    delta_f = -(ln_z1 - ln_z0) / beta
    if abs(lhs - rhs) > 1e-10 * abs(rhs):
        raise ArithmeticError(
            f"exponential work average {lhs:.15g} deviates from partition ratio {rhs:.15g}"
        )
    return lhs, rhs, delta_f

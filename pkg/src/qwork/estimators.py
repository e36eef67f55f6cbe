"""Free-energy estimation from sampled work values via the Jarzynski equality."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .phase_estimation import (
    SamplerConfig,
    WorkSampleSet,
    convolve_distribution,
    work_values,
)

__all__ = [
    "ConvergencePoint",
    "FreeEnergyEstimate",
    "WorkSampleSet",
    "convergence_curve",
    "estimate_free_energy",
    "exact_exponential_average",
    "free_energy_from_distribution",
    "work_moments",
]
from .spectral import log_partition_function, thermal_state
from .work_povm import (
    QuenchProtocol,
    WorkDistribution,
    exact_work_distribution,
    exponential_work_average,
)


@dataclass(frozen=True)
class FreeEnergyEstimate:
    """Estimated free-energy difference with a delta-method standard error."""

    delta_f_hat: float
    beta: float
    k: int
    std_error: Optional[float]

    def __post_init__(self):
        if not np.isfinite(self.delta_f_hat):
            raise ValueError("estimate is not finite")
        if self.std_error is not None and not (
            np.isfinite(self.std_error) and self.std_error >= 0
        ):
            raise ValueError(f"bad standard error {self.std_error}")


def _shifted_exponentials(ws: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    a = -beta * ws
    shift = float(a.max())
    return np.exp(a - shift), shift


def estimate_free_energy(samples, beta: float) -> FreeEnergyEstimate:
    """-(1/beta) ln mean(exp(-beta w)) over a sample set, max-shifted.

    The standard error comes from the delta method,
    sd(exp(-beta w)) / (beta * mean * sqrt(K)), and is omitted for K = 1.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    ws = np.asarray(getattr(samples, "samples", samples), dtype=float)
    k = ws.size
    if k < 1:
        raise ValueError("need at least one work sample")
    ex, shift = _shifted_exponentials(ws, beta)
    mean = float(ex.mean())
    delta_f = -(shift + np.log(mean)) / beta
    std_error = None
    if k >= 2:
        sd = float(ex.std(ddof=1))
        std_error = float(sd / (beta * mean * np.sqrt(k)))
    return FreeEnergyEstimate(delta_f_hat=float(delta_f), beta=beta, k=k, std_error=std_error)


def exact_exponential_average(dist: WorkDistribution, beta: float) -> float:
    """Exponential work average over an exact distribution (log-sum-exp form)."""
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return exponential_work_average(dist, beta)


def free_energy_from_distribution(dist: WorkDistribution, beta: float) -> float:
    """The K -> infinity estimate: -(1/beta) ln of the exact exponential average."""
    a = -beta * dist.ws + np.log(dist.ps)
    shift = float(a.max())
    return float(-(shift + np.log(np.exp(a - shift).sum())) / beta)


def work_moments(dist: WorkDistribution, orders) -> list[float]:
    """Raw moments sum_k p_k w_k^r for each requested order r >= 1."""
    out = []
    for r in orders:
        if r < 1:
            raise ValueError(f"moment order must be >= 1, got {r}")
        out.append(float(np.sum(dist.ps * dist.ws ** int(r))))
    return out


@dataclass(frozen=True)
class ConvergencePoint:
    """One row of a sampling-convergence table."""

    k: int
    df_exact_p: float
    df_pd: float
    stderr_exact_p: float
    stderr_pd: float
    df_true: float


def _inverse_cdf_sample(ws: np.ndarray, ps: np.ndarray, k: int, rng) -> np.ndarray:
    cdf = np.cumsum(ps) / float(ps.sum())
    idx = np.searchsorted(cdf, rng.random(k), side="right").clip(0, ws.size - 1)
    return ws[idx]


def convergence_curve(
    protocol: QuenchProtocol,
    config: SamplerConfig,
    beta: float,
    k_grid,
    seed: int,
) -> list[ConvergencePoint]:
    """Free-energy estimates versus sample count, from both work sources.

    Draws one nested sample stream from the exact distribution and one from
    the filtered ancilla distribution (prefix reuse across the K grid), and
    reports the partition-function value as the truth column.  Deterministic
    in the seed.
    """
    k_grid = [int(k) for k in k_grid]
    if not k_grid or any(k < 2 for k in k_grid) or any(np.diff(k_grid) <= 0):
        raise ValueError("k_grid must be ascending with every K >= 2")
    rho, _ = thermal_state(protocol.h_initial, beta)
    dist = exact_work_distribution(protocol, rho)
    coarse = convolve_distribution(dist, config)
    ln_z0 = log_partition_function(protocol.h_initial, beta)
    ln_z1 = log_partition_function(protocol.h_final, beta)
    df_true = -(ln_z1 - ln_z0) / beta

    stream_exact, stream_pd = np.random.SeedSequence(seed).spawn(2)
    k_max = k_grid[-1]
    w_exact = _inverse_cdf_sample(
        dist.ws, dist.ps, k_max, np.random.default_rng(stream_exact)
    )
    w_pd = _inverse_cdf_sample(
        work_values(config), coarse.values, k_max, np.random.default_rng(stream_pd)
    )

    rows = []
    for k in k_grid:
        est_e = estimate_free_energy(w_exact[:k], beta)
        est_d = estimate_free_energy(w_pd[:k], beta)
        rows.append(
            ConvergencePoint(
                k=k,
                df_exact_p=est_e.delta_f_hat,
                df_pd=est_d.delta_f_hat,
                stderr_exact_p=est_e.std_error,
                stderr_pd=est_d.std_error,
                df_true=float(df_true),
            )
        )
    return rows

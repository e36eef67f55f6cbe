"""Matplotlib renderings of the CSV artifacts the CLI emits.

Every function takes plain arrays/frames and a target path, draws one figure
with a fixed size and dpi, and closes it; nothing here touches global state
beyond forcing the Agg backend.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 150
_PNG_METADATA = {"Software": "qwork"}  # fixed metadata keeps reruns byte-identical


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=DPI, metadata=_PNG_METADATA)
    plt.close(fig)
    return path


def plot_work_distribution(ws, ps, path, title="Exact work distribution") -> Path:
    """Stem plot of point masses; dense supports fall back to a line plot."""
    ws = np.asarray(ws, dtype=float)
    ps = np.asarray(ps, dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4.2))
    if ws.size <= 2048:
        markers, stems, _ = ax.stem(ws, ps, basefmt=" ")
        plt.setp(markers, markersize=3)
        plt.setp(stems, linewidth=1)
    else:
        ax.plot(ws, ps, linewidth=0.7)
    ax.set_xlabel("w")
    ax.set_ylabel("P(w)")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)


def plot_compare(frame, path, title="Coarse-grained vs filtered work distribution") -> Path:
    """Overlay of the rectangular and filtered tables against w, sorted by w."""
    order = np.argsort(frame["w"].to_numpy())
    w = frame["w"].to_numpy()[order]
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(w, frame["P_cg"].to_numpy()[order], drawstyle="steps-mid", label="P_cg")
    ax.plot(
        w,
        frame["P_D_convolution"].to_numpy()[order],
        linestyle="--",
        marker=".",
        markersize=3,
        label="P_D (convolution)",
    )
    if "P_D_circuit" in frame.columns:
        ax.plot(
            w,
            frame["P_D_circuit"].to_numpy()[order],
            linestyle=":",
            label="P_D (circuit)",
        )
    ax.set_xlabel("w")
    ax.set_ylabel("probability")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_supnorm_sweep(frame, path, title="Coarse-graining gap vs ancilla size") -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(frame["m_qubits"], frame["supnorm"], marker="o")
    if (frame["supnorm"] > 0).all():
        ax.set_yscale("log")
    ax.set_xlabel("ancilla qubits M")
    ax.set_ylabel(r"$\max_x |P_{cg}(x) - P_D(x)|$")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_convergence(frame, path, title="Free-energy estimate vs sample count") -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.2))
    k = frame["K"].to_numpy()
    ax.errorbar(
        k,
        frame["dF_exactP"],
        yerr=frame["stderr_exactP"],
        marker="o",
        capsize=3,
        label="samples from P(w)",
    )
    ax.errorbar(
        k,
        frame["dF_PD"],
        yerr=frame["stderr_PD"],
        marker="s",
        capsize=3,
        label="samples from P_D(x)",
    )
    ax.axhline(frame["dF_true"].iloc[0], color="k", linewidth=1, label="partition-function value")
    ax.set_xscale("log")
    ax.set_xlabel("K")
    ax.set_ylabel(r"$\Delta F$ estimate")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_samples(ws, xs, reference, path, title="Sampled work values") -> Path:
    """Histogram of drawn work values with the sampled table overlaid."""
    ws = np.asarray(ws, dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ref_w = reference.work_values()
    order = np.argsort(ref_w)
    width = 4.0 * reference.e_max / reference.d
    counts = np.bincount(np.asarray(xs, dtype=int), minlength=reference.d) / ws.size
    ax.bar(ref_w[order], counts[order], width=0.9 * width, label="empirical frequency")
    ax.plot(ref_w[order], reference.values[order], "k.", markersize=4, label="P_D")
    ax.set_xlabel("w")
    ax.set_ylabel("probability")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)

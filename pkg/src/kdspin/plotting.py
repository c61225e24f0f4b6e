"""Figures for CLI reports. Uses the non-interactive Agg backend."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .constants import natural_to_fs  # noqa: E402

plt.rcParams.update({
    "figure.figsize": (6.0, 3.8),
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 10,
    "savefig.dpi": 150,
})


def _save(fig, path):
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def plot_channels(report, path, fit=None):
    """Diffracted and initial channel probabilities against time in fs."""
    t_fs = natural_to_fs(report.times)
    fig, ax = plt.subplots()
    if report.initial_spin == "se":
        labels = (r"$|\langle s_\nwarrow|c_2\rangle|^2$", r"$|\langle s_\searrow|c_0\rangle|^2$")
    else:
        labels = (r"$|\langle s_\searrow|c_2\rangle|^2$", r"$|\langle s_\nwarrow|c_0\rangle|^2$")
    ax.plot(t_fs, report.diffracted, lw=1.2, label=labels[0])
    ax.plot(t_fs, report.initial, lw=1.2, ls="--", label=labels[1])
    if fit is not None:
        ax.plot(t_fs, fit.model(report.times), lw=0.8, color="k", alpha=0.6,
                label=r"$\sin^2(\Omega_R t/2)$ fit")
    ax.set_xlabel("t [fs]")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_norm(report, path):
    fig, ax = plt.subplots()
    t_fs = natural_to_fs(report.times)
    ax.semilogy(t_fs, np.maximum(report.norm_residual, 1e-17), lw=1.0)
    ax.set_xlabel("t [fs]")
    ax.set_ylabel("|norm - norm(0)|")
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(axis, rows, path):
    """Fitted and perturbative Rabi frequencies (log-log for amplitude sweeps) and purity."""
    ok = [r for r in rows if r.get("status") == "ok"]
    measured = sorted((r for r in rows if r.get("status") != "failed"), key=lambda r: r["value"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    if ok:
        ax1.plot([r["value"] for r in ok], [r["omega_fit"] for r in ok], "o", label="fit")
    if measured:
        ax1.plot([r["value"] for r in measured], [r["omega_perturbative"] for r in measured], "x",
                 label="second order")
        ax2.plot([r["value"] for r in measured], [r["purity"] for r in measured], "o-")
    if axis == "xi":
        ax1.set_xscale("log")
        ax1.set_yscale("log")
    ax1.set_xlabel(axis)
    ax1.set_ylabel(r"$\Omega_R$ [m]")
    ax1.legend(frameon=False, fontsize=8)
    ax2.set_xlabel(axis)
    ax2.set_ylabel("spin purity at maximum")
    fig.tight_layout()
    _save(fig, path)

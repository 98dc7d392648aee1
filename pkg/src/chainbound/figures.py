"""Matplotlib renderings of experiment tables, written next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def net_figure(net, path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    sizes = [len(l) for l in net.levels]
    axes[0].semilogy(range(len(sizes)), sizes, "o-", label="card(V_n)")
    axes[0].semilogy(range(len(sizes)), [len(e) + 1 for e in net.edges],
                     "s--", label="card(E_n)+1")
    axes[0].set_xlabel("level n")
    axes[0].legend()
    coords = net.space.coords
    if coords is not None and coords.shape[1] == 2:
        axes[1].scatter(coords[:, 0], coords[:, 1], s=4, c="lightgray")
        mid = min(net.n_levels, 4)
        ids = net.levels[mid]
        axes[1].scatter(coords[ids, 0], coords[ids, 1], s=12, c="tab:red",
                        label=f"V_{mid}")
        axes[1].legend()
    else:
        axes[1].plot(net.theta, ".-")
        axes[1].set_xlabel("theta index")
    return _finish(fig, path)


def bound_figure(xs, lhs, stderr, rhs, xlabel, path, logx=True) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.errorbar(xs, lhs, yerr=3 * np.asarray(stderr), fmt="o-",
                label="MC estimate (3 se)")
    ax.plot(xs, rhs, "k--", label="bound")
    if logx:
        ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.legend()
    return _finish(fig, path)


def sandwich_figure(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    exact = np.array([r["exact"] for r in rows])
    embedded = np.array([r["embedded"] for r in rows])
    ax.loglog(exact, embedded, ".", ms=4)
    span = np.array([exact.min(), exact.max()])
    c_lo = max(r["c_lower"] for r in rows)
    c_hi = max(r["c_upper"] for r in rows)
    ax.loglog(span, span / c_lo, "k--", lw=0.8, label="1/C_lower")
    ax.loglog(span, span * c_hi, "k:", lw=0.8, label="C_upper")
    ax.set_xlabel("exact seminorm")
    ax.set_ylabel("embedded seminorm")
    ax.legend()
    return _finish(fig, path)


def blowup_figure(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    idx = np.arange(len(rows))
    for key, style in (("lhs", "v-"), ("middle", "o-"), ("rhs", "^-")):
        ax.plot(idx, [r[key] for r in rows], style, label=key, ms=4)
    ax.set_xlabel("test field")
    ax.set_yscale("log")
    ax.legend()
    return _finish(fig, path)


def good_lambda_figure(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    lams = [r["lambda"] for r in rows]
    ax.plot(lams, [r["p_joint"] for r in rows], "o-", label="joint tail")
    ax.plot(lams, [r["bound"] for r in rows], "k--", label="bound")
    ax.set_xlabel("lambda")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.legend()
    return _finish(fig, path)


def levy_figure(h_rows, p_rows, path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].errorbar([r["h"] for r in h_rows], [r["statistic"] for r in h_rows],
                     yerr=[3 * r["stderr"] for r in h_rows], fmt="o-")
    axes[0].axhline(1.0, color="k", ls="--", lw=0.8)
    axes[0].set_xscale("log")
    axes[0].set_xlabel("window h")
    axes[0].set_ylabel("normalized small-window sup")
    ps = [r["p"] for r in p_rows]
    axes[1].plot(ps, [r["weighted_sup"] for r in p_rows], "o-",
                 label="L^p estimate")
    axes[1].plot(ps, [r["c_fixed"] for r in p_rows], "s--",
                 label="estimate / sqrt(p)")
    axes[1].plot(ps, [r["c_adapted"] for r in p_rows], "^:",
                 label="p-adapted weight")
    axes[1].set_xlabel("p")
    axes[1].legend()
    return _finish(fig, path)


def pam_figure(ensemble, path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    im = axes[0].imshow(
        ensemble.fields[0].T, aspect="auto", origin="lower",
        extent=[ensemble.times[0], ensemble.times[-1], 0.0, 1.0],
        cmap="RdBu_r",
    )
    fig.colorbar(im, ax=axes[0])
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("x")
    axes[0].set_title("replicate 0")
    mean = ensemble.mean_field()
    for frac in (0.25, 0.5, 1.0):
        i = int(frac * (len(ensemble.times) - 1))
        axes[1].plot(ensemble.xs, mean[i], label=f"t={ensemble.times[i]:.3g}")
    axes[1].set_xlabel("x")
    axes[1].set_ylabel("mean field")
    axes[1].legend()
    return _finish(fig, path)


def green_figure(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.bar([str(r["panels_per_decade"]) for r in rows],
           [r["c_fit"] for r in rows])
    ax.set_xlabel("panels per decade")
    ax.set_ylabel("fitted regularity constant")
    return _finish(fig, path)

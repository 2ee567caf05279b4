"""Figure rendering for experiment outputs.

Reads the CSV tables an experiment wrote and renders PNG figures next to
them. Everything here consumes the delimited files only, so figures can be
regenerated at any time without rerunning the simulations.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def _columns(path: Path) -> dict[str, list[str]]:
    header, rows = _read_csv(path)
    cols = {h: [] for h in header}
    for row in rows:
        for h, v in zip(header, row):
            cols[h].append(v)
    return cols


def _group_by(cols: dict, key: str) -> dict[str, dict[str, list[str]]]:
    groups: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for i, gval in enumerate(cols[key]):
        for h, values in cols.items():
            groups[gval][h].append(values[i])
    return groups


def _floats(values) -> np.ndarray:
    return np.array([float(v) for v in values])


def _save(fig, out_dir: Path, name: str) -> Path:
    path = out_dir / f"{name}.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_fig2(out_dir: Path) -> list[Path]:
    cols = _columns(out_dir / "output_snr.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    for receiver, g in _group_by(cols, "receiver").items():
        sinr = [float(v) if v != "inf" else 35.0 for v in g["ref_sinr_db"]]
        ax.plot(sinr, _floats(g["output_snr_db"]), marker="o", label=receiver)
    ax.set_xlabel("reference SINR (dB)")
    ax.set_ylabel("output target SNR (dB)")
    ax.grid(True, alpha=0.4)
    ax.legend()
    return [_save(fig, out_dir, "fig2_output_snr")]


def render_fig4(out_dir: Path) -> list[Path]:
    cols = _columns(out_dir / "acf_curves.csv")
    paths = []
    groups = _group_by(cols, "waveform_id")
    fig, axes = plt.subplots(len(groups), 1, figsize=(7, 2.6 * len(groups)), sharex=True)
    axes = np.atleast_1d(axes)
    for ax, (name, g) in zip(axes, groups.items()):
        k = _floats(g["k"])
        ax.plot(k, 10 * np.log10(_floats(g["mc_sq"])), label="Monte Carlo", lw=1.0)
        ax.plot(k, 10 * np.log10(_floats(g["theory_sq"])), "--", label="expectation", lw=1.2)
        ax.set_ylabel(f"{name}\n(dB)")
        ax.grid(True, alpha=0.4)
    axes[0].legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("ACF lag (bins)")
    paths.append(_save(fig, out_dir, "fig4_secure_acf"))
    return paths


def render_fig5(out_dir: Path) -> list[Path]:
    cols = _columns(out_dir / "profiles.csv")
    fig, ax = plt.subplots(figsize=(7, 4))
    for name, g in _group_by(cols, "waveform_id").items():
        ax.plot(_floats(g["bin"]), _floats(g["rf_mag_db"]), lw=1.0, label=f"RF {name}")
    ax.set_xlabel("range bin")
    ax.set_ylabel("profile power (dB)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "fig5_rf_profiles")]


def render_fig6(out_dir: Path) -> list[Path]:
    cols = _columns(out_dir / "tradeoff.csv")
    paths = []
    for metric, label in (("psl_db", "PSL (dB)"), ("isl_db", "ISL (dB)")):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
        for kappa, g in _group_by(cols, "kappa").items():
            x = _floats(g[metric])
            order = np.argsort(x)
            finite = np.isfinite(x[order])
            ax1.plot(x[order][finite], _floats(g["snr_loss_db"])[order][finite], marker=".", label=f"spacing {kappa}")
            ax2.plot(x[order][finite], _floats(g["rate_bps"])[order][finite] / 1e6, marker=".")
        ax1.set_xlabel(label)
        ax1.set_ylabel("SNR loss (dB)")
        ax2.set_xlabel(label)
        ax2.set_ylabel("rate (Mbit/s)")
        for ax in (ax1, ax2):
            ax.grid(True, alpha=0.4)
        ax1.legend(fontsize=7)
        paths.append(_save(fig, out_dir, f"fig6_tradeoff_{metric.split('_')[0]}"))
    return paths


def render_fig7(out_dir: Path) -> list[Path]:
    cols = _columns(out_dir / "frontier.csv")
    fig, ax = plt.subplots(figsize=(6, 4))
    for eps, g in _group_by(cols, "eps_psl_db").items():
        loss = _floats(g["snr_loss_db"])
        rate = _floats(g["rate_bps"]) / 1e6
        order = np.argsort(_floats(g["rho"]))
        ax.plot(loss[order], rate[order], marker="o", label=f"PSL level {eps} dB")
    ax.set_xlabel("SNR loss (dB)")
    ax.set_ylabel("rate (Mbit/s)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "fig7_frontier")]


def render_fig8(out_dir: Path) -> list[Path]:
    names = ["rd_alice_plain", "rd_alice_secure", "rd_eve_plain", "rd_eve_secure"]
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    for ax, name in zip(axes.ravel(), names):
        cols = _columns(out_dir / f"{name}.csv")
        bins = _floats(cols["bin"]).astype(int)
        dops = _floats(cols["doppler_hz"])
        mags = _floats(cols["mag_db"])
        nb, nd = bins.max() + 1, len(np.unique(dops))
        img = mags.reshape(nb, nd)
        vmax = img.max()
        im = ax.imshow(
            img,
            aspect="auto",
            origin="lower",
            extent=[dops.min(), dops.max(), 0, nb],
            vmin=vmax - 50,
            vmax=vmax,
            cmap="viridis",
        )
        ax.set_title(name.replace("rd_", "").replace("_", " "), fontsize=9)
        ax.set_xlabel("Doppler (Hz)")
        ax.set_ylabel("range bin")
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    return [_save(fig, out_dir, "fig8_rd_maps")]


def _render_pd(out_dir: Path, stem: str) -> list[Path]:
    cols = _columns(out_dir / "pd.csv")
    fig, ax = plt.subplots(figsize=(6.5, 4))
    combos = defaultdict(lambda: defaultdict(list))
    for i in range(len(cols["snr_db"])):
        key = f'{cols["receiver"][i]} / {cols["waveform_id"][i]}'
        combos[key]["snr"].append(float(cols["snr_db"][i]))
        combos[key]["pd"].append(float(cols["pd"][i]))
    for key, g in combos.items():
        order = np.argsort(g["snr"])
        ax.plot(np.array(g["snr"])[order], np.array(g["pd"])[order], marker="o", ms=3, label=key)
    ax.axhline(0.9, color="gray", lw=0.8, ls=":")
    ax.set_xlabel("target input SNR (dB)")
    ax.set_ylabel("detection probability")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=7)
    return [_save(fig, out_dir, stem)]


def render_fig9(out_dir: Path) -> list[Path]:
    return _render_pd(out_dir, "fig9_detection")


def render_fig1R(out_dir: Path) -> list[Path]:
    return _render_pd(out_dir, "fig1R_eve_filters")


def render_fig10(out_dir: Path) -> list[Path]:
    cols = _columns(out_dir / "rmse.csv")
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for wname, g in _group_by(cols, "waveform_id").items():
        snr = _floats(g["post_snr_db"])
        order = np.argsort(snr)
        ax.semilogy(snr[order], _floats(g["rmse_alice_m"])[order], marker="o", label=f"Alice / {wname}")
        ax.semilogy(snr[order], _floats(g["rmse_eve_m"])[order], marker="s", label=f"Eve / {wname}")
    ax.set_xlabel("post-processing target SNR (dB)")
    ax.set_ylabel("range RMSE (m)")
    ax.grid(True, alpha=0.4, which="both")
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "fig10_rmse")]


def render_fig11(out_dir: Path) -> list[Path]:
    cols = _columns(out_dir / "gap_vs_rate.csv")
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for kappa, g in _group_by(cols, "kappa").items():
        rate = _floats(g["rate_bps"]) / 1e6
        order = np.argsort(rate)
        ax.plot(rate[order], _floats(g["gap_m"])[order], marker="o", label=f"spacing {kappa}")
    ax.set_xlabel("rate (Mbit/s)")
    ax.set_ylabel("RMSE gap, Eve minus Alice (m)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    return [_save(fig, out_dir, "fig11_gap_vs_rate")]


_RENDERERS = {
    "fig2": render_fig2,
    "fig4": render_fig4,
    "fig5": render_fig5,
    "fig6": render_fig6,
    "fig7": render_fig7,
    "fig8": render_fig8,
    "fig9": render_fig9,
    "fig10": render_fig10,
    "fig11": render_fig11,
    "fig1R": render_fig1R,
}


def render_experiment(experiment: str, out_dir: Path) -> list[Path]:
    """Render the figures for one experiment's output directory."""
    renderer = _RENDERERS.get(experiment)
    if renderer is None:
        return []
    return renderer(Path(out_dir))


def render_allocation(power: np.ndarray, expected_sq: np.ndarray, out_path: Path) -> Path:
    """Allocation bar plot with its expected squared ACF underneath."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5.5))
    ax1.bar(np.arange(len(power)), power, width=1.0)
    ax1.set_xlabel("subcarrier")
    ax1.set_ylabel("power")
    ax1.grid(True, alpha=0.4)
    ax2.plot(10 * np.log10(np.maximum(expected_sq, 1e-12)))
    ax2.set_xlabel("ACF lag (bins)")
    ax2.set_ylabel("expected squared ACF (dB)")
    ax2.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def render_profiles_csv(csv_path: Path, out_path: Path, title: str = "") -> Path:
    """Render a long-form profile/RD CSV as magnitude-vs-bin curves."""
    cols = _columns(Path(csv_path))
    fig, ax = plt.subplots(figsize=(7, 4))
    dops = _floats(cols["doppler_hz"])
    bins = _floats(cols["bin"])
    mags = _floats(cols["mag_db"])
    zero = np.abs(dops) == np.min(np.abs(dops))
    ax.plot(bins[zero], mags[zero], lw=1.0)
    ax.set_xlabel("range bin")
    ax.set_ylabel("power (dB)")
    if title:
        ax.set_title(title, fontsize=9)
    ax.grid(True, alpha=0.4)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path

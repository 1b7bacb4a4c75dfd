"""Run-report persistence: JSON, delimited traces, and rendered figures.

Stable CSV schemas (column order is part of the interface):

    trace.csv    step, a, b, energy, sx_total, sz_total
    heatmap.csv  step, site, sz_value
    hz.csv       site, hz
    rho.csv      distance, count, rho

Figures are rendered next to the delimited output with matplotlib (Agg
backend, no display needed): an observable trace plot, a per-site spin-z
heatmap, and field/coupling profiles for the analyze path.
"""

from __future__ import annotations

import csv
import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .driver import RunReport
from .ising import GlassProfile, IsingModel

__all__ = [
    "write_report_json",
    "write_trace_csv",
    "write_heatmap_csv",
    "write_hz_csv",
    "write_rho_csv",
    "render_trace_figure",
    "render_heatmap_figure",
    "render_hz_figure",
    "render_rho_figure",
]


def write_report_json(report: RunReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=1)


def write_trace_csv(report: RunReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "a", "b", "energy", "sx_total", "sz_total"])
        for s in report.steps:
            writer.writerow([s.step, s.a, s.b, s.energy, s.sx_total, s.sz_total])


def write_heatmap_csv(report: RunReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "site", "sz_value"])
        for s in report.steps:
            for site, value in enumerate(s.site_sz, start=1):
                writer.writerow([s.step, site, value])


def write_hz_csv(model: IsingModel, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site", "hz"])
        for site, h in enumerate(model.hz, start=1):
            writer.writerow([site, h])


def write_rho_csv(profile: GlassProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["distance", "count", "rho"])
        for d, (count, rho) in enumerate(zip(profile.counts, profile.rho), start=1):
            writer.writerow([d, count, rho])


def render_trace_figure(report: RunReport, path) -> None:
    steps = [s.step for s in report.steps]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(steps, [s.energy for s in report.steps], "k.-", label="energy")
    ax.plot(steps, [s.sx_total for s in report.steps], "bo--", mfc="none", label="total $S_x$")
    ax.plot(steps, [s.sz_total for s in report.steps], "rx--", label="total $S_z$ (offset)")
    ax.set_xlabel("driving step")
    ax.axhline(0.0, color="0.8", lw=0.8, zorder=0)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_heatmap_figure(report: RunReport, path) -> None:
    grid = [list(s.site_sz) for s in report.steps]
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    im = ax.imshow(
        grid,
        aspect="auto",
        cmap="RdBu_r",
        vmin=-0.5,
        vmax=0.5,
        extent=(0.5, len(grid[0]) + 0.5, len(grid) + 0.5, 0.5),
    )
    ax.set_xlabel("site")
    ax.set_ylabel("driving step")
    fig.colorbar(im, ax=ax, label=r"$\langle S^z_m \rangle$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_hz_figure(model: IsingModel, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.plot(range(1, model.n + 1), model.hz, ".")
    ax.set_xlabel("site")
    ax.set_ylabel("$h^z_m$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_rho_figure(profile: GlassProfile, path) -> None:
    distances = range(1, len(profile.rho) + 1)
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    positive = [(d, r) for d, r in zip(distances, profile.rho) if r > 0]
    if positive:
        ax.semilogy([d for d, _ in positive], [r for _, r in positive], ".")
    ax.set_xlabel("distance")
    ax.set_ylabel(r"coupling fraction $\rho(d)$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

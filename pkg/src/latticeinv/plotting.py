"""Figures rendered from finished reports (PNG, Agg backend)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from latticeinv.report import ExperimentReport  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.4,
    "grid.linestyle": "--",
    "legend.frameon": False,
    "font.size": 10,
    "lines.linewidth": 1.5,
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def _group(table, key, x, y):
    out = defaultdict(lambda: ([], []))
    k, i, j = (table.columns.index(c) for c in (key, x, y))
    for row in table.rows:
        out[row[k]][0].append(row[i])
        out[row[k]][1].append(row[j])
    return dict(sorted(out.items()))


def plot_electronium(report: ExperimentReport, outdir: Path) -> list[Path]:
    paths = []
    fig, ax = plt.subplots()
    for t in report.tables:
        if t.name.startswith("series_"):
            ax.plot(t.column("t"), t.column("E_xr"), label=f"v/g = {t.name.split('=', 1)[-1]}")
    ax.set_xlabel("t  [1/g]")
    ax.set_ylabel(r"$E[x_r]$  [sites]")
    ax.legend()
    paths.append(_save(fig, outdir / "relative_distance.png"))

    summary = report.table("summary")
    fig, ax = plt.subplots()
    ax.plot(summary.column("v_over_g"), summary.column("x_r_sat"), "o-")
    ax.set_xlabel("v/g")
    ax.set_ylabel(r"$x_{r,sat}$  [sites]")
    paths.append(_save(fig, outdir / "saturation.png"))
    return paths


def plot_sweep(report: ExperimentReport, outdir: Path) -> list[Path]:
    fig, ax = plt.subplots()
    for x_r0, (xs, ys) in _group(report.table("sweep"), "x_r0", "v_over_g", "x_r_sat").items():
        ax.plot(xs, ys, "o-", label=f"$x_{{r,0}}$ = {x_r0}")
    ax.set_xlabel("v/g")
    ax.set_ylabel(r"$x_{r,sat}$  [sites]")
    ax.legend()
    return [_save(fig, outdir / "saturation_sweep.png")]


def plot_scatter(report: ExperimentReport, outdir: Path) -> list[Path]:
    paths = []
    if "density" in {t.name for t in report.tables}:
        dens = report.table("density")
        fig, ax = plt.subplots()
        x = np.asarray(dens.column("x"))
        ax.plot(x, dens.column("probability"), label=r"$|\psi(x, t^*)|^2$")
        ax.plot(x, dens.column("probability_mirror"), "--", label=r"$V \to -V$, $\psi_0 \to A\psi_0$")
        ax.set_xlabel("x")
        ax.set_ylabel("probability")
        twin = ax.twinx()
        twin.plot(x, dens.column("potential"), color="grey", alpha=0.6)
        twin.set_ylabel("V(x)")
        twin.grid(False)
        ax.legend(loc="upper right")
        paths.append(_save(fig, outdir / "scattering_density.png"))
    grid = report.table("scattering")
    fig, ax = plt.subplots()
    res = np.maximum(np.asarray(grid.column("symmetry_residual"), dtype=float), 1e-17)
    ax.semilogy(np.arange(len(res)), res, "o")
    ax.set_xlabel("grid cell")
    ax.set_ylabel("|R(V) - R(-V, A psi0)|")
    paths.append(_save(fig, outdir / "scattering_residuals.png"))
    return paths


def plot_verify(report: ExperimentReport, outdir: Path) -> list[Path]:
    fig, ax = plt.subplots()
    for name, label in (("theorem_suite", "preconditions hold"), ("necessity_suite", "preconditions broken")):
        devs = np.maximum(np.asarray(report.table(name).column("max_deviation"), dtype=float), 1e-18)
        ax.hist(np.log10(devs), bins=30, alpha=0.6, label=label)
    ax.axvline(-9, color="k", lw=1)
    ax.axvline(-3, color="k", lw=1, ls=":")
    ax.set_xlabel(r"$\log_{10}$ max $||\psi_+|^2 - |\psi_-|^2|$")
    ax.set_ylabel("configurations")
    ax.legend()
    return [_save(fig, outdir / "deviations.png")]


def plot_spin(report: ExperimentReport, outdir: Path) -> list[Path]:
    t = report.table("thermal")
    fig, ax = plt.subplots()
    for col in ("z_field_residual", "magnetization_residual", "correlation_residual", "z_coupling_residual"):
        ax.semilogy(np.maximum(np.asarray(t.column(col), dtype=float), 1e-18), ".", label=col)
    ax.set_xlabel("(J, h, beta) cell")
    ax.set_ylabel("residual")
    ax.legend(fontsize=8)
    return [_save(fig, outdir / "thermal_residuals.png")]


def plot_spectrum(report: ExperimentReport, outdir: Path) -> list[Path]:
    t = report.table("spectrum")
    fig, ax = plt.subplots()
    ax.plot(t.column("n"), t.column("energy"), "o", ms=3, label="exact diagonalisation")
    ax.plot(t.column("n"), t.column("analytic"), "-", label=r"$2g\cos(n\pi/(L+1))$")
    ax.set_xlabel("n")
    ax.set_ylabel("E  [g]")
    ax.legend()
    return [_save(fig, outdir / "spectrum.png")]


PLOTTERS = {
    "electronium": plot_electronium,
    "sweep": plot_sweep,
    "scatter": plot_scatter,
    "verify": plot_verify,
    "spin": plot_spin,
    "spectrum": plot_spectrum,
}


def render(report: ExperimentReport, outdir) -> list[Path]:
    """Write the figures for ``report.kind`` next to its CSV files."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        return PLOTTERS[report.kind](report, outdir)

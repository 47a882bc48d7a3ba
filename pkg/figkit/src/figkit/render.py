"""Deterministic rendering of the five figure kinds."""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt   # noqa: E402
import numpy as np                # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .schemas import SchemaError, read_table  # noqa: E402

FIGURE_KINDS = ("weights_heatmap", "alignment_trace", "mean_rotation_scan",
                "dissociation_scan", "thermal_distribution")

# weights span decades; the log color scale needs a finite floor
DEFAULT_WEIGHT_FLOOR = 1.0e-6

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def render(request: dict) -> Path:
    """Render one figure request to its output path.

    request carries: kind, inputs (name -> path), output, options.
    Inputs are never mutated; identical inputs give identical bytes.
    """
    kind = request.get("kind")
    if kind not in FIGURE_KINDS:
        raise SchemaError(f"unknown figure kind {kind!r}; "
                          f"expected one of {FIGURE_KINDS}")
    inputs = request.get("inputs") or {}
    options = request.get("options") or {}
    output = request.get("output")
    if not output:
        raise SchemaError("figure request needs an output path")
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)

    fig = plt.figure(figsize=options.get("figsize", (6.0, 4.2)))
    try:
        _RENDERERS[kind](fig, inputs, options)
        fig.savefig(output, **_SAVE_KWARGS)
    finally:
        plt.close(fig)
    return output


def _require(inputs, name, kind):
    if name not in inputs:
        raise SchemaError(f"figure kind {kind!r} needs input {name!r}")
    return inputs[name]


def _apply_ranges(ax, options):
    if options.get("x_range"):
        ax.set_xlim(*options["x_range"])
    if options.get("y_range"):
        ax.set_ylim(*options["y_range"])


def _weights_heatmap(fig, inputs, options):
    data = read_table(_require(inputs, "projections", "weights_heatmap"),
                      "projections")
    times = data["t"]
    t_sel = options.get("time")
    t_plot = times.max() if t_sel is None else float(t_sel)
    mask = np.isclose(times, t_plot, rtol=0, atol=1e-9)
    if not mask.any():
        raise SchemaError(f"no projection rows at time {t_plot}")
    nu = data["nu"][mask].astype(int)
    n = data["N"][mask].astype(int)
    w = data["weight"][mask]

    grid = np.zeros((nu.max() + 1, n.max() + 1))
    grid[nu, n] = w
    floor = options.get("floor", DEFAULT_WEIGHT_FLOOR)
    ax = fig.add_subplot(111)
    masked = np.ma.masked_less(grid, floor)
    mesh = ax.pcolormesh(
        np.arange(grid.shape[1] + 1) - 0.5,
        np.arange(grid.shape[0] + 1) - 0.5,
        masked,
        norm=LogNorm(vmin=floor, vmax=max(grid.max(), floor * 10))
        if options.get("log_scale", True) else None,
        cmap=options.get("cmap", "viridis"),
    )
    fig.colorbar(mesh, ax=ax, label="weight")
    ax.set_xlabel("rotational quantum number N")
    ax.set_ylabel("vibrational quantum number nu")
    ax.set_title(options.get("title", f"state weights at t = {t_plot:g} ps"))
    _apply_ranges(ax, options)


def _alignment_trace(fig, inputs, options):
    ax = fig.add_subplot(111)
    series = read_table(_require(inputs, "series", "alignment_trace"),
                        "series")
    ax.plot(series["t"], series["cos2"], lw=0.9, color="#1b6b45",
            label="full model")
    if "post_series" in inputs:
        post = read_table(inputs["post_series"], "series")
        ax.plot(post["t"], post["cos2"], lw=0.9, color="#1b6b45")
    if "rotor_series" in inputs:
        rotor = read_table(inputs["rotor_series"], "rotor_series")
        ax.plot(rotor["t"], rotor["cos2"], lw=1.8, alpha=0.55,
                color="#d88bb0", label="rigid rotor")
    ax.axhline(1.0 / 3.0, color="0.6", lw=0.6, ls="--")
    ax.set_xlabel("t (ps)")
    ax.set_ylabel(r"$\langle \cos^2\theta \rangle$")
    ax.legend(loc="best", frameon=False)
    ax.set_title(options.get("title", "alignment"))
    _apply_ranges(ax, options)


def _scan_plot(fig, inputs, options, column, ylabel, kind):
    data = read_table(_require(inputs, "scan_summary", kind), "scan_summary")
    ax = fig.add_subplot(111)
    labels = sorted({(str(p), float(k))
                     for p, k in zip(data["pulse"], data["peak"])})
    for pulse_kind, peak in labels:
        mask = (data["pulse"] == pulse_kind) & (data["peak"] == peak)
        order = np.argsort(data["nu0"][mask])
        ax.plot(data["nu0"][mask][order], data[column][mask][order],
                marker="o", ms=3.5, lw=1.0,
                label=f"{pulse_kind} {peak:.3g} W/cm$^2$")
    if options.get("log_y"):
        ax.set_yscale("log")
    ax.set_xlabel(r"initial vibrational state $\nu_0$")
    ax.set_ylabel(ylabel)
    ax.legend(loc="best", frameon=False, fontsize=8)
    ax.set_title(options.get("title", ylabel))
    _apply_ranges(ax, options)


def _mean_rotation_scan(fig, inputs, options):
    _scan_plot(fig, inputs, options, "mean_rotation",
               r"$\langle N \rangle$", "mean_rotation_scan")


def _dissociation_scan(fig, inputs, options):
    _scan_plot(fig, inputs, options, "pdiss", r"$P^{D}$",
               "dissociation_scan")


def _thermal_distribution(fig, inputs, options):
    data = read_table(_require(inputs, "thermal", "thermal_distribution"),
                      "thermal")
    ax = fig.add_subplot(111)
    for temp in sorted(set(data["T"])):
        mask = data["T"] == temp
        order = np.argsort(data["N"][mask])
        ax.plot(data["N"][mask][order], data["weight"][mask][order],
                marker="s", ms=3.0, lw=1.0, label=f"T = {temp:g} K")
    ax.set_xlabel("rotational quantum number N")
    ax.set_ylabel("thermal-averaged weight")
    ax.legend(loc="best", frameon=False)
    ax.set_title(options.get("title", "thermal rotational distribution"))
    _apply_ranges(ax, options)


_RENDERERS = {
    "weights_heatmap": _weights_heatmap,
    "alignment_trace": _alignment_trace,
    "mean_rotation_scan": _mean_rotation_scan,
    "dissociation_scan": _dissociation_scan,
    "thermal_distribution": _thermal_distribution,
}

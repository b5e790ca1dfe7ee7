"""SVG figures for fit, sweep, regression and T1 reports.

Figures are built on bare ``Figure`` objects (no pyplot state) and saved with
a fixed hash salt and no date stamp, so identical inputs give identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .errors import BridgeLossError

STYLE = {
    "svg.hashsalt": "bridgeloss",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "lines.markersize": 3.5,
}

DATA_KW = dict(marker="o", linestyle="none", color="0.35", mfc="none")
MODEL_KW = dict(color="C3")


def _new_figure(nrows=1, ncols=1, size=(5.0, 3.6), **kw):
    fig = Figure(figsize=size, layout="constrained")
    FigureCanvasSVG(fig)
    axes = fig.subplots(nrows, ncols, **kw)
    return fig, axes


def save_svg(fig: Figure, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with matplotlib.rc_context(STYLE):
            fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise BridgeLossError(f"cannot write figure {path}: {exc}") from exc
    return path


def plot_fit(trace, fit, path) -> Path:
    """|S21| and phase of the normalized data with the fitted resonance."""
    with matplotlib.rc_context(STYLE):
        fig, (ax_mag, ax_ph) = _new_figure(2, 1, size=(5.0, 5.0), sharex=True)
        f = trace.frequencies
        zn = fit.normalize(f, trace.s21)
        fine = np.linspace(f[0], f[-1], 2001)
        model = fit.resonance(fine)
        x, xf = (f - fit.f0) / 1e3, (fine - fit.f0) / 1e3
        ax_mag.plot(x, np.abs(zn), label="data", **DATA_KW)
        ax_mag.plot(xf, np.abs(model), label="fit", **MODEL_KW)
        ax_mag.set_ylabel("|S21| (normalized)")
        ax_mag.legend(loc="lower right", frameon=False)
        ax_mag.set_title(f"f0 = {fit.f0 / 1e9:.6f} GHz, Qi = {fit.qi:.3g}, Qc = {fit.qc:.3g}")
        ax_ph.plot(x, np.angle(zn), **DATA_KW)
        ax_ph.plot(xf, np.angle(model), **MODEL_KW)
        ax_ph.set_ylabel("phase (rad)")
        ax_ph.set_xlabel("f - f0 (kHz)")
    return save_svg(fig, path)


def plot_sweep(sweep, tls, path) -> Path:
    with matplotlib.rc_context(STYLE):
        fig, ax = _new_figure()
        n = sweep.photon_numbers
        if sweep.qi_err is not None:
            ax.errorbar(n, sweep.qi, yerr=sweep.qi_err, capsize=2, **DATA_KW)
        else:
            ax.plot(n, sweep.qi, **DATA_KW)
        if tls is not None:
            nf = np.logspace(np.log10(n[0]), np.log10(n[-1]), 400)
            ax.plot(nf, 1.0 / tls.loss(nf), label="TLS model", **MODEL_KW)
            ax.legend(frameon=False)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("mean photon number")
        ax.set_ylabel("Qi")
    return save_svg(fig, path)


def plot_regression(datasets, results, path, xlabel="bridge count") -> Path:
    """Loss vs bridge count with straight-line fits, one series per dataset."""
    with matplotlib.rc_context(STYLE):
        fig, ax = _new_figure()
        for i, (ds, res) in enumerate(zip(datasets, results)):
            color = f"C{i}"
            x = ds.bridge_counts
            if ds.loss_errs is not None:
                ax.errorbar(x, ds.losses, yerr=ds.loss_errs, fmt="o", color=color, mfc="none",
                            capsize=2, label=f"{ds.power_label} power")
            else:
                ax.plot(x, ds.losses, "o", color=color, mfc="none", label=f"{ds.power_label} power")
            xf = np.linspace(0, max(x.max(), 1), 100)
            ax.plot(xf, res.predict(xf), "-", color=color,
                    label=f"{res.slope:.3g} per bridge")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("loss 1/Qi")
        ax.legend(frameon=False)
    return save_svg(fig, path)


def plot_t1(frequencies, curves: dict, path, measured=None) -> Path:
    """T1 (us) vs frequency (GHz) for several model curves."""
    with matplotlib.rc_context(STYLE):
        fig, ax = _new_figure()
        fg = np.asarray(frequencies) / 1e9
        for i, (label, t1) in enumerate(curves.items()):
            ax.plot(fg, np.asarray(t1) * 1e6, color=f"C{i}", label=label)
        if measured is not None:
            ax.plot(measured.frequencies / 1e9, measured.t1 * 1e6, label="measured", **DATA_KW)
        ax.set_yscale("log")
        ax.set_xlabel("qubit frequency (GHz)")
        ax.set_ylabel("T1 (us)")
        ax.legend(frameon=False)
    return save_svg(fig, path)


def plot_position_weights(positions, weights, path) -> Path:
    with matplotlib.rc_context(STYLE):
        fig, ax = _new_figure(size=(5.0, 3.0))
        x = np.linspace(0, 1, 201)
        ax.plot(x, np.cos(0.5 * np.pi * x) ** 2, color="0.5", label="cos^2 voltage profile")
        ax.plot(positions, weights, "o", color="C0", label="bridges")
        ax.set_xlabel("position x/L from open end")
        ax.set_ylabel("relative loss weight")
        ax.legend(frameon=False)
    return save_svg(fig, path)

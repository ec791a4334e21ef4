"""Report figures (Agg backend, deterministic PNG output)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .fields import ComplexField2D, FrequencyGrid, JspMap  # noqa: E402
from .units import GHZ  # noqa: E402

STYLE = {
    "font.size": 8,
    "axes.labelsize": 8,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "lines.linewidth": 1.0,
    "image.origin": "lower",
    "svg.hashsalt": "qspet",
}
DPI = 120
PHASE_CMAP = "twilight"
INTENSITY_CMAP = "magma"


def _extent(g: FrequencyGrid):
    s, i = g.detuning_signal / GHZ, g.detuning_idler / GHZ
    return [s[0], s[-1], i[0], i[-1]]


def _show(ax, g, values, title, cmap=INTENSITY_CMAP, vmin=None, vmax=None):
    im = ax.imshow(np.asarray(values, float).T, extent=_extent(g), cmap=cmap, vmin=vmin, vmax=vmax, aspect="auto")
    ax.set_title(title)
    ax.set_xlabel(r"$\Delta\nu_s$ (GHz)")
    ax.set_ylabel(r"$\Delta\nu_i$ (GHz)")
    return im


def _phase(ax, m: JspMap, title):
    vals = np.where(m.valid, m.phase, np.nan)
    return _show(ax, m.grid, vals, title, PHASE_CMAP, -np.pi, np.pi)


def save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    plt.close(fig)
    return path


def pipeline_figure(phi_r: ComplexField2D, interferograms: Sequence, truth: JspMap, recovered: JspMap, path) -> Path:
    """JSI, true JSP, the four interferograms and the recovered JSP."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 4, figsize=(11, 5.2), constrained_layout=True)
        _show(axes[0, 0], phi_r.grid, np.abs(phi_r.values) ** 2, "ring JSI")
        _phase(axes[0, 1], truth, "ring JSP (model)")
        im = _phase(axes[0, 2], recovered, "ring JSP (recovered)")
        axes[0, 3].axis("off")
        fig.colorbar(im, cax=axes[0, 3].inset_axes([0.0, 0.05, 0.07, 0.9]), label="phase (rad)")
        for ax, ifg in zip(axes[1], interferograms):
            _show(ax, ifg.grid, ifg.values, rf"$\theta$ = {ifg.theta / np.pi:.2f}$\pi$", "viridis")
        return save(fig, path)


def jsp_comparison_figure(maps: Mapping[str, JspMap], path) -> Path:
    """Side-by-side phase maps, e.g. spontaneous vs stimulated."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(maps), figsize=(3.3 * len(maps), 3.0), constrained_layout=True, squeeze=False)
        im = None
        for ax, (name, m) in zip(axes[0], maps.items()):
            im = _phase(ax, m, name)
        fig.colorbar(im, ax=axes[0].tolist(), label="phase (rad)")
        return save(fig, path)


def ring_sweep_figure(spectra: Sequence, fits: Sequence, path) -> Path:
    """Lineshapes across a coupler sweep with extinction ratio and FWHM trends."""
    with plt.rc_context(STYLE):
        fig, (a0, a1) = plt.subplots(1, 2, figsize=(8, 3.0), constrained_layout=True)
        cmap = plt.get_cmap("viridis")
        for k, ((nu, T), f) in enumerate(zip(spectra, fits)):
            a0.plot((nu - f.center) / GHZ, T, color=cmap(k / max(len(fits) - 1, 1)), label=f"t={f.t:.3f} ({f.regime})")
        a0.set_xlabel("detuning (GHz)")
        a0.set_ylabel("transmission")
        a0.legend(ncol=2, fontsize=5)
        t = [f.t for f in fits]
        a1.plot(t, [f.extinction_ratio_db for f in fits], "o-", label="ER (dB)")
        a1.set_xlabel("self-coupling t")
        a1.set_ylabel("extinction ratio (dB)")
        a2 = a1.twinx()
        a2.plot(t, [f.fwhm / GHZ for f in fits], "s--", color="C1", label="FWHM")
        a2.set_ylabel("FWHM (GHz)")
        a1.axvline(fits[0].a, color="0.6", lw=0.8)
        return save(fig, path)


def fringe_figure(theta, curves: Mapping[str, np.ndarray], path) -> Path:
    """Fringes versus the relative phase, normalised to their maxima."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.0), constrained_layout=True)
        for name, y in curves.items():
            y = np.asarray(y, float)
            ax.plot(np.asarray(theta) / np.pi, y / y.max(), label=name)
        ax.set_xlabel(r"$\theta/\pi$")
        ax.set_ylabel("normalised signal")
        ax.legend()
        return save(fig, path)


def loss_figure(lossless: JspMap, lossy: Mapping[str, JspMap], path) -> Path:
    """Recovered phase without loss, and deviation maps with loss."""
    with plt.rc_context(STYLE):
        n = len(lossy) + 1
        fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.0), constrained_layout=True)
        _phase(axes[0], lossless, "lossless")
        for ax, (name, m) in zip(axes[1:], lossy.items()):
            d = np.angle(np.exp(1j * (m.phase - lossless.phase)))
            d = np.where(m.valid & lossless.valid, d, np.nan)
            im = _show(ax, m.grid, d, f"{name}: deviation", "coolwarm", -1e-9, 1e-9)
        fig.colorbar(im, ax=axes[1:].tolist(), label="phase deviation (rad)")
        return save(fig, path)

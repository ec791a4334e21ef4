"""Command-line front end: ``qspet simulate | extract | compare | ring | demo``.

Every command writes plain files (CSV + JSON sidecars, optional PGM
heatmaps and PNG figures) and prints one ``key,value`` line per headline
number. Outputs depend only on the config and seed, never on the clock.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fieldio, plotting
from .config import ConfigError, RunConfig, default_config, load_config
from .fields import JspMap, jsp, normalize
from .interferometry import (
    SourceAmplitudes,
    amplitude_ratio_for_visibility,
    fit_fringe,
    pixel_fringe,
)
from .loss import split_jsa_phantom, synthesize_lossy_run
from .noise import measure_run
from .ring import LineshapeFitError, fit_lineshape, quality_factor, regime_sweep, synthetic_spectrum
from .sources import jsa_spontaneous_ring, jsa_stimulated_ring, jsa_waveguide
from .tomography import TomographyRun, compare_jsp, extract_jsp, remove_offset, synthesize_run
from .units import GHZ, wavelength_nm_to_hz

QUARTETS = ("clean", "noisy", "smoothed")


class _Writer:
    """Collects output files and honours the csv/pgm/both format switch."""

    def __init__(self, out: Path, fmt: str):
        self.out = Path(out)
        self.fmt = fmt
        self.files: list[Path] = []
        self.out.mkdir(parents=True, exist_ok=True)

    def field(self, obj, name: str, **extra):
        if self.fmt in ("csv", "both"):
            self.files.extend(fieldio.save_field(obj, self.out, name, **extra))
        if self.fmt in ("pgm", "both"):
            self.files.append(fieldio.save_heatmap(obj, self.out, name))

    def json(self, name: str, data: dict):
        path = self.out / f"{name}.json"
        fieldio.write_json(path, data)
        self.files.append(path)
        return path

    def text(self, name: str, text: str):
        path = self.out / name
        path.write_text(text)
        self.files.append(path)
        return path

    def table(self, name: str, header: Sequence[str], rows):
        path = self.out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        self.files.append(path)
        return path

    def figure(self, path: Path):
        self.files.append(Path(path))

    def index(self):
        """Write ``files.json`` listing every file in the output directory."""
        names = sorted(p.name for p in self.out.iterdir() if p.is_file() and p.name != "files.json")
        path = self.out / "files.json"
        fieldio.write_json(path, {"files": names})
        return path


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def _report(key: str, value) -> None:
    print(f"{key},{_fmt(value)}")


def _sources(cfg: RunConfig, threads: Optional[int]):
    r, p, g = cfg.ring_params(), cfg.pump(), cfg.frequency_grid()
    if cfg.interference.mode == "stimulated":
        phi_r = normalize(jsa_stimulated_ring(r, p, g, threads=threads))
    else:
        phi_r = normalize(jsa_spontaneous_ring(r, p, g, threads=threads))
    phi_w = normalize(jsa_waveguide(cfg.waveguide(), p, g, threads=threads))
    return phi_r, phi_w


def _truth(phi_r, mode: str) -> JspMap:
    return jsp(phi_r, provenance=mode)


def simulate(cfg: RunConfig, out: Path, threads: Optional[int] = None, figures: bool = True) -> _Writer:
    """Source JSAs, the clean/noisy/smoothed interferogram quartets and a loss report."""
    wr = _Writer(out, cfg.output.format)
    it, mode = cfg.interference, cfg.interference.mode
    phi_r, phi_w = _sources(cfg, threads)
    wr.text("config.ini", cfg.with_output(".").to_ini())
    wr.field(phi_r, "phi_r")
    wr.field(phi_w, "phi_w")
    truth = _truth(phi_r, mode)
    wr.field(truth, "jsp_true")

    es, ei = cfg.escape_efficiencies()
    lossy = split_jsa_phantom(phi_r, escape_s=es, escape_i=ei)
    if mode == "spontaneous":
        run = synthesize_lossy_run(lossy, phi_w, it.eta, it.brightness_ratio)
    else:
        run = synthesize_run(lossy.rr, phi_w, it.eta, mode, it.brightness_ratio)
    lossless = synthesize_run(phi_r, phi_w, it.eta, mode, it.brightness_ratio)
    a, b = extract_jsp(run, it.validity_floor), extract_jsp(lossless, it.validity_floor)
    sel = a.valid & b.valid
    dev = float(np.max(np.abs(np.angle(np.exp(1j * (a.phase - b.phase)))[sel]))) if sel.any() else float("nan")
    wr.json("loss_report", {
        "escape_signal": es,
        "escape_idler": ei,
        "component_norms": lossy.component_norms(),
        "max_jsp_deviation_rad": dev,
    })

    for k, ifg in enumerate(run.interferograms):
        wr.field(ifg, f"clean_{k}", mode=mode)
    measured = None
    if cfg.noise.pairs_per_setting > 0:
        n = cfg.noise
        measured = measure_run(run, cfg.noise_config(), cfg.filters(), n.sigma_pixels, n.window)
        for k in range(4):
            wr.field(measured.counts[k], f"counts_{k}", mode=mode)
            wr.field(measured.noisy.interferograms[k], f"noisy_{k}", mode=mode)
            wr.field(measured.smoothed.interferograms[k], f"smoothed_{k}", mode=mode)

    if figures and cfg.output.figures:
        rec = extract_jsp(measured.smoothed if measured else run, it.validity_floor)
        shown = measured.smoothed.interferograms if measured else run.interferograms
        wr.figure(plotting.pipeline_figure(phi_r, shown, truth, remove_offset(rec), wr.out / "pipeline.png"))
    _report("simulate.mode", mode)
    _report("simulate.loss_max_jsp_deviation_rad", dev)
    return wr


def _load_quartet(run_dir: Path, prefix: str) -> TomographyRun:
    items = [fieldio.load_field(run_dir / f"{prefix}_{k}.json") for k in range(4)]
    m = fieldio.read_manifest(run_dir / f"{prefix}_0.json")
    ifgs = [i.as_interferogram() if hasattr(i, "as_interferogram") else i for i in items]
    return TomographyRun.from_interferograms(ifgs, m.get("mode", "spontaneous"))


def extract(run_dir: Path, out: Path, quartet: Optional[str] = None, fmt: str = "both", floor: float = 1e-4) -> _Writer:
    """Recover the JSP from a quartet and score it against ``jsp_true`` when present."""
    run_dir = Path(run_dir)
    if quartet is None:
        quartet = "smoothed" if (run_dir / "smoothed_0.json").exists() else "clean"
    if not (run_dir / f"{quartet}_0.json").exists():
        raise FileNotFoundError(f"{run_dir}: no '{quartet}' interferogram quartet ({quartet}_0.json ... {quartet}_3.json)")
    run = _load_quartet(run_dir, quartet)
    m = extract_jsp(run, floor)
    wr = _Writer(out, fmt)
    wr.field(m, f"jsp_{quartet}")
    metrics = {"quartet": quartet, "mode": run.mode, "offset_rad": m.offset, "valid_fraction": float(m.valid.mean())}
    truth_path = run_dir / "jsp_true.json"
    if truth_path.exists():
        truth = fieldio.load_field(truth_path)
        cmp = compare_jsp(truth, remove_offset(m))
        metrics["comparison"] = cmp.to_dict()
        for lv in cmp.levels:
            _report(f"extract.rms_rad@{lv.level:g}", lv.rms)
    wr.json(f"metrics_{quartet}", metrics)
    return wr


def compare(path_a: Path, path_b: Path, out: Path) -> dict:
    a, b = fieldio.load_field(path_a), fieldio.load_field(path_b)
    for name, x in (("first", a), ("second", b)):
        if not isinstance(x, JspMap):
            raise ValueError(f"{name} input is not a JSP map")
    report = compare_jsp(remove_offset(a), remove_offset(b)).to_dict()
    report.update(a=Path(path_a).name, b=Path(path_b).name)
    Path(out).mkdir(parents=True, exist_ok=True)
    fieldio.write_json(Path(out) / "comparison.json", report)
    for lv in report["levels"]:
        _report(f"compare.rms_rad@{lv['level']:g}", lv["rms_rad"])
    return report


_FIT_HEADER = ("center_hz", "fwhm_hz", "q_factor", "extinction_ratio_db", "regime", "t", "a", "residual_rms")


def _fit_row(f):
    return (f.center, f.fwhm, f.q_factor, f.extinction_ratio_db, f.regime, f.t, f.a, f.residual_rms)


def read_spectrum(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV of (wavelength_nm, transmission) with one header row.

    A first header column named ``nu_hz`` marks frequencies in Hz instead.
    Returns frequency [Hz] and transmission.
    """
    with open(path) as fh:
        first = fh.readline().strip().split(",")[0].strip().lower()
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 2:
        raise ValueError(f"{path}: need two columns (wavelength_nm, transmission)")
    x = data[:, 0] if first == "nu_hz" else wavelength_nm_to_hz(data[:, 0])
    return x, data[:, 1]


def ring(cfg: RunConfig, out: Path, spectra: Sequence[Path] = (), figures: bool = True) -> _Writer:
    """Fit measured spectra, or synthesise and fit the configured coupler sweep."""
    wr = _Writer(out, cfg.output.format)
    fsr, center = cfg.fsr(), cfg.nu_p
    if spectra:
        fits = []
        for p in spectra:
            nu, T = read_spectrum(p)
            fits.append(fit_lineshape(nu, T, fsr, a_known=cfg.round_trip()))
        shapes = [read_spectrum(p) for p in spectra]
    else:
        settings = cfg.sweep_settings()
        r = cfg.ring
        shapes = [synthetic_spectrum(c, fsr, center, r.spectrum_points, r.span_fwhm) for c in settings]
        fits = regime_sweep(settings, fsr, center, r.spectrum_points, r.span_fwhm)
    wr.table("ring_fits", _FIT_HEADER, [_fit_row(f) for f in fits])
    wr.json("ring_summary", {
        "fsr_hz": fsr,
        "round_trip_amplitude": cfg.round_trip(),
        "q_from_linewidth": quality_factor(center, cfg.device.linewidth_ghz * GHZ),
        "n_fits": len(fits),
    })
    if figures and cfg.output.figures:
        wr.figure(plotting.ring_sweep_figure(shapes, fits, wr.out / "ring_sweep.png"))
    best = max(fits, key=lambda f: f.extinction_ratio_db)
    _report("ring.max_er_db", best.extinction_ratio_db)
    _report("ring.max_er_t", best.t)
    return wr


def _fringes(cfg: RunConfig, threads, wr: _Writer, figures: bool):
    """Single-pixel fringes: coincidence vs classical vs seeded interference."""
    r, p, g = cfg.ring_params(), cfg.pump(), cfg.frequency_grid()
    phi_r = normalize(jsa_spontaneous_ring(r, p, g, threads=threads))
    phi_st = normalize(jsa_stimulated_ring(r, p, g, threads=threads))
    phi_w = normalize(jsa_waveguide(cfg.waveguide(), p, g, threads=threads))
    idx = np.unravel_index(int(np.argmax(np.abs(phi_r.values))), g.shape)
    # amplitudes chosen so the biphoton fringe has the target visibility
    ratio = amplitude_ratio_for_visibility(0.88) * abs(phi_r.values[idx]) / abs(phi_w.values[idx])
    n_r = 1 / math.hypot(1, ratio)
    w88 = SourceAmplitudes(complex(n_r), complex(ratio * n_r))
    theta = np.linspace(0, 4 * np.pi, 401)
    curves = {
        "coincidence": pixel_fringe(phi_r, phi_w, w88, idx, theta, "coincidence"),
        "classical": pixel_fringe(phi_r, phi_w, w88, idx, theta, "classical"),
        "seeded": pixel_fringe(phi_st, phi_w, w88, idx, theta, "set"),
    }
    wr.table("fringes", ("theta_rad", *curves), zip(theta, *curves.values()))
    fits = {k: fit_fringe(theta, v) for k, v in curves.items()}
    wr.json("fringe_fits", {
        k: {"period_rad": f.period, "visibility": f.visibility, "phase_rad": f.phase} for k, f in fits.items()
    })
    if figures:
        wr.figure(plotting.fringe_figure(theta, curves, wr.out / "fringes.png"))
    for k, f in fits.items():
        _report(f"fringe.{k}.period_over_pi", f.period / np.pi)
    _report("fringe.coincidence.visibility", fits["coincidence"].visibility)


def _loss_study(cfg: RunConfig, phi_r, phi_w, wr: _Writer, figures: bool):
    it = cfg.interference
    base = extract_jsp(synthesize_run(phi_r, phi_w, it.eta, "spontaneous", it.brightness_ratio), it.validity_floor)
    maps, rows = {}, []
    for e in (0.9, 0.5, 0.1):
        lossy = split_jsa_phantom(phi_r, escape_s=e, escape_i=e)
        m = extract_jsp(synthesize_lossy_run(lossy, phi_w, it.eta, it.brightness_ratio), it.validity_floor)
        sel = m.valid & base.valid
        dev = float(np.max(np.abs(np.angle(np.exp(1j * (m.phase - base.phase)))[sel])))
        maps[f"escape {e:g}"] = m
        rows.append((e, e, lossy.component_norms()["rr"], dev))
    wr.table("loss_study", ("escape_signal", "escape_idler", "rr_norm", "max_jsp_deviation_rad"), rows)
    if figures:
        wr.figure(plotting.loss_figure(base, maps, wr.out / "loss.png"))
    _report("loss.max_jsp_deviation_rad", max(r[3] for r in rows))


def demo(cfg: RunConfig, out: Path, threads: Optional[int] = None, figures: bool = True) -> _Writer:
    """Full artifact set from the device defaults."""
    out = Path(out)
    figures = figures and cfg.output.figures
    spont = replace(cfg, interference=replace(cfg.interference, mode="spontaneous"))
    stim = replace(cfg, interference=replace(cfg.interference, mode="stimulated"))
    wr_sp = simulate(spont, out / "spontaneous", threads, figures)
    wr_st = simulate(stim, out / "stimulated", threads, figures)
    ex = [
        extract(out / "spontaneous", out / "spontaneous", q, cfg.output.format, cfg.interference.validity_floor)
        for q in ("clean", "smoothed")
    ]
    ex += [
        extract(out / "stimulated", out / "stimulated", q, cfg.output.format, cfg.interference.validity_floor)
        for q in ("clean", "smoothed")
    ]

    wr = _Writer(out, cfg.output.format)
    wr.text("config.ini", cfg.with_output(".").to_ini())
    phi_sp, phi_w = _sources(spont, threads)
    phi_st, _ = _sources(stim, threads)
    t_sp, t_st = jsp(phi_sp, provenance="spontaneous"), jsp(phi_st, provenance="stimulated")
    diff = replace(t_st, phase=np.angle(np.exp(1j * (t_st.phase - t_sp.phase))), provenance="reference")
    wr.field(diff, "jsp_stimulated_minus_spontaneous")
    jsi_gap = float(np.max(np.abs(np.abs(phi_sp.values) ** 2 - np.abs(phi_st.values) ** 2)) / np.max(np.abs(phi_sp.values) ** 2))
    wr.json("spontaneous_vs_stimulated", {"max_relative_jsi_difference": jsi_gap, **compare_jsp(t_sp, t_st).to_dict()})
    if figures:
        wr.figure(plotting.jsp_comparison_figure(
            {"spontaneous": t_sp, "stimulated": t_st, "difference": diff}, out / "spontaneous_vs_stimulated.png"
        ))
    _report("demo.max_relative_jsi_difference", jsi_gap)
    _fringes(cfg, threads, wr, figures)
    _loss_study(spont, phi_sp, phi_w, wr, figures)
    ring_wr = ring(cfg, out / "ring", figures=figures)
    for w in (wr_sp, wr_st, *ex, ring_wr):
        w.index()
    wr.index()
    return wr


def _config_from(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg.with_output(args.out, args.format)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qspet", description="Quantum-referenced spectral phase tomography simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration (defaults if omitted)")
    common.add_argument("--out", type=Path, help="output directory (overrides [output] directory)")
    common.add_argument("--seed", type=int, help="noise seed (overrides [noise] seed)")
    common.add_argument("--threads", type=int, default=None, help="worker threads for grid evaluation")
    common.add_argument("--format", choices=("csv", "pgm", "both"), default=None)
    common.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="write JSAs and interferogram quartets")
    p = sub.add_parser("extract", parents=[common], help="recover the JSP from a quartet")
    p.add_argument("run_dir", type=Path)
    p.add_argument("--quartet", choices=QUARTETS, default=None)
    p = sub.add_parser("compare", parents=[common], help="compare two JSP maps")
    p.add_argument("map_a", type=Path)
    p.add_argument("map_b", type=Path)
    p = sub.add_parser("ring", parents=[common], help="fit ring lineshapes")
    p.add_argument("--spectrum", type=Path, action="append", default=[], help="CSV of wavelength_nm,transmission (repeatable)")
    sub.add_parser("demo", parents=[common], help="full artifact set from device defaults")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from(args)
        out = Path(cfg.output.directory)
        figs = not args.no_figures
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "simulate":
            simulate(cfg, out, args.threads, figs).index()
        elif args.command == "extract":
            extract(args.run_dir, args.out or args.run_dir, args.quartet, cfg.output.format, cfg.interference.validity_floor)
        elif args.command == "compare":
            compare(args.map_a, args.map_b, args.out or Path("."))
        elif args.command == "ring":
            ring(cfg, out, args.spectrum, figs).index()
        elif args.command == "demo":
            demo(cfg, out, args.threads, figs)
    except (ConfigError, ValueError, LineshapeFitError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"qspet {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
